#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::Exp1;
use simplex_infogeo::aggregation::PartSubset;
use simplex_infogeo::duality::ThetaCoords;
use simplex_infogeo::{Composition, ContrastMatrix};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Uniform on the simplex: i.i.d. unit exponentials, closed.
pub fn composition(rng: &mut impl Rng, dim: usize) -> Composition {
    let parts: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1).max(1e-300)).collect();
    Composition::new(parts).unwrap().closed()
}

pub fn theta(rng: &mut impl Rng, len: usize, bound: f64) -> ThetaCoords {
    ThetaCoords::new((0..len).map(|_| rng.random_range(-bound..=bound)).collect()).unwrap()
}

/// A random sequential binary partition of `dim` parts.
pub fn sbp(rng: &mut impl Rng, dim: usize) -> Vec<Vec<i8>> {
    let mut all: Vec<usize> = (0..dim).collect();
    all.shuffle(rng);
    let mut queue = std::collections::VecDeque::from([all]);
    let mut rows = Vec::with_capacity(dim - 1);
    while let Some(group) = queue.pop_front() {
        if group.len() < 2 {
            continue;
        }
        let k = rng.random_range(1..group.len());
        let (plus, minus) = group.split_at(k);
        let mut row = vec![0i8; dim];
        plus.iter().for_each(|&i| row[i] = 1);
        minus.iter().for_each(|&i| row[i] = -1);
        rows.push(row);
        queue.push_back(plus.to_vec());
        queue.push_back(minus.to_vec());
    }
    rows
}

pub fn contrasts(rng: &mut impl Rng, dim: usize) -> [ContrastMatrix; 3] {
    [
        ContrastMatrix::helmert(dim).unwrap(),
        ContrastMatrix::pivot(dim).unwrap(),
        ContrastMatrix::from_sbp(&sbp(rng, dim)).unwrap(),
    ]
}

/// A proper nonempty subset of `{0, …, dim−1}` of random size.
pub fn subset(rng: &mut impl Rng, dim: usize) -> PartSubset {
    let a = rng.random_range(1..dim);
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.shuffle(rng);
    PartSubset::new(&idx[..a], dim).unwrap()
}

/// Central-difference Hessian with per-coordinate steps.
pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, at: &[f64], steps: &[f64]) -> Vec<Vec<f64>> {
    let n = at.len();
    let eval = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut p = at.to_vec();
        p[di] += si;
        p[dj] += sj;
        f(&p)
    };
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (hi, hj) = (steps[i], steps[j]);
            h[i][j] = if i == j {
                let mut up = at.to_vec();
                up[i] += hi;
                let mut down = at.to_vec();
                down[i] -= hi;
                (f(&up) - 2.0 * f(at) + f(&down)) / (hi * hi)
            } else {
                (eval(i, hi, j, hj) - eval(i, hi, j, -hj) - eval(i, -hi, j, hj) + eval(i, -hi, j, -hj))
                    / (4.0 * hi * hj)
            };
        }
    }
    h
}

/// Central-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    (0..at.len())
        .map(|i| {
            let mut up = at.to_vec();
            up[i] += h;
            let mut down = at.to_vec();
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
