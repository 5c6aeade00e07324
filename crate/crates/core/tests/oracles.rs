//! Analytic derivatives checked against finite differences.

#![allow(clippy::needless_range_loop)]

mod common;

use common::{composition, fd_gradient, fd_hessian, rng, theta};
use nalgebra::DMatrix;
use rand::Rng;
use simplex_infogeo::divergence::{bregman, kl, ConvexPotential, PotentialCoords};
use simplex_infogeo::duality::{self, EtaCoords, ExponentialFamily, ThetaCoords};
use simplex_infogeo::geometry::{exp_map, fisher_inner, Geodesic, TangentAtPoint};
use simplex_infogeo::simplex::{alr, clr, Tangent};
use simplex_infogeo::Composition;

#[test]
fn gradient_of_psi_is_eta() {
    let mut r = rng(11);
    for _ in 0..50 {
        let d = r.random_range(2..=10);
        let th = theta(&mut r, d - 1, 5.0);
        let fd = fd_gradient(|t| duality::psi(&ThetaCoords::new(t.to_vec()).unwrap()), th.as_slice(), 1e-5);
        let eta = duality::eta_from_theta(&th);
        for (a, b) in fd.iter().zip(eta.as_slice()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn gradient_of_phi_is_theta() {
    let mut r = rng(12);
    for _ in 0..50 {
        let d = r.random_range(2..=10);
        let x = composition(&mut r, d);
        let eta = EtaCoords::from_composition(&x);
        let h = 1e-4 * x.parts().iter().cloned().fold(f64::INFINITY, f64::min);
        let fd = fd_gradient(|e| duality::phi(&EtaCoords::new(e.to_vec()).unwrap()), eta.as_slice(), h);
        let th = duality::theta_from_eta(&eta);
        for (a, b) in fd.iter().zip(th.as_slice()) {
            assert!((a - b).abs() < 1e-6 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn general_family_fisher_is_hessian_of_its_psi() {
    let mut r = rng(13);
    for _ in 0..30 {
        let dim = r.random_range(3..=8);
        let k = r.random_range(1..dim);
        let base = composition(&mut r, dim);
        let features = DMatrix::from_fn(dim, k, |_, _| r.random_range(-2.0..2.0));
        let th = theta(&mut r, k, 1.5);
        let fam = ExponentialFamily::new(base, features, th.clone()).unwrap();
        let psi = |t: &[f64]| fam.with_theta(ThetaCoords::new(t.to_vec()).unwrap()).unwrap().psi();
        let fd = fd_hessian(psi, th.as_slice(), &vec![1e-3; k]);
        let g = duality::expfam_fisher(&fam);
        for i in 0..k {
            for j in 0..k {
                assert!((fd[i][j] - g.g[(i, j)]).abs() < 1e-5, "{} vs {}", fd[i][j], g.g[(i, j)]);
            }
        }
        assert!(g.asymmetry() == 0.0);
    }
}

#[test]
fn simplex_family_matches_alr_inverse() {
    let mut r = rng(14);
    for _ in 0..30 {
        let d = r.random_range(2..=10);
        let th = theta(&mut r, d - 1, 4.0);
        let fam = ExponentialFamily::simplex(th.clone()).unwrap();
        let p = duality::expfam_eval(&fam);
        assert!(p.approx_eq(&simplex_infogeo::simplex::alr_inv(&th), 1e-14));
        assert!((fam.psi() - (duality::psi(&th) - (d as f64).ln())).abs() < 1e-12);
        let (g1, g2) = (duality::expfam_fisher(&fam).g, duality::fisher_theta(&th).g);
        assert!((g1 - g2).abs().max() < 1e-14);
    }
}

#[test]
fn bregman_with_numerical_gradient_matches_analytic() {
    let mut r = rng(15);
    let numeric =
        ConvexPotential::new(PotentialCoords::Theta, |t| duality::psi(&ThetaCoords::new(t.to_vec()).unwrap()));
    let analytic = ConvexPotential::log_normalizer();
    for _ in 0..50 {
        let d = r.random_range(2..=8);
        let (x, y) = (composition(&mut r, d), composition(&mut r, d));
        let a = bregman(&analytic, &x, &y).unwrap().value;
        let n = bregman(&numeric, &x, &y).unwrap().value;
        assert!((a - n).abs() < 1e-6 * a.max(1.0), "{a} vs {n}");
        assert!((a - kl(&y, &x).unwrap().value).abs() < 1e-12);
    }
}

fn theta_of(x: &Composition) -> Vec<f64> {
    alr(x).into_vec()
}

#[test]
fn geodesic_velocity_matches_finite_difference() {
    let mut r = rng(16);
    for _ in 0..40 {
        let d = r.random_range(2..=8);
        let (a, b) = (composition(&mut r, d), composition(&mut r, d));
        let t = r.random_range(0.1..0.9);
        for g in [Geodesic::e(&a, &b).unwrap(), Geodesic::m(&a, &b).unwrap()] {
            let h = 1e-6;
            let (up, down) = (theta_of(&g.eval(t + h).unwrap()), theta_of(&g.eval(t - h).unwrap()));
            let v = g.velocity(t).unwrap();
            for ((u, w), got) in up.iter().zip(&down).zip(&v.direction) {
                let fd = (u - w) / (2.0 * h);
                assert!((fd - got).abs() < 1e-6 * fd.abs().max(1.0), "{fd} vs {got}");
            }
        }
    }
}

#[test]
fn exp_map_tangent_matches_clr_conversion() {
    let mut r = rng(17);
    for _ in 0..40 {
        let d = r.random_range(2..=8);
        let x = composition(&mut r, d);
        let v = Tangent::project((0..d).map(|_| r.random_range(-1.0..1.0)).collect());
        let h = 1e-6;
        let step =
            |s: f64| theta_of(&exp_map(&x, &Tangent::project(v.coords().iter().map(|c| c * s).collect())).unwrap());
        let (up, down) = (step(h), step(-h));
        let tan = TangentAtPoint::from_clr(&x, &v).unwrap();
        for ((u, w), got) in up.iter().zip(&down).zip(&tan.direction) {
            assert!(((u - w) / (2.0 * h) - got).abs() < 1e-7);
        }
        // the Fisher norm of a clr direction is positive unless it is zero
        assert!(fisher_inner(&tan, &tan).unwrap() > 0.0);
        assert!(clr(&x).coords().iter().sum::<f64>().abs() < 1e-12);
    }
}
