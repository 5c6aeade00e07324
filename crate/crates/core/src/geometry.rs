//! Exponential/log maps, e- and m-geodesics, Fisher inner products of
//! tangents, and the m-projection onto an e-geodesic.

use nalgebra::DMatrix;

use crate::duality::{fisher_eta, fisher_theta, EtaCoords};
use crate::error::{Error, Result};
use crate::simplex::{alr, check_same_dim, close_slice, clr_slice, from_log_parts, Composition, Tangent, TANGENT_TOL};

/// Componentwise tolerance for two tangents to share a base point.
pub const BASE_POINT_TOL: f64 = 1e-12;

/// `exp_x(v) = x ⊕ e^v`.
pub fn exp_map(x: &Composition, v: &Tangent) -> Result<Composition> {
    if v.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: v.dim() });
    }
    let sum: f64 = v.coords().iter().sum();
    if sum.abs() > TANGENT_TOL {
        return Err(Error::NotInTangentSpace { sum });
    }
    let logs: Vec<f64> = x.parts().iter().zip(v.coords()).map(|(p, c)| p.ln() + c).collect();
    Ok(from_log_parts(&logs))
}

/// `vec(x, y) = clr(y) − clr(x)`.
pub fn log_map(x: &Composition, y: &Composition) -> Result<Tangent> {
    check_same_dim(x, y)?;
    let ratio: Vec<f64> = y.parts().iter().zip(x.parts()).map(|(a, b)| a / b).collect();
    Ok(Tangent::project(clr_slice(&ratio)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicKind {
    /// Straight in θ-coordinates (geometric mixtures).
    E,
    /// Straight in η-coordinates (probability mixtures).
    M,
}

/// A geodesic segment from `start` (`t = 0`) to `end` (`t = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    kind: GeodesicKind,
    start: Composition,
    end: Composition,
}

impl Geodesic {
    pub fn new(kind: GeodesicKind, start: &Composition, end: &Composition) -> Result<Self> {
        check_same_dim(start, end)?;
        Ok(Self { kind, start: start.closed(), end: end.closed() })
    }

    pub fn e(start: &Composition, end: &Composition) -> Result<Self> {
        Self::new(GeodesicKind::E, start, end)
    }

    pub fn m(start: &Composition, end: &Composition) -> Result<Self> {
        Self::new(GeodesicKind::M, start, end)
    }

    pub fn kind(&self) -> GeodesicKind {
        self.kind
    }

    pub fn start(&self) -> &Composition {
        &self.start
    }

    pub fn end(&self) -> &Composition {
        &self.end
    }

    /// Point at parameter `t`; `t` outside `[0, 1]` is rejected.
    pub fn eval(&self, t: f64) -> Result<Composition> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ParameterOutOfRange(t));
        }
        Ok(self.eval_unbounded(t))
    }

    fn eval_unbounded(&self, t: f64) -> Composition {
        if t == 0.0 {
            return self.start.clone();
        }
        if t == 1.0 {
            return self.end.clone();
        }
        let a = self.start.parts();
        let b = self.end.parts();
        match self.kind {
            // Linear in θ is linear in log-parts up to a per-point constant.
            GeodesicKind::E => {
                let logs: Vec<f64> = a.iter().zip(b).map(|(p, q)| (1.0 - t) * p.ln() + t * q.ln()).collect();
                from_log_parts(&logs)
            }
            GeodesicKind::M => {
                let mix: Vec<f64> = a.iter().zip(b).map(|(p, q)| (1.0 - t) * p + t * q).collect();
                Composition::closed_unchecked(close_slice(&mix))
            }
        }
    }

    /// Velocity at `t` expressed in θ-coordinates.
    pub fn velocity(&self, t: f64) -> Result<TangentAtPoint> {
        let base = self.eval(t)?;
        let direction = match self.kind {
            GeodesicKind::E => theta_difference(&self.start, &self.end),
            GeodesicKind::M => {
                let d_eta = eta_difference(&self.start, &self.end);
                eta_direction_to_theta(&base, &d_eta)
            }
        };
        Ok(TangentAtPoint { base, direction })
    }
}

/// `θ_b − θ_a`.
fn theta_difference(a: &Composition, b: &Composition) -> Vec<f64> {
    let ta = alr(a);
    let tb = alr(b);
    tb.as_slice().iter().zip(ta.as_slice()).map(|(q, p)| q - p).collect()
}

/// `η_b − η_a`.
fn eta_difference(a: &Composition, b: &Composition) -> Vec<f64> {
    let ea = EtaCoords::from_composition(a);
    let eb = EtaCoords::from_composition(b);
    eb.as_slice().iter().zip(ea.as_slice()).map(|(q, p)| q - p).collect()
}

/// `dθ = g(η) dη` at `base`.
fn eta_direction_to_theta(base: &Composition, d_eta: &[f64]) -> Vec<f64> {
    let g = fisher_eta(&EtaCoords::from_composition(base)).g;
    let v = g * nalgebra::DVector::from_column_slice(d_eta);
    v.iter().copied().collect()
}

/// A tangent vector at `base`, with components in θ-coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentAtPoint {
    pub base: Composition,
    pub direction: Vec<f64>,
}

impl TangentAtPoint {
    pub fn new(base: &Composition, direction: Vec<f64>) -> Result<Self> {
        if direction.len() + 1 != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim() - 1, found: direction.len() });
        }
        crate::simplex::check_finite(&direction)?;
        Ok(Self { base: base.closed(), direction })
    }

    /// Converts a clr-space tangent: the curve `exp_x(t v)` moves θ by
    /// `vᵢ − v_D`.
    pub fn from_clr(base: &Composition, v: &Tangent) -> Result<Self> {
        if v.dim() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), found: v.dim() });
        }
        let c = v.coords();
        let last = c[c.len() - 1];
        Self::new(base, c[..c.len() - 1].iter().map(|vi| vi - last).collect())
    }

    /// Converts a direction given in η-coordinates.
    pub fn from_eta_direction(base: &Composition, d_eta: &[f64]) -> Result<Self> {
        if d_eta.len() + 1 != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim() - 1, found: d_eta.len() });
        }
        Self::new(base, eta_direction_to_theta(&base.closed(), d_eta))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { base: self.base.clone(), direction: self.direction.iter().map(|d| a * d).collect() }
    }
}

/// Fisher inner product `uᵀ g(θ) w` at the shared base point.
pub fn fisher_inner(u: &TangentAtPoint, w: &TangentAtPoint) -> Result<f64> {
    if !u.base.approx_eq(&w.base, BASE_POINT_TOL) {
        return Err(Error::BasePointMismatch);
    }
    if u.direction.len() != w.direction.len() {
        return Err(Error::DimensionMismatch { expected: u.direction.len(), found: w.direction.len() });
    }
    Ok(fisher_theta(&alr(&u.base)).inner(&u.direction, &w.direction))
}

/// Result of projecting a composition onto an e-geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct MProjection {
    pub point: Composition,
    pub t: f64,
    /// `D_φ(x‖z)` at the minimizer.
    pub divergence: f64,
    /// The minimizer sits at an endpoint of the segment.
    pub at_boundary: bool,
}

const GOLDEN_ITERATIONS: usize = 40;
const NEWTON_STEPS: usize = 3;
const T_TOL: f64 = 1e-10;
const DERIV_STEP: f64 = 1e-5;

/// m-projection of `x` onto the e-geodesic `G`: minimizes
/// `t ↦ D_φ(x‖G(t)) = Σ xᵢ log(xᵢ/G(t)ᵢ)` over `[0, 1]`.
///
/// The objective is convex in `t`. Endpoints are detected from the sign of
/// the slope there; interior minima use golden-section search followed by
/// Newton steps with central-difference derivatives. At an interior
/// minimizer `z`, the m-geodesic from `z` to `x` is Fisher-orthogonal to
/// `G`, and `D_φ(x‖y) = D_φ(x‖z) + D_φ(z‖y)` for every `y` on `G`.
pub fn m_projection(x: &Composition, geodesic: &Geodesic) -> Result<MProjection> {
    if geodesic.kind != GeodesicKind::E {
        return Err(Error::OutOfDomain("m-projection needs an e-geodesic".into()));
    }
    check_same_dim(x, &geodesic.start)?;
    let x = x.closed();
    let log_x: Vec<f64> = x.parts().iter().map(|p| p.ln()).collect();
    let log_a: Vec<f64> = geodesic.start.parts().iter().map(|p| p.ln()).collect();
    let log_b: Vec<f64> = geodesic.end.parts().iter().map(|p| p.ln()).collect();

    // D_φ(x‖G(t)) = Σ xᵢ (log xᵢ − ℓᵢ(t)) + log Σ exp ℓᵢ(t), ℓ linear in t.
    let objective = |t: f64| -> f64 {
        let ell: Vec<f64> = log_a.iter().zip(&log_b).map(|(a, b)| a + t * (b - a)).collect();
        let lse = crate::duality::log_sum_exp(&ell, false);
        x.parts().iter().zip(log_x.iter().zip(&ell)).map(|(p, (lx, l))| p * (lx - l)).sum::<f64>() + lse
    };
    // Analytic slope: (G(t) − x)·(log b − log a), used only for the endpoint test.
    let slope = |t: f64| -> f64 {
        let z = geodesic.eval_unbounded(t);
        z.parts()
            .iter()
            .zip(x.parts())
            .zip(log_a.iter().zip(&log_b))
            .map(|((zi, xi), (a, b))| (zi - xi) * (b - a))
            .sum()
    };

    let (t, at_boundary) = if slope(0.0) >= 0.0 {
        (0.0, true)
    } else if slope(1.0) <= 0.0 {
        (1.0, true)
    } else {
        (golden_then_newton(&objective), false)
    };
    let point = geodesic.eval_unbounded(t);
    let divergence = relative_entropy(&x, &point);
    Ok(MProjection { point, t, divergence, at_boundary })
}

fn golden_then_newton(f: &impl Fn(f64) -> f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d);
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..NEWTON_STEPS {
        let h = DERIV_STEP;
        let (up, mid, down) = (f(t + h), f(t), f(t - h));
        let d1 = (up - down) / (2.0 * h);
        let d2 = (up - 2.0 * mid + down) / (h * h);
        if d2.is_nan() || d2 <= 0.0 {
            break;
        }
        let step = d1 / d2;
        // Newton may only refine within the golden-section bracket.
        let next = (t - step).clamp(lo, hi);
        let moved = (next - t).abs();
        t = next;
        if moved < T_TOL {
            break;
        }
    }
    t
}

fn relative_entropy(x: &Composition, y: &Composition) -> f64 {
    x.parts().iter().zip(y.parts()).map(|(a, b)| a * (a / b).ln()).sum()
}

/// Additivity and orthogonality residuals for the triple `x`, `z`, `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PythagorasReport {
    /// `D_φ(x‖y)`.
    pub total: f64,
    /// `D_φ(x‖z)`.
    pub first_leg: f64,
    /// `D_φ(z‖y)`.
    pub second_leg: f64,
    /// `total − first_leg − second_leg`.
    pub additivity_residual: f64,
    /// Fisher inner product at `z` of the m-geodesic tangent toward `x` and
    /// the e-geodesic tangent toward `y`.
    pub orthogonality_residual: f64,
}

/// Checks the generalized Pythagorean relation
/// `D_φ(x‖y) = D_φ(x‖z) + D_φ(z‖y)`, which holds exactly when the
/// m-geodesic `z → x` and the e-geodesic `z → y` meet Fisher-orthogonally.
pub fn pythagoras_check(x: &Composition, z: &Composition, y: &Composition) -> Result<PythagorasReport> {
    check_same_dim(x, z)?;
    check_same_dim(z, y)?;
    let (x, z, y) = (x.closed(), z.closed(), y.closed());
    let total = relative_entropy(&x, &y);
    let first_leg = relative_entropy(&x, &z);
    let second_leg = relative_entropy(&z, &y);
    let m_tangent = TangentAtPoint::from_eta_direction(&z, &eta_difference(&z, &x))?;
    let e_tangent = TangentAtPoint::new(&z, theta_difference(&z, &y))?;
    let orthogonality_residual = fisher_inner(&m_tangent, &e_tangent)?;
    Ok(PythagorasReport {
        total,
        first_leg,
        second_leg,
        additivity_residual: total - first_leg - second_leg,
        orthogonality_residual,
    })
}

/// Rank tolerance for the perturbation-independence test.
pub const INDEPENDENCE_TOL: f64 = 1e-10;

/// True when `x₁, …, x_m` are perturbation-independent, i.e. their clr
/// images have rank `m`.
pub fn perturbation_independent(vectors: &[Composition]) -> Result<bool> {
    let Some(first) = vectors.first() else {
        return Ok(true);
    };
    let d = first.dim();
    for v in vectors {
        if v.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
        }
    }
    if vectors.len() >= d {
        return Ok(false);
    }
    let rows: Vec<f64> = vectors.iter().flat_map(|v| clr_slice(v.parts())).collect();
    let m = DMatrix::from_row_slice(vectors.len(), d, &rows);
    let sv = m.singular_values();
    Ok(sv.iter().filter(|s| **s > INDEPENDENCE_TOL).count() == vectors.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::{clr, perturb, power};
    use approx::assert_abs_diff_eq;

    fn comp(p: &[f64]) -> Composition {
        Composition::from_slice(p).unwrap()
    }

    #[test]
    fn log_map_examples() {
        let x = comp(&[0.2, 0.3, 0.5]);
        assert!(log_map(&x, &x).unwrap().coords().iter().all(|c| c.abs() < 1e-15));
        let n = Composition::neutral(3).unwrap();
        let v = log_map(&n, &x).unwrap();
        for (a, b) in v.coords().iter().zip(clr(&x).coords()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-15);
        }
    }

    #[test]
    fn exp_map_examples() {
        let n = Composition::neutral(3).unwrap();
        let v = Tangent::new(vec![0.2, -0.1, -0.1]).unwrap();
        let y = exp_map(&n, &v).unwrap();
        let expected = crate::simplex::close(&[0.2f64.exp(), (-0.1f64).exp(), (-0.1f64).exp()]).unwrap();
        assert!(y.approx_eq(&expected, 1e-15));
        let x = comp(&[0.1, 0.6, 0.3]);
        assert!(exp_map(&x, &log_map(&x, &y).unwrap()).unwrap().approx_eq(&y, 1e-15));
        assert!(exp_map(&x, &Tangent::zero(2)).is_err());
    }

    #[test]
    fn geodesic_endpoints_and_midpoints() {
        let x = comp(&[0.1, 0.6, 0.3]);
        let y = comp(&[0.5, 0.2, 0.3]);
        for g in [Geodesic::e(&x, &y).unwrap(), Geodesic::m(&x, &y).unwrap()] {
            assert_eq!(g.eval(0.0).unwrap(), x);
            assert_eq!(g.eval(1.0).unwrap(), y);
            assert_eq!(g.eval(1.5), Err(Error::ParameterOutOfRange(1.5)));
            assert!(g.eval(-0.1).is_err());
        }
        let m_mid = Geodesic::m(&x, &y).unwrap().eval(0.5).unwrap();
        assert!(m_mid.approx_eq(&comp(&[0.3, 0.4, 0.3]), 1e-15));
        let e_mid = Geodesic::e(&x, &y).unwrap().eval(0.5).unwrap();
        let gm: Vec<f64> = x.parts().iter().zip(y.parts()).map(|(a, b)| (a * b).sqrt()).collect();
        assert!(e_mid.approx_eq(&crate::simplex::close(&gm).unwrap(), 1e-15));
    }

    #[test]
    fn e_geodesic_is_perturbation_covariant() {
        let x = comp(&[0.1, 0.6, 0.3]);
        let y = comp(&[0.5, 0.2, 0.3]);
        let p = comp(&[0.7, 0.2, 0.1]);
        let g = Geodesic::e(&x, &y).unwrap();
        let gp = Geodesic::e(&perturb(&x, &p).unwrap(), &perturb(&y, &p).unwrap()).unwrap();
        for t in [0.0, 0.25, 0.6, 1.0] {
            let lhs = gp.eval(t).unwrap();
            let rhs = perturb(&g.eval(t).unwrap(), &p).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-12));
        }
    }

    #[test]
    fn fisher_inner_examples() {
        let n = Composition::neutral(3).unwrap();
        let u = TangentAtPoint::new(&n, vec![1.0, 0.0]).unwrap();
        let w = TangentAtPoint::new(&n, vec![0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(fisher_inner(&u, &w).unwrap(), -1.0 / 9.0, epsilon = 1e-16);
        assert!(fisher_inner(&u, &u).unwrap() > 0.0);
        assert_abs_diff_eq!(
            fisher_inner(&u.scaled(2.5), &w).unwrap(),
            2.5 * fisher_inner(&u, &w).unwrap(),
            epsilon = 1e-12
        );
        let other = TangentAtPoint::new(&comp(&[0.2, 0.3, 0.5]), vec![1.0, 0.0]).unwrap();
        assert_eq!(fisher_inner(&u, &other), Err(Error::BasePointMismatch));
    }

    #[test]
    fn clr_tangent_conversion_matches_curve() {
        let x = comp(&[0.1, 0.6, 0.3]);
        let v = Tangent::new(vec![0.4, -0.1, -0.3]).unwrap();
        let t = TangentAtPoint::from_clr(&x, &v).unwrap();
        // θ moves linearly along exp_x(s v)
        let s = 0.37;
        let moved = exp_map(&x, &Tangent::new(v.coords().iter().map(|c| s * c).collect()).unwrap()).unwrap();
        let (t0, t1) = (alr(&x), alr(&moved));
        for i in 0..2 {
            assert_abs_diff_eq!(t1.as_slice()[i] - t0.as_slice()[i], s * t.direction[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn m_geodesic_velocity_is_metric_dual() {
        let x = comp(&[0.1, 0.6, 0.3]);
        let y = comp(&[0.5, 0.2, 0.3]);
        let g = Geodesic::m(&x, &y).unwrap();
        let v = g.velocity(0.3).unwrap();
        let h = 1e-6;
        let (a, b) = (alr(&g.eval(0.3 - h).unwrap()), alr(&g.eval(0.3 + h).unwrap()));
        for i in 0..2 {
            assert_abs_diff_eq!((b.as_slice()[i] - a.as_slice()[i]) / (2.0 * h), v.direction[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn m_projection_of_point_on_geodesic() {
        let a = comp(&[0.1, 0.6, 0.3]);
        let b = comp(&[0.5, 0.2, 0.3]);
        let g = Geodesic::e(&a, &b).unwrap();
        let x = g.eval(0.35).unwrap();
        let proj = m_projection(&x, &g).unwrap();
        assert!(!proj.at_boundary);
        assert_abs_diff_eq!(proj.t, 0.35, epsilon = 1e-8);
        assert!(proj.point.approx_eq(&x, 1e-9));
        assert!(proj.divergence.abs() < 1e-12);
    }

    #[test]
    fn m_projection_interior_satisfies_pythagoras() {
        let a = comp(&[0.2, 0.2, 0.3, 0.3]);
        let y = comp(&[0.6, 0.1, 0.2, 0.1]);
        let x = comp(&[0.3, 0.3, 0.1, 0.3]);
        let g = Geodesic::e(&a, &y).unwrap();
        let proj = m_projection(&x, &g).unwrap();
        assert!(!proj.at_boundary);
        let r = pythagoras_check(&x, &proj.point, &y).unwrap();
        assert!(r.additivity_residual.abs() < 1e-6, "{r:?}");
        assert!(r.orthogonality_residual.abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn m_projection_flags_boundary() {
        let a = comp(&[0.2, 0.3, 0.5]);
        let b = comp(&[0.6, 0.3, 0.1]);
        let g = Geodesic::e(&a, &b).unwrap();
        let x = power(3.0, &b).unwrap();
        let proj = m_projection(&x, &g).unwrap();
        assert!(proj.at_boundary);
        assert_eq!(proj.t, 1.0);
        assert!(m_projection(&x, &Geodesic::m(&a, &b).unwrap()).is_err());
    }

    #[test]
    fn pythagoras_degenerate_and_negative_control() {
        let x = comp(&[0.2, 0.3, 0.5]);
        let y = comp(&[0.6, 0.3, 0.1]);
        let r = pythagoras_check(&x, &x, &y).unwrap();
        assert_abs_diff_eq!(r.additivity_residual, 0.0, epsilon = 1e-15);
        let z = comp(&[0.1, 0.8, 0.1]);
        let r = pythagoras_check(&x, &z, &y).unwrap();
        assert!(r.additivity_residual.abs() > 1e-3);
    }

    #[test]
    fn independence_rank_test() {
        let a = comp(&[0.2, 0.3, 0.5]);
        let b = comp(&[0.6, 0.3, 0.1]);
        assert!(perturbation_independent(&[a.clone(), b.clone()]).unwrap());
        let c = perturb(&power(2.0, &a).unwrap(), &power(-0.5, &b).unwrap()).unwrap();
        assert!(!perturbation_independent(&[a.clone(), b.clone(), c]).unwrap());
        assert!(!perturbation_independent(&[a.clone(), power(3.0, &a).unwrap()]).unwrap());
        assert!(!perturbation_independent(&[Composition::neutral(3).unwrap()]).unwrap());
    }
}
