//! Dual coordinates of the simplex as an exponential family.
//!
//! θ-coordinates are the alr image with the last part as reference; the
//! η-coordinates are the first `D−1` probabilities. The two are linked by the
//! Legendre pair ψ (log-normalizer) and φ (negative Shannon entropy).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::simplex::{alr, check_finite, check_same_dim, close_slice, Composition};

/// Minimal distance from the simplex boundary accepted for η-coordinates.
pub const ETA_BOUNDARY_MARGIN: f64 = 1e-14;

/// Natural parameters `θⁱ = log(xᵢ / x_D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCoords(Vec<f64>);

impl ThetaCoords {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        check_finite(&theta)?;
        Ok(Self(theta))
    }

    pub(crate) fn from_vec_unchecked(theta: Vec<f64>) -> Self {
        Self(theta)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Expectation parameters: the first `D−1` probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaCoords(Vec<f64>);

impl EtaCoords {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        check_finite(&eta)?;
        if eta.is_empty() {
            return Err(Error::OutOfDomain("empty η vector".into()));
        }
        if let Some(i) = eta.iter().position(|&e| e <= ETA_BOUNDARY_MARGIN) {
            return Err(Error::OutOfDomain(format!("η[{i}] = {} is not interior", eta[i])));
        }
        let last = 1.0 - eta.iter().sum::<f64>();
        if last <= ETA_BOUNDARY_MARGIN {
            return Err(Error::OutOfDomain(format!("1 − Ση = {last} is not interior")));
        }
        Ok(Self(eta))
    }

    /// η-coordinates of a composition (closing it first).
    pub fn from_composition(x: &Composition) -> Self {
        let c = x.closed();
        let p = c.parts();
        Self(p[..p.len() - 1].to_vec())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The implied last probability `1 − Σ ηᵢ`.
    pub fn remainder(&self) -> f64 {
        1.0 - self.0.iter().sum::<f64>()
    }

    /// The full probability vector `(η, 1 − Ση)`.
    pub fn to_composition(&self) -> Composition {
        let mut parts = self.0.clone();
        parts.push(self.remainder());
        Composition::closed_unchecked(parts)
    }
}

/// Which coordinate system a Fisher matrix is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateSystem {
    Theta,
    Eta,
}

/// Fisher information matrix `g(θ)` or its inverse `g(η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub g: DMatrix<f64>,
    pub coordinate_system: CoordinateSystem,
}

impl FisherMatrix {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `uᵀ g w`.
    pub fn inner(&self, u: &[f64], w: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        let w = DVector::from_column_slice(w);
        u.dot(&(&self.g * w))
    }

    /// Largest `|gᵢⱼ − gⱼᵢ|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.g - self.g.transpose()).amax()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g.clone().cholesky().is_some()
    }
}

/// Shifted log-sum-exp of `values` plus an implicit extra term `e^0` when
/// `with_zero` is set.
pub(crate) fn log_sum_exp(values: &[f64], with_zero: bool) -> f64 {
    let mut max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if with_zero {
        max = max.max(0.0);
    }
    let mut acc: f64 = values.iter().map(|v| (v - max).exp()).sum();
    if with_zero {
        acc += (-max).exp();
    }
    max + acc.ln()
}

/// Log-normalizer `ψ(θ) = log(1 + Σ e^{θⁱ})`.
pub fn psi(theta: &ThetaCoords) -> f64 {
    log_sum_exp(&theta.0, true)
}

/// Negative Shannon entropy `φ(η) = Σ ηᵢ log ηᵢ + (1−Ση) log(1−Ση)`.
pub fn phi(eta: &EtaCoords) -> f64 {
    let last = eta.remainder();
    eta.0.iter().map(|e| e * e.ln()).sum::<f64>() + last * last.ln()
}

/// `η = ∇ψ(θ)`.
pub fn eta_from_theta(theta: &ThetaCoords) -> EtaCoords {
    let lse = psi(theta);
    EtaCoords(theta.0.iter().map(|t| (t - lse).exp()).collect())
}

/// `θ = ∇φ(η)`.
pub fn theta_from_eta(eta: &EtaCoords) -> ThetaCoords {
    let last = eta.remainder().ln();
    ThetaCoords(eta.0.iter().map(|e| e.ln() - last).collect())
}

/// Fenchel–Young gap `ψ(θ_x) + φ(η_y) − θ_x·η_y`, which equals `D_ψ(x‖y)`.
pub fn fenchel_gap(x: &Composition, y: &Composition) -> Result<f64> {
    check_same_dim(x, y)?;
    let theta_x = alr(x);
    let eta_y = EtaCoords::from_composition(y);
    let dot: f64 = theta_x.0.iter().zip(&eta_y.0).map(|(t, e)| t * e).sum();
    Ok(psi(&theta_x) + phi(&eta_y) - dot)
}

fn fisher_from_eta_probs(eta: &[f64]) -> DMatrix<f64> {
    let n = eta.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { eta[i] * (1.0 - eta[i]) } else { -eta[i] * eta[j] })
}

/// `gᵢⱼ(θ)`: covariance of the indicator vector, `ηᵢ(δᵢⱼ − ηⱼ)`.
pub fn fisher_theta(theta: &ThetaCoords) -> FisherMatrix {
    let eta = eta_from_theta(theta);
    FisherMatrix { g: fisher_from_eta_probs(&eta.0), coordinate_system: CoordinateSystem::Theta }
}

/// `gⁱʲ(η)`: Hessian of φ, `δᵢⱼ/ηᵢ + 1/(1 − Ση)`.
pub fn fisher_eta(eta: &EtaCoords) -> FisherMatrix {
    let inv_last = 1.0 / eta.remainder();
    let n = eta.len();
    let g = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / eta.0[i] + inv_last } else { inv_last });
    FisherMatrix { g, coordinate_system: CoordinateSystem::Eta }
}

/// `p(r; θ) = p₀(r) exp(Σ θᵏ X_k(r) − ψ(θ))` over `D` outcomes with `d`
/// features.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFamily {
    base: Composition,
    /// `D × d`, row `r` holds `X_1(r), …, X_d(r)`.
    features: DMatrix<f64>,
    theta: ThetaCoords,
}

impl ExponentialFamily {
    pub fn new(base: Composition, features: DMatrix<f64>, theta: ThetaCoords) -> Result<Self> {
        if features.nrows() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), found: features.nrows() });
        }
        if features.ncols() != theta.len() {
            return Err(Error::DimensionMismatch { expected: features.ncols(), found: theta.len() });
        }
        if features.ncols() + 1 > base.dim() {
            return Err(Error::OutOfDomain(format!("{} features exceed D−1 = {}", features.ncols(), base.dim() - 1)));
        }
        check_finite(features.as_slice())?;
        Ok(Self { base: base.closed(), features, theta })
    }

    /// The full simplex family: uniform base measure with indicator features.
    pub fn simplex(theta: ThetaCoords) -> Result<Self> {
        let dim = theta.len() + 1;
        let features = DMatrix::from_fn(dim, dim - 1, |r, k| if r == k { 1.0 } else { 0.0 });
        Self::new(Composition::neutral(dim)?, features, theta)
    }

    pub fn base(&self) -> &Composition {
        &self.base
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn theta(&self) -> &ThetaCoords {
        &self.theta
    }

    /// Same family at a different natural parameter.
    pub fn with_theta(&self, theta: ThetaCoords) -> Result<Self> {
        Self::new(self.base.clone(), self.features.clone(), theta)
    }

    /// All feature rows identical: every θ yields the base measure.
    pub fn is_degenerate(&self) -> bool {
        let first = self.features.row(0);
        self.features.row_iter().all(|row| row == first)
    }

    fn log_weights(&self) -> Vec<f64> {
        let theta = DVector::from_column_slice(&self.theta.0);
        let proj = &self.features * theta;
        self.base.parts().iter().zip(proj.iter()).map(|(p, s)| p.ln() + s).collect()
    }

    /// `ψ(θ) = log Σ_r p₀(r) exp(Σ_k θᵏ X_k(r))`.
    pub fn psi(&self) -> f64 {
        log_sum_exp(&self.log_weights(), false)
    }
}

/// Evaluates the family's distribution at its natural parameter.
pub fn expfam_eval(family: &ExponentialFamily) -> Composition {
    if family.is_degenerate() {
        log::warn!("exponential family has identical feature rows; θ has no effect");
    }
    let logs = family.log_weights();
    let lse = log_sum_exp(&logs, false);
    let probs: Vec<f64> = logs.iter().map(|l| (l - lse).exp()).collect();
    Composition::closed_unchecked(close_slice(&probs))
}

/// Fisher matrix of a general family: the feature covariance
/// `E[(Xᵢ − E Xᵢ)(Xⱼ − E Xⱼ)]` under the evaluated distribution.
pub fn expfam_fisher(family: &ExponentialFamily) -> FisherMatrix {
    let p = expfam_eval(family);
    let x = &family.features;
    let d = x.ncols();
    let probs = p.parts();
    let means: Vec<f64> = (0..d).map(|k| probs.iter().zip(x.column(k).iter()).map(|(p, v)| p * v).sum()).collect();
    let mut g = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let c: f64 =
                probs.iter().enumerate().map(|(r, p)| p * (x[(r, i)] - means[i]) * (x[(r, j)] - means[j])).sum();
            g[(i, j)] = c;
            g[(j, i)] = c;
        }
    }
    FisherMatrix { g, coordinate_system: CoordinateSystem::Theta }
}
