//! Divergences and distances between compositions.
//!
//! All measures close their inputs first. Natural logarithms throughout.

use std::fmt;
use std::sync::Arc;

use crate::duality::{eta_from_theta, phi, psi, theta_from_eta, EtaCoords, ThetaCoords};
use crate::error::{Error, Result};
use crate::simplex::{aitchison_distance_sq, alr, check_same_dim, clr_slice, ilr, Composition, ContrastMatrix};

/// `|α ∓ 1|` below which the α-divergence switches to the relative entropy.
pub const ALPHA_POLE_BAND: f64 = 1e-6;
/// `|β|` below which the Box-Cox distance switches to its log-ratio limit.
pub const BOXCOX_ZERO_BAND: f64 = 1e-6;
/// Step of the central-difference gradient used for potentials without one.
pub const GRADIENT_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    Bregman,
    /// `D_φ(x‖y) = Σ xᵢ log(xᵢ/yᵢ)`.
    RelativeEntropy,
    /// `D_ψ(x‖y) = D_φ(y‖x)`.
    ReverseRelativeEntropy,
    Alpha,
    F,
    Aitchison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Value is `D(x‖y)` with the arguments in call order.
    Forward,
    Symmetric,
}

/// A divergence value tagged with what produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceResult {
    pub value: f64,
    pub kind: DivergenceKind,
    pub direction: Direction,
}

impl DivergenceResult {
    fn forward(value: f64, kind: DivergenceKind) -> Self {
        Self { value, kind, direction: Direction::Forward }
    }

    fn symmetric(value: f64, kind: DivergenceKind) -> Self {
        Self { value, kind, direction: Direction::Symmetric }
    }
}

/// Coordinates a convex potential is expressed in.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialCoords {
    Eta,
    Theta,
    Ilr(ContrastMatrix),
}

impl PotentialCoords {
    /// Maps a composition into these coordinates.
    pub fn coordinates(&self, x: &Composition) -> Result<Vec<f64>> {
        match self {
            PotentialCoords::Eta => Ok(EtaCoords::from_composition(x).as_slice().to_vec()),
            PotentialCoords::Theta => Ok(alr(x).into_vec()),
            PotentialCoords::Ilr(v) => Ok(ilr(x, v)?.z),
        }
    }
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A convex function `U` on one of the coordinate systems of the simplex.
///
/// Closures must be reentrant; they may be called from several threads.
#[derive(Clone)]
pub struct ConvexPotential {
    value: Arc<ScalarFn>,
    gradient: Option<Arc<VectorFn>>,
    coords: PotentialCoords,
}

impl fmt::Debug for ConvexPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexPotential")
            .field("coords", &self.coords)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ConvexPotential {
    pub fn new(coords: PotentialCoords, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { value: Arc::new(value), gradient: None, coords }
    }

    pub fn with_gradient(mut self, gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// φ on η-coordinates; its Bregman divergence is `D_φ`.
    pub fn negative_entropy() -> Self {
        Self::new(PotentialCoords::Eta, |eta| match EtaCoords::new(eta.to_vec()) {
            Ok(e) => phi(&e),
            Err(_) => f64::NAN,
        })
        .with_gradient(|eta| match EtaCoords::new(eta.to_vec()) {
            Ok(e) => theta_from_eta(&e).into_vec(),
            Err(_) => vec![f64::NAN; eta.len()],
        })
    }

    /// ψ on θ-coordinates; its Bregman divergence is `D_ψ`.
    pub fn log_normalizer() -> Self {
        Self::new(PotentialCoords::Theta, |theta| psi(&ThetaCoords::from_vec_unchecked(theta.to_vec())))
            .with_gradient(|theta| eta_from_theta(&ThetaCoords::from_vec_unchecked(theta.to_vec())).as_slice().to_vec())
    }

    /// Squared Aitchison norm `Σ zᵢ²` in ilr coordinates.
    pub fn squared_aitchison_norm(contrast: ContrastMatrix) -> Self {
        Self::new(PotentialCoords::Ilr(contrast), |z| z.iter().map(|v| v * v).sum())
            .with_gradient(|z| z.iter().map(|v| 2.0 * v).collect())
    }

    pub fn coords(&self) -> &PotentialCoords {
        &self.coords
    }

    pub fn value(&self, at: &[f64]) -> f64 {
        (self.value)(at)
    }

    /// Analytic gradient when supplied, central differences otherwise.
    pub fn gradient(&self, at: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.gradient {
            return g(at);
        }
        let mut probe = at.to_vec();
        (0..at.len())
            .map(|i| {
                probe[i] = at[i] + GRADIENT_STEP;
                let up = self.value(&probe);
                probe[i] = at[i] - GRADIENT_STEP;
                let down = self.value(&probe);
                probe[i] = at[i];
                (up - down) / (2.0 * GRADIENT_STEP)
            })
            .collect()
    }

    /// `(U(a) + U(b))/2 − U((a+b)/2)`; negative values witness non-convexity.
    pub fn midpoint_convexity_gap(&self, a: &[f64], b: &[f64]) -> f64 {
        let mid: Vec<f64> = a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect();
        0.5 * (self.value(a) + self.value(b)) - self.value(&mid)
    }
}

/// Bregman divergence `U(a) − U(b) − ∇U(b)·(a − b)` with `a`, `b` the
/// potential's coordinates of `x` and `y`.
pub fn bregman(potential: &ConvexPotential, x: &Composition, y: &Composition) -> Result<DivergenceResult> {
    check_same_dim(x, y)?;
    let a = potential.coords.coordinates(x)?;
    let b = potential.coords.coordinates(y)?;
    let ua = potential.value(&a);
    let ub = potential.value(&b);
    let grad = potential.gradient(&b);
    if !ua.is_finite() || !ub.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::CoordinateDomain(format!("potential is not finite at ({ua}, {ub})")));
    }
    let lin: f64 = grad.iter().zip(a.iter().zip(&b)).map(|(g, (p, q))| g * (p - q)).sum();
    Ok(DivergenceResult::forward(ua - ub - lin, DivergenceKind::Bregman))
}

fn closed_pair(x: &Composition, y: &Composition) -> Result<(Composition, Composition)> {
    check_same_dim(x, y)?;
    Ok((x.closed(), y.closed()))
}

fn relative_entropy_parts(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * (a / b).ln()).sum()
}

/// Relative entropy `D_φ(x‖y) = Σ xᵢ log(xᵢ/yᵢ)`.
pub fn kl(x: &Composition, y: &Composition) -> Result<DivergenceResult> {
    let (x, y) = closed_pair(x, y)?;
    Ok(DivergenceResult::forward(relative_entropy_parts(x.parts(), y.parts()), DivergenceKind::RelativeEntropy))
}

/// Dual relative entropy `D_ψ(x‖y) = Σ yᵢ log(yᵢ/xᵢ) = D_φ(y‖x)`.
pub fn kl_reverse(x: &Composition, y: &Composition) -> Result<DivergenceResult> {
    let (x, y) = closed_pair(x, y)?;
    Ok(DivergenceResult::forward(relative_entropy_parts(y.parts(), x.parts()), DivergenceKind::ReverseRelativeEntropy))
}

/// α-divergence `4/(1−α²) (1 − Σ yᵢ^{(1+α)/2} xᵢ^{(1−α)/2})`.
///
/// `α → 1` gives `D_ψ(x‖y)`, `α → −1` gives `D_φ(x‖y)`.
pub fn alpha_divergence(alpha: f64, x: &Composition, y: &Composition) -> Result<DivergenceResult> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite { index: 0, value: alpha });
    }
    let (x, y) = closed_pair(x, y)?;
    let value = if (alpha - 1.0).abs() <= ALPHA_POLE_BAND {
        relative_entropy_parts(y.parts(), x.parts())
    } else if (alpha + 1.0).abs() <= ALPHA_POLE_BAND {
        relative_entropy_parts(x.parts(), y.parts())
    } else {
        // 1 − Σ y (x/y)^c = −Σ y expm1(c log(x/y)), using Σ y = 1.
        let c = 0.5 * (1.0 - alpha);
        let deficit: f64 = -x.parts().iter().zip(y.parts()).map(|(a, b)| b * (c * (a / b).ln()).exp_m1()).sum::<f64>();
        4.0 / (1.0 - alpha * alpha) * deficit
    };
    let result = DivergenceResult::forward(value, DivergenceKind::Alpha);
    Ok(if alpha == 0.0 { DivergenceResult { direction: Direction::Symmetric, ..result } } else { result })
}

/// Bhattacharyya coefficient `Σ √(xᵢ yᵢ)`.
pub fn bhattacharyya(x: &Composition, y: &Composition) -> Result<f64> {
    let (x, y) = closed_pair(x, y)?;
    Ok(x.parts().iter().zip(y.parts()).map(|(a, b)| (a * b).sqrt()).sum())
}

/// Squared Hellinger distance `Σ (√xᵢ − √yᵢ)²`.
pub fn hellinger_sq(x: &Composition, y: &Composition) -> Result<f64> {
    let (x, y) = closed_pair(x, y)?;
    Ok(x.parts().iter().zip(y.parts()).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum())
}

pub fn hellinger(x: &Composition, y: &Composition) -> Result<f64> {
    Ok(hellinger_sq(x, y)?.sqrt())
}

/// Fisher (Riemannian) distance `2 arccos Σ √(xᵢ yᵢ)`.
pub fn fisher_distance(x: &Composition, y: &Composition) -> Result<f64> {
    let bc = bhattacharyya(x, y)?;
    Ok(2.0 * bc.clamp(-1.0, 1.0).acos())
}

/// Squared Box-Cox distance `β⁻² Σ ωᵢ (C(x^β)ᵢ − C(y^β)ᵢ)²`.
///
/// Evaluated through the centred Box-Cox form, which is exact for every β
/// and free of cancellation near zero; for `|β| ≤ 1e-6` the limit
/// `Σ ωᵢ/D² (clrᵢ(x) − clrᵢ(y))²` is returned.
pub fn boxcox_distance_sq(beta: f64, weights: &[f64], x: &Composition, y: &Composition) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::NonFinite { index: 0, value: beta });
    }
    let (x, y) = closed_pair(x, y)?;
    let d = x.dim();
    if weights.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: weights.len() });
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::NegativeWeight { index, value });
        }
    }
    let dd = d as f64;
    if beta.abs() <= BOXCOX_ZERO_BAND {
        let cx = clr_slice(x.parts());
        let cy = clr_slice(y.parts());
        return Ok(weights.iter().zip(cx.iter().zip(&cy)).map(|(w, (a, b))| w / (dd * dd) * (a - b).powi(2)).sum());
    }
    let centred = |parts: &[f64]| -> Vec<f64> {
        // (x^β − 1)/β and its mean; Σ x^β = D + β Σ (x^β − 1)/β.
        let bc: Vec<f64> = parts.iter().map(|p| (beta * p.ln()).exp_m1() / beta).collect();
        let mean = bc.iter().sum::<f64>() / dd;
        let total = dd + beta * bc.iter().sum::<f64>();
        bc.iter().map(|v| (v - mean) / total).collect()
    };
    let cx = centred(x.parts());
    let cy = centred(y.parts());
    Ok(weights.iter().zip(cx.iter().zip(&cy)).map(|(w, (a, b))| w * (a - b).powi(2)).sum())
}

pub fn boxcox_distance(beta: f64, weights: &[f64], x: &Composition, y: &Composition) -> Result<f64> {
    Ok(boxcox_distance_sq(beta, weights, x, y)?.sqrt())
}

/// f-divergence `Σ xᵢ f(yᵢ/xᵢ)` for convex `f` with `f(1) = 0`.
pub fn f_divergence(f: impl Fn(f64) -> f64, x: &Composition, y: &Composition) -> Result<DivergenceResult> {
    let (x, y) = closed_pair(x, y)?;
    let value = x.parts().iter().zip(y.parts()).map(|(a, b)| a * f(b / a)).sum();
    Ok(DivergenceResult::forward(value, DivergenceKind::F))
}

/// Named f-divergence generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FGenerator {
    /// `−log t`, giving `D_φ(x‖y)`.
    NegLog,
    /// `(√t − 1)²`, giving the squared Hellinger distance.
    Hellinger,
    /// `(t − 1)²`, Pearson χ².
    Pearson,
    /// `|t − 1|/2`, total variation.
    TotalVariation,
}

impl FGenerator {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            FGenerator::NegLog => -t.ln(),
            FGenerator::Hellinger => (t.sqrt() - 1.0).powi(2),
            FGenerator::Pearson => (t - 1.0).powi(2),
            FGenerator::TotalVariation => 0.5 * (t - 1.0).abs(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FGenerator::NegLog => "neg-log",
            FGenerator::Hellinger => "hellinger",
            FGenerator::Pearson => "pearson",
            FGenerator::TotalVariation => "total-variation",
        }
    }
}

/// Euclidean divergence of the squared Aitchison norm: `d_A²(x, y)`.
pub fn aitchison_divergence(x: &Composition, y: &Composition) -> Result<DivergenceResult> {
    Ok(DivergenceResult::symmetric(aitchison_distance_sq(x, y)?, DivergenceKind::Aitchison))
}
