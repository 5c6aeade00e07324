//! Compositions, the Aitchison vector-space operations and the log-ratio
//! transform family (clr, alr, ilr) with contrast-matrix machinery.

use nalgebra::{DMatrix, DVector};

use crate::duality::ThetaCoords;
use crate::error::{Error, Result};

/// Tolerance on `|Σ parts − 1|` for a composition to count as closed.
pub const CLOSURE_TOL: f64 = 1e-12;
/// Tolerance on both contrast-matrix conditions.
pub const CONTRAST_TOL: f64 = 1e-10;
/// Largest `|Σ v|` accepted for a clr-space tangent vector.
pub const TANGENT_TOL: f64 = 1e-9;

/// A vector of strictly positive parts carrying only relative information.
///
/// The parts are stored as given; `is_closed` records whether they already
/// sum to one. Operations that need probability vectors close their inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    parts: Vec<f64>,
    closed: bool,
}

impl Composition {
    pub fn new(parts: Vec<f64>) -> Result<Self> {
        check_positive(&parts)?;
        if parts.len() < 2 {
            return Err(Error::DimensionTooSmall(parts.len()));
        }
        let closed = (parts.iter().sum::<f64>() - 1.0).abs() <= CLOSURE_TOL;
        Ok(Self { parts, closed })
    }

    pub fn from_slice(parts: &[f64]) -> Result<Self> {
        Self::new(parts.to_vec())
    }

    /// The neutral element `n = C(1, …, 1)`.
    pub fn neutral(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Ok(Self::closed_unchecked(vec![1.0 / dim as f64; dim]))
    }

    /// Wraps parts the caller has already closed and validated.
    pub(crate) fn closed_unchecked(parts: Vec<f64>) -> Self {
        debug_assert!(parts.len() >= 2 && parts.iter().all(|&p| p > 0.0));
        Self { parts, closed: true }
    }

    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<f64> {
        self.parts
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// The simplicial representative `C x`.
    pub fn closed(&self) -> Composition {
        if self.closed {
            return self.clone();
        }
        Self::closed_unchecked(close_slice(&self.parts))
    }

    /// True when both compositions are the same point of the simplex
    /// (within `tol`, componentwise, after closure).
    pub fn approx_eq(&self, other: &Composition, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let a = self.closed();
        let b = other.closed();
        a.parts.iter().zip(&b.parts).all(|(p, q)| (p - q).abs() <= tol)
    }
}

/// A sum-zero vector of the clr tangent space.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    coords: Vec<f64>,
}

impl Tangent {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords)?;
        let sum: f64 = coords.iter().sum();
        if sum.abs() > TANGENT_TOL {
            return Err(Error::NotInTangentSpace { sum });
        }
        Ok(Self { coords })
    }

    /// Orthogonal projection of an arbitrary vector onto the tangent space.
    pub fn project(mut coords: Vec<f64>) -> Self {
        center_in_place(&mut coords);
        Self { coords }
    }

    pub fn zero(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

pub(crate) fn check_positive(parts: &[f64]) -> Result<()> {
    for (index, &value) in parts.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
        if value <= 0.0 {
            return Err(Error::NonPositivePart { index, value });
        }
    }
    Ok(())
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index, value: values[index] }),
        None => Ok(()),
    }
}

pub(crate) fn check_same_dim(x: &Composition, y: &Composition) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    Ok(())
}

pub(crate) fn close_slice(parts: &[f64]) -> Vec<f64> {
    let total: f64 = parts.iter().sum();
    parts.iter().map(|p| p / total).collect()
}

fn center_in_place(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|c| *c -= mean);
}

/// clr of a raw positive slice; a single part maps to `[0]`.
pub(crate) fn clr_slice(parts: &[f64]) -> Vec<f64> {
    let mut logs: Vec<f64> = parts.iter().map(|p| p.ln()).collect();
    center_in_place(&mut logs);
    logs
}

/// Squared Aitchison norm of a raw positive slice (zero for one part).
pub(crate) fn norm_sq_slice(parts: &[f64]) -> f64 {
    clr_slice(parts).iter().map(|c| c * c).sum()
}

/// Squared Aitchison distance between two raw positive slices of equal length.
pub(crate) fn distance_sq_slice(x: &[f64], y: &[f64]) -> f64 {
    let ratio: Vec<f64> = x.iter().zip(y).map(|(a, b)| a / b).collect();
    norm_sq_slice(&ratio)
}

pub(crate) fn geometric_mean_slice(parts: &[f64]) -> f64 {
    (parts.iter().map(|p| p.ln()).sum::<f64>() / parts.len() as f64).exp()
}

/// Closure `C x = x / Σ x`.
pub fn close(x: &[f64]) -> Result<Composition> {
    Ok(Composition::new(x.to_vec())?.closed())
}

/// Perturbation `x ⊕ y = C(x₁y₁, …, x_D y_D)`.
pub fn perturb(x: &Composition, y: &Composition) -> Result<Composition> {
    check_same_dim(x, y)?;
    // Work in log space so extreme parts do not under- or overflow.
    let logs: Vec<f64> = x.parts.iter().zip(&y.parts).map(|(a, b)| a.ln() + b.ln()).collect();
    Ok(from_log_parts(&logs))
}

/// Powering `α ⊙ x = C(x₁^α, …, x_D^α)`.
pub fn power(alpha: f64, x: &Composition) -> Result<Composition> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite { index: 0, value: alpha });
    }
    let logs: Vec<f64> = x.parts.iter().map(|p| alpha * p.ln()).collect();
    Ok(from_log_parts(&logs))
}

/// Inverse perturbation `⊖x = (−1) ⊙ x`.
pub fn inverse(x: &Composition) -> Composition {
    let logs: Vec<f64> = x.parts.iter().map(|p| -p.ln()).collect();
    from_log_parts(&logs)
}

/// Closed composition `C exp(logs)` computed with a max shift.
pub(crate) fn from_log_parts(logs: &[f64]) -> Composition {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    Composition::closed_unchecked(close_slice(&exps))
}

/// Geometric mean `(Π xᵢ)^{1/k}` of the supplied entries.
pub fn geometric_mean(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySelection);
    }
    check_positive(x)?;
    Ok(geometric_mean_slice(x))
}

/// Centred log-ratio transform `clrᵢ = log(xᵢ / g(x))`.
pub fn clr(x: &Composition) -> Tangent {
    Tangent { coords: clr_slice(&x.parts) }
}

/// Inverse clr, `C exp(v)`.
pub fn clr_inv(v: &Tangent) -> Result<Composition> {
    let sum: f64 = v.coords.iter().sum();
    if sum.abs() > TANGENT_TOL {
        return Err(Error::NotInTangentSpace { sum });
    }
    if v.dim() < 2 {
        return Err(Error::DimensionTooSmall(v.dim()));
    }
    Ok(from_log_parts(&v.coords))
}

/// Additive log-ratio transform with the last part as reference:
/// `θⁱ = log(xᵢ / x_D)`.
pub fn alr(x: &Composition) -> ThetaCoords {
    let last = x.parts[x.dim() - 1].ln();
    ThetaCoords::from_vec_unchecked(x.parts[..x.dim() - 1].iter().map(|p| p.ln() - last).collect())
}

/// Inverse alr: closes `(e^{θ¹}, …, e^{θ^{D−1}}, 1)`.
pub fn alr_inv(theta: &ThetaCoords) -> Composition {
    let mut logs = theta.as_slice().to_vec();
    logs.push(0.0);
    from_log_parts(&logs)
}

/// Aitchison inner product `⟨x, y⟩_A = Σ clrᵢ(x) clrᵢ(y)`.
pub fn aitchison_inner(x: &Composition, y: &Composition) -> Result<f64> {
    check_same_dim(x, y)?;
    let cx = clr_slice(&x.parts);
    let cy = clr_slice(&y.parts);
    Ok(cx.iter().zip(&cy).map(|(a, b)| a * b).sum())
}

pub fn aitchison_norm(x: &Composition) -> f64 {
    norm_sq_slice(&x.parts).sqrt()
}

/// Squared Aitchison distance `Σ (clrᵢ(x) − clrᵢ(y))²`.
pub fn aitchison_distance_sq(x: &Composition, y: &Composition) -> Result<f64> {
    check_same_dim(x, y)?;
    let cx = clr_slice(&x.parts);
    let cy = clr_slice(&y.parts);
    Ok(cx.iter().zip(&cy).map(|(a, b)| (a - b).powi(2)).sum())
}

pub fn aitchison_distance(x: &Composition, y: &Composition) -> Result<f64> {
    Ok(aitchison_distance_sq(x, y)?.sqrt())
}

/// How a contrast matrix was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContrastKind {
    Helmert,
    Pivot,
    UserSbp,
    /// Loaded verbatim from user-supplied entries.
    Custom,
}

impl ContrastKind {
    pub fn name(self) -> &'static str {
        match self {
            ContrastKind::Helmert => "helmert",
            ContrastKind::Pivot => "pivot",
            ContrastKind::UserSbp => "user-sbp",
            ContrastKind::Custom => "custom",
        }
    }
}

/// A `D × (D−1)` matrix with orthonormal, sum-zero columns (an ilr basis).
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastMatrix {
    entries: DMatrix<f64>,
    kind: ContrastKind,
}

impl ContrastMatrix {
    /// Helmert basis: column `j` is `(1, …, 1, −(j+1), 0, …) / √((j+1)(j+2))`.
    pub fn helmert(dim: usize) -> Result<Self> {
        check_contrast_dim(dim)?;
        let entries = DMatrix::from_fn(dim, dim - 1, |i, j| {
            let k = (j + 1) as f64;
            let scale = 1.0 / (k * (k + 1.0)).sqrt();
            match i.cmp(&(j + 1)) {
                std::cmp::Ordering::Less => scale,
                std::cmp::Ordering::Equal => -k * scale,
                std::cmp::Ordering::Greater => 0.0,
            }
        });
        Ok(Self { entries, kind: ContrastKind::Helmert })
    }

    /// Pivot basis: coordinate `j` contrasts part `j` against the geometric
    /// mean of all later parts.
    pub fn pivot(dim: usize) -> Result<Self> {
        check_contrast_dim(dim)?;
        let entries = DMatrix::from_fn(dim, dim - 1, |i, j| {
            let rest = (dim - j - 1) as f64;
            let scale = (rest / (rest + 1.0)).sqrt();
            match i.cmp(&j) {
                std::cmp::Ordering::Less => 0.0,
                std::cmp::Ordering::Equal => scale,
                std::cmp::Ordering::Greater => -scale / rest,
            }
        });
        Ok(Self { entries, kind: ContrastKind::Pivot })
    }

    /// Balance basis from a sequential binary partition.
    ///
    /// `sbp` has `D−1` rows of length `D` with entries in `{+1, −1, 0}`. The
    /// first row splits all parts; every later row must split exactly one
    /// group produced by an earlier row, and no group may be split twice.
    pub fn from_sbp(sbp: &[Vec<i8>]) -> Result<Self> {
        let dim = sbp.first().map_or(0, Vec::len);
        check_contrast_dim(dim)?;
        if sbp.len() != dim - 1 {
            return Err(Error::InvalidPartition(format!(
                "expected {} rows for {} parts, got {}",
                dim - 1,
                dim,
                sbp.len()
            )));
        }
        // Groups available for splitting, as sorted index lists.
        let mut open: Vec<Vec<usize>> = vec![(0..dim).collect()];
        let mut entries = DMatrix::zeros(dim, dim - 1);
        for (row_idx, row) in sbp.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidPartition(format!(
                    "row {} has length {}, expected {}",
                    row_idx + 1,
                    row.len(),
                    dim
                )));
            }
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for (i, &s) in row.iter().enumerate() {
                match s {
                    1 => plus.push(i),
                    -1 => minus.push(i),
                    0 => {}
                    other => {
                        return Err(Error::InvalidPartition(format!("row {} contains sign {}", row_idx + 1, other)))
                    }
                }
            }
            if plus.is_empty() || minus.is_empty() {
                return Err(Error::InvalidPartition(format!(
                    "row {} does not split into two nonempty groups",
                    row_idx + 1
                )));
            }
            let mut support: Vec<usize> = plus.iter().chain(&minus).copied().collect();
            support.sort_unstable();
            let Some(pos) = open.iter().position(|g| *g == support) else {
                return Err(Error::InvalidPartition(format!(
                    "row {} does not split a group of an earlier row",
                    row_idx + 1
                )));
            };
            open.swap_remove(pos);
            let r = plus.len() as f64;
            let s = minus.len() as f64;
            let up = (s / (r * (r + s))).sqrt();
            let down = -(r / (s * (r + s))).sqrt();
            for &i in &plus {
                entries[(i, row_idx)] = up;
            }
            for &i in &minus {
                entries[(i, row_idx)] = down;
            }
            if plus.len() > 1 {
                open.push(plus);
            }
            if minus.len() > 1 {
                open.push(minus);
            }
        }
        Ok(Self { entries, kind: ContrastKind::UserSbp })
    }

    /// Wraps user-supplied entries after checking both contrast conditions.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        let report = validate_contrast(&entries);
        if !report.passed {
            return Err(Error::InvalidPartition(format!(
                "matrix is not a valid contrast (orthonormality {:e}, centering {:e})",
                report.orthonormality_deviation, report.centering_deviation
            )));
        }
        Ok(Self { entries, kind: ContrastKind::Custom })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn kind(&self) -> ContrastKind {
        self.kind
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// The orthonormal basis composition `eⱼ = C exp(vⱼ)`.
    pub fn basis_element(&self, j: usize) -> Composition {
        let col: Vec<f64> = self.entries.column(j).iter().copied().collect();
        from_log_parts(&col)
    }
}

fn check_contrast_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    Ok(())
}

/// Builds a contrast matrix of the requested kind; `sbp` is consulted only
/// for [`ContrastKind::UserSbp`].
pub fn build_contrast(dim: usize, kind: ContrastKind, sbp: Option<&[Vec<i8>]>) -> Result<ContrastMatrix> {
    let v = match kind {
        ContrastKind::Helmert | ContrastKind::Custom => ContrastMatrix::helmert(dim)?,
        ContrastKind::Pivot => ContrastMatrix::pivot(dim)?,
        ContrastKind::UserSbp => {
            let sbp = sbp.ok_or_else(|| Error::InvalidPartition("no partition supplied".into()))?;
            let v = ContrastMatrix::from_sbp(sbp)?;
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
            }
            v
        }
    };
    Ok(v)
}

/// Maximum deviations of a candidate matrix from `VᵀV = I` and
/// `VVᵀ = I − 𝟙𝟙ᵀ/D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastReport {
    pub rows: usize,
    pub cols: usize,
    pub shape_ok: bool,
    pub orthonormality_deviation: f64,
    pub centering_deviation: f64,
    pub passed: bool,
}

pub fn validate_contrast(v: &DMatrix<f64>) -> ContrastReport {
    let (rows, cols) = v.shape();
    let shape_ok = rows >= 2 && cols + 1 == rows;
    let gram = v.transpose() * v;
    let ortho = max_abs_deviation(&gram, |i, j| if i == j { 1.0 } else { 0.0 });
    let proj = v * v.transpose();
    let d = rows as f64;
    let centering = max_abs_deviation(&proj, |i, j| if i == j { 1.0 - 1.0 / d } else { -1.0 / d });
    let (ortho, centering) = if shape_ok { (ortho, centering) } else { (f64::INFINITY, f64::INFINITY) };
    ContrastReport {
        rows,
        cols,
        shape_ok,
        orthonormality_deviation: ortho,
        centering_deviation: centering,
        passed: shape_ok && ortho <= CONTRAST_TOL && centering <= CONTRAST_TOL,
    }
}

fn max_abs_deviation(m: &DMatrix<f64>, target: impl Fn(usize, usize) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let dev = (m[(i, j)] - target(i, j)).abs();
            // NaN entries must not pass.
            if dev.is_nan() {
                return f64::INFINITY;
            }
            worst = worst.max(dev);
        }
    }
    worst
}

/// Isometric log-ratio coordinates together with the basis that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct IlrCoords<'a> {
    pub z: Vec<f64>,
    pub contrast: &'a ContrastMatrix,
}

impl IlrCoords<'_> {
    pub fn to_composition(&self) -> Result<Composition> {
        ilr_inv(&self.z, self.contrast)
    }
}

/// `z = Vᵀ log x`, evaluated as `Vᵀ clr(x)` (identical for sum-zero columns).
pub fn ilr<'a>(x: &Composition, v: &'a ContrastMatrix) -> Result<IlrCoords<'a>> {
    if x.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim(), found: x.dim() });
    }
    let c = DVector::from_vec(clr_slice(&x.parts));
    let z = v.entries.tr_mul(&c);
    Ok(IlrCoords { z: z.iter().copied().collect(), contrast: v })
}

/// `x = C exp(V z)`.
pub fn ilr_inv(z: &[f64], v: &ContrastMatrix) -> Result<Composition> {
    if z.len() + 1 != v.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim() - 1, found: z.len() });
    }
    check_finite(z)?;
    let logs = &v.entries * DVector::from_column_slice(z);
    Ok(from_log_parts(logs.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn comp(p: &[f64]) -> Composition {
        Composition::from_slice(p).unwrap()
    }

    #[test]
    fn close_examples() {
        assert_eq!(close(&[2.0, 3.0, 5.0]).unwrap().parts(), &[0.2, 0.3, 0.5]);
        let n = close(&[1.0, 1.0, 1.0]).unwrap();
        for p in n.parts() {
            assert_abs_diff_eq!(*p, 1.0 / 3.0, epsilon = 1e-16);
        }
        let c = close(&[0.2, 0.3, 0.5]).unwrap();
        assert!(c.is_closed());
        assert_abs_diff_eq!(c.parts()[2], 0.5, epsilon = 1e-16);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(close(&[1.0, 0.0, 2.0]), Err(Error::NonPositivePart { index: 1, value: 0.0 }));
        assert!(matches!(close(&[1.0, -1.0]), Err(Error::NonPositivePart { .. })));
        assert_eq!(close(&[1.0]), Err(Error::DimensionTooSmall(1)));
        assert!(matches!(close(&[1.0, f64::NAN]), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn unclosed_input_records_flag() {
        let x = comp(&[2.0, 3.0, 5.0]);
        assert!(!x.is_closed());
        assert!(x.closed().is_closed());
    }

    #[test]
    fn perturb_examples() {
        let x = comp(&[0.2, 0.3, 0.5]);
        let n = Composition::neutral(3).unwrap();
        assert!(perturb(&x, &n).unwrap().approx_eq(&x, 1e-15));
        assert!(perturb(&x, &inverse(&x)).unwrap().approx_eq(&n, 1e-15));
        let p = perturb(&comp(&[0.5, 0.5]), &comp(&[0.25, 0.75])).unwrap();
        assert_abs_diff_eq!(p.parts()[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.parts()[1], 0.75, epsilon = 1e-15);
        assert!(matches!(perturb(&x, &comp(&[0.5, 0.5])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn power_examples() {
        let x = comp(&[0.2, 0.3, 0.5]);
        assert!(power(0.0, &x).unwrap().approx_eq(&Composition::neutral(3).unwrap(), 1e-15));
        assert!(power(2.0, &comp(&[0.5, 0.5])).unwrap().approx_eq(&comp(&[0.5, 0.5]), 1e-15));
        let p = power(2.0, &comp(&[0.2, 0.8])).unwrap();
        assert_abs_diff_eq!(p.parts()[0], 0.04 / 0.68, epsilon = 1e-15);
        assert_abs_diff_eq!(p.parts()[1], 0.64 / 0.68, epsilon = 1e-15);
        assert!(power(1.0, &comp(&[2.0, 3.0, 5.0])).unwrap().approx_eq(&x, 1e-15));
    }

    #[test]
    fn geometric_mean_examples() {
        assert_abs_diff_eq!(geometric_mean(&[1.0 / 3.0; 3]).unwrap(), 1.0 / 3.0, epsilon = 1e-16);
        assert_abs_diff_eq!(geometric_mean(&[0.2, 0.3, 0.5]).unwrap(), 0.310723250595386, epsilon = 1e-12);
        assert_abs_diff_eq!(geometric_mean(&[0.25, 0.25]).unwrap(), 0.25, epsilon = 1e-16);
        assert_eq!(geometric_mean(&[]), Err(Error::EmptySelection));
    }

    #[test]
    fn clr_examples() {
        let n = Composition::neutral(3).unwrap();
        assert!(clr(&n).coords().iter().all(|c| c.abs() < 1e-16));
        let v = clr(&comp(&[0.2, 0.3, 0.5]));
        let expected = [-0.440_585_279_994_106, -0.035_120_171_885_942, 0.475_705_451_880_049];
        for (a, b) in v.coords().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert!(clr_inv(&Tangent::zero(3)).unwrap().approx_eq(&n, 1e-16));
    }

    #[test]
    fn clr_inv_rejects_off_plane_vectors() {
        assert!(Tangent::new(vec![1.0, 0.0, 0.0]).is_err());
        let t = Tangent::project(vec![1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(t.coords().iter().sum::<f64>(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn alr_examples() {
        let n = Composition::neutral(4).unwrap();
        assert!(alr(&n).as_slice().iter().all(|t| t.abs() < 1e-15));
        let t = alr(&comp(&[0.2, 0.3, 0.5]));
        assert_abs_diff_eq!(t.as_slice()[0], 0.4f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.as_slice()[1], 0.6f64.ln(), epsilon = 1e-15);
        let x = comp(&[3.0, 1.0, 7.0, 2.0]);
        assert!(alr_inv(&alr(&x)).approx_eq(&x, 1e-15));
    }

    #[test]
    fn helmert_three_parts() {
        let v = ContrastMatrix::helmert(3).unwrap();
        let e = v.entries();
        let s2 = 2f64.sqrt();
        let s6 = 6f64.sqrt();
        let expected = [[1.0 / s2, 1.0 / s6], [-1.0 / s2, 1.0 / s6], [0.0, -2.0 / s6]];
        for i in 0..3 {
            for j in 0..2 {
                assert_abs_diff_eq!(e[(i, j)], expected[i][j], epsilon = 1e-15);
            }
        }
        let r = validate_contrast(e);
        assert!(r.passed);
        assert!(r.orthonormality_deviation < 1e-14 && r.centering_deviation < 1e-14);
    }

    #[test]
    fn two_parts_single_column_up_to_sign() {
        let h = 0.5f64.sqrt();
        for v in [ContrastMatrix::helmert(2).unwrap(), ContrastMatrix::pivot(2).unwrap()] {
            let c = v.entries().column(0);
            assert_abs_diff_eq!(c[0].abs(), h, epsilon = 1e-15);
            assert_abs_diff_eq!(c[0] + c[1], 0.0, epsilon = 1e-15);
        }
        let sbp = ContrastMatrix::from_sbp(&[vec![-1, 1]]).unwrap();
        assert_abs_diff_eq!(sbp.entries()[(0, 0)], -h, epsilon = 1e-15);
    }

    #[test]
    fn sbp_balances() {
        let v = ContrastMatrix::from_sbp(&[vec![1, -1, -1], vec![0, 1, -1]]).unwrap();
        assert_eq!(v.kind(), ContrastKind::UserSbp);
        assert!(validate_contrast(v.entries()).passed);
        assert_abs_diff_eq!(v.entries()[(0, 0)], (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.entries()[(1, 0)], -(1.0f64 / 6.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn sbp_rejects_bad_partitions() {
        // second row splits parts from different groups
        let bad = [vec![1, 1, -1, -1], vec![1, -1, 0, 0], vec![0, 1, -1, 0]];
        assert!(matches!(ContrastMatrix::from_sbp(&bad), Err(Error::InvalidPartition(_))));
        // first row does not cover every part
        assert!(ContrastMatrix::from_sbp(&[vec![1, -1, 0], vec![1, 1, -1]]).is_err());
        // repeated split
        assert!(ContrastMatrix::from_sbp(&[vec![1, -1, -1], vec![1, -1, -1]]).is_err());
        assert!(ContrastMatrix::from_sbp(&[vec![1, 2, -1], vec![0, 1, -1]]).is_err());
        assert!(ContrastMatrix::from_sbp(&[vec![1, -1, -1]]).is_err());
    }

    #[test]
    fn validate_flags_counterexamples() {
        // identity padded with a zero row: orthonormal columns but not centred
        let mut m = DMatrix::zeros(3, 2);
        m[(0, 0)] = 1.0;
        m[(1, 1)] = 1.0;
        let r = validate_contrast(&m);
        assert!(!r.passed && r.centering_deviation > 0.1);
        // scaled helmert breaks orthonormality
        let m = ContrastMatrix::helmert(3).unwrap().entries() * 2.0;
        let r = validate_contrast(&m);
        assert!(!r.passed && r.orthonormality_deviation > 1.0);
        // a column that does not sum to zero
        let mut m = ContrastMatrix::helmert(3).unwrap().entries().clone();
        m[(2, 0)] = 0.1;
        let r = validate_contrast(&m);
        assert!(!r.passed && r.centering_deviation > 1e-3);
        // wrong shape
        assert!(!validate_contrast(&DMatrix::zeros(3, 3)).passed);
    }

    #[test]
    fn ilr_examples() {
        let v = ContrastMatrix::helmert(2).unwrap();
        let n = Composition::neutral(2).unwrap();
        assert!(ilr(&n, &v).unwrap().z.iter().all(|z| z.abs() < 1e-16));
        let x = comp(&[0.5, 0.5]);
        let y = comp(&[0.25, 0.75]);
        let zx = ilr(&x, &v).unwrap().z;
        let zy = ilr(&y, &v).unwrap().z;
        let d2: f64 = zx.iter().zip(&zy).map(|(a, b)| (a - b).powi(2)).sum();
        assert_abs_diff_eq!(d2, 0.5 * 3f64.ln().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(d2, 0.603474, epsilon = 1e-6);
        let w = comp(&[1.0, 2.0, 3.0]);
        assert!(matches!(ilr(&w, &v), Err(Error::DimensionMismatch { .. })));
        let v3 = ContrastMatrix::pivot(3).unwrap();
        assert!(ilr(&w, &v3).unwrap().to_composition().unwrap().approx_eq(&w, 1e-15));
    }

    #[test]
    fn aitchison_distance_examples() {
        let x = comp(&[0.2, 0.3, 0.5]);
        assert_eq!(aitchison_distance(&x, &x).unwrap(), 0.0);
        let scaled = comp(&[2.0, 3.0, 5.0]);
        assert!(aitchison_distance(&x, &scaled).unwrap() < 1e-15);
        let d2 = aitchison_distance_sq(&comp(&[0.5, 0.5]), &comp(&[0.25, 0.75])).unwrap();
        assert_abs_diff_eq!(d2, 0.603474, epsilon = 1e-6);
        let n = aitchison_norm(&x);
        assert_abs_diff_eq!(n * n, aitchison_inner(&x, &x).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn basis_elements_are_orthonormal() {
        let v = ContrastMatrix::helmert(4).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let ip = aitchison_inner(&v.basis_element(i), &v.basis_element(j)).unwrap();
                assert_abs_diff_eq!(ip, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
    }
}
