//! Subcompositions and amalgamations, with the entropy, Aitchison-norm and
//! Aitchison-distance decompositions they induce and the monotonicity
//! inequalities that follow from them.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::simplex::{
    check_same_dim, close_slice, distance_sq_slice, geometric_mean_slice, norm_sq_slice, Composition,
};

/// Tolerance for entropy identities.
pub const ENTROPY_RESIDUAL_TOL: f64 = 1e-12;
/// Tolerance for Aitchison norm and distance identities.
pub const NORM_RESIDUAL_TOL: f64 = 1e-10;
/// Smallest accepted inequality margin.
pub const MARGIN_TOL: f64 = -1e-12;

/// A proper, nonempty subset `𝒜` of the part indices `{0, …, D−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartSubset {
    indices: Vec<usize>,
    complement: Vec<usize>,
    dim: usize,
}

impl PartSubset {
    pub fn new(indices: &[usize], dim: usize) -> Result<Self> {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() {
            return Err(Error::InvalidSubset("duplicate indices".into()));
        }
        if let Some(&i) = sorted.iter().find(|&&i| i >= dim) {
            return Err(Error::InvalidSubset(format!("index {i} out of range for {dim} parts")));
        }
        if sorted.is_empty() || sorted.len() >= dim {
            return Err(Error::InvalidSubset(format!(
                "subset size {} must lie in [1, {}]",
                sorted.len(),
                dim.saturating_sub(1)
            )));
        }
        let complement = (0..dim).filter(|i| sorted.binary_search(i).is_err()).collect();
        Ok(Self { indices: sorted, complement, dim })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    /// `a = |𝒜|`.
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, x: &Composition) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::InvalidSubset(format!(
                "subset is defined for {} parts, composition has {}",
                self.dim,
                x.dim()
            )));
        }
        Ok(())
    }
}

fn select(parts: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| parts[i]).collect()
}

/// Named summands of an identity `lhs = Σ terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub lhs: f64,
    pub terms: Vec<(&'static str, f64)>,
    pub residual: f64,
}

impl DecompositionReport {
    fn new(lhs: f64, terms: Vec<(&'static str, f64)>) -> Self {
        let residual = lhs - terms.iter().map(|(_, v)| v).sum::<f64>();
        Self { lhs, terms, residual }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

/// The closed subcomposition `C x_𝒜`.
pub fn subcomposition(x: &Composition, subset: &PartSubset) -> Result<Composition> {
    subset.check(x)?;
    if subset.size() < 2 {
        return Err(Error::InvalidSubset("a subcomposition needs at least 2 parts".into()));
    }
    Ok(Composition::closed_unchecked(close_slice(&select(x.parts(), subset.indices()))))
}

/// Amalgamated mass `s(x_𝒜) = Σ_{i∈𝒜} xᵢ` of the closed composition.
pub fn amalgamated_mass(x: &Composition, subset: &PartSubset) -> Result<f64> {
    subset.check(x)?;
    let c = x.closed();
    Ok(subset.indices().iter().map(|&i| c.parts()[i]).sum())
}

/// `(x_{𝒟∖𝒜}, s(x_𝒜))`: complement parts in their original order, then the
/// amalgamated part.
pub fn amalgamate(x: &Composition, subset: &PartSubset) -> Result<Composition> {
    subset.check(x)?;
    let c = x.closed();
    Ok(Composition::closed_unchecked(amalgamated_parts(c.parts(), subset)))
}

fn amalgamated_parts(closed: &[f64], subset: &PartSubset) -> Vec<f64> {
    let mut out = select(closed, subset.complement());
    out.push(subset.indices().iter().map(|&i| closed[i]).sum());
    out
}

fn entropy_slice(p: &[f64]) -> f64 {
    -p.iter().map(|v| v * v.ln()).sum::<f64>()
}

/// Shannon entropy `H(x) = −Σ xᵢ log xᵢ` of the closed composition.
pub fn shannon_entropy(x: &Composition) -> f64 {
    entropy_slice(x.closed().parts())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMode {
    /// `H = (1−s) H(C x_{𝒟∖𝒜}) + s H(C x_𝒜) + H(s, 1−s)`.
    Subcomposition,
    /// `H = H(x_{𝒟∖𝒜}, s) + s H(C x_𝒜)`.
    Amalgamation,
}

pub fn entropy_decomposition(x: &Composition, subset: &PartSubset, mode: EntropyMode) -> Result<DecompositionReport> {
    subset.check(x)?;
    let c = x.closed();
    let p = c.parts();
    let inside = select(p, subset.indices());
    let s: f64 = inside.iter().sum();
    let h_inside = entropy_slice(&close_slice(&inside));
    let terms = match mode {
        EntropyMode::Subcomposition => {
            let outside = select(p, subset.complement());
            let h_outside = entropy_slice(&close_slice(&outside));
            vec![
                ("complement", (1.0 - s) * h_outside),
                ("subset", s * h_inside),
                ("binary", entropy_slice(&[s, 1.0 - s])),
            ]
        }
        EntropyMode::Amalgamation => {
            vec![("amalgamated", entropy_slice(&amalgamated_parts(p, subset))), ("coarse_graining_loss", s * h_inside)]
        }
    };
    Ok(DecompositionReport::new(entropy_slice(p), terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationMode {
    /// Split into the two subcompositions.
    Subcomposition,
    /// Replace `x_𝒜` by its sum.
    Amalgamation,
    /// Replace `x_𝒜` by its geometric mean.
    GeometricMean,
}

impl AggregationMode {
    pub fn name(self) -> &'static str {
        match self {
            AggregationMode::Subcomposition => "subcomp",
            AggregationMode::Amalgamation => "amalgam",
            AggregationMode::GeometricMean => "geomean",
        }
    }
}

/// `a(D−a)/D`.
pub fn split_coefficient(dim: usize, a: usize) -> f64 {
    let (d, a) = (dim as f64, a as f64);
    a * (d - a) / d
}

/// `(D−a)/(D−a+1)`.
pub fn join_coefficient(dim: usize, a: usize) -> f64 {
    let r = (dim - a) as f64;
    r / (r + 1.0)
}

/// Interaction coefficient of the geometric-mean decompositions,
/// `a(D−a)/D − (D−a)/(D−a+1)`.
pub fn interaction_coefficient(dim: usize, a: usize) -> f64 {
    split_coefficient(dim, a) - join_coefficient(dim, a)
}

/// Exact sign of [`interaction_coefficient`] for `1 ≤ a ≤ D`, from its
/// integer numerator `(D−a)(a(D−a+1) − D)`.
pub fn interaction_coefficient_sign(dim: usize, a: usize) -> Ordering {
    assert!(a >= 1 && a <= dim, "need 1 ≤ a ≤ D");
    let (d, a) = (dim as i128, a as i128);
    ((d - a) * (a * (d - a + 1) - d)).cmp(&0)
}

/// Decomposition of `‖x‖²_A` relative to the subset `𝒜`.
pub fn norm_decomposition(x: &Composition, subset: &PartSubset, mode: AggregationMode) -> Result<DecompositionReport> {
    subset.check(x)?;
    let c = x.closed();
    let p = c.parts();
    let (d, a) = (subset.dim(), subset.size());
    let inside = select(p, subset.indices());
    let outside = select(p, subset.complement());
    let g_in = geometric_mean_slice(&inside);
    let g_out = geometric_mean_slice(&outside);
    let balance = (g_out / g_in).ln();
    let subset_norm = norm_sq_slice(&inside);
    let terms = match mode {
        AggregationMode::Subcomposition => vec![
            ("complement_norm", norm_sq_slice(&outside)),
            ("subset_norm", subset_norm),
            ("interaction", split_coefficient(d, a) * balance.powi(2)),
        ],
        AggregationMode::Amalgamation => {
            let s: f64 = inside.iter().sum();
            let mut coarse = outside.clone();
            coarse.push(s);
            vec![
                ("amalgamated_norm", norm_sq_slice(&coarse)),
                ("subset_norm", subset_norm),
                ("interaction", split_coefficient(d, a) * balance.powi(2)),
                ("amalgamation_correction", -join_coefficient(d, a) * (g_out / s).ln().powi(2)),
            ]
        }
        AggregationMode::GeometricMean => {
            let mut coarse = outside.clone();
            coarse.push(g_in);
            vec![
                ("aggregated_norm", norm_sq_slice(&coarse)),
                ("subset_norm", subset_norm),
                ("interaction", interaction_coefficient(d, a) * balance.powi(2)),
            ]
        }
    };
    Ok(DecompositionReport::new(norm_sq_slice(p), terms))
}

/// Decomposition of `d_A²(x, y)` after aggregating `𝒜` in both
/// compositions, each from its own parts.
///
/// Only [`AggregationMode::Amalgamation`] and
/// [`AggregationMode::GeometricMean`] are meaningful here; the
/// subcomposition split is the `geomean` identity's first step and is
/// rejected.
pub fn distance_decomposition(
    x: &Composition,
    y: &Composition,
    subset: &PartSubset,
    mode: AggregationMode,
) -> Result<DecompositionReport> {
    check_same_dim(x, y)?;
    subset.check(x)?;
    let (cx, cy) = (x.closed(), y.closed());
    let (px, py) = (cx.parts(), cy.parts());
    let (d, a) = (subset.dim(), subset.size());
    let (xa, ya) = (select(px, subset.indices()), select(py, subset.indices()));
    let (xo, yo) = (select(px, subset.complement()), select(py, subset.complement()));
    let (gxa, gya) = (geometric_mean_slice(&xa), geometric_mean_slice(&ya));
    let (gxo, gyo) = (geometric_mean_slice(&xo), geometric_mean_slice(&yo));
    let balance = (gxo / gxa).ln() - (gyo / gya).ln();
    let subset_term = distance_sq_slice(&xa, &ya);
    let lhs = distance_sq_slice(px, py);
    let terms = match mode {
        AggregationMode::Amalgamation => {
            let (sx, sy): (f64, f64) = (xa.iter().sum(), ya.iter().sum());
            let coarse = distance_sq_slice(&amalgamated_parts(px, subset), &amalgamated_parts(py, subset));
            let pivot = (gxo / sx).ln() - (gyo / sy).ln();
            vec![
                ("amalgamated_distance", coarse),
                ("subset_distance", subset_term),
                ("interaction", split_coefficient(d, a) * balance.powi(2)),
                ("amalgamation_correction", -join_coefficient(d, a) * pivot.powi(2)),
            ]
        }
        AggregationMode::GeometricMean => {
            let mut ax = xo.clone();
            ax.push(gxa);
            let mut ay = yo.clone();
            ay.push(gya);
            vec![
                ("aggregated_distance", distance_sq_slice(&ax, &ay)),
                ("subset_distance", subset_term),
                ("interaction", interaction_coefficient(d, a) * balance.powi(2)),
            ]
        }
        AggregationMode::Subcomposition => {
            return Err(Error::InvalidSubset("distance decomposition supports amalgam and geomean modes".into()))
        }
    };
    Ok(DecompositionReport::new(lhs, terms))
}

/// Pre- and post-aggregation values of `d_A²` and `D_φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityAudit {
    pub aitchison_before: f64,
    pub aitchison_after: f64,
    /// `d_A²(x, y) − d_A²(amalgamated)`; nonnegative.
    pub aitchison_margin: f64,
    pub kl_before: f64,
    pub kl_after: f64,
    /// `D_φ(x‖y) − D_φ(amalgamated)`; nonnegative.
    pub kl_margin: f64,
    /// `d_A²(x, y)` minus the geometric-mean aggregated and subset
    /// distances; nonnegative.
    pub geomean_margin: f64,
}

impl MonotonicityAudit {
    pub fn passed(&self) -> bool {
        self.aitchison_margin >= MARGIN_TOL && self.kl_margin >= MARGIN_TOL && self.geomean_margin >= MARGIN_TOL
    }
}

pub fn monotonicity_audit(x: &Composition, y: &Composition, subset: &PartSubset) -> Result<MonotonicityAudit> {
    check_same_dim(x, y)?;
    subset.check(x)?;
    let (cx, cy) = (x.closed(), y.closed());
    let (px, py) = (cx.parts(), cy.parts());
    let (ax, ay) = (amalgamated_parts(px, subset), amalgamated_parts(py, subset));
    let aitchison_before = distance_sq_slice(px, py);
    let aitchison_after = distance_sq_slice(&ax, &ay);
    let kl = |p: &[f64], q: &[f64]| -> f64 { p.iter().zip(q).map(|(a, b)| a * (a / b).ln()).sum() };
    let kl_before = kl(px, py);
    let kl_after = kl(&ax, &ay);
    let geo = distance_decomposition(x, y, subset, AggregationMode::GeometricMean)?;
    let geomean_margin =
        geo.lhs - geo.term("aggregated_distance").unwrap_or(0.0) - geo.term("subset_distance").unwrap_or(0.0);
    Ok(MonotonicityAudit {
        aitchison_before,
        aitchison_after,
        aitchison_margin: aitchison_before - aitchison_after,
        kl_before,
        kl_after,
        kl_margin: kl_before - kl_after,
        geomean_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn comp(p: &[f64]) -> Composition {
        Composition::from_slice(p).unwrap()
    }

    fn first_two(d: usize) -> PartSubset {
        PartSubset::new(&[0, 1], d).unwrap()
    }

    #[test]
    fn subset_validation() {
        assert!(PartSubset::new(&[], 3).is_err());
        assert!(PartSubset::new(&[0, 1, 2], 3).is_err());
        assert!(PartSubset::new(&[0, 0], 3).is_err());
        assert!(PartSubset::new(&[3], 3).is_err());
        let s = PartSubset::new(&[2, 0], 4).unwrap();
        assert_eq!(s.indices(), &[0, 2]);
        assert_eq!(s.complement(), &[1, 3]);
        let x = comp(&[0.5, 0.5]);
        assert!(matches!(amalgamate(&x, &s), Err(Error::InvalidSubset(_))));
    }

    #[test]
    fn subcomposition_examples() {
        let x = comp(&[0.25, 0.25, 0.5]);
        assert_eq!(subcomposition(&x, &first_two(3)).unwrap().parts(), &[0.5, 0.5]);
        let n = Composition::neutral(4).unwrap();
        let s = subcomposition(&n, &PartSubset::new(&[0, 1, 3], 4).unwrap()).unwrap();
        assert!(s.approx_eq(&Composition::neutral(3).unwrap(), 1e-15));
        let y = comp(&[0.75, 0.75, 1.5]);
        assert_eq!(subcomposition(&y, &first_two(3)).unwrap(), subcomposition(&x, &first_two(3)).unwrap());
    }

    #[test]
    fn amalgamate_examples() {
        let x = comp(&[0.25, 0.25, 0.5]);
        let a = amalgamate(&x, &first_two(3)).unwrap();
        assert_eq!(a.parts(), &[0.5, 0.5]);
        assert_eq!(amalgamated_mass(&x, &first_two(3)).unwrap(), 0.5);
        let y = comp(&[0.1, 0.2, 0.3, 0.4]);
        let single = amalgamate(&y, &PartSubset::new(&[1], 4).unwrap()).unwrap();
        assert_eq!(single.parts(), &[0.1, 0.3, 0.4, 0.2]);
        let big = amalgamate(&y, &PartSubset::new(&[0, 2, 3], 4).unwrap()).unwrap();
        assert_abs_diff_eq!(big.parts().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(shannon_entropy(&Composition::neutral(3).unwrap()), 3f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(shannon_entropy(&comp(&[0.5, 0.5])), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(shannon_entropy(&comp(&[0.25, 0.25, 0.5])), 1.5 * 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn entropy_decomposition_examples() {
        let x = comp(&[0.25, 0.25, 0.5]);
        let ln2 = 2f64.ln();
        let r = entropy_decomposition(&x, &first_two(3), EntropyMode::Amalgamation).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.5 * ln2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.term("amalgamated").unwrap(), ln2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.term("coarse_graining_loss").unwrap(), 0.5 * ln2, epsilon = 1e-15);
        assert!(r.residual.abs() <= ENTROPY_RESIDUAL_TOL);
        let r = entropy_decomposition(&x, &first_two(3), EntropyMode::Subcomposition).unwrap();
        assert_abs_diff_eq!(r.term("complement").unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.term("subset").unwrap(), 0.5 * ln2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.term("binary").unwrap(), ln2, epsilon = 1e-15);
        assert!(r.residual.abs() <= ENTROPY_RESIDUAL_TOL);
        let n = Composition::neutral(5).unwrap();
        let s = PartSubset::new(&[1, 3, 4], 5).unwrap();
        for mode in [EntropyMode::Amalgamation, EntropyMode::Subcomposition] {
            assert!(entropy_decomposition(&n, &s, mode).unwrap().residual.abs() <= ENTROPY_RESIDUAL_TOL);
        }
    }

    #[test]
    fn norm_decomposition_at_neutral_is_zero() {
        let n = Composition::neutral(5).unwrap();
        let s = PartSubset::new(&[1, 3], 5).unwrap();
        for mode in [AggregationMode::Subcomposition, AggregationMode::Amalgamation, AggregationMode::GeometricMean] {
            let r = norm_decomposition(&n, &s, mode).unwrap();
            assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-28);
            for (name, v) in &r.terms {
                // the amalgamated part s = 2/5 differs from the others, so those
                // two terms cancel rather than vanish
                let cancels = mode == AggregationMode::Amalgamation
                    && (*name == "amalgamated_norm" || *name == "amalgamation_correction");
                if !cancels {
                    assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-28);
                }
            }
            assert!(r.residual.abs() < 1e-14);
        }
    }

    #[test]
    fn norm_decomposition_identities() {
        let x = comp(&[0.05, 0.3, 0.15, 0.2, 0.3]);
        let s = PartSubset::new(&[0, 2, 3], 5).unwrap();
        for mode in [AggregationMode::Subcomposition, AggregationMode::Amalgamation, AggregationMode::GeometricMean] {
            let r = norm_decomposition(&x, &s, mode).unwrap();
            assert!(r.residual.abs() < NORM_RESIDUAL_TOL, "{mode:?}: {r:?}");
            assert!(r.term("interaction").unwrap() >= 0.0);
        }
    }

    #[test]
    fn distance_decomposition_identities() {
        let x = comp(&[0.05, 0.3, 0.15, 0.2, 0.3]);
        let y = comp(&[0.25, 0.1, 0.15, 0.4, 0.1]);
        let s = PartSubset::new(&[1, 4], 5).unwrap();
        for mode in [AggregationMode::Amalgamation, AggregationMode::GeometricMean] {
            let r = distance_decomposition(&x, &y, &s, mode).unwrap();
            assert!(r.residual.abs() < NORM_RESIDUAL_TOL, "{mode:?}: {r:?}");
            let same = distance_decomposition(&x, &x, &s, mode).unwrap();
            assert!(same.terms.iter().all(|(_, v)| v.abs() < 1e-28));
        }
        assert!(distance_decomposition(&x, &y, &s, AggregationMode::Subcomposition).is_err());
        assert!(distance_decomposition(&x, &comp(&[0.5, 0.5]), &s, AggregationMode::GeometricMean).is_err());
    }

    #[test]
    fn coefficient_sign_table() {
        for d in 2..=50usize {
            for a in 1..=d {
                let sign = interaction_coefficient_sign(d, a);
                if a == 1 || a == d {
                    assert_eq!(sign, Ordering::Equal, "D={d} a={a}");
                    assert_abs_diff_eq!(interaction_coefficient(d, a), 0.0, epsilon = 1e-14);
                } else {
                    assert_eq!(sign, Ordering::Greater, "D={d} a={a}");
                    assert!(interaction_coefficient(d, a) > 0.0);
                }
            }
        }
    }

    #[test]
    fn audit_trivial_cases() {
        let x = comp(&[0.05, 0.3, 0.15, 0.5]);
        let s = PartSubset::new(&[0, 3], 4).unwrap();
        let r = monotonicity_audit(&x, &x, &s).unwrap();
        assert_eq!((r.aitchison_margin, r.kl_margin), (0.0, 0.0));
        assert!(r.passed());
        let y = comp(&[0.25, 0.1, 0.15, 0.5]);
        let r = monotonicity_audit(&x, &y, &PartSubset::new(&[2], 4).unwrap()).unwrap();
        assert_abs_diff_eq!(r.aitchison_margin, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.kl_margin, 0.0, epsilon = 1e-15);
        let r = monotonicity_audit(&x, &y, &s).unwrap();
        assert!(r.passed() && r.aitchison_margin > 0.0 && r.kl_margin > 0.0);
    }
}
