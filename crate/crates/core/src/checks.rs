//! Numerical checks of the combination and finite-sum frame criteria.
//!
//! Every "frame" verdict is taken on the span of the reference family (the original
//! system, or the common span of the summed systems), with full-space bounds reported
//! next to it. Each report states whether the criterion was honored on that instance.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combination::{
    build_combined, combine_general, compute_mu_nu, finite_sum, CoefficientFamily,
    CombinationMatrix, IndexPartition,
};
use crate::error::{Error, Result};
use crate::spectral::{
    range_basis, relative_lower_bound, restricted_bounds, synthesis_matrix, RangeBasis,
};
use crate::wavepacket::{frame_bounds, Family, FrameBounds, Label, DEFAULT_REL_TOL};

/// Identifiers of the checks, as they appear in configs and reports.
pub mod ids {
    pub const FRAME_BOUNDS: &str = "frame-bounds";
    /// combined family is a frame iff it dominates a multiple of the original
    pub const COMBINATION_DOMINANCE: &str = "combination-dominance";
    /// block-wise diagonal dominance of the coefficients suffices
    pub const DIAGONAL_DOMINANCE: &str = "diagonal-dominance";
    /// coefficient Gram matrix bounds `(mu A, nu B)`
    pub const GRAM_GERSHGORIN: &str = "gram-gershgorin";
    /// weighted sum is a frame iff it dominates one of the summands
    pub const FINITE_SUM_IFF: &str = "finite-sum-iff";
    /// one summand outweighs the others
    pub const FINITE_SUM_SUFFICIENT: &str = "finite-sum-sufficient";
    /// squared-weight lower bound exceeds the pivot term
    pub const FINITE_SUM_CROSS_TERM: &str = "finite-sum-cross-term";
    /// relations between summand bounds and the bounds of the sum
    pub const FINITE_SUM_BOUND_RELATIONS: &str = "finite-sum-bound-relations";

    pub const ALL: &[&str] = &[
        FRAME_BOUNDS,
        COMBINATION_DOMINANCE,
        DIAGONAL_DOMINANCE,
        GRAM_GERSHGORIN,
        FINITE_SUM_IFF,
        FINITE_SUM_SUFFICIENT,
        FINITE_SUM_CROSS_TERM,
        FINITE_SUM_BOUND_RELATIONS,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tolerances {
    /// relative frame threshold and strict-inequality margin
    pub frame_tol: f64,
    /// absolute slack on predicted bounds
    pub float_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { frame_tol: DEFAULT_REL_TOL, float_tol: 1e-8 }
    }
}

/// What kind of claim a check tests, which fixes how `consistent` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimKind {
    /// condition holds iff frame
    Equivalence,
    /// condition implies frame
    Sufficiency,
    /// inequalities that must hold on every frame instance
    Relation,
    /// no claim, bounds only
    Measurement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PredictedBounds {
    pub lower: f64,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremReport {
    pub theorem_id: String,
    pub variant: Option<String>,
    pub claim: ClaimKind,
    pub seed: Option<u64>,
    pub condition_values: BTreeMap<String, f64>,
    pub predicted_bounds: Option<PredictedBounds>,
    /// bounds on the reference span
    pub actual_bounds: FrameBounds,
    /// bounds on the whole ambient window
    pub ambient_bounds: FrameBounds,
    pub verdict_condition: bool,
    pub verdict_frame: bool,
    pub consistent: bool,
    /// condition value within the tolerance band around zero; not counted as evidence
    pub borderline: bool,
    pub notes: Vec<String>,
}

impl TheoremReport {
    fn new(id: &str, claim: ClaimKind, actual: FrameBounds, ambient: FrameBounds) -> Self {
        Self {
            theorem_id: id.to_string(),
            variant: None,
            claim,
            seed: None,
            condition_values: BTreeMap::new(),
            predicted_bounds: None,
            actual_bounds: actual,
            ambient_bounds: ambient,
            verdict_condition: false,
            verdict_frame: actual.is_frame,
            consistent: true,
            borderline: false,
            notes: Vec::new(),
        }
    }

    fn value(&mut self, name: &str, v: f64) {
        self.condition_values.insert(name.to_string(), v);
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// A violation is an inconsistent, non-borderline instance.
    pub fn is_violation(&self) -> bool {
        !self.consistent && !self.borderline
    }

    pub const CSV_HEADER: &'static [&'static str] = &[
        "theoremId",
        "variant",
        "seed",
        "verdictCondition",
        "verdictFrame",
        "consistent",
        "borderline",
        "actualLower",
        "actualUpper",
        "ambientLower",
        "ambientUpper",
        "predictedLower",
        "predictedUpper",
        "conditionValues",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let values = self
            .condition_values
            .iter()
            .map(|(k, v)| format!("{k}={}", fmt_f64(*v)))
            .collect::<Vec<_>>()
            .join(";");
        vec![
            self.theorem_id.clone(),
            self.variant.clone().unwrap_or_default(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.verdict_condition.to_string(),
            self.verdict_frame.to_string(),
            self.consistent.to_string(),
            self.borderline.to_string(),
            fmt_f64(self.actual_bounds.lower),
            fmt_f64(self.actual_bounds.upper),
            fmt_f64(self.ambient_bounds.lower),
            fmt_f64(self.ambient_bounds.upper),
            opt(self.predicted_bounds.map(|p| p.lower)),
            opt(self.predicted_bounds.and_then(|p| p.upper)),
            values,
        ]
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn reference_span(family: &Family<Label>) -> Result<RangeBasis> {
    let basis = range_basis(&synthesis_matrix(&family.vectors)?);
    if basis.rank() == 0 {
        return Err(Error::Precondition(
            "reference family is not a frame for its span: every vector vanishes".into(),
        ));
    }
    Ok(basis)
}

fn bounds_on(basis: &RangeBasis, x: &DMatrix<Complex64>, tol: f64) -> FrameBounds {
    let (lo, hi) = restricted_bounds(basis, x);
    FrameBounds::from_extremes(lo, hi, tol)
}

fn own_bounds(basis: &RangeBasis, tol: f64) -> FrameBounds {
    let top = basis.singular_values[0].powi(2);
    let bottom = basis.singular_values[basis.rank() - 1].powi(2);
    FrameBounds::from_extremes(bottom, top, tol)
}

/// Frame bounds of one family on its span and on the ambient window.
pub fn check_frame_bounds(family: &Family<Label>, tol: Tolerances) -> Result<TheoremReport> {
    let basis = reference_span(family)?;
    let span = own_bounds(&basis, tol.frame_tol);
    let ambient = frame_bounds(&family.vectors, tol.frame_tol)?;
    let mut r = TheoremReport::new(ids::FRAME_BOUNDS, ClaimKind::Measurement, span, ambient);
    r.value("rank", basis.rank() as f64);
    r.value("dimension", family.window().map(|w| w.dim()).unwrap_or(0) as f64);
    r.value("count", family.len() as f64);
    r.verdict_condition = span.is_frame;
    Ok(r)
}

/// Largest `lambda` with `sum |<psi_b, f>|^2 >= lambda sum |<g_i, f>|^2` on the span of
/// the original family, compared with the frame verdict of the combined family there.
pub fn check_combination_dominance_families(
    original: &Family<Label>,
    combined: &Family<Label>,
    tol: Tolerances,
) -> Result<TheoremReport> {
    let basis = reference_span(original)?;
    let x = synthesis_matrix(&combined.vectors)?;
    let lambda = relative_lower_bound(&basis, &x);
    let actual = bounds_on(&basis, &x, tol.frame_tol);
    let ambient = frame_bounds(&combined.vectors, tol.frame_tol)?;
    let mut r = TheoremReport::new(ids::COMBINATION_DOMINANCE, ClaimKind::Equivalence, actual, ambient);
    r.value("lambda", lambda);
    r.value("rank", basis.rank() as f64);
    r.verdict_condition = lambda > tol.frame_tol;
    r.consistent = r.verdict_condition == r.verdict_frame;
    r.borderline = lambda.abs() < 10.0 * tol.frame_tol;
    Ok(r)
}

pub fn check_combination_dominance(
    system: &Family<Label>,
    partition: &IndexPartition,
    coeffs: &CoefficientFamily,
    tol: Tolerances,
) -> Result<TheoremReport> {
    let combined = build_combined(system, partition, coeffs)?;
    check_combination_dominance_families(system, &combined, tol)
}

/// How the cross-term pair sum of the diagonal-dominance condition counts pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairCounting {
    /// each unequal pair `(i, i')` and `(i', i)` counted separately
    #[default]
    Ordered,
    Unordered,
}

/// `delta = min_blocks (sum |alpha|^2 - sum_{pairs} |alpha| |alpha'|)` together with
/// confinement of `|alpha|`; the condition is claimed to make the combined family a frame.
pub fn check_diagonal_dominance(
    system: &Family<Label>,
    partition: &IndexPartition,
    coeffs: &CoefficientFamily,
    pairs: PairCounting,
    tol: Tolerances,
) -> Result<TheoremReport> {
    let combined = build_combined(system, partition, coeffs)?;
    let basis = reference_span(system)?;
    let original = own_bounds(&basis, tol.frame_tol);
    let x = synthesis_matrix(&combined.vectors)?;
    let actual = bounds_on(&basis, &x, tol.frame_tol);
    let ambient = frame_bounds(&combined.vectors, tol.frame_tol)?;

    let factor = match pairs {
        PairCounting::Ordered => 2.0,
        PairCounting::Unordered => 1.0,
    };
    let mut delta = f64::INFINITY;
    for (_, members) in partition.blocks() {
        let mags: Vec<f64> = members
            .iter()
            .map(|m| coeffs.get(m).expect("checked by build_combined").norm())
            .collect();
        let mass: f64 = mags.iter().map(|a| a * a).sum();
        let mut cross = 0.0;
        for i in 0..mags.len() {
            for l in i + 1..mags.len() {
                cross += mags[i] * mags[l];
            }
        }
        delta = delta.min(mass - factor * cross);
    }
    let mags: Vec<f64> = system.labels.iter().map(|l| coeffs.get(l).unwrap().norm()).collect();
    let inf = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let sup = mags.iter().copied().fold(0.0, f64::max);
    let confined = inf > 0.0 && sup.is_finite();

    let mut r = TheoremReport::new(ids::DIAGONAL_DOMINANCE, ClaimKind::Sufficiency, actual, ambient);
    r.variant = Some(match pairs {
        PairCounting::Ordered => "ordered".into(),
        PairCounting::Unordered => "unordered".into(),
    });
    r.value("delta", delta);
    r.value("infAbsAlpha", inf);
    r.value("supAbsAlpha", sup);
    r.value("maxBlockSize", partition.max_block_size() as f64);
    r.value("blockCount", partition.len() as f64);
    r.value("rank", basis.rank() as f64);
    r.verdict_condition = delta > tol.frame_tol && confined && original.is_frame;
    r.consistent = !r.verdict_condition || r.verdict_frame;
    r.borderline = delta.abs() < 10.0 * tol.frame_tol;
    if r.verdict_condition && !r.verdict_frame && partition.len() < basis.rank() {
        r.notes.push(format!(
            "{} combined vectors cannot span a {}-dimensional span",
            partition.len(),
            basis.rank()
        ));
    }
    Ok(r)
}

/// Bounds `(mu A, nu B)` predicted for `phi_s = sum_i U[s, i] g_i` from the coefficient
/// Gram matrix, compared with the actual bounds on the original span.
pub fn check_gram_gershgorin(
    system: &Family<Label>,
    u: &CombinationMatrix,
    tol: Tolerances,
) -> Result<TheoremReport> {
    let combined = combine_general(u, system)?;
    let basis = reference_span(system)?;
    let original = own_bounds(&basis, tol.frame_tol);
    let x = synthesis_matrix(&combined.vectors)?;
    let actual = bounds_on(&basis, &x, tol.frame_tol);
    let ambient = frame_bounds(&combined.vectors, tol.frame_tol)?;
    let (mu, nu) = compute_mu_nu(u);

    let mut r = TheoremReport::new(ids::GRAM_GERSHGORIN, ClaimKind::Sufficiency, actual, ambient);
    r.value("mu", mu);
    r.value("nu", nu);
    r.value("originalLower", original.lower);
    r.value("originalUpper", original.upper);
    r.verdict_condition = mu > tol.frame_tol;
    if mu > 0.0 {
        let pred = PredictedBounds { lower: mu * original.lower, upper: Some(nu * original.upper) };
        r.predicted_bounds = Some(pred);
        let sandwich = actual.lower >= pred.lower - tol.float_tol
            && actual.upper <= nu * original.upper + tol.float_tol;
        r.consistent = !r.verdict_condition || (r.verdict_frame && sandwich);
    } else {
        r.notes.push("mu <= 0: no bounds predicted".into());
        r.consistent = true;
        // upper bound still holds whenever nu is finite
        if actual.upper > nu * original.upper + tol.float_tol {
            r.notes.push("actual upper bound exceeds nu B".into());
            r.consistent = false;
        }
    }
    r.borderline = mu.abs() < 10.0 * tol.frame_tol;
    Ok(r)
}

/// Per-summand bounds on the common span of several families.
struct CommonSpan {
    basis: RangeBasis,
    bounds: Vec<FrameBounds>,
}

fn common_span(families: &[&Family<Label>], tol: Tolerances) -> Result<CommonSpan> {
    let mats = families
        .iter()
        .map(|f| synthesis_matrix(&f.vectors))
        .collect::<Result<Vec<_>>>()?;
    let rows = mats[0].nrows();
    let cols: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut all = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for m in &mats {
        all.columns_mut(at, m.ncols()).copy_from(m);
        at += m.ncols();
    }
    let basis = range_basis(&all);
    if basis.rank() == 0 {
        return Err(Error::Precondition("all summands vanish".into()));
    }
    let mut bounds = Vec::with_capacity(mats.len());
    for (l, m) in mats.iter().enumerate() {
        let b = bounds_on(&basis, m, tol.frame_tol);
        if !b.is_frame {
            return Err(Error::Precondition(format!(
                "summand {} is not a frame for the common span (lower bound {:e}, upper {:e})",
                l + 1,
                b.lower,
                b.upper
            )));
        }
        bounds.push(b);
    }
    Ok(CommonSpan { basis, bounds })
}

fn sum_bounds(
    span: &CommonSpan,
    sum: &Family<Label>,
    tol: Tolerances,
) -> Result<(DMatrix<Complex64>, FrameBounds, FrameBounds)> {
    let x = synthesis_matrix(&sum.vectors)?;
    let actual = bounds_on(&span.basis, &x, tol.frame_tol);
    let ambient = frame_bounds(&sum.vectors, tol.frame_tol)?;
    Ok((x, actual, ambient))
}

/// `M_o(p)`: largest constant with `sum |<sum_l alpha_l g^(l), f>|^2 >= M_o sum |<g^(p), f>|^2`
/// on the common span, for every `p`; the sum is claimed to be a frame iff some `M_o(p) > 0`.
pub fn check_finite_sum_iff(
    families: &[&Family<Label>],
    alphas: &[Complex64],
    tol: Tolerances,
) -> Result<TheoremReport> {
    let span = common_span(families, tol)?;
    let sum = finite_sum(families, alphas)?;
    let (x, actual, ambient) = sum_bounds(&span, &sum, tol)?;
    let mut r = TheoremReport::new(ids::FINITE_SUM_IFF, ClaimKind::Equivalence, actual, ambient);
    let mut best = f64::NEG_INFINITY;
    for (p, f) in families.iter().enumerate() {
        let reference = range_basis(&synthesis_matrix(&f.vectors)?);
        let m = relative_lower_bound(&reference, &x);
        r.value(&format!("mo{}", p + 1), m);
        best = best.max(m);
    }
    r.value("moMax", best);
    r.verdict_condition = best > tol.frame_tol;
    r.consistent = r.verdict_condition == r.verdict_frame;
    r.borderline = best.abs() < 10.0 * tol.frame_tol;
    Ok(r)
}

/// Reading of the dominance condition for finite sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumConditionVariant {
    /// `alpha_p A_p > sum_{l != p} B_l + 2 sum_{l != j, both != p} alpha_l alpha_j sqrt(B_l B_j)`
    Literal,
    /// `alpha_p sqrt(A_p) > sum_{l != p} alpha_l sqrt(B_l)`, lower bound the squared gap
    Corrected,
}

fn positive_alphas(alphas: &[f64], count: usize) -> Result<()> {
    if alphas.len() != count {
        return Err(Error::InvalidArgument(format!(
            "{count} systems but {} coefficients",
            alphas.len()
        )));
    }
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::Precondition(format!("coefficients must be positive reals, got {a}")));
    }
    Ok(())
}

fn complex(alphas: &[f64]) -> Vec<Complex64> {
    alphas.iter().map(|a| Complex64::new(*a, 0.0)).collect()
}

/// Both readings of the single-dominant-summand condition; `variant` picks the verdict.
pub fn check_finite_sum_sufficient(
    families: &[&Family<Label>],
    alphas: &[f64],
    pivot: usize,
    variant: SumConditionVariant,
    tol: Tolerances,
) -> Result<TheoremReport> {
    positive_alphas(alphas, families.len())?;
    if pivot >= families.len() {
        return Err(Error::InvalidArgument(format!("pivot {pivot} out of range")));
    }
    let span = common_span(families, tol)?;
    let sum = finite_sum(families, &complex(alphas))?;
    let (_, actual, ambient) = sum_bounds(&span, &sum, tol)?;
    let a: Vec<f64> = span.bounds.iter().map(|b| b.lower).collect();
    let b: Vec<f64> = span.bounds.iter().map(|b| b.upper).collect();
    let n = alphas.len();

    let literal_lhs = alphas[pivot] * a[pivot];
    let mut literal_rhs: f64 = (0..n).filter(|&l| l != pivot).map(|l| b[l]).sum();
    for l in (0..n).filter(|&l| l != pivot) {
        for j in (0..n).filter(|&j| j != pivot && j != l) {
            literal_rhs += 2.0 * alphas[l] * alphas[j] * (b[l] * b[j]).sqrt();
        }
    }
    let corrected_lhs = alphas[pivot] * a[pivot].sqrt();
    let corrected_rhs: f64 = (0..n).filter(|&l| l != pivot).map(|l| alphas[l] * b[l].sqrt()).sum();
    let literal = literal_lhs - literal_rhs > tol.frame_tol;
    let corrected = corrected_lhs - corrected_rhs > tol.frame_tol;

    let mut r = TheoremReport::new(ids::FINITE_SUM_SUFFICIENT, ClaimKind::Sufficiency, actual, ambient);
    r.value("pivot", pivot as f64);
    r.value("literalLhs", literal_lhs);
    r.value("literalRhs", literal_rhs);
    r.value("literalHolds", f64::from(u8::from(literal)));
    r.value("correctedLhs", corrected_lhs);
    r.value("correctedRhs", corrected_rhs);
    r.value("correctedHolds", f64::from(u8::from(corrected)));
    for l in 0..n {
        r.value(&format!("a{}", l + 1), a[l]);
        r.value(&format!("b{}", l + 1), b[l]);
    }
    match variant {
        SumConditionVariant::Literal => {
            r.variant = Some("literal".into());
            r.verdict_condition = literal;
            r.consistent = !literal || r.verdict_frame;
            r.borderline = (literal_lhs - literal_rhs).abs() < 10.0 * tol.frame_tol;
        }
        SumConditionVariant::Corrected => {
            r.variant = Some("corrected".into());
            r.verdict_condition = corrected;
            let gap = corrected_lhs - corrected_rhs;
            if gap > 0.0 {
                r.predicted_bounds = Some(PredictedBounds { lower: gap * gap, upper: None });
            }
            r.consistent = !corrected
                || (r.verdict_frame && actual.lower >= gap * gap - tol.float_tol);
            r.borderline = gap.abs() < 10.0 * tol.frame_tol;
        }
    }
    if !r.verdict_condition && r.verdict_frame {
        r.notes.push("condition not necessary: fails while the sum is a frame".into());
    }
    Ok(r)
}

fn cross_term(alphas: &[f64], b: &[f64]) -> f64 {
    let n = alphas.len();
    let mut s = 0.0;
    for l in 0..n {
        for t in (0..n).filter(|&t| t != l) {
            s += alphas[l] * alphas[t] * (b[l] * b[t]).sqrt();
        }
    }
    s
}

/// `alpha_p A_p < sum alpha_l^2 A_l - sum_{s != t} alpha_s alpha_t sqrt(B_s B_t)`, claimed
/// to make the sum a frame.
pub fn check_finite_sum_cross_term(
    families: &[&Family<Label>],
    alphas: &[f64],
    pivot: usize,
    tol: Tolerances,
) -> Result<TheoremReport> {
    positive_alphas(alphas, families.len())?;
    if pivot >= families.len() {
        return Err(Error::InvalidArgument(format!("pivot {pivot} out of range")));
    }
    let span = common_span(families, tol)?;
    let sum = finite_sum(families, &complex(alphas))?;
    let (_, actual, ambient) = sum_bounds(&span, &sum, tol)?;
    let a: Vec<f64> = span.bounds.iter().map(|b| b.lower).collect();
    let b: Vec<f64> = span.bounds.iter().map(|b| b.upper).collect();
    let lhs = alphas[pivot] * a[pivot];
    let rhs = alphas.iter().zip(&a).map(|(x, a)| x * x * a).sum::<f64>() - cross_term(alphas, &b);

    let mut r = TheoremReport::new(ids::FINITE_SUM_CROSS_TERM, ClaimKind::Sufficiency, actual, ambient);
    r.value("pivot", pivot as f64);
    r.value("conditionLhs", lhs);
    r.value("conditionRhs", rhs);
    r.verdict_condition = rhs - lhs > tol.frame_tol;
    r.consistent = !r.verdict_condition || r.verdict_frame;
    r.borderline = (rhs - lhs).abs() < 10.0 * tol.frame_tol;
    if !r.verdict_condition && r.verdict_frame {
        r.notes.push("condition not necessary: fails while the sum is a frame".into());
    }
    Ok(r)
}

/// `sum alpha_l^2 A_l - X <= B_o` and `sum alpha_l^2 B_l + X >= A_o` with
/// `X = sum_{l != t} alpha_l alpha_t sqrt(B_l B_t)`, read with real `alpha_l`.
pub fn check_finite_sum_bound_relations(
    families: &[&Family<Label>],
    alphas: &[f64],
    tol: Tolerances,
) -> Result<TheoremReport> {
    if alphas.len() != families.len() || alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidArgument("one finite real coefficient per system required".into()));
    }
    let span = common_span(families, tol)?;
    let sum = finite_sum(families, &complex(alphas))?;
    let (_, actual, ambient) = sum_bounds(&span, &sum, tol)?;
    if !actual.is_frame {
        return Err(Error::Precondition("the sum is not a frame for the common span".into()));
    }
    let a: Vec<f64> = span.bounds.iter().map(|b| b.lower).collect();
    let b: Vec<f64> = span.bounds.iter().map(|b| b.upper).collect();
    let x = cross_term(alphas, &b);
    let lower_side = alphas.iter().zip(&a).map(|(s, a)| s * s * a).sum::<f64>() - x;
    let upper_side = alphas.iter().zip(&b).map(|(s, b)| s * s * b).sum::<f64>() + x;
    let first = lower_side <= actual.upper + tol.float_tol;
    let second = upper_side >= actual.lower - tol.float_tol;

    let mut r = TheoremReport::new(ids::FINITE_SUM_BOUND_RELATIONS, ClaimKind::Relation, actual, ambient);
    r.value("lowerSide", lower_side);
    r.value("upperSide", upper_side);
    r.value("crossTerm", x);
    r.value("firstHolds", f64::from(u8::from(first)));
    r.value("secondHolds", f64::from(u8::from(second)));
    r.verdict_condition = first && second;
    r.consistent = first && second;
    r.notes.push("alpha_l^2 read as the square of a real coefficient".into());
    Ok(r)
}
