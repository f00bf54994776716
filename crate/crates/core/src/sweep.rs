//! Seeded random-instance sweeps over the checks. Instance `i` of a sweep uses seed
//! `seed_base + i`, and all of its randomness flows from that seed, so results do not
//! depend on scheduling.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{
    check_combination_dominance, check_diagonal_dominance, check_finite_sum_bound_relations,
    check_finite_sum_cross_term, check_finite_sum_iff, check_finite_sum_sufficient,
    check_frame_bounds, check_gram_gershgorin, ids, PairCounting, SumConditionVariant,
    TheoremReport, Tolerances,
};
use crate::combination::{build_combined, CoefficientFamily};
use crate::error::{Error, Result};
use crate::random::{
    instance_rng, random_admissible_matrix, random_coefficients, random_partition,
    random_positive_alphas, random_setup, random_system, random_system_on, SMALL_SHAPES,
};
use crate::spectral::{range_basis, synthesis_matrix};
use crate::wavepacket::{Family, Label, WavePacketSystem};

/// Redraws allowed per instance before a sweep gives up on a seed.
pub const MAX_ATTEMPTS: usize = 500;

/// Which check a sweep runs, with its reading where several exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepCheck {
    pub id: &'static str,
    pub pairs: PairCounting,
    pub variant: Option<SumConditionVariant>,
}

impl SweepCheck {
    pub fn new(id: &str) -> Result<Self> {
        let id = ids::ALL
            .iter()
            .find(|k| **k == id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check {id:?}")))?;
        let variant = (*id == ids::FINITE_SUM_SUFFICIENT).then_some(SumConditionVariant::Corrected);
        Ok(Self { id, pairs: PairCounting::Ordered, variant })
    }

    pub fn with_variant(mut self, v: SumConditionVariant) -> Self {
        self.variant = Some(v);
        self
    }

    pub fn with_pairs(mut self, p: PairCounting) -> Self {
        self.pairs = p;
        self
    }
}

fn sibling_systems(rng: &mut impl Rng, count: usize) -> Result<Vec<WavePacketSystem>> {
    let (w, params) = random_setup(SMALL_SHAPES, rng)?;
    (0..count).map(|_| random_system_on(&w, &params, rng)).collect()
}

fn families(systems: &[WavePacketSystem]) -> Vec<&Family<Label>> {
    systems.iter().map(|s| &s.family).collect()
}

/// Retry `draw` until it yields a report; `Ok(None)` and precondition failures redraw.
fn with_retries(
    rng: &mut impl Rng,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Result<Option<TheoremReport>>,
) -> Result<TheoremReport> {
    for _ in 0..MAX_ATTEMPTS {
        let mut sub = instance_rng(rng.random());
        match draw(&mut sub) {
            Ok(Some(r)) => return Ok(r),
            Ok(None) | Err(Error::Precondition(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Precondition(format!(
        "no admissible instance in {MAX_ATTEMPTS} draws"
    )))
}

/// One random instance of `check` drawn from `seed`.
///
/// Instance families: windows with at most 16 points, `dim <= K <= 2 dim` packets, unit
/// Gaussian generators, block sizes 1 to 3, coefficient magnitudes log-uniform in
/// `[0.1, 10]`, and two or three summands for finite sums. Checks with a hypothesis redraw
/// until it holds.
pub fn random_instance(check: SweepCheck, seed: u64, tol: Tolerances) -> Result<TheoremReport> {
    let mut rng = instance_rng(seed);
    let report = match check.id {
        ids::FRAME_BOUNDS => with_retries(&mut rng, |r| {
            let sys = random_system(SMALL_SHAPES, r)?;
            check_frame_bounds(&sys.family, tol).map(Some)
        }),
        ids::COMBINATION_DOMINANCE => with_retries(&mut rng, |r| {
            let sys = random_system(SMALL_SHAPES, r)?;
            let max_block = r.random_range(1..=3);
            let p = random_partition(sys.labels(), max_block, r);
            let a = random_coefficients(sys.labels(), r);
            check_combination_dominance(&sys.family, &p, &a, tol).map(Some)
        }),
        ids::DIAGONAL_DOMINANCE => with_retries(&mut rng, |r| {
            let sys = random_system(SMALL_SHAPES, r)?;
            let p = random_partition(sys.labels(), 3, r);
            let a = random_coefficients(sys.labels(), r);
            let rep = check_diagonal_dominance(&sys.family, &p, &a, check.pairs, tol)?;
            Ok(rep.verdict_condition.then_some(rep))
        }),
        ids::GRAM_GERSHGORIN => with_retries(&mut rng, |r| {
            let sys = random_system(SMALL_SHAPES, r)?;
            let u = random_admissible_matrix(sys.labels(), r);
            check_gram_gershgorin(&sys.family, &u, tol).map(Some)
        }),
        ids::FINITE_SUM_IFF => with_retries(&mut rng, |r| {
            let n = r.random_range(2..=3);
            let systems = sibling_systems(r, n)?;
            let alphas: Vec<Complex64> = (0..n).map(|_| crate::random::random_coefficient(r)).collect();
            check_finite_sum_iff(&families(&systems), &alphas, tol).map(Some)
        }),
        ids::FINITE_SUM_SUFFICIENT => with_retries(&mut rng, |r| {
            let n = r.random_range(2..=3);
            let systems = sibling_systems(r, n)?;
            let alphas = random_positive_alphas(n, r);
            let pivot = r.random_range(0..n);
            let variant = check.variant.unwrap_or(SumConditionVariant::Corrected);
            check_finite_sum_sufficient(&families(&systems), &alphas, pivot, variant, tol).map(Some)
        }),
        ids::FINITE_SUM_CROSS_TERM => with_retries(&mut rng, |r| {
            let n = r.random_range(2..=3);
            let systems = sibling_systems(r, n)?;
            let alphas = random_positive_alphas(n, r);
            let pivot = r.random_range(0..n);
            check_finite_sum_cross_term(&families(&systems), &alphas, pivot, tol).map(Some)
        }),
        ids::FINITE_SUM_BOUND_RELATIONS => with_retries(&mut rng, |r| {
            let n = r.random_range(2..=3);
            let systems = sibling_systems(r, n)?;
            let alphas = random_positive_alphas(n, r);
            check_finite_sum_bound_relations(&families(&systems), &alphas, tol).map(Some)
        }),
        other => Err(Error::InvalidArgument(format!("unknown check {other:?}"))),
    }?;
    Ok(report.with_seed(seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepSummary {
    pub theorem_id: String,
    pub variant: Option<String>,
    pub instances: usize,
    pub condition_true: usize,
    pub frame_true: usize,
    pub borderline: usize,
    pub violations: usize,
    pub violating_seeds: Vec<u64>,
}

impl SweepSummary {
    pub fn from_reports(check: SweepCheck, reports: &[TheoremReport]) -> Self {
        let variant = reports.first().and_then(|r| r.variant.clone());
        Self {
            theorem_id: check.id.to_string(),
            variant,
            instances: reports.len(),
            condition_true: reports.iter().filter(|r| r.verdict_condition).count(),
            frame_true: reports.iter().filter(|r| r.verdict_frame).count(),
            borderline: reports.iter().filter(|r| r.borderline).count(),
            violations: reports.iter().filter(|r| r.is_violation()).count(),
            violating_seeds: reports
                .iter()
                .filter(|r| r.is_violation())
                .filter_map(|r| r.seed)
                .collect(),
        }
    }
}

/// Instances `seed_base .. seed_base + count`, evaluated in parallel and returned in seed order.
pub fn property_sweep(
    check: SweepCheck,
    seed_base: u64,
    count: usize,
    tol: Tolerances,
) -> Result<(Vec<TheoremReport>, SweepSummary)> {
    let reports = (0..count as u64)
        .into_par_iter()
        .map(|i| random_instance(check, seed_base.wrapping_add(i), tol))
        .collect::<Result<Vec<_>>>()?;
    let summary = SweepSummary::from_reports(check, &reports);
    Ok((reports, summary))
}

/// Ratio of combined frame bounds after scaling every coefficient by `c`, on one
/// random combination instance. Both ratios equal `|c|^2` exactly in exact arithmetic.
pub fn scaling_ratios(seed: u64, c: f64) -> Result<(f64, f64)> {
    let mut rng = instance_rng(seed);
    let sys = random_system(SMALL_SHAPES, &mut rng)?;
    let p = random_partition(sys.labels(), 3, &mut rng);
    let a = random_coefficients(sys.labels(), &mut rng);
    let scaled: CoefficientFamily = a.scaled(Complex64::new(c, 0.0));
    let basis = range_basis(&synthesis_matrix(sys.vectors())?);
    let before = build_combined(&sys.family, &p, &a)?;
    let after = build_combined(&sys.family, &p, &scaled)?;
    let (l0, u0) = crate::spectral::restricted_bounds(&basis, &synthesis_matrix(&before.vectors)?);
    let (l1, u1) = crate::spectral::restricted_bounds(&basis, &synthesis_matrix(&after.vectors)?);
    let lower = if l0.abs() > 1e-12 { l1 / l0 } else { c * c };
    Ok((lower, u1 / u0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_seeded() {
        let tol = Tolerances::default();
        for id in ids::ALL {
            let check = SweepCheck::new(id).unwrap();
            let a = random_instance(check, 17, tol).unwrap();
            let b = random_instance(check, 17, tol).unwrap();
            assert_eq!(a, b, "{id}");
            assert_eq!(a.seed, Some(17));
        }
    }

    #[test]
    fn sweep_order_follows_seeds() {
        let check = SweepCheck::new(ids::GRAM_GERSHGORIN).unwrap();
        let (reports, summary) = property_sweep(check, 100, 8, Tolerances::default()).unwrap();
        let seeds: Vec<u64> = reports.iter().map(|r| r.seed.unwrap()).collect();
        assert_eq!(seeds, (100..108).collect::<Vec<_>>());
        assert_eq!(summary.instances, 8);
        assert_eq!(summary.violations, 0);
    }

    #[test]
    fn scaling_multiplies_bounds_by_square() {
        for seed in 0..10 {
            let (lo, hi) = scaling_ratios(seed, 3.0).unwrap();
            assert!((lo - 9.0).abs() < 1e-10 && (hi - 9.0).abs() < 1e-10, "{lo} {hi}");
        }
    }

    #[test]
    fn unknown_check_is_rejected() {
        assert!(SweepCheck::new("nope").is_err());
    }
}
