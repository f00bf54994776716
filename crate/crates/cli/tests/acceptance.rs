//! Acceptance suite: one PASS/FAIL line per criterion, tolerances and time limits pinned
//! below. Runs without the libtest harness so the lines always reach stdout.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;

use lfwave::checks::{check_diagonal_dominance, ids, PairCounting, SumConditionVariant, Tolerances};
use lfwave::combination::{CoefficientFamily, IndexPartition};
use lfwave::fourier::fourier;
use lfwave::gf::FieldSpec;
use lfwave::laurent::{AbsoluteValue, LocalField, LocalFieldElement};
use lfwave::model::{dilate, inner_product, modulate, translate, ModelWindow, SampledFunction};
use lfwave::random::{instance_rng, random_setup, random_system_on};
use lfwave::sweep::{property_sweep, SweepCheck, SweepSummary};
use lfwave::wavepacket::{frame_bounds, frame_bounds_iterative, generate_system, Label, WavePacketParams};
use lfwave_cli::config::parse_toml;
use lfwave_cli::runner::{evaluate, run_experiment};
use lfwave_cli::with_workers;

const UNITARY_TOL: f64 = 1e-12;
const FOURIER_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-10;
const REDUCTION_BAND: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
    /// analysed in the decisions ledger; reported as FAIL without failing the run
    known_failure: bool,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into(), known_failure: false }
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
            out.known_failure = false;
            out.detail.push_str(&format!("; over the {}s limit", limit.as_secs()));
        }
    }
    (out, took)
}

// ---------------------------------------------------------------- 1. algebra

fn random_element(f: &LocalField, rng: &mut impl Rng) -> LocalFieldElement {
    let lo = rng.random_range(-6..=6);
    let len = rng.random_range(0..=6);
    let codes = (0..len).map(|_| rng.random_range(0..f.q()) as u16).collect();
    f.from_codes(lo, codes).unwrap()
}

fn field_axioms(spec: &FieldSpec) -> bool {
    let q = spec.q() as u16;
    let all = 0..q;
    for x in all.clone() {
        if spec.add_codes(x, 0) != x || spec.mul_codes(x, 1) != x || spec.mul_codes(x, 0) != 0 {
            return false;
        }
        if spec.add_codes(x, spec.neg_code(x)) != 0 {
            return false;
        }
        match spec.inv_code(x) {
            Some(i) if x != 0 && spec.mul_codes(x, i) == 1 => {}
            None if x == 0 => {}
            _ => return false,
        }
        for y in all.clone() {
            if spec.add_codes(x, y) != spec.add_codes(y, x) || spec.mul_codes(x, y) != spec.mul_codes(y, x) {
                return false;
            }
            for z in all.clone() {
                let add_assoc = spec.add_codes(spec.add_codes(x, y), z) == spec.add_codes(x, spec.add_codes(y, z));
                let mul_assoc = spec.mul_codes(spec.mul_codes(x, y), z) == spec.mul_codes(x, spec.mul_codes(y, z));
                let distrib = spec.mul_codes(x, spec.add_codes(y, z))
                    == spec.add_codes(spec.mul_codes(x, y), spec.mul_codes(x, z));
                if !(add_assoc && mul_assoc && distrib) {
                    return false;
                }
            }
        }
    }
    true
}

fn criterion_algebra() -> Outcome {
    let mut rng = instance_rng(1);
    let mut failures = Vec::new();
    for (p, c) in [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (3, 2)] {
        let spec = FieldSpec::new(p, c).unwrap();
        let q = spec.q();
        if !field_axioms(&spec) {
            failures.push(format!("GF({q}) axioms"));
        }
        let f = LocalField::standard(p, c).unwrap();
        for _ in 0..1000 {
            let x = random_element(&f, &mut rng);
            let y = random_element(&f, &mut rng);
            let (ax, ay) = (x.absolute_value(), y.absolute_value());
            let sum = x.add(&y).unwrap();
            let s = sum.absolute_value();
            let ultra = s <= ax.max(ay) && (ax == ay || s == ax.max(ay));
            let prod = x.mul(&y).unwrap().absolute_value();
            let mult = match (ax, ay) {
                (AbsoluteValue::Power(a), AbsoluteValue::Power(b)) => prod == AbsoluteValue::Power(a + b),
                _ => prod == AbsoluteValue::Zero,
            };
            let additive = sum.character() == x.character().mul(y.character());
            if !(ultra && mult && additive) {
                failures.push(format!("q={q}: x={x}, y={y}"));
                break;
            }
        }
    }
    let detail = if failures.is_empty() {
        "field axioms exhaustive for q in {2,3,4,5,8,9}; 6000 pairs ultrametric, multiplicative, additive character".into()
    } else {
        failures.join("; ")
    };
    Outcome::new(failures.is_empty(), detail)
}

// ---------------------------------------------------------------- 2. u(n)

/// `u(n)` from the base-q digits of `n`: digit `k` at exponent `-1-k`.
fn u_oracle(f: &LocalField, mut n: u64) -> LocalFieldElement {
    let q = f.q() as u64;
    let mut acc = f.zero();
    let mut k = 0;
    while n > 0 {
        let digit = (n % q) as u16;
        if digit != 0 {
            acc = acc.add(&f.monomial(digit, -1 - k).unwrap()).unwrap();
        }
        n /= q;
        k += 1;
    }
    acc
}

fn criterion_u_map() -> Outcome {
    let mut failures = Vec::new();
    for (p, c) in [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (3, 2)] {
        let f = LocalField::standard(p, c).unwrap();
        let q = f.q() as u64;
        let mut seen = BTreeSet::new();
        for n in 0..q.pow(3) {
            let u = f.u(n).unwrap();
            let in_range = u.is_zero() || (u.lo() >= -3 && u.hi() <= -1);
            if u != u_oracle(&f, n) || !in_range || !seen.insert(u.to_string()) {
                failures.push(format!("q={q}: u({n}) = {u}"));
                break;
            }
        }
        'identity: for k in 0..=2u32 {
            let pk = f.prime_power(-(k as i32)).unwrap();
            for r in 0..q * q {
                for s in 0..q.pow(k) {
                    let lhs = f.u(r * q.pow(k) + s).unwrap();
                    let rhs = f.u(r).unwrap().mul(&pk).unwrap().add(&f.u(s).unwrap()).unwrap();
                    if lhs != rhs {
                        failures.push(format!("q={q}: r={r}, k={k}, s={s}"));
                        break 'identity;
                    }
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        "q^3 distinct representatives match the digit oracle; shift identity exact for r < q^2, k <= 2, s < q^k".into()
    } else {
        failures.join("; ")
    };
    Outcome::new(failures.is_empty(), detail)
}

// ---------------------------------------------------------------- 3. operators and Fourier

fn random_fn(w: &ModelWindow, rng: &mut impl Rng) -> SampledFunction {
    let values = (0..w.dim())
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    SampledFunction::new(w.clone(), values).unwrap()
}

fn criterion_operators() -> Outcome {
    let mut rng = instance_rng(3);
    let mut worst_unitary: f64 = 0.0;
    let mut worst_fourier: f64 = 0.0;
    for (p, c) in [(2, 1), (3, 1), (2, 2)] {
        let field = LocalField::standard(p, c).unwrap();
        let q = field.q() as f64;
        let prime = field.prime().unwrap();
        for (m, n) in [(1, 1), (2, 2), (1, 2)] {
            let w = ModelWindow::new(field.clone(), m, n).unwrap();
            let dual = w.dual();
            for _ in 0..100 {
                let f = random_fn(&w, &mut rng);
                let g = random_fn(&w, &mut rng);
                let fg = inner_product(&f, &g).unwrap();
                let a = w.point(rng.random_range(0..w.dim()));
                // modulation steps are grid points of the dual window
                let b = dual.point(rng.random_range(0..dual.dim()));
                for (tf, tg) in [
                    (translate(&f, &a).unwrap(), translate(&g, &a).unwrap()),
                    (modulate(&f, &b).unwrap(), modulate(&g, &b).unwrap()),
                    (dilate(&f, 1).unwrap(), dilate(&g, 1).unwrap()),
                    (dilate(&f, -1).unwrap(), dilate(&g, -1).unwrap()),
                ] {
                    worst_unitary = worst_unitary.max((inner_product(&tf, &tg).unwrap() - fg).norm());
                }

                let fh = fourier(&f).unwrap();
                let gh = fourier(&g).unwrap();
                worst_fourier = worst_fourier.max((fh.norm() - f.norm()).abs());
                worst_fourier = worst_fourier.max((inner_product(&fh, &gh).unwrap() - fg).norm());

                // (T_a f)^(gamma) = conj(chi_a(gamma)) f^(gamma)
                let th = fourier(&translate(&f, &a).unwrap()).unwrap();
                for gi in 0..th.window().dim() {
                    let chi = a.character_at(&th.window().point(gi)).unwrap().conj().to_complex();
                    worst_fourier = worst_fourier.max((th.values()[gi] - chi * fh.values()[gi]).norm());
                }
                // (D_p f)^(gamma) = q^{-1/2} f^(p gamma)
                let dh = fourier(&dilate(&f, 1).unwrap()).unwrap();
                for gi in 0..dh.window().dim() {
                    let pg = prime
                        .mul(&dh.window().point(gi))
                        .unwrap()
                        .truncate_above(fh.window().n() as i32);
                    let rhs = fh.values()[fh.window().index_of(&pg).unwrap()] / q.sqrt();
                    worst_fourier = worst_fourier.max((dh.values()[gi] - rhs).norm());
                }
            }
        }
    }
    let pass = worst_unitary <= UNITARY_TOL && worst_fourier <= FOURIER_TOL;
    Outcome::new(
        pass,
        format!("max unitarity defect {worst_unitary:.1e} (tol {UNITARY_TOL:e}); max Fourier/Parseval defect {worst_fourier:.1e} (tol {FOURIER_TOL:e})"),
    )
}

// ---------------------------------------------------------------- 4. spectral oracle

fn criterion_spectral() -> Outcome {
    let shapes = [
        (2, 1, 2, 2),
        (2, 1, 2, 3),
        (3, 1, 1, 2),
        (2, 1, 3, 3),
        (2, 2, 1, 2),
        (3, 1, 2, 2),
        (2, 1, 4, 3),
        (2, 1, 4, 4),
        (2, 2, 2, 2),
    ];
    let mut rng = instance_rng(4);
    let mut worst: f64 = 0.0;
    let mut largest = (0, 0);
    for i in 0..50 {
        let shape = shapes[i % shapes.len()];
        let (w, params) = random_setup(&[shape], &mut rng).unwrap();
        let sys = random_system_on(&w, &params, &mut rng).unwrap();
        let vectors = &sys.vectors()[..sys.len().min(64)];
        let dense = frame_bounds(vectors, 1e-8).unwrap();
        let iter = frame_bounds_iterative(vectors, 1e-8).unwrap();
        worst = worst.max((dense.lower - iter.lower).abs()).max((dense.upper - iter.upper).abs());
        largest = largest.max((w.dim(), vectors.len()));
    }
    Outcome::new(
        worst <= ORACLE_TOL,
        format!("50 systems up to dimension {} with up to 64 vectors; max |iterative - dense| {worst:.1e} (tol {ORACLE_TOL:e})", largest.0),
    )
}

// ---------------------------------------------------------------- 5-7. sweeps

fn sweep(id: &str, variant: Option<SumConditionVariant>, seed_base: u64, count: usize) -> SweepSummary {
    let mut check = SweepCheck::new(id).unwrap();
    if let Some(v) = variant {
        check = check.with_variant(v);
    }
    property_sweep(check, seed_base, count, Tolerances::default()).unwrap().1
}

fn describe(s: &SweepSummary) -> String {
    let variant = s.variant.as_deref().map(|v| format!(" ({v})")).unwrap_or_default();
    format!(
        "{}{variant}: {} violations / {} instances, {} borderline",
        s.theorem_id, s.violations, s.instances, s.borderline
    )
}

fn criterion_combination_iff() -> Outcome {
    let s = sweep(ids::COMBINATION_DOMINANCE, None, 5_000, 100);
    Outcome::new(s.violations == 0, describe(&s))
}

/// Orthonormal basis of window (1,1), q = 2, with two vectors merged with weights (1, 1.1).
fn diagonal_counterexample() -> bool {
    let w = ModelWindow::new(LocalField::standard(2, 1).unwrap(), 1, 1).unwrap();
    let one = w.field().one();
    let params = WavePacketParams { a: one.clone(), b: one, j_min: 0, j_max: 0, k_count: 2, m_count: 2 };
    let sys = generate_system(&SampledFunction::indicator_ball(w.clone(), 0), &params, &w).unwrap();
    let l = sys.labels().to_vec();
    let part = IndexPartition::new(vec![(l[0], vec![l[0], l[1]]), (l[2], vec![l[2]]), (l[3], vec![l[3]])], &l).unwrap();
    let mut alpha: BTreeMap<Label, Complex64> = l.iter().map(|x| (*x, Complex64::new(1.0, 0.0))).collect();
    alpha.insert(l[1], Complex64::new(1.1, 0.0));
    let r = check_diagonal_dominance(&sys.family, &part, &CoefficientFamily::new(alpha), PairCounting::Ordered, Tolerances::default())
        .unwrap();
    r.verdict_condition && !r.verdict_frame
}

fn criterion_sufficiency() -> Outcome {
    let diagonal = sweep(ids::DIAGONAL_DOMINANCE, None, 6_000, 100);
    let sound = [
        sweep(ids::GRAM_GERSHGORIN, None, 6_100, 100),
        sweep(ids::FINITE_SUM_SUFFICIENT, Some(SumConditionVariant::Corrected), 6_200, 100),
        sweep(ids::FINITE_SUM_CROSS_TERM, None, 6_300, 100),
    ];
    let sound_ok = sound.iter().all(|s| s.violations == 0);
    let mut parts: Vec<String> = std::iter::once(&diagonal).chain(&sound).map(describe).collect();
    let counterexample = diagonal_counterexample();
    if counterexample {
        parts.push("diagonal-dominance counterexample (weights 1, 1.1 on two orthonormal vectors) reproduced".into());
    }
    let mut out = Outcome::new(sound_ok && diagonal.violations == 0, parts.join("; "));
    // the diagonal-dominance claim is false in finite dimensions; see the decisions ledger
    out.known_failure = sound_ok && diagonal.violations > 0 && counterexample;
    out
}

fn criterion_bound_relations() -> Outcome {
    let s = sweep(ids::FINITE_SUM_BOUND_RELATIONS, None, 7_000, 200);
    Outcome::new(s.violations == 0 && s.instances == 200, describe(&s))
}

// ---------------------------------------------------------------- 8. two orthonormal bases

const TWO_BASES: &str = r#"
schemaVersion = 1
checks = ["finite-sum-sufficient"]
[field]
p = 2
c = 1
[window]
M = 1
N = 1
[system]
a = "p^0"
b = "p^0"
jRange = [0, 0]
kCount = 2
mCount = 2
[combination]
kind = "finite-sum"
generators = [{ kind = "indicator" }, { kind = "indicator" }]
alphas = [1.0, 0.1]
pivot = 0
"#;

fn criterion_two_bases() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.5, 0.9] {
        let text = TWO_BASES.replace("alphas = [1.0, 0.1]", &format!("alphas = [1.0, {eps:?}]"));
        let cfg = parse_toml(&text, "two bases").unwrap();
        let eval = evaluate(&cfg, Path::new(".")).unwrap();
        let literal = eval.reports.iter().find(|r| r.variant.as_deref() == Some("literal")).unwrap();
        let corrected = eval.reports.iter().find(|r| r.variant.as_deref() == Some("corrected")).unwrap();
        let expected: f64 = (1.0 + eps) * (1.0 + eps);
        let err = (corrected.actual_bounds.lower - expected).abs();
        let noted = literal.notes.iter().any(|n| n.contains("not necessary"));
        ok &= err <= CLOSED_FORM_TOL
            && !literal.verdict_condition
            && corrected.verdict_condition
            && corrected.verdict_frame
            && noted;
        parts.push(format!(
            "eps={eps}: A={:.12} (|A-(1+eps)^2|={err:.0e}), literal {}, corrected {}",
            corrected.actual_bounds.lower,
            if literal.verdict_condition { "holds" } else { "fails" },
            if corrected.verdict_condition { "holds" } else { "fails" },
        ));
    }
    Outcome::new(ok, parts.join("; "))
}

// ---------------------------------------------------------------- 9. reproducibility

const REPRO: &str = r#"
schemaVersion = 1
seed = 90210
checks = ["frame-bounds", "combination-dominance", "gram-gershgorin"]
[field]
p = 2
c = 2
[window]
M = 1
N = 1
[generator]
kind = "random"
[system]
a = "p^0"
b = "p^0"
jRange = [0, 0]
kCount = 4
mCount = 4
[combination]
kind = "matrix"
layout = "random-admissible"
[output]
formats = ["json", "csv", "matrices", "functions"]
"#;

fn strip_timestamp(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).lines().filter(|l| !l.contains("\"generatedAt\"")).collect::<Vec<_>>().join("\n")
}

fn within_band(a: &serde_json::Value, b: &serde_json::Value) -> bool {
    use serde_json::Value;
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            (x - y).abs() <= REDUCTION_BAND * x.abs().max(1.0)
        }
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| within_band(p, q)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| k == "generatedAt" || y.get(k).is_some_and(|w| within_band(v, w)))
        }
        _ => a == b,
    }
}

fn criterion_reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("repro.toml");
    std::fs::write(&cfg, REPRO).unwrap();
    let run = |name: &str, workers: usize| {
        let dir = tmp.path().join(name);
        with_workers(workers, || run_experiment(&cfg, Some(&dir))).unwrap().unwrap();
        dir
    };
    let (a, b, c) = (run("a", 1), run("b", 1), run("c", 4));
    let files = ["report.json", "report.csv", "gram.csv", "frame-operator.csv", "combined-gram.csv", "generator.csv", "manifest.json"];
    let mut identical = true;
    for f in files {
        let (x, y) = (std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        identical &= if f == "report.json" { strip_timestamp(&x) == strip_timestamp(&y) } else { x == y };
    }
    let read = |d: &Path| serde_json::from_slice::<serde_json::Value>(&std::fs::read(d.join("report.json")).unwrap()).unwrap();
    let banded = within_band(&read(&a), &read(&c));
    let exact4 = strip_timestamp(&std::fs::read(a.join("report.json")).unwrap())
        == strip_timestamp(&std::fs::read(c.join("report.json")).unwrap());
    Outcome::new(
        identical && banded,
        format!(
            "single-worker runs byte-identical: {identical}; 1 vs 4 workers within {REDUCTION_BAND:e}: {banded} (byte-identical: {exact4})"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Option<u64>, fn() -> Outcome)> = vec![
        ("algebra", Some(10), criterion_algebra),
        ("u(n) enumeration", Some(5), criterion_u_map),
        ("operators and Fourier", Some(60), criterion_operators),
        ("iterative vs dense bounds", Some(120), criterion_spectral),
        ("combination dominance iff", None, criterion_combination_iff),
        ("sufficiency sweeps", Some(300), criterion_sufficiency),
        ("finite-sum bound relations", None, criterion_bound_relations),
        ("two orthonormal bases", None, criterion_two_bases),
        ("reproducibility", None, criterion_reproducibility),
    ];
    let mut unexpected = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let (out, took) = timed(limit.map(Duration::from_secs), run);
        let status = if out.pass { "PASS" } else { "FAIL" };
        let known = if !out.pass && out.known_failure { " [known, see ledger]" } else { "" };
        println!("{status} {} {name}{known}: {} ({:.2}s)", i + 1, out.detail, took.as_secs_f64());
        if !out.pass && !out.known_failure {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
