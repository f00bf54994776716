//! Executing experiment configs and sweeps, and writing their result files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use lfwave::checks::{
    check_combination_dominance, check_combination_dominance_families, check_diagonal_dominance,
    check_finite_sum_bound_relations, check_finite_sum_cross_term, check_finite_sum_iff,
    check_finite_sum_sufficient, check_frame_bounds, check_gram_gershgorin, ids, SumConditionVariant,
    TheoremReport, Tolerances,
};
use lfwave::combination::{
    build_combined, combine_general, finite_sum_system, CoefficientFamily, CombinationMatrix,
    IndexPartition,
};
use lfwave::io::{atomic_write, read_function, write_function, write_matrix, FileKind};
use lfwave::model::{embed, ModelWindow, SampledFunction};
use lfwave::random::{
    gaussian_function, instance_rng, random_admissible_matrix, random_coefficients, random_partition,
};
use lfwave::sweep::{property_sweep, SweepCheck, SweepSummary};
use lfwave::wavepacket::{frame_operator, generate_system, gram_matrix, Family, Label, WavePacketSystem};

use crate::config::{
    label_of, parse_toml, BlockLayout, CoefficientConfig, CombinationConfig, ExperimentConfig,
    GeneratorConfig, MatrixLayout, OutputConfig, OutputFormat, Resolved, SCHEMA_VERSION,
};
use crate::error::{ErrorCode, RunError, RunResult};

pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DEFAULT_MAX_INSTANCES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Library {
    pub name: String,
    pub version: String,
}

impl Library {
    pub fn current() -> Self {
        Self { name: "lfwave".into(), version: lfwave::VERSION.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldSummary {
    pub p: u32,
    pub c: u32,
    pub q: u32,
    pub modulus: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSummary {
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u32,
}

impl WindowSummary {
    fn of(w: &ModelWindow) -> Self {
        Self { m: w.m(), n: w.n() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SystemSummary {
    pub a: String,
    pub b: String,
    pub j_range: [i32; 2],
    pub k_count: u64,
    pub m_count: u64,
    pub packets: usize,
    pub source_window: WindowSummary,
}

/// Contents of `report.json`. `generatedAt` is the only field that varies between runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportFile {
    pub schema_version: u32,
    pub generated_at: String,
    pub library: Library,
    pub seed: u64,
    pub field: FieldSummary,
    pub window: WindowSummary,
    pub system: SystemSummary,
    pub combination: String,
    pub tolerances: Tolerances,
    pub reports: Vec<TheoremReport>,
}

/// Everything computed for one config and seed, before anything is written.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub resolved: Resolved,
    pub seed: u64,
    /// one system, or one per summand of a finite sum
    pub systems: Vec<WavePacketSystem>,
    pub combined: Option<Family<Label>>,
    pub reports: Vec<TheoremReport>,
    combination: &'static str,
}

impl Evaluation {
    pub fn report_file(&self, generated_at: &str) -> ReportFile {
        let w = &self.resolved.ambient;
        let spec = w.field().spec();
        let p = &self.resolved.params;
        ReportFile {
            schema_version: SCHEMA_VERSION,
            generated_at: generated_at.to_string(),
            library: Library::current(),
            seed: self.seed,
            field: FieldSummary { p: spec.p(), c: spec.c(), q: spec.q(), modulus: spec.modulus().to_vec() },
            window: WindowSummary::of(w),
            system: SystemSummary {
                a: p.a.to_string(),
                b: p.b.to_string(),
                j_range: [p.j_min, p.j_max],
                k_count: p.k_count,
                m_count: p.m_count,
                packets: self.systems[0].len(),
                source_window: WindowSummary::of(&self.resolved.source),
            },
            combination: self.combination.to_string(),
            tolerances: self.resolved.tolerances,
            reports: self.reports.clone(),
        }
    }
}

fn build_generator(
    g: &GeneratorConfig,
    path: &str,
    source: &ModelWindow,
    base_dir: &Path,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> RunResult<SampledFunction> {
    match g {
        GeneratorConfig::Indicator { ball } => Ok(SampledFunction::indicator_ball(source.clone(), *ball)),
        GeneratorConfig::Random => Ok(gaussian_function(source, rng)),
        GeneratorConfig::File { path: file } => {
            let at = format!("{path}.path");
            let f = read_function(&base_dir.join(file)).map_err(|e| RunError::core(&at, e))?;
            if f.window() == source {
                Ok(f)
            } else if source.contains_window(f.window()) {
                embed(&f, source).map_err(|e| RunError::core(&at, e))
            } else {
                Err(RunError::at(
                    ErrorCode::InvalidWindow,
                    &at,
                    format!(
                        "generator window (M={}, N={}) does not fit the source window (M={}, N={})",
                        f.window().m(),
                        f.window().n(),
                        source.m(),
                        source.n()
                    ),
                ))
            }
        }
    }
}

fn c64(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

enum Combination {
    None,
    Partition(IndexPartition, CoefficientFamily, lfwave::checks::PairCounting),
    Matrix(CombinationMatrix),
    FiniteSum(Vec<f64>, usize),
}

/// Build the model, generator(s), system(s) and combination of `cfg`, then run its checks.
/// All randomness is drawn from `cfg.seed` in a fixed order.
pub fn evaluate(cfg: &ExperimentConfig, base_dir: &Path) -> RunResult<Evaluation> {
    let resolved = cfg.resolve(base_dir)?;
    let mut rng = instance_rng(cfg.seed);
    let (ambient, source, params) = (&resolved.ambient, &resolved.source, &resolved.params);

    let generators: Vec<(String, &GeneratorConfig)> = match &cfg.combination {
        CombinationConfig::FiniteSum(fs) => fs
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| (format!("combination.generators.{i}"), g))
            .collect(),
        _ => vec![("generator".into(), &cfg.generator)],
    };
    let mut systems = Vec::with_capacity(generators.len());
    for (path, g) in generators {
        let psi = build_generator(g, &path, source, base_dir, &mut rng)?;
        systems.push(generate_system(&psi, params, ambient).map_err(|e| RunError::core("system", e))?);
    }
    let system = &systems[0];
    let labels = system.labels();

    let combination = match &cfg.combination {
        CombinationConfig::None => Combination::None,
        CombinationConfig::Partition(p) => {
            let partition = match p.layout {
                BlockLayout::Singletons => IndexPartition::singletons(labels)?,
                BlockLayout::Random => random_partition(labels, p.max_block, &mut rng),
                BlockLayout::Explicit => {
                    let mut blocks = Vec::with_capacity(p.blocks.len());
                    for (i, b) in p.blocks.iter().enumerate() {
                        let at = format!("combination.blocks.{i}");
                        let members = b
                            .members
                            .iter()
                            .map(|m| label_of(*m, &format!("{at}.members")))
                            .collect::<RunResult<Vec<_>>>()?;
                        blocks.push((label_of(b.label, &format!("{at}.label"))?, members));
                    }
                    IndexPartition::new(blocks, labels).map_err(|e| RunError::core("combination.blocks", e))?
                }
            };
            let coeffs = match &p.coefficients {
                CoefficientConfig::Constant { value } => CoefficientFamily::constant(labels, c64(*value)),
                CoefficientConfig::Random => random_coefficients(labels, &mut rng),
                CoefficientConfig::Explicit { values } => {
                    let mut map = BTreeMap::new();
                    for (i, v) in values.iter().enumerate() {
                        let label = label_of(v.label, &format!("combination.coefficients.values.{i}.label"))?;
                        map.insert(label, c64(v.value));
                    }
                    CoefficientFamily::new(map)
                }
            };
            Combination::Partition(partition, coeffs, p.pair_counting)
        }
        CombinationConfig::Matrix(m) => {
            let u = match m.layout {
                MatrixLayout::Identity => CombinationMatrix::identity(labels),
                MatrixLayout::RandomAdmissible => random_admissible_matrix(labels, &mut rng),
                MatrixLayout::Explicit => {
                    let cols = labels.len();
                    if let Some((r, row)) = m.entries.iter().enumerate().find(|(_, r)| r.len() != cols) {
                        return Err(RunError::at(
                            ErrorCode::LabelMismatch,
                            &format!("combination.entries.{r}"),
                            format!("row has {} entries but the system has {cols} packets", row.len()),
                        ));
                    }
                    let rows = m.entries.len();
                    let e = DMatrix::from_fn(rows, cols, |r, c| c64(m.entries[r][c]));
                    let row_labels = (0..rows as u64).map(|s| Label::new(0, s, 0)).collect();
                    CombinationMatrix::new(row_labels, labels.to_vec(), e)
                        .map_err(|e| RunError::core("combination.entries", e))?
                }
            };
            Combination::Matrix(u.scaled(c64(m.scale)))
        }
        CombinationConfig::FiniteSum(fs) => Combination::FiniteSum(fs.alphas.clone(), fs.pivot),
    };

    let combined = match &combination {
        Combination::None => None,
        Combination::Partition(p, a, _) => {
            Some(build_combined(&system.family, p, a).map_err(|e| RunError::core("combination", e))?)
        }
        Combination::Matrix(u) => {
            Some(combine_general(u, &system.family).map_err(|e| RunError::core("combination", e))?)
        }
        Combination::FiniteSum(alphas, _) => {
            let a: Vec<Complex64> = alphas.iter().map(|x| Complex64::new(*x, 0.0)).collect();
            Some(finite_sum_system(&systems, &a).map_err(|e| RunError::core("combination", e))?)
        }
    };

    let tol = resolved.tolerances;
    let families: Vec<&Family<Label>> = systems.iter().map(|s| &s.family).collect();
    let mut reports = Vec::with_capacity(cfg.checks.len());
    for (i, id) in cfg.checks.iter().enumerate() {
        let at = format!("checks.{i}");
        let fail = |e| RunError::core(&at, e);
        match (id.as_str(), &combination) {
            (ids::FRAME_BOUNDS, _) => {
                let subject = combined.as_ref().unwrap_or(&system.family);
                reports.push(check_frame_bounds(subject, tol).map_err(fail)?);
            }
            (ids::COMBINATION_DOMINANCE, Combination::Partition(p, a, _)) => {
                reports.push(check_combination_dominance(&system.family, p, a, tol).map_err(fail)?);
            }
            (ids::COMBINATION_DOMINANCE, Combination::Matrix(_)) => {
                let c = combined.as_ref().expect("built above");
                reports.push(check_combination_dominance_families(&system.family, c, tol).map_err(fail)?);
            }
            (ids::DIAGONAL_DOMINANCE, Combination::Partition(p, a, pairs)) => {
                reports.push(check_diagonal_dominance(&system.family, p, a, *pairs, tol).map_err(fail)?);
            }
            (ids::GRAM_GERSHGORIN, Combination::Matrix(u)) => {
                reports.push(check_gram_gershgorin(&system.family, u, tol).map_err(fail)?);
            }
            (ids::FINITE_SUM_IFF, Combination::FiniteSum(alphas, _)) => {
                let a: Vec<Complex64> = alphas.iter().map(|x| Complex64::new(*x, 0.0)).collect();
                reports.push(check_finite_sum_iff(&families, &a, tol).map_err(fail)?);
            }
            (ids::FINITE_SUM_SUFFICIENT, Combination::FiniteSum(alphas, pivot)) => {
                for v in [SumConditionVariant::Literal, SumConditionVariant::Corrected] {
                    reports.push(check_finite_sum_sufficient(&families, alphas, *pivot, v, tol).map_err(fail)?);
                }
            }
            (ids::FINITE_SUM_CROSS_TERM, Combination::FiniteSum(alphas, pivot)) => {
                reports.push(check_finite_sum_cross_term(&families, alphas, *pivot, tol).map_err(fail)?);
            }
            (ids::FINITE_SUM_BOUND_RELATIONS, Combination::FiniteSum(alphas, _)) => {
                reports.push(check_finite_sum_bound_relations(&families, alphas, tol).map_err(fail)?);
            }
            _ => unreachable!("check/combination pairs are validated by resolve"),
        }
    }

    let kind = match cfg.combination {
        CombinationConfig::None => "none",
        CombinationConfig::Partition(_) => "partition",
        CombinationConfig::Matrix(_) => "matrix",
        CombinationConfig::FiniteSum(_) => "finite-sum",
    };
    Ok(Evaluation { resolved, seed: cfg.seed, systems, combined, reports, combination: kind })
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn json_bytes<T: Serialize>(value: &T) -> RunResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)
        .map_err(|e| RunError::new(ErrorCode::Io, None, e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> RunResult<()> {
    atomic_write(path, &json_bytes(value)?).map_err(RunError::from)
}

fn create_dir(dir: &Path) -> RunResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| RunError::new(ErrorCode::Io, None, format!("{}: {e}", dir.display())))
}

fn report_csv(reports: &[TheoremReport]) -> RunResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| RunError::new(ErrorCode::Io, None, e.to_string());
    w.write_record(TheoremReport::CSV_HEADER).map_err(io)?;
    for r in reports {
        w.write_record(r.csv_record()).map_err(io)?;
    }
    w.into_inner().map_err(|e| RunError::new(ErrorCode::Io, None, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestInput {
    pub role: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub library: Library,
    pub inputs: Vec<ManifestInput>,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
}

/// Where a run wrote its files.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub directory: PathBuf,
    pub outputs: Vec<String>,
    pub reports: Vec<TheoremReport>,
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn generator_inputs(cfg: &ExperimentConfig, base_dir: &Path) -> Vec<ManifestInput> {
    let gens: Vec<&GeneratorConfig> = match &cfg.combination {
        CombinationConfig::FiniteSum(fs) => fs.generators.iter().collect(),
        _ => vec![&cfg.generator],
    };
    gens.into_iter()
        .filter_map(|g| match g {
            GeneratorConfig::File { path } => Some(ManifestInput {
                role: "generator".into(),
                path: base_dir.join(path).display().to_string(),
            }),
            _ => None,
        })
        .collect()
}

/// Write the files of one evaluated config into `dir`; returns their names.
fn write_bundle(eval: &Evaluation, formats: &[OutputFormat], dir: &Path, generated_at: &str) -> RunResult<Vec<String>> {
    create_dir(dir)?;
    let mut outputs = Vec::new();
    let ambient = &eval.resolved.ambient;
    if formats.contains(&OutputFormat::Json) {
        write_json(&dir.join(REPORT_FILE), &eval.report_file(generated_at))?;
        outputs.push(REPORT_FILE.to_string());
    }
    if formats.contains(&OutputFormat::Csv) {
        atomic_write(&dir.join("report.csv"), &report_csv(&eval.reports)?)?;
        outputs.push("report.csv".into());
    }
    if formats.contains(&OutputFormat::Matrices) {
        let mut families = vec![("", &eval.systems[0].family)];
        if let Some(c) = &eval.combined {
            families.push(("combined-", c));
        }
        for (prefix, fam) in families {
            let labels: Vec<String> = fam.labels.iter().map(|l| l.to_string()).collect();
            let gram = gram_matrix(&fam.vectors)?;
            let name = format!("{prefix}gram.csv");
            write_matrix(&dir.join(&name), &gram, FileKind::Gram, ambient, labels)?;
            outputs.push(name);
            let s = frame_operator(&fam.vectors)?;
            let name = format!("{prefix}frame-operator.csv");
            write_matrix(&dir.join(&name), &s, FileKind::FrameOperator, ambient, Vec::new())?;
            outputs.push(name);
        }
    }
    if formats.contains(&OutputFormat::Functions) {
        for (i, sys) in eval.systems.iter().enumerate() {
            let name = if eval.systems.len() == 1 { "generator.csv".to_string() } else { format!("generator-{i}.csv") };
            write_function(&dir.join(&name), &sys.generator)?;
            outputs.push(name);
        }
    }
    Ok(outputs)
}

/// Run the config at `path`, writing into `output` or the configured directory.
pub fn run_experiment(path: &Path, output: Option<&Path>) -> RunResult<RunOutcome> {
    let cfg = crate::config::load_experiment(path)?;
    let base_dir = config_dir(path);
    let eval = evaluate(&cfg, &base_dir)?;
    let dir = output.map(Path::to_path_buf).unwrap_or_else(|| base_dir.join(&cfg.output.directory));
    let mut outputs = write_bundle(&eval, &cfg.output.formats, &dir, &now())?;
    let mut inputs = vec![ManifestInput { role: "config".into(), path: path.display().to_string() }];
    inputs.extend(generator_inputs(&cfg, &base_dir));
    outputs.push(MANIFEST_FILE.into());
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: "run".into(),
        library: Library::current(),
        inputs,
        seeds: vec![cfg.seed],
        outputs: outputs.clone(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(RunOutcome { directory: dir, outputs, reports: eval.reports })
}

// ---------------------------------------------------------------- sweeps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepSpec {
    pub schema_version: u32,
    /// path of an experiment config, or an inline config table
    #[serde(default)]
    pub base: Option<toml::Value>,
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default = "one")]
    pub instances_per_point: u64,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default = "default_cap")]
    pub max_instances: u64,
    /// random-instance property sweeps instead of a config grid
    #[serde(default)]
    pub property: Option<PropertySpec>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> u64 {
    1
}

fn default_cap() -> u64 {
    DEFAULT_MAX_INSTANCES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// dotted config path; array elements by index, e.g. `combination.alphas.1`
    pub path: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PropertySpec {
    pub checks: Vec<PropertyCheck>,
    #[serde(default)]
    pub tolerances: crate::config::TolerancesConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PropertyCheck {
    pub id: String,
    #[serde(default)]
    pub variant: Option<SumConditionVariant>,
    #[serde(default)]
    pub pair_counting: Option<lfwave::checks::PairCounting>,
}

pub fn load_sweep(path: &Path) -> RunResult<SweepSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::new(ErrorCode::MissingFile, None, format!("{}: {e}", path.display())))?;
    parse_toml(&text, &path.display().to_string())
}

fn segment_error(path: &str, msg: impl Into<String>) -> RunError {
    RunError::at(ErrorCode::AxisPath, path, msg)
}

fn lookup<'a>(root: &'a toml::Value, path: &str) -> Option<&'a toml::Value> {
    path.split('.').try_fold(root, |v, seg| match v {
        toml::Value::Table(t) => t.get(seg),
        toml::Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get(i)),
        _ => None,
    })
}

/// Set `path` in `root`. Intermediate segments must exist; the last may add a table key.
fn assign(root: &mut toml::Value, path: &str, value: toml::Value) -> RunResult<()> {
    let segs: Vec<&str> = path.split('.').collect();
    let (last, parents) = segs.split_last().expect("split yields one segment");
    let mut cur = root;
    for seg in parents {
        cur = match cur {
            toml::Value::Table(t) => t.get_mut(*seg),
            toml::Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| segment_error(path, format!("no config field {seg:?}")))?;
    }
    match cur {
        toml::Value::Table(t) => {
            t.insert(last.to_string(), value);
            Ok(())
        }
        toml::Value::Array(a) => {
            let slot = last
                .parse::<usize>()
                .ok()
                .and_then(|i| a.get_mut(i))
                .ok_or_else(|| segment_error(path, format!("index {last:?} out of range")))?;
            *slot = value;
            Ok(())
        }
        _ => Err(segment_error(path, "parent is not a table or array")),
    }
}

fn same_value(a: &toml::Value, b: &toml::Value) -> bool {
    use toml::Value::{Array, Float, Integer};
    match (a, b) {
        (Integer(i), Float(f)) | (Float(f), Integer(i)) => *f == *i as f64,
        (Array(x), Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same_value(p, q)),
        _ => a == b,
    }
}

fn to_value(cfg: &ExperimentConfig) -> RunResult<toml::Value> {
    toml::Value::try_from(cfg).map_err(|e| RunError::new(ErrorCode::InvalidArgument, None, e.to_string()))
}

/// `base` with each `(path, value)` applied. A path is valid when the value lands in the
/// resulting config unchanged; unknown or ignored fields are rejected.
pub fn apply_axes(base: &ExperimentConfig, assignments: &[(&str, &toml::Value)]) -> RunResult<ExperimentConfig> {
    let mut root = to_value(base)?;
    for (path, value) in assignments {
        if *path == "seed" || *path == "schemaVersion" {
            return Err(segment_error(path, "set by the sweep itself"));
        }
        assign(&mut root, path, (*value).clone())?;
    }
    let cfg: ExperimentConfig = root
        .try_into()
        .map_err(|e: toml::de::Error| segment_error(assignments.first().map(|a| a.0).unwrap_or(""), e.message()))?;
    let back = to_value(&cfg)?;
    for (path, value) in assignments {
        match lookup(&back, path) {
            Some(v) if same_value(v, value) => {}
            _ => return Err(segment_error(path, "does not address a config field")),
        }
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryFile {
    pub schema_version: u32,
    pub generated_at: String,
    pub library: Library,
    pub seed_base: u64,
    pub instances: u64,
    pub axes: Vec<String>,
    pub summaries: Vec<SweepSummary>,
}

/// One evaluated sweep instance.
#[derive(Debug, Clone)]
pub struct SweepInstance {
    pub index: u64,
    pub point: Option<usize>,
    pub seed: u64,
    pub axis_values: Vec<String>,
    pub reports: Vec<TheoremReport>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub directory: PathBuf,
    pub instances: Vec<SweepInstance>,
    pub summaries: Vec<SweepSummary>,
}

fn grid_points(axes: &[Axis]) -> Vec<Vec<usize>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..axis.values.len()).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect()
    })
}

fn axis_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(f) => lfwave::checks::fmt_f64(*f),
        other => other.to_string(),
    }
}

fn summarize(instances: &[SweepInstance]) -> RunResult<Vec<SweepSummary>> {
    let mut groups: Vec<((String, Option<String>), Vec<TheoremReport>)> = Vec::new();
    for r in instances.iter().flat_map(|i| &i.reports) {
        let key = (r.theorem_id.clone(), r.variant.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.clone()),
            None => groups.push((key, vec![r.clone()])),
        }
    }
    groups
        .into_iter()
        .map(|((id, _), reports)| {
            let check = SweepCheck::new(&id)?;
            Ok(SweepSummary::from_reports(check, &reports))
        })
        .collect()
}

fn sweep_csv(axes: &[String], instances: &[SweepInstance], summaries: &[SweepSummary]) -> RunResult<Vec<u8>> {
    let io = |e: csv::Error| RunError::new(ErrorCode::Io, None, e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    let summary_cols = ["instances", "conditionTrue", "frameTrue", "borderlineCount", "violations"];
    let mut header: Vec<String> = vec!["row".into(), "instance".into(), "point".into()];
    header.extend(axes.iter().cloned());
    header.extend(TheoremReport::CSV_HEADER.iter().map(|s| s.to_string()));
    header.extend(summary_cols.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(io)?;
    let blank = |n: usize| std::iter::repeat_n(String::new(), n);
    for inst in instances {
        for r in &inst.reports {
            let mut row = vec!["instance".to_string(), inst.index.to_string()];
            row.push(inst.point.map(|p| p.to_string()).unwrap_or_default());
            row.extend(inst.axis_values.iter().cloned());
            row.extend(r.csv_record());
            row.extend(blank(summary_cols.len()));
            w.write_record(&row).map_err(io)?;
        }
    }
    for s in summaries {
        let mut row = vec!["summary".to_string(), String::new(), String::new()];
        row.extend(blank(axes.len()));
        let mut rec: Vec<String> = blank(TheoremReport::CSV_HEADER.len()).collect();
        rec[0] = s.theorem_id.clone();
        rec[1] = s.variant.clone().unwrap_or_default();
        row.extend(rec);
        row.extend([s.instances, s.condition_true, s.frame_true, s.borderline, s.violations].map(|n| n.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| RunError::new(ErrorCode::Io, None, e.to_string()))
}

fn load_base(spec: &SweepSpec, spec_dir: &Path) -> RunResult<(ExperimentConfig, PathBuf, Option<PathBuf>)> {
    match &spec.base {
        Some(toml::Value::String(p)) => {
            let path = spec_dir.join(p);
            let cfg = crate::config::load_experiment(&path)?;
            Ok((cfg, config_dir(&path), Some(path)))
        }
        Some(v @ toml::Value::Table(_)) => {
            let cfg = ExperimentConfig::deserialize(v.clone())
                .map_err(|e| RunError::at(ErrorCode::ConfigSyntax, "base", e.message()))?;
            Ok((cfg, spec_dir.to_path_buf(), None))
        }
        Some(_) => Err(RunError::at(ErrorCode::ConfigSyntax, "base", "expected a path or a table")),
        None => Err(RunError::at(ErrorCode::ConfigSyntax, "base", "a sweep without [property] needs a base config")),
    }
}

/// Run the sweep spec at `path`.
pub fn run_sweep(path: &Path, output: Option<&Path>) -> RunResult<SweepOutcome> {
    let spec = load_sweep(path)?;
    let spec_dir = config_dir(path);
    let dir = output.map(Path::to_path_buf).unwrap_or_else(|| spec_dir.join(&spec.output.directory));
    run_sweep_spec(&spec, path, &spec_dir, &dir)
}

pub fn run_sweep_spec(spec: &SweepSpec, spec_path: &Path, spec_dir: &Path, dir: &Path) -> RunResult<SweepOutcome> {
    if spec.schema_version != SCHEMA_VERSION {
        return Err(RunError::at(
            ErrorCode::SchemaVersion,
            "schemaVersion",
            format!("expected {SCHEMA_VERSION}, found {}", spec.schema_version),
        ));
    }
    if spec.instances_per_point == 0 {
        return Err(RunError::at(ErrorCode::InvalidArgument, "instancesPerPoint", "must be positive"));
    }
    let per_point = spec.instances_per_point;
    let stamp = now();
    let points = match &spec.property {
        Some(p) => p.checks.len() as u64,
        None => spec.axes.iter().map(|a| a.values.len() as u64).product(),
    };
    let needed = points.saturating_mul(per_point);
    if needed > spec.max_instances {
        return Err(RunError::at(
            ErrorCode::CapExceeded,
            "maxInstances",
            format!("sweep needs {needed} instances but maxInstances is {}; raise it to at least {needed}", spec.max_instances),
        ));
    }

    let mut inputs = vec![ManifestInput { role: "sweep".into(), path: spec_path.display().to_string() }];
    let axis_names: Vec<String> = spec.axes.iter().map(|a| a.path.clone()).collect();
    let instances = match &spec.property {
        Some(prop) => {
            if spec.base.is_some() || !spec.axes.is_empty() {
                return Err(RunError::at(ErrorCode::InvalidArgument, "property", "property sweeps take no base or axes"));
            }
            property_instances(prop, spec.seed_base, per_point)?
        }
        None => {
            let (base, base_dir, base_path) = load_base(spec, spec_dir)?;
            if let Some(p) = base_path {
                inputs.push(ManifestInput { role: "config".into(), path: p.display().to_string() });
            }
            inputs.extend(generator_inputs(&base, &base_dir));
            for (i, a) in spec.axes.iter().enumerate() {
                if a.values.is_empty() {
                    return Err(segment_error(&format!("axes.{i}.values"), "axis has no values"));
                }
            }
            // validate every grid point before computing anything
            let mut configs = Vec::new();
            for point in grid_points(&spec.axes) {
                let assignments: Vec<(&str, &toml::Value)> = spec
                    .axes
                    .iter()
                    .zip(&point)
                    .map(|(a, &i)| (a.path.as_str(), &a.values[i]))
                    .collect();
                let cfg = apply_axes(&base, &assignments)?;
                cfg.resolve(&base_dir)?;
                let texts = assignments.iter().map(|(_, v)| axis_text(v)).collect::<Vec<_>>();
                configs.push((cfg, texts));
            }
            let jobs: Vec<(u64, usize)> = (0..configs.len())
                .flat_map(|p| (0..per_point).map(move |r| (p as u64 * per_point + r, p)))
                .collect();
            jobs.par_iter()
                .map(|&(index, p)| {
                    let (cfg, texts) = &configs[p];
                    let mut cfg = cfg.clone();
                    cfg.seed = spec.seed_base.wrapping_add(index);
                    let eval = evaluate(&cfg, &base_dir).map_err(|mut e| {
                        e.path = Some(format!("instance {index}{}", e.path.map(|p| format!(" {p}")).unwrap_or_default()));
                        e
                    })?;
                    Ok((SweepInstance { index, point: Some(p), seed: cfg.seed, axis_values: texts.clone(), reports: eval.reports.clone() }, eval))
                })
                .collect::<RunResult<Vec<_>>>()?
                .into_iter()
                .map(|(inst, eval)| {
                    let per = dir.join("instances");
                    create_dir(&per)?;
                    write_json(&per.join(format!("instance-{:06}.json", inst.index)), &eval.report_file(&stamp))?;
                    Ok(inst)
                })
                .collect::<RunResult<Vec<_>>>()?
        }
    };

    create_dir(dir)?;
    if spec.property.is_some() {
        let per = dir.join("instances");
        create_dir(&per)?;
        for inst in &instances {
            write_json(&per.join(format!("instance-{:06}.json", inst.index)), &inst.reports)?;
        }
    }
    let summaries = summarize(&instances)?;
    atomic_write(&dir.join(SWEEP_FILE), &sweep_csv(&axis_names, &instances, &summaries)?)?;
    let summary = SummaryFile {
        schema_version: SCHEMA_VERSION,
        generated_at: stamp,
        library: Library::current(),
        seed_base: spec.seed_base,
        instances: instances.len() as u64,
        axes: axis_names,
        summaries: summaries.clone(),
    };
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: "sweep".into(),
        library: Library::current(),
        inputs,
        seeds: instances.iter().map(|i| i.seed).collect(),
        outputs: vec![SWEEP_FILE.into(), SUMMARY_FILE.into(), "instances".into(), MANIFEST_FILE.into()],
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(SweepOutcome { directory: dir.to_path_buf(), instances, summaries })
}

fn property_instances(prop: &PropertySpec, seed_base: u64, per_check: u64) -> RunResult<Vec<SweepInstance>> {
    let tol = prop.tolerances.tolerances();
    let mut out = Vec::new();
    for (c, pc) in prop.checks.iter().enumerate() {
        let at = format!("property.checks.{c}");
        let mut check = SweepCheck::new(&pc.id).map_err(|_| {
            RunError::at(ErrorCode::UnknownCheck, &at, format!("unknown check {:?}; known: {}", pc.id, ids::ALL.join(", ")))
        })?;
        if let Some(v) = pc.variant {
            check = check.with_variant(v);
        }
        if let Some(p) = pc.pair_counting {
            check = check.with_pairs(p);
        }
        let first = seed_base.wrapping_add(c as u64 * per_check);
        let (reports, _) = property_sweep(check, first, per_check as usize, tol).map_err(|e| RunError::core(&at, e))?;
        out.extend(reports.into_iter().enumerate().map(|(i, r)| SweepInstance {
            index: c as u64 * per_check + i as u64,
            point: None,
            seed: r.seed.unwrap_or(first + i as u64),
            axis_values: Vec::new(),
            reports: vec![r],
        }));
    }
    Ok(out)
}
