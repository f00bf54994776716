//! Experiment and sweep configuration files (TOML).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lfwave::checks::{ids, PairCounting, Tolerances};
use lfwave::gf::{is_prime, FieldSpec, MAX_ORDER};
use lfwave::laurent::{ExponentWindow, LocalField, LocalFieldElement};
use lfwave::model::ModelWindow;
use lfwave::wavepacket::{Label, WavePacketParams};

use crate::error::{ErrorCode, RunError, RunResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// instance seed; every random choice in the run is drawn from it
    #[serde(default)]
    pub seed: u64,
    pub field: FieldConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub generator: GeneratorConfig,
    pub system: SystemConfig,
    #[serde(default)]
    pub combination: CombinationConfig,
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FieldConfig {
    pub p: u32,
    pub c: u32,
    /// coefficients low to high, monic
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(rename = "M")]
    pub m: i64,
    #[serde(rename = "N")]
    pub n: i64,
    /// inclusive exponent range of field arithmetic
    #[serde(default, rename = "exponentWindow")]
    pub exponent_window: Option<[i32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorConfig {
    /// indicator of `p^ball D`
    Indicator {
        #[serde(default)]
        ball: i32,
    },
    /// function file written by this tool
    File { path: PathBuf },
    /// unit-norm complex Gaussian
    Random,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig::Indicator { ball: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SystemConfig {
    pub a: String,
    pub b: String,
    pub j_range: [i32; 2],
    pub k_count: u64,
    pub m_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CombinationConfig {
    #[default]
    None,
    Partition(PartitionConfig),
    Matrix(MatrixConfig),
    FiniteSum(FiniteSumConfig),
}

impl CombinationConfig {
    fn kind(&self) -> &'static str {
        match self {
            CombinationConfig::None => "none",
            CombinationConfig::Partition(_) => "partition",
            CombinationConfig::Matrix(_) => "matrix",
            CombinationConfig::FiniteSum(_) => "finite-sum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BlockLayout {
    #[default]
    Singletons,
    Random,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PartitionConfig {
    #[serde(default)]
    pub layout: BlockLayout,
    /// largest block of a random layout
    #[serde(default = "default_max_block")]
    pub max_block: usize,
    #[serde(default)]
    pub blocks: Vec<BlockConfig>,
    #[serde(default)]
    pub coefficients: CoefficientConfig,
    #[serde(default)]
    pub pair_counting: PairCounting,
}

fn default_max_block() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    pub label: [i64; 3],
    pub members: Vec<[i64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientConfig {
    Constant { value: [f64; 2] },
    /// magnitude log-uniform in [0.1, 10], uniform phase
    Random,
    Explicit { values: Vec<LabelValue> },
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        CoefficientConfig::Constant { value: [1.0, 0.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelValue {
    pub label: [i64; 3],
    pub value: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixLayout {
    #[default]
    Identity,
    RandomAdmissible,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatrixConfig {
    #[serde(default)]
    pub layout: MatrixLayout,
    /// multiplies the whole matrix
    #[serde(default = "unit")]
    pub scale: [f64; 2],
    /// rows of `[re, im]` entries, one column per system label
    #[serde(default)]
    pub entries: Vec<Vec<[f64; 2]>>,
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FiniteSumConfig {
    pub generators: Vec<GeneratorConfig>,
    pub alphas: Vec<f64>,
    /// 0-based index of the dominant summand
    #[serde(default)]
    pub pivot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TolerancesConfig {
    #[serde(default = "default_tol")]
    pub frame_tol: f64,
    #[serde(default = "default_tol")]
    pub float_tol: f64,
}

fn default_tol() -> f64 {
    1e-8
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        Self { frame_tol: default_tol(), float_tol: default_tol() }
    }
}

impl TolerancesConfig {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances { frame_tol: self.frame_tol, float_tol: self.float_tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// report.json
    Json,
    /// report.csv, one row per check
    Csv,
    /// Gram matrix and frame operator CSVs
    Matrices,
    /// generator CSVs
    Functions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_directory() -> PathBuf {
    PathBuf::from("lfwave-out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: default_directory(), formats: default_formats() }
    }
}

/// Parse TOML text; syntax and type errors carry the byte offset.
pub fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> RunResult<T> {
    toml::from_str(text).map_err(|e| {
        let at = e.span().map(|s| format!(" at byte {}", s.start)).unwrap_or_default();
        RunError::new(ErrorCode::ConfigSyntax, None, format!("{what}{at}: {}", e.message()))
    })
}

pub fn load_experiment(path: &Path) -> RunResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::new(ErrorCode::MissingFile, None, format!("{}: {e}", path.display())))?;
    parse_toml(&text, &path.display().to_string())
}

/// Everything in a config that does not need randomness, checked and resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub ambient: ModelWindow,
    pub params: WavePacketParams,
    pub source: ModelWindow,
    pub tolerances: Tolerances,
}

pub fn label_of(raw: [i64; 3], path: &str) -> RunResult<Label> {
    let j = i32::try_from(raw[0]);
    let (k, m) = (u64::try_from(raw[1]), u64::try_from(raw[2]));
    match (j, k, m) {
        (Ok(j), Ok(k), Ok(m)) => Ok(Label::new(j, k, m)),
        _ => Err(RunError::at(
            ErrorCode::LabelMismatch,
            path,
            format!("label {raw:?} needs j in i32 and k, m >= 0"),
        )),
    }
}

fn parse_element(field: &LocalField, text: &str, path: &str) -> RunResult<LocalFieldElement> {
    let x = field
        .parse(text)
        .map_err(|e| RunError::at(ErrorCode::ElementSyntax, path, format!("{text:?}: {e}")))?;
    let again = field
        .parse(&x.to_string())
        .map_err(|e| RunError::at(ErrorCode::ElementSyntax, path, e.to_string()))?;
    if again != x {
        return Err(RunError::at(
            ErrorCode::ElementSyntax,
            path,
            format!("{text:?} does not round-trip through its text form {x}"),
        ));
    }
    Ok(x)
}

fn check_grid(
    field: &LocalField,
    base: &LocalFieldElement,
    count: u64,
    name: &str,
    source: &ModelWindow,
    modulation: bool,
) -> RunResult<()> {
    let path = format!("system.{name}");
    for k in 0..count {
        let shifted = field.u(k).and_then(|u| u.mul(base)).map_err(|e| RunError::core(&path, e))?;
        let fits = match shifted.valuation() {
            None => true,
            Some(v) if modulation => v >= -(source.n() as i32),
            Some(v) => v >= -(source.m() as i32) && shifted.hi() < source.n() as i32,
        };
        if !fits {
            let op = if modulation { "modulation" } else { "translation" };
            return Err(RunError::at(
                ErrorCode::GridExactness,
                &path,
                format!(
                    "{name} = {base}: {op} by u({k})*{name} = {shifted} is not representable on the grid of window (M={}, N={})",
                    source.m(),
                    source.n()
                ),
            ));
        }
    }
    Ok(())
}

const COMPATIBLE: &[(&str, &[&str])] = &[
    ("none", &[ids::FRAME_BOUNDS]),
    (
        "partition",
        &[ids::FRAME_BOUNDS, ids::COMBINATION_DOMINANCE, ids::DIAGONAL_DOMINANCE],
    ),
    (
        "matrix",
        &[ids::FRAME_BOUNDS, ids::COMBINATION_DOMINANCE, ids::GRAM_GERSHGORIN],
    ),
    (
        "finite-sum",
        &[
            ids::FRAME_BOUNDS,
            ids::FINITE_SUM_IFF,
            ids::FINITE_SUM_SUFFICIENT,
            ids::FINITE_SUM_CROSS_TERM,
            ids::FINITE_SUM_BOUND_RELATIONS,
        ],
    ),
];

impl ExperimentConfig {
    /// Validate everything that can be checked without drawing random numbers.
    /// Relative file paths resolve against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> RunResult<Resolved> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(RunError::at(
                ErrorCode::SchemaVersion,
                "schemaVersion",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        let f = &self.field;
        if !is_prime(f.p) {
            return Err(RunError::at(ErrorCode::CompositeP, "field.p", format!("{} is not prime", f.p)));
        }
        if f.c == 0 || (f.p as u64).checked_pow(f.c).is_none_or(|q| q > MAX_ORDER as u64) {
            return Err(RunError::at(
                ErrorCode::InvalidField,
                "field.c",
                format!("need c >= 1 and p^c <= {MAX_ORDER}"),
            ));
        }
        let spec = match &f.modulus {
            Some(m) => FieldSpec::with_modulus(f.p, f.c, m.clone()),
            None => FieldSpec::new(f.p, f.c),
        }
        .map_err(|e| RunError::core("field.modulus", e))?;

        let w = &self.window;
        if w.m < 0 {
            return Err(RunError::at(ErrorCode::NegativeWindow, "window.M", format!("M = {} is negative", w.m)));
        }
        if w.n < 0 {
            return Err(RunError::at(ErrorCode::NegativeWindow, "window.N", format!("N = {} is negative", w.n)));
        }
        let ew = match w.exponent_window {
            Some([lo, hi]) => ExponentWindow { lo, hi },
            None => ExponentWindow::DEFAULT,
        };
        let field = LocalField::new(spec, ew).map_err(|e| RunError::core("window.exponentWindow", e))?;
        let ambient = ModelWindow::from_signed(field.clone(), w.m, w.n)
            .map_err(|e| RunError::core("window", e))?;

        let s = &self.system;
        let a = parse_element(&field, &s.a, "system.a")?;
        let b = parse_element(&field, &s.b, "system.b")?;
        if s.k_count == 0 || s.m_count == 0 {
            return Err(RunError::at(ErrorCode::InvalidSystem, "system", "kCount and mCount must be positive"));
        }
        if s.j_range[0] > s.j_range[1] {
            return Err(RunError::at(ErrorCode::InvalidSystem, "system.jRange", "jRange must be [jMin, jMax] with jMin <= jMax"));
        }
        let params = WavePacketParams {
            a,
            b,
            j_min: s.j_range[0],
            j_max: s.j_range[1],
            k_count: s.k_count,
            m_count: s.m_count,
        };
        let source = params
            .source_window(&ambient)
            .map_err(|e| RunError::core("system.jRange", e))?;
        check_grid(&field, &params.a, s.k_count, "a", &source, false)?;
        check_grid(&field, &params.b, s.m_count, "b", &source, true)?;

        let gens: Vec<(String, &GeneratorConfig)> = match &self.combination {
            CombinationConfig::FiniteSum(fs) => fs
                .generators
                .iter()
                .enumerate()
                .map(|(i, g)| (format!("combination.generators.{i}"), g))
                .collect(),
            _ => vec![("generator".to_string(), &self.generator)],
        };
        for (path, g) in gens {
            if let GeneratorConfig::File { path: file } = g {
                let full = base_dir.join(file);
                if !full.is_file() {
                    return Err(RunError::at(
                        ErrorCode::MissingFile,
                        &format!("{path}.path"),
                        format!("{} does not exist", full.display()),
                    ));
                }
            }
        }

        self.check_combination()?;

        let kind = self.combination.kind();
        let allowed = COMPATIBLE.iter().find(|(k, _)| *k == kind).map(|(_, a)| *a).unwrap_or(&[]);
        if self.checks.is_empty() {
            return Err(RunError::at(ErrorCode::UnknownCheck, "checks", "no checks requested"));
        }
        for (i, c) in self.checks.iter().enumerate() {
            let path = format!("checks.{i}");
            if !ids::ALL.contains(&c.as_str()) {
                return Err(RunError::at(
                    ErrorCode::UnknownCheck,
                    &path,
                    format!("unknown check {c:?}; known: {}", ids::ALL.join(", ")),
                ));
            }
            if !allowed.contains(&c.as_str()) {
                return Err(RunError::at(
                    ErrorCode::CheckCombination,
                    &path,
                    format!("check {c:?} does not apply to combination kind {kind:?}"),
                ));
            }
        }
        let t = &self.tolerances;
        if !(t.frame_tol > 0.0 && t.float_tol > 0.0) {
            return Err(RunError::at(ErrorCode::InvalidArgument, "tolerances", "tolerances must be positive"));
        }
        Ok(Resolved { ambient, params, source, tolerances: t.tolerances() })
    }

    fn check_combination(&self) -> RunResult<()> {
        match &self.combination {
            CombinationConfig::Partition(p) => {
                if p.layout == BlockLayout::Explicit {
                    let mut seen = BTreeSet::new();
                    for (bi, block) in p.blocks.iter().enumerate() {
                        for (mi, m) in block.members.iter().enumerate() {
                            let path = format!("combination.blocks.{bi}.members.{mi}");
                            let label = label_of(*m, &path)?;
                            if !seen.insert(label) {
                                return Err(RunError::at(
                                    ErrorCode::PartitionOverlap,
                                    &path,
                                    format!("{label} already belongs to an earlier block"),
                                ));
                            }
                        }
                    }
                    if p.blocks.is_empty() {
                        return Err(RunError::at(ErrorCode::Partition, "combination.blocks", "explicit layout needs blocks"));
                    }
                }
                if p.layout == BlockLayout::Random && p.max_block == 0 {
                    return Err(RunError::at(ErrorCode::Partition, "combination.maxBlock", "must be positive"));
                }
                Ok(())
            }
            CombinationConfig::Matrix(m) => {
                if m.layout == MatrixLayout::Explicit && m.entries.is_empty() {
                    return Err(RunError::at(ErrorCode::InvalidArgument, "combination.entries", "explicit layout needs entries"));
                }
                Ok(())
            }
            CombinationConfig::FiniteSum(fs) => {
                if fs.generators.is_empty() || fs.generators.len() != fs.alphas.len() {
                    return Err(RunError::at(
                        ErrorCode::InvalidArgument,
                        "combination.alphas",
                        format!("{} generators but {} alphas", fs.generators.len(), fs.alphas.len()),
                    ));
                }
                if fs.pivot >= fs.generators.len() {
                    return Err(RunError::at(ErrorCode::InvalidArgument, "combination.pivot", "pivot out of range"));
                }
                Ok(())
            }
            CombinationConfig::None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const ONB: &str = r#"
schemaVersion = 1
checks = ["frame-bounds"]

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
"#;

    fn cfg(text: &str) -> ExperimentConfig {
        parse_toml(text, "test").unwrap()
    }

    fn code(text: &str) -> ErrorCode {
        cfg(text).resolve(Path::new(".")).unwrap_err().code
    }

    #[test]
    fn minimal_config_resolves() {
        let r = cfg(ONB).resolve(Path::new(".")).unwrap();
        assert_eq!(r.ambient.dim(), 4);
        assert_eq!(r.source, r.ambient);
    }

    #[test]
    fn rejections_have_distinct_codes() {
        assert_eq!(code(&ONB.replace("p = 2", "p = 4")), ErrorCode::CompositeP);
        let reducible = ONB.replace("c = 1", "c = 2\nmodulus = [1, 0, 1]");
        assert_eq!(code(&reducible), ErrorCode::ReducibleModulus);
        assert_eq!(code(&ONB.replace("M = 1", "M = -1")), ErrorCode::NegativeWindow);
        let overlap = format!(
            "{ONB}\n[combination]\nkind = \"partition\"\nlayout = \"explicit\"\nblocks = [{{ label = [0,0,0], members = [[0,0,0],[0,1,0]] }}, {{ label = [0,1,0], members = [[0,1,0]] }}]\n"
        );
        assert_eq!(code(&overlap), ErrorCode::PartitionOverlap);
        assert_eq!(code(&ONB.replace("schemaVersion = 1", "schemaVersion = 9")), ErrorCode::SchemaVersion);
        assert_eq!(code(&ONB.replace("\"frame-bounds\"", "\"nope\"")), ErrorCode::UnknownCheck);
        assert_eq!(
            code(&ONB.replace("\"frame-bounds\"", "\"gram-gershgorin\"")),
            ErrorCode::CheckCombination
        );
    }

    #[test]
    fn off_grid_translation_names_the_element() {
        let e = cfg(&ONB.replace("a = \"p^0\"", "a = \"p^-2\"")).resolve(Path::new(".")).unwrap_err();
        assert_eq!(e.code, ErrorCode::GridExactness);
        assert_eq!(e.path.as_deref(), Some("system.a"));
        assert!(e.message.contains("a = p^-2"), "{}", e.message);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse_toml::<ExperimentConfig>("schemaVersion = \n", "x").unwrap_err();
        assert_eq!(e.code, ErrorCode::ConfigSyntax);
        assert!(e.message.contains("at byte"), "{}", e.message);
        let e = parse_toml::<ExperimentConfig>(&ONB.replace("kCount", "kCnt"), "x").unwrap_err();
        assert!(e.message.contains("kCnt"), "{}", e.message);
    }

    #[test]
    fn bad_element_text_is_rejected() {
        let e = cfg(&ONB.replace("b = \"p^0\"", "b = \"p^\"")).resolve(Path::new(".")).unwrap_err();
        assert_eq!(e.code, ErrorCode::ElementSyntax);
    }
}
