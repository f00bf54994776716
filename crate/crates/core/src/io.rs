//! CSV files for sampled functions and Hermitian matrices, each with a JSON sidecar
//! `<file>.meta.json` describing the field and window. Floats are written in shortest
//! round-trip form, so save then load reproduces every value bit for bit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::checks::fmt_f64;
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::laurent::{ExponentWindow, LocalField};
use crate::model::{ModelWindow, SampledFunction, ENUMERATION_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WindowMeta {
    pub p: u32,
    pub c: u32,
    pub modulus: Vec<u32>,
    pub m: u32,
    pub n: u32,
    pub enumeration_version: u32,
    pub exponent_lo: i32,
    pub exponent_hi: i32,
}

impl WindowMeta {
    pub fn of(w: &ModelWindow) -> Self {
        let f = w.field();
        Self {
            p: f.p(),
            c: f.spec().c(),
            modulus: f.spec().modulus().to_vec(),
            m: w.m(),
            n: w.n(),
            enumeration_version: ENUMERATION_VERSION,
            exponent_lo: f.window().lo,
            exponent_hi: f.window().hi,
        }
    }

    pub fn window(&self) -> Result<ModelWindow> {
        if self.enumeration_version != ENUMERATION_VERSION {
            return Err(Error::InvalidArgument(format!(
                "file uses grid enumeration version {}, this build reads version {}",
                self.enumeration_version, ENUMERATION_VERSION
            )));
        }
        let spec = FieldSpec::with_modulus(self.p, self.c, self.modulus.clone())?;
        let field = LocalField::new(
            spec,
            ExponentWindow { lo: self.exponent_lo, hi: self.exponent_hi },
        )?;
        ModelWindow::new(field, self.m, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileKind {
    Function,
    Gram,
    FrameOperator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FileMeta {
    pub kind: FileKind,
    pub window: WindowMeta,
    /// matrix order, or grid size for functions
    pub size: usize,
    #[serde(default)]
    pub labels: Vec<String>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Write to a temporary sibling and rename over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = dir.join(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_meta(path: &Path, meta: &FileMeta) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    atomic_write(&sidecar_path(path), text.as_bytes())
}

pub fn read_meta(path: &Path) -> Result<FileMeta> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side)
        .map_err(|e| Error::Io(format!("{}: {e}", side.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let offset = line_col_offset(&text, e.line(), e.column());
        Error::parse(offset, format!("{}: {e}", side.display()))
    })
}

fn line_col_offset(text: &str, line: usize, col: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return offset + col.saturating_sub(1);
        }
        offset += l.len();
    }
    offset
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn function_csv(f: &SampledFunction) -> Result<Vec<u8>> {
    csv_bytes(
        &["index", "re", "im"],
        f.values()
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), fmt_f64(v.re), fmt_f64(v.im)]),
    )
}

pub fn write_function(path: &Path, f: &SampledFunction) -> Result<()> {
    atomic_write(path, &function_csv(f)?)?;
    write_meta(
        path,
        &FileMeta {
            kind: FileKind::Function,
            window: WindowMeta::of(f.window()),
            size: f.window().dim(),
            labels: Vec::new(),
        },
    )
}

/// Parsed CSV rows with the byte offset each row starts at.
fn parse_rows(bytes: &[u8], header: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let found = rdr
        .headers()
        .map_err(|e| csv_error(&e, bytes.len()))?
        .clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::parse(0, format!("expected header {:?}, found {:?}", header.join(","), found.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    let mut rec = csv::StringRecord::new();
    loop {
        let offset = rdr.position().byte() as usize;
        if !rdr.read_record(&mut rec).map_err(|e| csv_error(&e, bytes.len()))? {
            break;
        }
        out.push((offset, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn csv_error(e: &csv::Error, len: usize) -> Error {
    let offset = e.position().map(|p| p.byte() as usize).unwrap_or(len);
    Error::parse(offset, e.to_string())
}

fn field<T: std::str::FromStr>(row: &(usize, Vec<String>), i: usize, name: &str) -> Result<T> {
    row.1[i]
        .trim()
        .parse()
        .map_err(|_| Error::parse(row.0, format!("invalid {name} {:?}", row.1[i])))
}

pub fn parse_function_csv(bytes: &[u8], window: ModelWindow) -> Result<SampledFunction> {
    let rows = parse_rows(bytes, &["index", "re", "im"])?;
    let dim = window.dim();
    if rows.len() != dim {
        return Err(Error::parse(bytes.len(), format!("expected {dim} rows, found {}", rows.len())));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); dim];
    for (expect, row) in rows.iter().enumerate() {
        let idx: usize = field(row, 0, "index")?;
        if idx != expect {
            return Err(Error::parse(row.0, format!("expected index {expect}, found {idx}")));
        }
        values[idx] = Complex64::new(field(row, 1, "re")?, field(row, 2, "im")?);
    }
    SampledFunction::new(window, values)
}

pub fn read_function(path: &Path) -> Result<SampledFunction> {
    let meta = read_meta(path)?;
    if meta.kind != FileKind::Function {
        return Err(Error::InvalidArgument(format!("{} is not a function file", path.display())));
    }
    let bytes = fs::read(path)?;
    parse_function_csv(&bytes, meta.window.window()?)
}

/// Upper triangle (row <= col) of a Hermitian matrix.
pub fn matrix_csv(m: &DMatrix<Complex64>) -> Result<Vec<u8>> {
    let n = m.nrows();
    let rows = (0..n).flat_map(move |r| (r..n).map(move |c| (r, c)));
    csv_bytes(
        &["row", "col", "re", "im"],
        rows.map(|(r, c)| {
            let v = m[(r, c)];
            vec![r.to_string(), c.to_string(), fmt_f64(v.re), fmt_f64(v.im)]
        }),
    )
}

pub fn write_matrix(
    path: &Path,
    m: &DMatrix<Complex64>,
    kind: FileKind,
    window: &ModelWindow,
    labels: Vec<String>,
) -> Result<()> {
    atomic_write(path, &matrix_csv(m)?)?;
    write_meta(
        path,
        &FileMeta { kind, window: WindowMeta::of(window), size: m.nrows(), labels },
    )
}

pub fn parse_matrix_csv(bytes: &[u8], size: usize) -> Result<DMatrix<Complex64>> {
    let rows = parse_rows(bytes, &["row", "col", "re", "im"])?;
    let expected = size * (size + 1) / 2;
    if rows.len() != expected {
        return Err(Error::parse(bytes.len(), format!("expected {expected} entries, found {}", rows.len())));
    }
    let mut m = DMatrix::zeros(size, size);
    let mut seen = vec![false; size * size];
    for row in &rows {
        let r: usize = field(row, 0, "row")?;
        let c: usize = field(row, 1, "col")?;
        if r > c || c >= size {
            return Err(Error::parse(row.0, format!("entry ({r}, {c}) outside the upper triangle")));
        }
        if std::mem::replace(&mut seen[r * size + c], true) {
            return Err(Error::parse(row.0, format!("entry ({r}, {c}) repeated")));
        }
        let v = Complex64::new(field(row, 2, "re")?, field(row, 3, "im")?);
        m[(r, c)] = v;
        m[(c, r)] = v.conj();
    }
    Ok(m)
}

pub fn read_matrix(path: &Path) -> Result<(DMatrix<Complex64>, FileMeta)> {
    let meta = read_meta(path)?;
    if meta.kind == FileKind::Function {
        return Err(Error::InvalidArgument(format!("{} is not a matrix file", path.display())));
    }
    let bytes = fs::read(path)?;
    Ok((parse_matrix_csv(&bytes, meta.size)?, meta))
}
