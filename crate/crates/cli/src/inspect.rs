//! Human-readable summaries of function, matrix, report and sweep-summary files.

use std::fmt::Write as _;
use std::path::Path;

use lfwave::io::{read_function, read_matrix, read_meta, sidecar_path, FileKind};
use lfwave::spectral::{hermitian_eigenvalues, max_hermitian_defect};

use crate::error::{ErrorCode, RunError, RunResult};
use crate::runner::{ReportFile, SummaryFile};

/// Rounded to 12 significant digits so float noise does not show.
fn tidy(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:?}");
    }
    let scale = 10f64.powi(11 - v.abs().log10().floor() as i32);
    format!("{:?}", (v * scale).round() / scale)
}

fn parse_error(path: &Path, offset: usize, msg: impl std::fmt::Display) -> RunError {
    RunError::new(
        ErrorCode::FileParse,
        Some(path.display().to_string()),
        format!("parse error at byte {offset}: {msg}"),
    )
}

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    start + column.saturating_sub(1)
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> RunResult<T> {
    serde_json::from_str(text).map_err(|e| parse_error(path, byte_offset(text, e.line(), e.column()), e))
}

/// Summarize the file at `path`. Never writes.
pub fn inspect(path: &Path) -> RunResult<String> {
    if !path.is_file() {
        return Err(RunError::new(
            ErrorCode::MissingFile,
            Some(path.display().to_string()),
            "no such file",
        ));
    }
    if sidecar_path(path).is_file() {
        return inspect_data(path);
    }
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = parse_json(path, &text)?;
    if value.get("reports").is_some() {
        let report: ReportFile = parse_json(path, &text)?;
        Ok(report_table(&report))
    } else if value.get("summaries").is_some() {
        let summary: SummaryFile = parse_json(path, &text)?;
        Ok(summary_table(&summary))
    } else {
        Err(RunError::new(
            ErrorCode::FileParse,
            Some(path.display().to_string()),
            "not a report, sweep summary, or data file with a metadata sidecar",
        ))
    }
}

fn at(path: &Path, e: lfwave::Error) -> RunError {
    RunError::core(&path.display().to_string(), e)
}

fn inspect_data(path: &Path) -> RunResult<String> {
    let meta = read_meta(path).map_err(|e| at(path, e))?;
    let w = &meta.window;
    let mut out = String::new();
    let field = format!("GF({}^{}), modulus {:?}", w.p, w.c, w.modulus);
    match meta.kind {
        FileKind::Function => {
            let f = read_function(path).map_err(|e| at(path, e))?;
            let dim = f.values().len();
            writeln!(out, "function on window (M={}, N={}) over {field}", w.m, w.n).unwrap();
            writeln!(out, "norm {}, support {}/{} points", tidy(f.norm()), f.support_size(), dim).unwrap();
        }
        FileKind::Gram | FileKind::FrameOperator => {
            let (m, meta) = read_matrix(path).map_err(|e| at(path, e))?;
            let what = if meta.kind == FileKind::Gram { "gram matrix" } else { "frame operator" };
            writeln!(out, "{what} of order {} on window (M={}, N={}) over {field}", m.nrows(), w.m, w.n).unwrap();
            let eig = hermitian_eigenvalues(&m);
            let (lo, hi) = eig
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            writeln!(out, "hermitian defect {:e}", max_hermitian_defect(&m)).unwrap();
            writeln!(out, "eigenvalues min {}, max {}", tidy(lo), tidy(hi)).unwrap();
            if !meta.labels.is_empty() {
                writeln!(out, "labels {}", meta.labels.join(" ")).unwrap();
            }
        }
    }
    Ok(out)
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

fn yes(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn report_table(r: &ReportFile) -> String {
    let mut out = format!(
        "report: GF({}^{}) window (M={}, N={}), {} packets, combination {}, seed {}\n",
        r.field.p, r.field.c, r.window.m, r.window.n, r.system.packets, r.combination, r.seed
    );
    let rows: Vec<Vec<String>> = r
        .reports
        .iter()
        .map(|t| {
            vec![
                t.theorem_id.clone(),
                t.variant.clone().unwrap_or_else(|| "-".into()),
                yes(t.verdict_condition),
                yes(t.verdict_frame),
                if t.borderline { "borderline".into() } else { yes(t.consistent) },
                tidy(t.actual_bounds.lower),
                tidy(t.actual_bounds.upper),
            ]
        })
        .collect();
    out.push_str(&table(&["check", "variant", "condition", "frame", "consistent", "lower", "upper"], &rows));
    out
}

fn summary_table(s: &SummaryFile) -> String {
    let mut out = format!("sweep: {} instances from seed {}\n", s.instances, s.seed_base);
    let rows: Vec<Vec<String>> = s
        .summaries
        .iter()
        .map(|x| {
            vec![
                x.theorem_id.clone(),
                x.variant.clone().unwrap_or_else(|| "-".into()),
                x.instances.to_string(),
                x.condition_true.to_string(),
                x.frame_true.to_string(),
                x.borderline.to_string(),
                x.violations.to_string(),
            ]
        })
        .collect();
    out.push_str(&table(
        &["check", "variant", "instances", "condition", "frame", "borderline", "violations"],
        &rows,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use lfwave::io::write_function;
    use lfwave::laurent::LocalField;
    use lfwave::model::{ModelWindow, SampledFunction};

    #[test]
    fn indicator_file_summary() {
        let dir = tempfile::tempdir().unwrap();
        let w = ModelWindow::new(LocalField::standard(2, 1).unwrap(), 2, 2).unwrap();
        let path = dir.path().join("psi.csv");
        write_function(&path, &SampledFunction::indicator_ball(w, 0)).unwrap();
        let text = inspect(&path).unwrap();
        assert!(text.contains("norm 1.0, support 4/16 points"), "{text}");
    }

    #[test]
    fn truncated_json_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        std::fs::write(&path, "{\n  \"reports\": [").unwrap();
        let e = inspect(&path).unwrap_err();
        assert_eq!(e.code, ErrorCode::FileParse);
        assert!(e.message.contains("at byte 15"), "{}", e.message);
    }

    #[test]
    fn offsets_count_bytes_across_lines() {
        assert_eq!(byte_offset("ab\ncd", 2, 2), 4);
        assert_eq!(byte_offset("ab", 1, 1), 0);
    }

    #[test]
    fn tidy_hides_float_noise() {
        assert_eq!(tidy(0.9999999999999999), "1.0");
        assert_eq!(tidy(2.25), "2.25");
    }
}
