use std::path::{Path, PathBuf};

use reqroi_core::roi::analyze_series;
use serde::Serialize;

use super::{opt_cell, RunOutput};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    /// `(x, f1, roi)` with x strictly increasing.
    pub points: Vec<(f64, Option<f64>, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub series: String,
    pub points: usize,
    pub peak_x: f64,
    pub peak_roi: f64,
    pub peak_f1: Option<f64>,
    pub break_even: Option<f64>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
}

/// Reads a curve CSV (`x,...,roi`, series named after the file stem) or a
/// long-format report (`series,x,f1,roi`).
pub fn read_series(path: &Path) -> Result<Vec<Series>, CliError> {
    let fail = |msg: String| CliError::data(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
    let headers = reader.headers().map_err(|e| fail(e.to_string()))?.clone();
    let x_col = column(&headers, "x").ok_or_else(|| fail("missing column `x`".into()))?;
    let roi_col = column(&headers, "roi").ok_or_else(|| fail("missing column `roi`".into()))?;
    let f1_col = column(&headers, "f1");
    let series_col = column(&headers, "series");
    let default_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into());

    let mut out: Vec<Series> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| fail(format!("row {row}: {e}")))?;
        let cell = |idx: usize| record.get(idx).unwrap_or("").trim();
        let number = |idx: usize, name: &str| -> Result<f64, CliError> {
            let raw = cell(idx);
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| fail(format!("row {row}: `{name}` value `{raw}` is not a number")))
        };
        let x = number(x_col, "x")?;
        let roi = number(roi_col, "roi")?;
        let f1 = match f1_col {
            Some(idx) if !cell(idx).is_empty() => Some(number(idx, "f1")?),
            _ => None,
        };
        let name = match series_col {
            Some(idx) if !cell(idx).is_empty() => cell(idx).to_string(),
            Some(_) => return Err(fail(format!("row {row}: empty series name"))),
            None => default_name.clone(),
        };
        let pos = match out.iter().position(|s| s.name == name) {
            Some(p) => p,
            None => {
                out.push(Series {
                    name,
                    points: Vec::new(),
                });
                out.len() - 1
            }
        };
        let series = &mut out[pos];
        if let Some(&(prev, _, _)) = series.points.last() {
            if x <= prev {
                return Err(fail(format!(
                    "row {row}: x = {x} does not increase past {prev} in `{}`",
                    series.name
                )));
            }
        }
        series.points.push((x, f1, roi));
    }
    if out.is_empty() {
        return Err(fail("no rows".into()));
    }
    Ok(out)
}

pub fn summarize(series: &Series) -> Result<SeriesSummary, CliError> {
    let xr: Vec<(f64, f64)> = series.points.iter().map(|&(x, _, r)| (x, r)).collect();
    let a = analyze_series(&xr)?;
    Ok(SeriesSummary {
        series: series.name.clone(),
        points: series.points.len(),
        peak_x: a.peak_x,
        peak_roi: a.peak_roi,
        peak_f1: series.points[a.peak_index].1,
        break_even: a.break_even,
    })
}

pub fn render_table(summaries: &[SeriesSummary]) -> String {
    let width = summaries
        .iter()
        .map(|s| s.series.len())
        .max()
        .unwrap_or(6)
        .max(6);
    let mut out = format!(
        "{:<width$}  {:>6}  {:>10}  {:>10}  {:>8}  {:>10}\n",
        "series", "points", "peak_x", "peak_roi", "peak_f1", "break_even"
    );
    for s in summaries {
        out.push_str(&format!(
            "{:<width$}  {:>6}  {:>10.4}  {:>10.4}  {:>8}  {:>10}\n",
            s.series,
            s.points,
            s.peak_x,
            s.peak_roi,
            s.peak_f1
                .map(|v| format!("{v:.4}"))
                .unwrap_or_else(|| "-".into()),
            s.break_even
                .map(|v| format!("{v:.4}"))
                .unwrap_or_else(|| "-".into()),
        ));
    }
    out
}

/// Merges curve files into `report.csv` (`series,x,f1,roi`) and writes the
/// per-series peak and break-even annotations to `report_summary.csv`.
pub fn cmd_report(
    inputs: &[PathBuf],
    out_dir: &Path,
) -> Result<(RunOutput, Vec<SeriesSummary>), CliError> {
    if inputs.is_empty() {
        return Err(CliError::config("report needs at least one curve file"));
    }
    let mut all: Vec<Series> = Vec::new();
    for path in inputs {
        for s in read_series(path)? {
            if all.iter().any(|o| o.name == s.name) {
                return Err(CliError::data(format!(
                    "{}: duplicate series `{}`",
                    path.display(),
                    s.name
                )));
            }
            all.push(s);
        }
    }
    let summaries = all.iter().map(summarize).collect::<Result<Vec<_>, _>>()?;

    let mut long = csv::Writer::from_writer(Vec::new());
    long.write_record(["series", "x", "f1", "roi"])?;
    for s in &all {
        for &(x, f1, roi) in &s.points {
            long.write_record([s.name.clone(), x.to_string(), opt_cell(f1), roi.to_string()])?;
        }
    }
    let mut notes = csv::Writer::from_writer(Vec::new());
    notes.write_record([
        "series",
        "points",
        "peak_x",
        "peak_roi",
        "peak_f1",
        "break_even",
    ])?;
    for s in &summaries {
        notes.write_record([
            s.series.clone(),
            s.points.to_string(),
            s.peak_x.to_string(),
            s.peak_roi.to_string(),
            opt_cell(s.peak_f1),
            opt_cell(s.break_even),
        ])?;
    }
    let into =
        |w: csv::Writer<Vec<u8>>| w.into_inner().map_err(|e| CliError::runtime(e.to_string()));
    let mut out = RunOutput::create(out_dir)?;
    out.write("report.csv", &into(long)?)?;
    out.write("report_summary.csv", &into(notes)?)?;
    Ok((out, summaries))
}
