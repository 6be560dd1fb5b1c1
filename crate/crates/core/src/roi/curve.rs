use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    benefit_eas1, benefit_eas2, benefit_from_counts, cost_eas1, cost_eas2, roi, BenefitParams,
    CostParams, RoiParams,
};
use crate::active::IterationRecord;
use crate::classifiers::ClassMetrics;
use crate::{Error, Result};

pub const CURVE_COLUMNS: [&str; 5] = ["x", "f1", "cost", "benefit", "roi"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoiPoint {
    pub x: f64,
    pub f1: Option<f64>,
    pub cost: f64,
    pub benefit: f64,
    pub roi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoiCurve {
    pub points: Vec<RoiPoint>,
    /// Absent for curves read back from CSV.
    pub params: Option<RoiParams>,
}

impl RoiCurve {
    pub fn new(points: Vec<RoiPoint>, params: Option<RoiParams>) -> Result<Self> {
        check_increasing(points.iter().map(|p| p.x))?;
        Ok(RoiCurve { points, params })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_increasing(xs: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev: Option<f64> = None;
    for (i, x) in xs.enumerate() {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "point {i}: x is not finite"
            )));
        }
        if let Some(p) = prev {
            if x <= p {
                return Err(Error::InvalidArgument(format!(
                    "point {i}: x = {x} does not increase past {p}"
                )));
            }
        }
        prev = Some(x);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenefitMode {
    /// F1 gain over the first iteration.
    #[default]
    Cumulative,
    /// F1 gain over the previous iteration.
    Incremental,
}

impl FromStr for BenefitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cumulative" => Ok(BenefitMode::Cumulative),
            "incremental" => Ok(BenefitMode::Incremental),
            _ => Err(Error::InvalidArgument(format!("unknown mode `{s}`"))),
        }
    }
}

/// One point per `(fraction, metrics)` entry; `metrics` are those of the
/// dependent class.
pub fn build_curve_eas1(
    sweep: &[(f64, ClassMetrics)],
    cost: &CostParams,
    benefit: &BenefitParams,
) -> Result<RoiCurve> {
    if sweep.is_empty() {
        return Err(Error::InvalidArgument("empty sweep".into()));
    }
    let points = sweep
        .iter()
        .map(|(fraction, metrics)| {
            let c = cost_eas1(*fraction, cost)?;
            let b = benefit_eas1(metrics, benefit);
            Ok(RoiPoint {
                x: *fraction,
                f1: Some(metrics.f1),
                cost: c,
                benefit: b,
                roi: roi(b, c)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RoiCurve::new(
        points,
        Some(RoiParams {
            cost: cost.clone(),
            benefit: benefit.clone(),
        }),
    )
}

/// One point per iteration, `x` = iteration index, benefit from the F1 of
/// the tracked class.
pub fn build_curve_eas2(
    records: &[IterationRecord],
    cost: &CostParams,
    benefit: &BenefitParams,
    mode: BenefitMode,
) -> Result<RoiCurve> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "an iteration curve needs at least 2 records, got {}",
            records.len()
        )));
    }
    let points = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let reference = match mode {
                BenefitMode::Cumulative => records[0].f1_requires,
                BenefitMode::Incremental => records[i.saturating_sub(1)].f1_requires,
            };
            let c = cost_eas2(r.n_train, r.n_test, cost)?;
            let b = benefit_eas2(r.f1_requires, reference, benefit);
            Ok(RoiPoint {
                x: r.iteration as f64,
                f1: Some(r.f1_requires),
                cost: c,
                benefit: b,
                roi: roi(b, c)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RoiCurve::new(
        points,
        Some(RoiParams {
            cost: cost.clone(),
            benefit: benefit.clone(),
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveAnalysis {
    pub peak_index: usize,
    pub peak_x: f64,
    pub peak_roi: f64,
    pub break_even: Option<f64>,
}

/// Peak is the first point with the largest roi. Break-even is the first
/// x where roi reaches 0, interpolated linearly inside the bracketing
/// segment.
pub fn analyze_curve(curve: &RoiCurve) -> Result<CurveAnalysis> {
    let series: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.x, p.roi)).collect();
    analyze_series(&series)
}

/// [`analyze_curve`] over bare `(x, roi)` pairs.
pub fn analyze_series(points: &[(f64, f64)]) -> Result<CurveAnalysis> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty curve".into()));
    }
    let mut peak_index = 0;
    for (i, p) in points.iter().enumerate() {
        if p.1 > points[peak_index].1 {
            peak_index = i;
        }
    }
    let mut break_even = None;
    for (i, &(x, r)) in points.iter().enumerate() {
        if r >= 0.0 {
            break_even = Some(if i == 0 {
                x
            } else {
                let (qx, qr) = points[i - 1];
                qx + (0.0 - qr) / (r - qr) * (x - qx)
            });
            break;
        }
    }
    Ok(CurveAnalysis {
        peak_index,
        peak_x: points[peak_index].0,
        peak_roi: points[peak_index].1,
        break_even,
    })
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
}

fn parse_cell<T: FromStr>(
    record: &csv::StringRecord,
    idx: Option<usize>,
    name: &str,
    row: usize,
) -> Result<Option<T>> {
    let Some(i) = idx else { return Ok(None) };
    let raw = record.get(i).unwrap_or("").trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|_| Error::Schema(format!("row {row}: `{name}` value `{raw}` is not a number")))
}

/// Builds a training-fraction curve from an externally produced accuracy file
/// with columns `x,f1,tp,fn,benefit`. Each row needs either both `tp` and
/// `fn` or a `benefit`; a supplied benefit is used unchanged.
pub fn import_external_curve<R: Read>(
    source: R,
    cost: &CostParams,
    benefit: &BenefitParams,
) -> Result<RoiCurve> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    let x_col = column(&headers, "x").ok_or_else(|| Error::MissingColumn("x".into()))?;
    let f1_col = column(&headers, "f1");
    let tp_col = column(&headers, "tp");
    let fn_col = column(&headers, "fn");
    let benefit_col = column(&headers, "benefit");
    if benefit_col.is_none() && (tp_col.is_none() || fn_col.is_none()) {
        return Err(Error::Schema(
            "curve file needs `tp` and `fn` columns or a `benefit` column".into(),
        ));
    }
    let mut points: Vec<RoiPoint> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let x: f64 = parse_cell(&record, Some(x_col), "x", row)?
            .ok_or_else(|| Error::Schema(format!("row {row}: missing x")))?;
        if let Some(prev) = points.last() {
            if x <= prev.x {
                return Err(Error::Schema(format!(
                    "row {row}: x = {x} does not increase past {}",
                    prev.x
                )));
            }
        }
        let f1: Option<f64> = parse_cell(&record, f1_col, "f1", row)?;
        let supplied: Option<f64> = parse_cell(&record, benefit_col, "benefit", row)?;
        let b = match supplied {
            Some(b) => b,
            None => {
                let tp: Option<u64> = parse_cell(&record, tp_col, "tp", row)?;
                let fn_: Option<u64> = parse_cell(&record, fn_col, "fn", row)?;
                match (tp, fn_) {
                    (Some(tp), Some(fn_)) => benefit_from_counts(tp, fn_, benefit),
                    _ => {
                        return Err(Error::Schema(format!(
                            "row {row}: needs tp and fn, or benefit"
                        )))
                    }
                }
            }
        };
        let c = cost_eas1(x, cost).map_err(|e| Error::Schema(format!("row {row}: {e}")))?;
        points.push(RoiPoint {
            x,
            f1,
            cost: c,
            benefit: b,
            roi: roi(b, c)?,
        });
    }
    if points.is_empty() {
        return Err(Error::Schema("curve file has no rows".into()));
    }
    RoiCurve::new(
        points,
        Some(RoiParams {
            cost: cost.clone(),
            benefit: benefit.clone(),
        }),
    )
}

pub fn write_curve<W: Write>(sink: W, curve: &RoiCurve) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(CURVE_COLUMNS)?;
    for p in &curve.points {
        writer.write_record([
            p.x.to_string(),
            p.f1.map(|v| v.to_string()).unwrap_or_default(),
            p.cost.to_string(),
            p.benefit.to_string(),
            p.roi.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a curve written by [`write_curve`]. Errors name the row.
pub fn read_curve<R: Read>(source: R) -> Result<RoiCurve> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(CURVE_COLUMNS) {
        *slot = column(&headers, name).ok_or_else(|| Error::MissingColumn(name.into()))?;
    }
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let need = |k: usize| -> Result<f64> {
            parse_cell(&record, Some(idx[k]), CURVE_COLUMNS[k], row)?
                .ok_or_else(|| Error::Schema(format!("row {row}: missing {}", CURVE_COLUMNS[k])))
        };
        points.push(RoiPoint {
            x: need(0)?,
            f1: parse_cell(&record, Some(idx[1]), "f1", row)?,
            cost: need(2)?,
            benefit: need(3)?,
            roi: need(4)?,
        });
    }
    RoiCurve::new(points, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(iteration: usize, n_train: usize, f1: f64) -> IterationRecord {
        IterationRecord {
            iteration,
            n_train,
            n_test: 100,
            f1_requires: f1,
            macro_f1: f1,
            queried_ids: vec![],
        }
    }

    fn curve(points: &[(f64, f64)]) -> RoiCurve {
        let points = points
            .iter()
            .map(|&(x, roi)| RoiPoint {
                x,
                f1: None,
                cost: 1.0,
                benefit: roi + 1.0,
                roi,
            })
            .collect();
        RoiCurve::new(points, None).unwrap()
    }

    #[test]
    fn eas2_modes() {
        let records = [
            record(0, 180, 0.5),
            record(1, 200, 0.6),
            record(2, 220, 0.6),
        ];
        let (c, b) = (CostParams::default(), BenefitParams::default());
        let cum = build_curve_eas2(&records, &c, &b, BenefitMode::Cumulative).unwrap();
        let benefits: Vec<f64> = cum.points.iter().map(|p| p.benefit).collect();
        assert_eq!(benefits[0], 0.0);
        assert!((benefits[1] - 100_000.0).abs() < 1e-6 && (benefits[2] - 100_000.0).abs() < 1e-6);
        let inc = build_curve_eas2(&records, &c, &b, BenefitMode::Incremental).unwrap();
        assert!((inc.points[1].benefit - 100_000.0).abs() < 1e-6);
        assert_eq!(inc.points[2].benefit, 0.0);
        assert!(build_curve_eas2(&records[..1], &c, &b, BenefitMode::Cumulative).is_err());
    }

    #[test]
    fn flat_f1_gives_minus_one() {
        let records = [record(0, 180, 0.4), record(1, 200, 0.4)];
        let curve = build_curve_eas2(
            &records,
            &CostParams::default(),
            &BenefitParams::default(),
            BenefitMode::Cumulative,
        )
        .unwrap();
        assert!(curve.points.iter().all(|p| p.roi == -1.0));
    }

    #[test]
    fn eas1_constant_metrics_decline() {
        let m = ClassMetrics::from_counts(10, 1, 2, 30);
        let curve = build_curve_eas1(
            &[(0.2, m.clone()), (0.4, m)],
            &CostParams::default(),
            &BenefitParams::default(),
        )
        .unwrap();
        assert!(curve.points[1].roi < curve.points[0].roi);
        assert!(build_curve_eas1(&[], &CostParams::default(), &BenefitParams::default()).is_err());
    }

    #[test]
    fn peak_and_break_even() {
        let a = analyze_curve(&curve(&[(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)])).unwrap();
        assert_eq!(a.peak_index, 1);
        assert_eq!(a.break_even, Some(0.0));
        let b = analyze_curve(&curve(&[(1.0, -0.5), (2.0, 0.2)])).unwrap();
        assert!((b.break_even.unwrap() - (1.0 + 0.5 / 0.7)).abs() < 1e-12);
        let c = analyze_curve(&curve(&[(1.0, -0.5), (2.0, -0.2)])).unwrap();
        assert_eq!(c.break_even, None);
        assert!(analyze_curve(&RoiCurve {
            points: vec![],
            params: None
        })
        .is_err());
    }

    #[test]
    fn external_curve_rows() {
        let (c, b) = (CostParams::default(), BenefitParams::default());
        let text = "x,f1,tp,fn,benefit\n0.2,0.5,,,1234.5\n0.6,0.84,40,3,\n";
        let curve = import_external_curve(text.as_bytes(), &c, &b).unwrap();
        assert_eq!(curve.points[0].benefit, 1234.5);
        assert_eq!(curve.points[1].benefit, 18_500.0);
        let bad = "x,tp,fn\n0.2,,\n";
        assert!(matches!(
            import_external_curve(bad.as_bytes(), &c, &b),
            Err(Error::Schema(_))
        ));
        let no_cols = "x,f1\n0.2,0.5\n";
        assert!(matches!(
            import_external_curve(no_cols.as_bytes(), &c, &b),
            Err(Error::Schema(_))
        ));
        let decreasing = "x,benefit\n0.4,1\n0.2,1\n";
        assert!(import_external_curve(decreasing.as_bytes(), &c, &b).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let records = [
            record(0, 180, 0.5),
            record(1, 200, 0.61),
            record(2, 220, 0.6),
        ];
        let curve = build_curve_eas2(
            &records,
            &CostParams::default(),
            &BenefitParams::default(),
            BenefitMode::Cumulative,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_curve(&mut buf, &curve).unwrap();
        let back = read_curve(buf.as_slice()).unwrap();
        assert_eq!(back.points, curve.points);
    }
}
