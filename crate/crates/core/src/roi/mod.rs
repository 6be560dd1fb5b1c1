//! Cost, benefit and return-on-investment models for the two studies.
//!
//! All amounts are dollars held as `f64`; [`to_cents`] and
//! [`format_dollars`] are the rounding boundary for anything displayed.

mod curve;

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassMetrics;
use crate::{Error, Result};

pub use curve::{
    analyze_curve, analyze_series, build_curve_eas1, build_curve_eas2, import_external_curve,
    read_curve, write_curve, BenefitMode, CurveAnalysis, RoiCurve, RoiPoint, CURVE_COLUMNS,
};

const ADDEND_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Data gathering, minutes per sample.
    pub c_dg: Option<f64>,
    /// Pre-processing, minutes per sample.
    pub c_pp: Option<f64>,
    /// Evaluation, minutes per sample.
    pub c_e: Option<f64>,
    /// `c_dg + c_pp + c_e`, minutes per sample.
    pub c_fixed: f64,
    /// Labeling, minutes per sample.
    pub c_l: f64,
    pub h: f64,
    /// Dollars per hour.
    pub c_resource: f64,
    pub n_total: u64,
    /// Multiply the training-fraction cost by `n_total`. Off prices the
    /// fraction itself as a single sample.
    pub scale_by_n_total: bool,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            c_dg: None,
            c_pp: None,
            c_e: None,
            c_fixed: 1.0,
            c_l: 0.5,
            h: 1.0,
            c_resource: 400.0,
            n_total: 4586,
            scale_by_n_total: true,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let values = [
            ("c_dg", self.c_dg.unwrap_or(0.0)),
            ("c_pp", self.c_pp.unwrap_or(0.0)),
            ("c_e", self.c_e.unwrap_or(0.0)),
            ("c_fixed", self.c_fixed),
            ("c_l", self.c_l),
            ("c_resource", self.c_resource),
        ];
        for (name, v) in values {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        if !(self.h.is_finite() && self.h >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "h must be at least 1, got {}",
                self.h
            )));
        }
        if let (Some(dg), Some(pp), Some(e)) = (self.c_dg, self.c_pp, self.c_e) {
            if (dg + pp + e - self.c_fixed).abs() > ADDEND_TOL * self.c_fixed.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "c_fixed {} differs from c_dg + c_pp + c_e = {}",
                    self.c_fixed,
                    dg + pp + e
                )));
            }
        }
        Ok(())
    }

    fn dollars(&self, minutes: f64) -> f64 {
        minutes / 60.0 * self.h * self.c_resource
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenefitParams {
    /// Dollars per true positive.
    pub b_reward: f64,
    /// Dollars per false negative.
    pub b_penalty: f64,
    /// Dollars per percentage point of F1.
    pub p_value: f64,
}

impl Default for BenefitParams {
    fn default() -> Self {
        BenefitParams {
            b_reward: 500.0,
            b_penalty: 500.0,
            p_value: 10_000.0,
        }
    }
}

impl BenefitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("b_reward", self.b_reward),
            ("b_penalty", self.b_penalty),
            ("p_value", self.p_value),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoiParams {
    pub cost: CostParams,
    pub benefit: BenefitParams,
}

/// Parameter file entries keyed by lower-cased symbol; missing keys take
/// the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatParams {
    pub c_dg: Option<f64>,
    pub c_pp: Option<f64>,
    pub c_e: Option<f64>,
    pub c_l: Option<f64>,
    pub c_fixed: Option<f64>,
    pub c_resource: Option<f64>,
    pub h: Option<f64>,
    pub n: Option<u64>,
    pub b_reward: Option<f64>,
    pub b_penalty: Option<f64>,
    pub p_value: Option<f64>,
    pub scale_by_n_total: Option<bool>,
}

impl TryFrom<FlatParams> for RoiParams {
    type Error = Error;

    fn try_from(f: FlatParams) -> Result<Self> {
        let d = CostParams::default();
        let c_fixed = match (f.c_fixed, f.c_dg, f.c_pp, f.c_e) {
            (Some(v), ..) => v,
            (None, Some(dg), Some(pp), Some(e)) => dg + pp + e,
            (None, None, None, None) => d.c_fixed,
            _ => {
                return Err(Error::InvalidArgument(
                    "give c_fixed or all of c_dg, c_pp and c_e".into(),
                ))
            }
        };
        let cost = CostParams {
            c_dg: f.c_dg,
            c_pp: f.c_pp,
            c_e: f.c_e,
            c_fixed,
            c_l: f.c_l.unwrap_or(d.c_l),
            h: f.h.unwrap_or(d.h),
            c_resource: f.c_resource.unwrap_or(d.c_resource),
            n_total: f.n.unwrap_or(d.n_total),
            scale_by_n_total: f.scale_by_n_total.unwrap_or(d.scale_by_n_total),
        };
        let b = BenefitParams::default();
        let benefit = BenefitParams {
            b_reward: f.b_reward.unwrap_or(b.b_reward),
            b_penalty: f.b_penalty.unwrap_or(b.b_penalty),
            p_value: f.p_value.unwrap_or(b.p_value),
        };
        cost.validate()?;
        benefit.validate()?;
        Ok(RoiParams { cost, benefit })
    }
}

/// `(benefit - cost) / cost`.
pub fn roi(benefit: f64, cost: f64) -> Result<f64> {
    if !(cost > 0.0 && cost.is_finite()) || !benefit.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "roi undefined for benefit {benefit}, cost {cost}"
        )));
    }
    Ok((benefit - cost) / cost)
}

/// Processing cost of training on `fraction` of the corpus.
pub fn cost_eas1(fraction: f64, params: &CostParams) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction must be in (0, 1], got {fraction}"
        )));
    }
    params.validate()?;
    let samples = if params.scale_by_n_total {
        fraction * params.n_total as f64
    } else {
        fraction
    };
    Ok(params.dollars(samples * (params.c_fixed + params.c_l)))
}

/// `TP * b_reward - FN * b_penalty` for the dependent class.
pub fn benefit_eas1(metrics: &ClassMetrics, params: &BenefitParams) -> f64 {
    benefit_from_counts(metrics.tp, metrics.fn_, params)
}

pub fn benefit_from_counts(tp: u64, fn_: u64, params: &BenefitParams) -> f64 {
    tp as f64 * params.b_reward - fn_ as f64 * params.b_penalty
}

/// Training samples pay fixed and labeling cost; test samples pay the fixed
/// cost only.
pub fn cost_eas2(n_train: usize, n_test: usize, params: &CostParams) -> Result<f64> {
    if n_train == 0 {
        return Err(Error::InvalidArgument("n_train must be positive".into()));
    }
    params.validate()?;
    let minutes = n_train as f64 * (params.c_fixed + params.c_l) + n_test as f64 * params.c_fixed;
    Ok(params.dollars(minutes))
}

/// F1 change in percentage points times `p_value`.
pub fn benefit_eas2(f1_cur: f64, f1_ref: f64, params: &BenefitParams) -> f64 {
    (f1_cur - f1_ref) * 100.0 * params.p_value
}

pub fn to_cents(dollars: f64) -> i64 {
    (dollars * 100.0).round() as i64
}

/// Two-decimal rendering with thousands separators, e.g. `-$2,466.67`.
pub fn format_dollars(dollars: f64) -> String {
    let cents = to_cents(dollars);
    let sign = if cents < 0 { "-" } else { "" };
    let cents = cents.unsigned_abs();
    let whole = (cents / 100).to_string();
    let mut grouped = String::new();
    for (i, ch) in whole.chars().enumerate() {
        if i > 0 && (whole.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(ch);
    }
    format!("{sign}${grouped}.{:02}", cents % 100)
}
