//! Serializable analysis reports and stable numeric formatting.
//!
//! Every floating-point value written by this crate is first rounded to 12
//! significant digits, so reruns produce byte-identical output across
//! platforms.

use serde::{Deserialize, Serialize};

use crate::projection::BoundReport;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits; maps `-0` to `0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let r: f64 = s.parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Decimal rendering with at most 12 significant digits, no locale.
pub fn format_number(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        return "0".to_string();
    }
    let a = r.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_vec(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(round_sig).collect()
}

/// The per-analysis JSON document. Field names are a stable contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub graph_id: String,
    pub n: usize,
    pub centered: bool,
    pub min_projection: f64,
    pub direction: Vec<f64>,
    pub axes: Vec<f64>,
    /// `λ` at the explicit index, then at `⌊n/2⌋ − 1` when defined.
    pub eigenvalues_used: Vec<f64>,
    pub s_dtilde: Vec<f64>,
    pub bound_rhs_explicit: Option<f64>,
    pub bound_rhs_paper_form: Option<f64>,
    pub ratio_explicit: Option<f64>,
    pub ratio_paper_form: Option<f64>,
    pub degenerate: bool,
}

impl AnalysisReport {
    pub fn from_bound(graph_id: impl Into<String>, b: &BoundReport) -> Self {
        let mut eigenvalues_used = Vec::new();
        eigenvalues_used.extend(b.lambda_explicit);
        eigenvalues_used.extend(b.lambda_paper_form);
        Self {
            graph_id: graph_id.into(),
            n: b.n,
            centered: b.centered,
            min_projection: round_sig(b.min_projection),
            direction: round_vec(&b.direction),
            axes: round_vec(&b.axes),
            eigenvalues_used: round_vec(&eigenvalues_used),
            s_dtilde: round_vec(&b.s_dtilde),
            bound_rhs_explicit: b.bound_rhs_explicit.map(round_sig),
            bound_rhs_paper_form: b.bound_rhs_paper_form.map(round_sig),
            ratio_explicit: b.ratio_explicit.map(round_sig),
            ratio_paper_form: b.ratio_paper_form.map(round_sig),
            degenerate: b.degenerate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_and_formatting() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(4.0), "4");
        assert_eq!(format_number(1.0 / 6.0_f64.sqrt()), "0.408248290464");
        assert_eq!(format_number(8.0 / 3.0), "2.66666666667");
        assert_eq!(format_number(-2.5e-7), "-2.5e-7");
        assert_eq!(format_number(1.0 + 1e-14), "1");
        assert_eq!(round_sig(123456.7890123456), 123456.789012);
    }
}
