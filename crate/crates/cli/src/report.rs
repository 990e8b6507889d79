//! Rendering of assessment results: a machine-readable JSON document with
//! stable key order and full-precision numbers, and a short human summary.

use serde::Serialize;

use dgrel_core::oracle::{ExactIndices, MonteCarloEstimate};
use dgrel_core::{ReliabilityReport, UFunction};

/// Relative disagreement between the pipeline and the enumeration oracle
/// that `assess --verify-oracle` tolerates before failing.
pub const ORACLE_REL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub lole_hr_per_yr: f64,
    pub eens_mwh_per_yr: f64,
    pub loss_probability: f64,
    pub horizon_hours: u32,
    pub strict_loss: bool,
    pub state_counts: StateCountsDoc,
    pub generation_terms: Vec<[f64; 2]>,
    pub load_terms: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloDoc>,
}

#[derive(Debug, Serialize)]
pub struct StateCountsDoc {
    pub solar: Option<usize>,
    pub wind: Option<usize>,
    pub ev: Option<usize>,
    pub transformer: Option<usize>,
    pub generation: usize,
    pub load: usize,
}

#[derive(Debug, Serialize)]
pub struct OracleDoc {
    pub loss_probability: f64,
    pub expected_unserved_kw: f64,
    pub lole_hr_per_yr: f64,
    pub eens_mwh_per_yr: f64,
    pub joint_states: u64,
    pub rel_diff_loss_probability: f64,
    pub rel_diff_eens: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Serialize)]
pub struct MonteCarloDoc {
    pub samples: u64,
    pub seed: u64,
    pub loss_probability: f64,
    pub loss_ci95: f64,
    pub eens_mwh_per_yr: f64,
    pub eens_ci95_mwh: f64,
}

/// Symmetric relative difference; zero against zero is zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

fn term_pairs(u: &UFunction) -> Vec<[f64; 2]> {
    u.terms().iter().map(|t| [t.value, t.probability]).collect()
}

pub fn oracle_doc(report: &ReliabilityReport, exact: &ExactIndices) -> OracleDoc {
    let horizon = report.horizon_hours as f64;
    let rel_loss = rel_diff(report.loss_probability, exact.loss_probability);
    let rel_eens = rel_diff(
        report.eens_kwh,
        horizon * exact.expected_unserved_kw,
    );
    OracleDoc {
        loss_probability: exact.loss_probability,
        expected_unserved_kw: exact.expected_unserved_kw,
        lole_hr_per_yr: horizon * exact.loss_probability,
        eens_mwh_per_yr: horizon * exact.expected_unserved_kw / 1000.0,
        joint_states: u64::try_from(exact.joint_states).unwrap_or(u64::MAX),
        rel_diff_loss_probability: rel_loss,
        rel_diff_eens: rel_eens,
        within_tolerance: rel_loss <= ORACLE_REL_TOLERANCE && rel_eens <= ORACLE_REL_TOLERANCE,
    }
}

pub fn monte_carlo_doc(report: &ReliabilityReport, mc: &MonteCarloEstimate) -> MonteCarloDoc {
    let horizon = report.horizon_hours as f64;
    MonteCarloDoc {
        samples: mc.samples,
        seed: mc.seed,
        loss_probability: mc.loss_probability,
        loss_ci95: mc.loss_ci95,
        eens_mwh_per_yr: horizon * mc.expected_unserved_kw / 1000.0,
        eens_ci95_mwh: horizon * mc.unserved_ci95 / 1000.0,
    }
}

pub fn report_document(
    report: &ReliabilityReport,
    oracle: Option<OracleDoc>,
    monte_carlo: Option<MonteCarloDoc>,
) -> ReportDocument {
    ReportDocument {
        lole_hr_per_yr: report.lole_hours,
        eens_mwh_per_yr: report.eens_kwh / 1000.0,
        loss_probability: report.loss_probability,
        horizon_hours: report.horizon_hours,
        strict_loss: report.strict_loss,
        state_counts: StateCountsDoc {
            solar: report.state_counts.solar,
            wind: report.state_counts.wind,
            ev: report.state_counts.ev,
            transformer: report.state_counts.transformer,
            generation: report.state_counts.generation,
            load: report.state_counts.load,
        },
        generation_terms: term_pairs(&report.generation),
        load_terms: term_pairs(&report.load),
        oracle,
        monte_carlo,
    }
}

pub fn to_json(doc: &ReportDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

/// Formats `x` with `digits` significant digits, plain notation where it
/// stays readable.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..7).contains(&exp) {
        format!("{:.*e}", digits.saturating_sub(1), x)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    }
}

pub fn to_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let counts = &doc.state_counts;
    let fmt_count = |c: Option<usize>| c.map_or("-".to_string(), |n| n.to_string());
    out.push_str("Adequacy assessment\n");
    out.push_str(&format!(
        "  horizon          : {} h ({} loss counting)\n",
        doc.horizon_hours,
        if doc.strict_loss { "strict" } else { "non-strict" }
    ));
    out.push_str(&format!(
        "  loss probability : {}\n",
        sig(doc.loss_probability, 4)
    ));
    out.push_str(&format!(
        "  LOLE             : {} hr/yr\n",
        sig(doc.lole_hr_per_yr, 4)
    ));
    out.push_str(&format!(
        "  EENS             : {} MWh/yr\n",
        sig(doc.eens_mwh_per_yr, 4)
    ));
    out.push_str(&format!(
        "  states           : solar {}, wind {}, ev {}, transformer {}, generation {}, load {}\n",
        fmt_count(counts.solar),
        fmt_count(counts.wind),
        fmt_count(counts.ev),
        fmt_count(counts.transformer),
        counts.generation,
        counts.load
    ));
    if let Some(oracle) = &doc.oracle {
        out.push_str(&format!(
            "  oracle check     : loss {} (rel diff {}), EENS {} MWh/yr (rel diff {}) -> {}\n",
            sig(oracle.loss_probability, 4),
            sig(oracle.rel_diff_loss_probability, 2),
            sig(oracle.eens_mwh_per_yr, 4),
            sig(oracle.rel_diff_eens, 2),
            if oracle.within_tolerance {
                "OK"
            } else {
                "MISMATCH"
            }
        ));
    }
    if let Some(mc) = &doc.monte_carlo {
        out.push_str(&format!(
            "  monte carlo      : {} samples (seed {}): loss {} +/- {}, EENS {} +/- {} MWh/yr\n",
            mc.samples,
            mc.seed,
            sig(mc.loss_probability, 4),
            sig(mc.loss_ci95, 2),
            sig(mc.eens_mwh_per_yr, 4),
            sig(mc.eens_ci95_mwh, 2)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(sig(293.8136, 4), "293.8");
        assert_eq!(sig(0.0336325, 4), "0.03363");
        assert_eq!(sig(4.298e-7, 4), "4.298e-7");
        assert_eq!(sig(0.0, 4), "0");
        assert_eq!(sig(8736.0, 4), "8736");
    }

    #[test]
    fn rel_diff_handles_zero() {
        assert_eq!(rel_diff(0.0, 0.0), 0.0);
        assert_eq!(rel_diff(1.0, 0.0), 1.0);
        assert!((rel_diff(1.0000001, 1.0) - 1e-7).abs() < 1e-9);
    }
}
