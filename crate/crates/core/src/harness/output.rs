//! Tab-separated result tables. Column order is fixed and every line ends
//! with a newline; reals are printed with six significant digits.

use std::fmt::Write as _;

use super::{RunConfig, RunSummary, SweepReport, TrialResult};

/// Fixed-point rendering with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Long-format per-trial table: `trial step variant true_n est_n ospa`.
pub fn trials_table(config: &RunConfig, trials: &[TrialResult]) -> String {
    let mut out = String::from("trial\tstep\tvariant\ttrue_n\test_n\tospa\n");
    for t in trials {
        for (v, variant) in config.variants.iter().enumerate() {
            let trace = &t.variants[v];
            for k in 0..t.true_n.len() {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    t.trial,
                    k + 1,
                    variant.name,
                    t.true_n[k],
                    trace.est_n[k],
                    sig6(trace.ospa[k])
                );
            }
        }
    }
    out
}

/// Summary table: one row per variant and step with per-step means, then an
/// `all` row per variant with the overall mean OSPA and the gain ratio.
pub fn summary_table(summary: &RunSummary) -> String {
    let mut out = String::from("variant\tstep\ttrue_n\test_n\tospa\tgain_ratio\n");
    for v in &summary.variants {
        for k in 0..summary.steps {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t-",
                v.name,
                k + 1,
                sig6(v.mean_true_n[k]),
                sig6(v.mean_est_n[k]),
                sig6(v.mean_ospa[k])
            );
        }
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len().max(1) as f64;
        let gain = v.gain_ratio.map_or_else(|| "-".to_string(), sig6);
        let _ = writeln!(
            out,
            "{}\tall\t{}\t{}\t{}\t{}",
            v.name,
            sig6(mean(&v.mean_true_n)),
            sig6(mean(&v.mean_est_n)),
            sig6(v.overall_ospa),
            gain
        );
    }
    out
}

/// Sweep table: `delta mode mean_ospa basic_ospa gain_ratio`.
pub fn sweep_table(report: &SweepReport) -> String {
    let mut out = String::from("delta\tmode\tmean_ospa\tbasic_ospa\tgain_ratio\n");
    for p in &report.points {
        for (mode, v) in [("separate", &p.separate), ("direct", &p.direct)] {
            let _ = writeln!(
                out,
                "{}\t{mode}\t{}\t{}\t{}",
                sig6(p.delta),
                sig6(v.overall_ospa),
                sig6(report.basic.overall_ospa),
                v.gain_ratio.map_or_else(|| "-".to_string(), sig6)
            );
        }
    }
    out
}
