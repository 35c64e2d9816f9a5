//! CSV emission with fixed schemas.
//!
//! All floats are printed to six significant digits; the timestamp is always
//! the last column so byte-level comparison of two runs only has to strip one
//! field. Fields never contain commas, so no quoting is needed.

use hffactors_core::bounds::{ConcentrationStudy, EigenScalingStudy, JumpStudy};
use hffactors_core::estimators::ESTIMATOR_NAMES;
use hffactors_core::montecarlo::{MCReport, SweepPoint};
use hffactors_core::presets::SweepPreset;

pub const EXPERIMENT_HEADER: &str = "table_id,factor_kind,idio_kind,alpha,n,d,estimator,\
                                     mean_rhat,prob_hit,replications,seed,timestamp";
pub const SWEEP_HEADER: &str = "figure_id,parameter,value,factor_kind,idio_kind,alpha,n,d,\
                                estimator,mean_rhat,prob_hit,replications,seed,timestamp";
pub const BOUNDS_HEADER: &str =
    "study_id,row_kind,name,d,n,alpha,observed,envelope,ratio,lo,hi,replications,seed,timestamp";

/// Six significant digits: fixed notation over a moderate exponent range,
/// scientific outside it.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..=5).contains(&exp) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn push_row(out: &mut String, fields: &[&str]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

/// Rows of one experiment: one line per estimator, in fixed order.
pub fn push_experiment_rows(out: &mut String, table_id: &str, report: &MCReport, timestamp: &str) {
    let cfg = &report.config;
    let alpha = cfg.nts_alpha().map(fmt_sig).unwrap_or_default();
    let (n, d) = (cfg.n.to_string(), cfg.d.to_string());
    let reps = report.completed.to_string();
    let seed = cfg.master_seed.to_string();
    for (name, stats) in ESTIMATOR_NAMES.iter().zip(report.stats.iter()) {
        push_row(
            out,
            &[
                table_id,
                cfg.factor_label(),
                cfg.idio_label(),
                &alpha,
                &n,
                &d,
                name,
                &fmt_sig(stats.mean),
                &fmt_sig(stats.hit_prob),
                &reps,
                &seed,
                timestamp,
            ],
        );
    }
}

/// Rows of one sweep: grid value varies slowest, estimator fastest.
pub fn push_sweep_rows(
    out: &mut String,
    preset: &SweepPreset,
    points: &[SweepPoint],
    timestamp: &str,
) {
    for point in points {
        let cfg = &point.report.config;
        let alpha = cfg.nts_alpha().map(fmt_sig).unwrap_or_default();
        let value = fmt_sig(point.value);
        let (n, d) = (cfg.n.to_string(), cfg.d.to_string());
        let reps = point.report.completed.to_string();
        let seed = cfg.master_seed.to_string();
        for (name, stats) in ESTIMATOR_NAMES.iter().zip(point.report.stats.iter()) {
            push_row(
                out,
                &[
                    preset.id,
                    preset.parameter.label(),
                    &value,
                    cfg.factor_label(),
                    cfg.idio_label(),
                    &alpha,
                    &n,
                    &d,
                    name,
                    &fmt_sig(stats.mean),
                    &fmt_sig(stats.hit_prob),
                    &reps,
                    &seed,
                    timestamp,
                ],
            );
        }
    }
}

/// A bounds row. Point rows carry observed/envelope/ratio for one grid cell;
/// summary rows carry one fitted statistic, with `lo,hi` holding its
/// bootstrap band when one exists.
#[allow(clippy::too_many_arguments)]
fn push_bounds_row(
    out: &mut String,
    study_id: &str,
    row_kind: &str,
    name: &str,
    d: Option<usize>,
    n: Option<usize>,
    alpha: Option<f64>,
    observed: Option<f64>,
    envelope: Option<f64>,
    ratio: Option<f64>,
    band: Option<(f64, f64)>,
    replications: usize,
    seed: u64,
    timestamp: &str,
) {
    let opt_usize = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    let opt_f64 = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    let (lo, hi) = band.map(|(lo, hi)| (fmt_sig(lo), fmt_sig(hi))).unwrap_or_default();
    push_row(
        out,
        &[
            study_id,
            row_kind,
            name,
            &opt_usize(d),
            &opt_usize(n),
            &opt_f64(alpha),
            &opt_f64(observed),
            &opt_f64(envelope),
            &opt_f64(ratio),
            &lo,
            &hi,
            &replications.to_string(),
            &seed.to_string(),
            timestamp,
        ],
    );
}

pub fn push_concentration_rows(out: &mut String, study: &ConcentrationStudy, timestamp: &str) {
    let id = "concentration";
    for p in &study.points {
        push_bounds_row(
            out,
            id,
            "point",
            "spectral",
            Some(p.point.d),
            Some(p.point.n),
            None,
            Some(p.median_spectral),
            Some(p.envelope),
            Some(p.ratio),
            Some(p.spectral_band),
            study.replications,
            study.master_seed,
            timestamp,
        );
        push_bounds_row(
            out,
            id,
            "point",
            "frobenius",
            Some(p.point.d),
            Some(p.point.n),
            None,
            Some(p.median_frobenius),
            None,
            None,
            None,
            study.replications,
            study.master_seed,
            timestamp,
        );
    }
    push_bounds_row(
        out,
        id,
        "summary",
        "ratio_spread",
        None,
        None,
        None,
        Some(study.ratio_spread),
        None,
        None,
        None,
        study.replications,
        study.master_seed,
        timestamp,
    );
    if let Some(gap) = study.frobenius_slope_gap {
        push_bounds_row(
            out,
            id,
            "summary",
            "frobenius_slope_gap",
            None,
            None,
            None,
            Some(gap),
            None,
            None,
            None,
            study.replications,
            study.master_seed,
            timestamp,
        );
    }
    // Root-n shrink of the Frobenius error over the canonical n 100 -> 400 leg.
    if let Some(shrink) = study.shrink_factor(100, 100, 400) {
        push_bounds_row(
            out,
            id,
            "summary",
            "shrink_factor",
            Some(100),
            None,
            None,
            Some(shrink),
            None,
            None,
            None,
            study.replications,
            study.master_seed,
            timestamp,
        );
    }
}

pub fn push_jump_rows(out: &mut String, study: &JumpStudy, timestamp: &str) {
    let id = "jumpnorm";
    for p in &study.points {
        push_bounds_row(
            out,
            id,
            "point",
            "largest_eigenvalue",
            Some(p.point.d),
            Some(p.point.n),
            Some(study.alpha),
            Some(p.median_norm),
            Some(p.envelope),
            Some(p.ratio),
            Some(p.band),
            study.replications,
            study.master_seed,
            timestamp,
        );
    }
    if let Some(slope) = study.slope_in_d {
        push_bounds_row(
            out,
            id,
            "summary",
            "slope_in_d",
            None,
            None,
            Some(study.alpha),
            Some(slope),
            None,
            None,
            study.slope_band,
            study.replications,
            study.master_seed,
            timestamp,
        );
    }
}

pub fn push_eigen_rows(out: &mut String, study: &EigenScalingStudy, timestamp: &str) {
    let id = "eigenscaling";
    for (i, &d) in study.d_grid.iter().enumerate() {
        for (j, &median) in study.medians[i].iter().enumerate() {
            push_bounds_row(
                out,
                id,
                "point",
                &format!("lambda{}", j + 1),
                Some(d),
                Some(study.n),
                None,
                Some(median),
                None,
                None,
                None,
                study.replications,
                study.master_seed,
                timestamp,
            );
        }
    }
    for (j, (&slope, &band)) in study.slopes.iter().zip(study.slope_bands.iter()).enumerate() {
        push_bounds_row(
            out,
            id,
            "summary",
            &format!("slope{}", j + 1),
            None,
            Some(study.n),
            None,
            Some(slope),
            None,
            None,
            Some(band),
            study.replications,
            study.master_seed,
            timestamp,
        );
    }
}
