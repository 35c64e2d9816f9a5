//! Rank estimators operating on realized eigenvalue spectra.
//!
//! All five estimators consume a [`Spectrum`] (covariance or correlation)
//! and return an estimated number of factors in `0..=r_max`. Shared
//! conventions: spectra are padded with zeros to length `d`, the maximum of
//! an empty index set is 0, and eigenvalue ratios follow `0/0 = 1` and
//! `x/0 = +inf` for `x > 0`.

use crate::error::{Error, Result};
use crate::spectra::{Spectrum, SpectrumSource};
use serde::{Deserialize, Serialize};

/// Rule for the scale function `g(d)` used by threshold estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GRule {
    /// `residual_variance * sqrt(log log d)`.
    Sigma2LogLog,
    /// `sqrt(log log d)`.
    LogLog,
    /// Median of all `d` padded eigenvalues.
    MedianEigen,
    /// A fixed value, for experiments that pin `g` by hand.
    Explicit(f64),
}

impl GRule {
    /// Evaluate the rule on a spectrum. Rules involving `log log d` require
    /// `d >= 3` so the iterated logarithm is positive.
    pub fn value(&self, spectrum: &Spectrum, r_max: usize) -> Result<f64> {
        let d = spectrum.d() as f64;
        match self {
            GRule::Sigma2LogLog => Ok(residual_variance(spectrum, r_max) * loglog(d)?),
            GRule::LogLog => loglog(d),
            GRule::MedianEigen => Ok(spectrum.padded_median()),
            GRule::Explicit(v) => Ok(*v),
        }
    }
}

fn loglog(d: f64) -> Result<f64> {
    if d < 3.0 {
        return Err(Error::invalid(
            "d",
            format!("needs d >= 3 so that log log d is positive, got {d}"),
        ));
    }
    Ok(d.ln().ln().sqrt())
}

/// Tuning shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Detection-threshold exponent: perturbations and thresholds scale as
    /// `d^tau`.
    pub tau: f64,
    /// Upper bound on the reported rank.
    pub r_max: usize,
    /// Margin of the perturbed eigenvalue-ratio estimator.
    pub gamma: f64,
    /// Margin of the median-perturbed ratio estimator.
    pub pelger_gamma: f64,
    /// Multiplicative scale applied to `g(d)` in the tunable estimators.
    pub g_scale: f64,
    /// `g(d)` rule for the covariance threshold estimator.
    pub g_rule: GRule,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            tau: 0.5,
            r_max: 20,
            gamma: 0.05,
            pelger_gamma: 0.2,
            g_scale: 1.0,
            g_rule: GRule::Sigma2LogLog,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid("tau", format!("must lie in (0, 1), got {}", self.tau)));
        }
        if self.r_max == 0 {
            return Err(Error::invalid("r_max", "must be at least 1"));
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::invalid(
                "gamma",
                format!("must be positive and finite, got {}", self.gamma),
            ));
        }
        if !self.pelger_gamma.is_finite() || self.pelger_gamma <= 0.0 {
            return Err(Error::invalid(
                "pelger_gamma",
                format!("must be positive and finite, got {}", self.pelger_gamma),
            ));
        }
        if !self.g_scale.is_finite() || self.g_scale <= 0.0 {
            return Err(Error::invalid(
                "g_scale",
                format!("must be positive and finite, got {}", self.g_scale),
            ));
        }
        Ok(())
    }
}

/// Average residual eigenvalue mass beyond `r_max`:
/// `sigma2 = (1/d) sum_(j > r_max) lambda_j`.
pub fn residual_variance(spectrum: &Spectrum, r_max: usize) -> f64 {
    let tail: f64 = spectrum.values().iter().skip(r_max).sum();
    tail / spectrum.d() as f64
}

/// `max { j <= r_max : lambda_j > threshold }`, 0 when none qualifies.
pub fn count_above(spectrum: &Spectrum, threshold: f64, r_max: usize) -> usize {
    let mut best = 0;
    for j in 1..=r_max {
        if spectrum.eigenvalue(j) > threshold {
            best = j;
        }
    }
    best
}

/// Covariance threshold estimator: counts eigenvalues above
/// `d^tau * g(d)` with `g(d) = sigma2 * sqrt(log log d)` by default.
pub fn estimate_bn(spectrum: &Spectrum, config: &EstimatorConfig) -> Result<usize> {
    let g = config.g_scale * config.g_rule.value(spectrum, config.r_max)?;
    let threshold = (spectrum.d() as f64).powf(config.tau) * g;
    Ok(count_above(spectrum, threshold, config.r_max))
}

/// Perturbed eigenvalue ratios `(lambda_j + p) / (lambda_(j+1) + p)` for
/// `j = 1..=r_max`.
pub fn er_statistics(spectrum: &Spectrum, perturbation: f64, r_max: usize) -> Vec<f64> {
    (1..=r_max)
        .map(|j| {
            let num = spectrum.eigenvalue(j) + perturbation;
            let den = spectrum.eigenvalue(j + 1) + perturbation;
            if den == 0.0 {
                if num == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                num / den
            }
        })
        .collect()
}

/// Perturbed eigenvalue-ratio estimator with perturbation `d^tau * g_value`:
/// the largest `j` whose ratio exceeds `1 + gamma`.
pub fn estimate_perturbed_ratio(
    spectrum: &Spectrum,
    config: &EstimatorConfig,
    g_value: f64,
) -> usize {
    let perturbation = (spectrum.d() as f64).powf(config.tau) * g_value;
    let ratios = er_statistics(spectrum, perturbation, config.r_max);
    let mut best = 0;
    for (idx, ratio) in ratios.iter().enumerate() {
        if *ratio > 1.0 + config.gamma {
            best = idx + 1;
        }
    }
    best
}

/// Information-criterion threshold estimator on the covariance spectrum:
/// counts eigenvalues above `sigma2 (1 + d/n) log(d n / (d + n))`.
pub fn estimate_pc_p1(spectrum: &Spectrum, config: &EstimatorConfig) -> usize {
    let d = spectrum.d() as f64;
    let n = spectrum.n() as f64;
    let sigma2 = residual_variance(spectrum, config.r_max);
    let threshold = sigma2 * (1.0 + d / n) * (d * n / (d + n)).ln();
    count_above(spectrum, threshold, config.r_max)
}

/// Median-perturbed ratio estimator on the correlation spectrum:
/// `g(d)` is the median of all `d` padded eigenvalues (zero whenever more
/// than half of the padded spectrum is zero, e.g. `d > 2n`), the margin is
/// `pelger_gamma`.
pub fn estimate_pelger(spectrum: &Spectrum, config: &EstimatorConfig) -> usize {
    let g = spectrum.padded_median();
    let wide = EstimatorConfig { gamma: config.pelger_gamma, ..*config };
    estimate_perturbed_ratio(spectrum, &wide, g)
}

/// Edge-distribution estimator: iteratively calibrates the gap threshold
/// `delta` from the slope of the spectrum's tail.
///
/// Starting at `j = r_max + 1`, regress `lambda_j ... lambda_(j+4)` on
/// `(j-1)^(2/3) ... (j+3)^(2/3)`, set `delta = 2 |slope|`, take
/// `r = max { k <= r_max : lambda_k - lambda_(k+1) >= delta }` (0 if none),
/// and restart at `j = r + 1` until `j` stabilizes, at most 8 rounds.
pub fn estimate_onatski_ed(spectrum: &Spectrum, r_max: usize) -> Result<usize> {
    let needed = r_max + 5;
    if spectrum.d() < needed {
        return Err(Error::SpectrumTooShort {
            context: "edge-distribution estimator",
            len: spectrum.d(),
            needed,
        });
    }
    let mut j = r_max + 1;
    let mut r_hat = 0;
    for _ in 0..8 {
        let delta = 2.0 * tail_slope(spectrum, j).abs();
        r_hat = 0;
        for k in 1..=r_max {
            if spectrum.eigenvalue(k) - spectrum.eigenvalue(k + 1) >= delta {
                r_hat = k;
            }
        }
        let next = r_hat + 1;
        if next == j {
            break;
        }
        j = next;
    }
    Ok(r_hat)
}

/// OLS slope of `(x_i, y_i) = ((j - 1 + i)^(2/3), lambda_(j+i))`, `i = 0..5`.
fn tail_slope(spectrum: &Spectrum, j: usize) -> f64 {
    let points: Vec<(f64, f64)> = (0..5)
        .map(|i| {
            let x = ((j - 1 + i) as f64).powf(2.0 / 3.0);
            (x, spectrum.eigenvalue(j + i))
        })
        .collect();
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / 5.0;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / 5.0;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    sxy / sxx
}

/// One replication's worth of estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateSet {
    pub bn: usize,
    pub p_cor: usize,
    pub pc_p1: usize,
    pub pelger: usize,
    pub onatski: usize,
}

/// Stable estimator order used in reports and CSV output.
pub const ESTIMATOR_NAMES: [&str; 5] = ["bn", "p_cor", "pc_p1", "pelger", "onatski"];

impl EstimateSet {
    /// Estimates in [`ESTIMATOR_NAMES`] order.
    pub fn as_array(&self) -> [usize; 5] {
        [self.bn, self.p_cor, self.pc_p1, self.pelger, self.onatski]
    }
}

/// Run the whole estimator battery with its canonical wiring: covariance
/// spectrum for the threshold estimators, correlation spectrum for the
/// ratio and edge estimators.
pub fn estimate_all(
    covariance: &Spectrum,
    correlation: &Spectrum,
    config: &EstimatorConfig,
) -> Result<EstimateSet> {
    config.validate()?;
    if covariance.source() != SpectrumSource::Covariance {
        return Err(Error::invalid("covariance", "expected a covariance spectrum"));
    }
    if correlation.source() != SpectrumSource::Correlation {
        return Err(Error::invalid("correlation", "expected a correlation spectrum"));
    }
    if covariance.d() != correlation.d() || covariance.n() != correlation.n() {
        return Err(Error::ShapeMismatch {
            context: "estimate_all",
            expected: format!("matching panels, covariance {}x{}", covariance.d(), covariance.n()),
            actual: format!("correlation {}x{}", correlation.d(), correlation.n()),
        });
    }
    let p_cor_g = config.g_scale * GRule::LogLog.value(correlation, config.r_max)?;
    Ok(EstimateSet {
        bn: estimate_bn(covariance, config)?,
        p_cor: estimate_perturbed_ratio(correlation, config, p_cor_g),
        pc_p1: estimate_pc_p1(covariance, config),
        pelger: estimate_pelger(correlation, config),
        onatski: estimate_onatski_ed(correlation, config.r_max)?,
    })
}
