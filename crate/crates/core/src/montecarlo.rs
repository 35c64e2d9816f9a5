//! Monte Carlo driver: replicated panel simulation plus estimator battery.
//!
//! One replication owns one RNG stream (`stream = replication index`), so
//! experiments are reproducible bit for bit regardless of worker count or
//! scheduling. A replication whose panel degenerates (a component with zero
//! realized variance cannot be correlation-normalized) is retried once on a
//! disjoint stream before counting as failed.

use crate::error::{Error, Result};
use crate::estimators::{estimate_all, EstimateSet, EstimatorConfig, ESTIMATOR_NAMES};
use crate::processes::{
    assemble_observations, generate_loadings, idiosyncratic_increments, simulate_sv_factors,
    wiener_factor_increments, IdioKind, IdiosyncraticSpec, LoadingSpec, SvFactorParams,
};
use crate::rng::{replication_stream, RETRY_STREAM_OFFSET};
use crate::spectra::{realized_correlation_spectrum, realized_spectrum, Spectrum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Dynamics of the common factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    /// Stochastic volatility with leverage, see [`SvFactorParams`].
    Sv,
    /// Plain Brownian factors.
    Wiener,
}

/// Complete description of one simulation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Observation intervals per panel.
    pub n: usize,
    /// Cross-section size.
    pub d: usize,
    pub factor_kind: FactorKind,
    pub idio: IdiosyncraticSpec,
    /// Factor parameters; `sv.r` is the factor count for both kinds.
    pub sv: SvFactorParams,
    /// Simulation substeps per observation interval (stochastic-volatility
    /// factors only).
    pub refinement: usize,
    pub estimators: EstimatorConfig,
    pub replications: usize,
    pub master_seed: u64,
    /// Number of factors strong enough to be detectable at the configured
    /// threshold exponent; hit probabilities are measured against it.
    pub true_r_tau: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            n: 78,
            d: 500,
            factor_kind: FactorKind::Sv,
            idio: IdiosyncraticSpec::default(),
            sv: SvFactorParams::default(),
            refinement: 1,
            estimators: EstimatorConfig::default(),
            replications: 1000,
            master_seed: 1,
            true_r_tau: 6,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("n", format!("needs at least 2 intervals, got {}", self.n)));
        }
        if self.d < 3 {
            return Err(Error::invalid("d", format!("needs at least 3 components, got {}", self.d)));
        }
        if self.refinement == 0 {
            return Err(Error::invalid("refinement", "must be at least 1"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        self.idio.validate()?;
        self.sv.validate()?;
        self.estimators.validate()?;
        if self.d < self.estimators.r_max + 5 {
            return Err(Error::invalid(
                "d",
                format!(
                    "edge-distribution estimator needs d >= r_max + 5 = {}, got {}",
                    self.estimators.r_max + 5,
                    self.d
                ),
            ));
        }
        LoadingSpec::reference(self.d).column_counts()?;
        Ok(())
    }

    pub fn factor_label(&self) -> &'static str {
        match self.factor_kind {
            FactorKind::Sv => "sv",
            FactorKind::Wiener => "wiener",
        }
    }

    pub fn idio_label(&self) -> &'static str {
        match self.idio.kind {
            IdioKind::Wiener => "wiener",
            IdioKind::Nts { .. } => "nts",
        }
    }

    pub fn nts_alpha(&self) -> Option<f64> {
        match self.idio.kind {
            IdioKind::Wiener => None,
            IdioKind::Nts { alpha } => Some(alpha),
        }
    }
}

/// Realized spectra of one simulated panel.
#[derive(Debug, Clone)]
pub struct PanelSpectra {
    pub covariance: Spectrum,
    pub correlation: Spectrum,
}

/// Simulate one panel of observed increments on the given RNG stream.
/// Draw order: loadings, factor increments, idiosyncratic increments.
pub fn simulate_observations(config: &ModelConfig, stream: u64) -> Result<crate::IncrementMatrix> {
    let mut rng = replication_stream(config.master_seed, stream);
    let loadings = generate_loadings(&LoadingSpec::reference(config.d), &mut rng)?;
    let factors = match config.factor_kind {
        FactorKind::Sv => simulate_sv_factors(&config.sv, config.n, config.refinement, &mut rng)?,
        FactorKind::Wiener => wiener_factor_increments(config.sv.r, config.n, &mut rng),
    };
    let idio = idiosyncratic_increments(&config.idio, config.n, config.d, &mut rng)?;
    assemble_observations(&loadings, &factors, &idio)
}

/// Simulate one panel and return both realized spectra.
pub fn simulate_panel(config: &ModelConfig, stream: u64) -> Result<PanelSpectra> {
    let observations = simulate_observations(config, stream)?;
    Ok(PanelSpectra {
        covariance: realized_spectrum(&observations)?,
        correlation: realized_correlation_spectrum(&observations)?,
    })
}

/// Retry `attempt` once on the offset stream if the first try degenerates.
fn with_retry<T>(rep: u64, mut attempt: impl FnMut(u64) -> Result<T>) -> Result<T> {
    match attempt(rep) {
        Err(Error::DegenerateComponent { .. }) => attempt(RETRY_STREAM_OFFSET + rep),
        other => other,
    }
}

/// Run one replication end to end.
pub fn run_replication(config: &ModelConfig, rep: u64) -> Result<EstimateSet> {
    with_retry(rep, |stream| {
        let panel = simulate_panel(config, stream)?;
        estimate_all(&panel.covariance, &panel.correlation, &config.estimators)
    })
}

/// Monte Carlo summary for one estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    /// Mean estimated factor number.
    pub mean: f64,
    /// Fraction of replications hitting `true_r_tau` exactly.
    pub hit_prob: f64,
}

/// Aggregated result of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub config: ModelConfig,
    /// Replications that produced estimates.
    pub completed: usize,
    /// Replications that failed even after the retry.
    pub failed: usize,
    /// Per-estimator summaries in [`ESTIMATOR_NAMES`] order.
    pub stats: [EstimatorStats; 5],
}

impl MCReport {
    pub fn stat(&self, estimator: &str) -> Option<EstimatorStats> {
        ESTIMATOR_NAMES.iter().position(|n| *n == estimator).map(|i| self.stats[i])
    }
}

/// Mean and hit probability per estimator.
pub fn summarize(estimates: &[EstimateSet], true_r_tau: usize) -> [EstimatorStats; 5] {
    let m = estimates.len() as f64;
    let mut stats = [EstimatorStats { mean: 0.0, hit_prob: 0.0 }; 5];
    for set in estimates {
        for (i, value) in set.as_array().into_iter().enumerate() {
            stats[i].mean += value as f64;
            if value == true_r_tau {
                stats[i].hit_prob += 1.0;
            }
        }
    }
    for s in &mut stats {
        s.mean /= m;
        s.hit_prob /= m;
    }
    stats
}

/// Failures tolerated before an experiment aborts: 1% of replications,
/// rounded down.
fn failure_budget(replications: usize) -> usize {
    replications / 100
}

/// Run all replications (in parallel) and return both the aggregate report
/// and the per-replication estimates, in replication order.
pub fn run_experiment_detailed(config: &ModelConfig) -> Result<(MCReport, Vec<EstimateSet>)> {
    config.validate()?;
    let outcomes: Vec<Result<EstimateSet>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| run_replication(config, rep as u64))
        .collect();
    let mut estimates = Vec::with_capacity(outcomes.len());
    let mut failed = 0;
    let mut last_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(set) => estimates.push(set),
            Err(e) => {
                failed += 1;
                last_error = Some(e);
            }
        }
    }
    if failed > failure_budget(config.replications) {
        return Err(last_error.unwrap_or(Error::TooManyFailures {
            failed,
            total: config.replications,
        }));
    }
    let stats = summarize(&estimates, config.true_r_tau);
    let report =
        MCReport { config: config.clone(), completed: estimates.len(), failed, stats };
    Ok((report, estimates))
}

pub fn run_experiment(config: &ModelConfig) -> Result<MCReport> {
    run_experiment_detailed(config).map(|(report, _)| report)
}

/// Model knob varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    /// Ratio margin of the perturbed eigenvalue-ratio estimator.
    Gamma,
    /// Scale of `g(d)` in the tunable threshold and ratio estimators.
    GScale,
    /// Idiosyncratic noise scale.
    Theta,
    /// Idiosyncratic cross-sectional mixing weight.
    Phi,
}

impl SweepParameter {
    pub fn label(&self) -> &'static str {
        match self {
            SweepParameter::Gamma => "gamma",
            SweepParameter::GScale => "g_scale",
            SweepParameter::Theta => "theta",
            SweepParameter::Phi => "phi",
        }
    }

    /// Base configuration with this parameter set to `value`.
    pub fn apply(&self, base: &ModelConfig, value: f64) -> ModelConfig {
        let mut config = base.clone();
        match self {
            SweepParameter::Gamma => config.estimators.gamma = value,
            SweepParameter::GScale => config.estimators.g_scale = value,
            SweepParameter::Theta => config.idio.theta = value,
            SweepParameter::Phi => config.idio.phi = value,
        }
        config
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(SweepParameter::Gamma),
            "g_scale" => Ok(SweepParameter::GScale),
            "theta" => Ok(SweepParameter::Theta),
            "phi" => Ok(SweepParameter::Phi),
            other => Err(Error::invalid(
                "parameter",
                format!("unknown sweep parameter {other:?}, expected gamma, g_scale, theta or phi"),
            )),
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: MCReport,
}

/// Run the experiment once per parameter value. Every point reuses the base
/// master seed, so all points see identical random inputs wherever the
/// parameter does not enter the simulation; per-replication comparisons
/// across points are then exact, not merely in distribution.
pub fn run_sweep(
    base: &ModelConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::invalid("values", "sweep needs at least one parameter value"));
    }
    values
        .iter()
        .map(|&value| {
            let config = parameter.apply(base, value);
            run_experiment(&config).map(|report| SweepPoint { value, report })
        })
        .collect()
}
