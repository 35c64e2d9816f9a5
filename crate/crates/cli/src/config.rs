//! Flat key-value experiment configs.
//!
//! A config file is TOML restricted to top-level scalar keys, one experiment
//! per file. Every key is optional and defaults to the baseline model
//! (`n = 78`, `d = 500`, stochastic-volatility factors, Brownian noise);
//! unknown keys are rejected so typos cannot silently fall back to defaults.

use hffactors_core::montecarlo::{FactorKind, ModelConfig};
use hffactors_core::processes::IdioKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    // panel shape
    pub n: Option<usize>,
    pub d: Option<usize>,
    // process choices: factor_kind in {sv, wiener}, idio_kind in {wiener, nts}
    pub factor_kind: Option<String>,
    pub idio_kind: Option<String>,
    pub nts_alpha: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub refinement: Option<usize>,
    // stochastic-volatility factor parameters
    pub sv_mu: Option<f64>,
    pub sv_a: Option<f64>,
    pub sv_b: Option<f64>,
    pub sv_kappa: Option<f64>,
    pub sv_rho: Option<f64>,
    // estimator tuning
    pub tau: Option<f64>,
    pub r_max: Option<usize>,
    pub gamma: Option<f64>,
    pub pelger_gamma: Option<f64>,
    pub g_scale: Option<f64>,
    // experiment driver
    pub replications: Option<usize>,
    pub master_seed: Option<u64>,
    pub true_r_tau: Option<usize>,
}

impl ConfigFile {
    /// Overlay this file onto the default model and validate the result.
    pub fn into_model(self) -> Result<ModelConfig, CliError> {
        let mut cfg = ModelConfig::default();

        match self.factor_kind.as_deref() {
            None | Some("sv") => {}
            Some("wiener") => cfg.factor_kind = FactorKind::Wiener,
            Some(other) => {
                return Err(CliError::config(format!(
                    "factor_kind: unknown value {other:?}, expected \"sv\" or \"wiener\""
                )));
            }
        }
        match self.idio_kind.as_deref() {
            None | Some("wiener") => {
                if let Some(alpha) = self.nts_alpha {
                    return Err(CliError::config(format!(
                        "nts_alpha: set to {alpha} but idio_kind is \"wiener\"; \
                         nts_alpha only applies when idio_kind = \"nts\""
                    )));
                }
            }
            Some("nts") => {
                cfg.idio.kind = IdioKind::Nts { alpha: self.nts_alpha.unwrap_or(0.5) };
            }
            Some(other) => {
                return Err(CliError::config(format!(
                    "idio_kind: unknown value {other:?}, expected \"wiener\" or \"nts\""
                )));
            }
        }

        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if let Some(theta) = self.theta {
            cfg.idio.theta = theta;
        }
        if let Some(phi) = self.phi {
            cfg.idio.phi = phi;
        }
        if let Some(refinement) = self.refinement {
            cfg.refinement = refinement;
        }
        if let Some(mu) = self.sv_mu {
            cfg.sv.mu = mu;
        }
        if let Some(a) = self.sv_a {
            cfg.sv.a = a;
        }
        if let Some(b) = self.sv_b {
            cfg.sv.b = b;
        }
        if let Some(kappa) = self.sv_kappa {
            cfg.sv.kappa = kappa;
        }
        if let Some(rho) = self.sv_rho {
            cfg.sv.rho = rho;
        }
        if let Some(tau) = self.tau {
            cfg.estimators.tau = tau;
        }
        if let Some(r_max) = self.r_max {
            cfg.estimators.r_max = r_max;
        }
        if let Some(gamma) = self.gamma {
            cfg.estimators.gamma = gamma;
        }
        if let Some(pelger_gamma) = self.pelger_gamma {
            cfg.estimators.pelger_gamma = pelger_gamma;
        }
        if let Some(g_scale) = self.g_scale {
            cfg.estimators.g_scale = g_scale;
        }
        if let Some(replications) = self.replications {
            cfg.replications = replications;
        }
        if let Some(master_seed) = self.master_seed {
            cfg.master_seed = master_seed;
        }
        if let Some(true_r_tau) = self.true_r_tau {
            cfg.true_r_tau = true_r_tau;
        }

        cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(cfg)
    }

    /// Capture a full model as an explicit config, every key present.
    pub fn from_model(cfg: &ModelConfig) -> ConfigFile {
        let (idio_kind, nts_alpha) = match cfg.idio.kind {
            IdioKind::Wiener => ("wiener", None),
            IdioKind::Nts { alpha } => ("nts", Some(alpha)),
        };
        ConfigFile {
            n: Some(cfg.n),
            d: Some(cfg.d),
            factor_kind: Some(cfg.factor_label().to_string()),
            idio_kind: Some(idio_kind.to_string()),
            nts_alpha,
            theta: Some(cfg.idio.theta),
            phi: Some(cfg.idio.phi),
            refinement: Some(cfg.refinement),
            sv_mu: Some(cfg.sv.mu),
            sv_a: Some(cfg.sv.a),
            sv_b: Some(cfg.sv.b),
            sv_kappa: Some(cfg.sv.kappa),
            sv_rho: Some(cfg.sv.rho),
            tau: Some(cfg.estimators.tau),
            r_max: Some(cfg.estimators.r_max),
            gamma: Some(cfg.estimators.gamma),
            pelger_gamma: Some(cfg.estimators.pelger_gamma),
            g_scale: Some(cfg.estimators.g_scale),
            replications: Some(cfg.replications),
            master_seed: Some(cfg.master_seed),
            true_r_tau: Some(cfg.true_r_tau),
        }
    }
}

pub fn parse_config(text: &str) -> Result<ModelConfig, CliError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
    file.into_model()
}

/// Render a model as a flat config that parses back to the same model.
/// Absent optional keys (nts_alpha under Brownian noise) are skipped, not
/// written as nulls, so the output always re-parses.
pub fn to_flat_toml(cfg: &ModelConfig) -> String {
    toml::to_string(&ConfigFile::from_model(cfg)).expect("config serializes to TOML")
}
