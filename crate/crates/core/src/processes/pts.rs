//! Positive tempered stable (PTS) subordinator marginals.

use crate::error::{Error, Result};
use crate::processes::stable::sample_one_sided_stable_unchecked;
use rand::{Rng, RngExt};
use statrs::function::gamma::gamma;

/// Parameters of the PTS(alpha, c, lambda) law with log-Laplace transform
///
/// ```text
/// log E[exp(-u V)] = c Gamma(-alpha) ((lambda + u)^alpha - lambda^alpha)
/// ```
///
/// `alpha` in (0, 1) is the stability index, `c > 0` the jump intensity,
/// `lambda > 0` the tempering rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtsParams {
    pub alpha: f64,
    pub c: f64,
    pub lambda: f64,
}

impl PtsParams {
    /// Parameters with unit mean and unit variance for the given `alpha`:
    /// `lambda = 1 - alpha`, `c = lambda^(1-alpha) / Gamma(1-alpha)`.
    pub fn unit_moment(alpha: f64) -> Result<Self> {
        let lambda = 1.0 - alpha;
        let params = PtsParams {
            alpha,
            c: lambda.powf(1.0 - alpha) / gamma(1.0 - alpha),
            lambda,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same tempering and stability with jump intensity replaced by `c`.
    /// Used to scale a time-1 law down to an increment of length `1/n`.
    pub fn with_intensity(self, c: f64) -> Self {
        PtsParams { c, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if !self.c.is_finite() || self.c <= 0.0 {
            return Err(Error::invalid("c", format!("must be positive and finite, got {}", self.c)));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::invalid(
                "lambda",
                format!("must be positive and finite, got {}", self.lambda),
            ));
        }
        Ok(())
    }

    /// `c * Gamma(-alpha)`, computed through `Gamma(1-alpha)` to stay on the
    /// positive branch of the gamma function: `Gamma(-a) = -Gamma(1-a)/a`.
    fn c_gamma_neg_alpha(&self) -> f64 {
        -self.c * gamma(1.0 - self.alpha) / self.alpha
    }

    /// Log-Laplace transform at `u >= 0`.
    pub fn log_laplace(&self, u: f64) -> f64 {
        self.c_gamma_neg_alpha() * ((self.lambda + u).powf(self.alpha) - self.lambda.powf(self.alpha))
    }

    /// Exact mean: `c Gamma(1-alpha) lambda^(alpha-1)`.
    pub fn mean(&self) -> f64 {
        self.c * gamma(1.0 - self.alpha) * self.lambda.powf(self.alpha - 1.0)
    }

    /// Exact variance: `c Gamma(1-alpha) (1-alpha) lambda^(alpha-2)`.
    pub fn variance(&self) -> f64 {
        self.c * gamma(1.0 - self.alpha) * (1.0 - self.alpha) * self.lambda.powf(self.alpha - 2.0)
    }

    /// Acceptance probability of the exponential-tilt rejection sampler:
    /// `exp(c Gamma(-alpha) lambda^alpha)`. Approaches 1 as `c` shrinks, so
    /// per-increment sampling at intensity `c/n` is cheap.
    pub fn acceptance_rate(&self) -> f64 {
        (self.c_gamma_neg_alpha() * self.lambda.powf(self.alpha)).exp()
    }
}

/// Exact draw from PTS(alpha, c, lambda) by tempering a one-sided stable.
///
/// A stable draw scaled by `kappa = (c Gamma(1-alpha) / alpha)^(1/alpha)` has
/// Laplace transform `exp(c Gamma(-alpha) u^alpha)`; accepting it with
/// probability `exp(-lambda S)` tilts the law to the PTS target.
pub fn sample_pts<R: Rng + ?Sized>(params: &PtsParams, rng: &mut R) -> f64 {
    sample_pts_counted(params, rng).0
}

/// [`sample_pts`] that also reports how many stable proposals were consumed.
pub fn sample_pts_counted<R: Rng + ?Sized>(params: &PtsParams, rng: &mut R) -> (f64, u64) {
    let kappa = (params.c * gamma(1.0 - params.alpha) / params.alpha).powf(1.0 / params.alpha);
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        let s = kappa * sample_one_sided_stable_unchecked(params.alpha, rng);
        if rng.random::<f64>() < (-params.lambda * s).exp() {
            return (s, attempts);
        }
    }
}
