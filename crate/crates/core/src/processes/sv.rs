//! Stochastic-volatility factor simulation.

use crate::error::{Error, Result};
use crate::IncrementMatrix;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Parameters of the factor system. Each of the `r` factors follows
///
/// ```text
/// dF = mu dt + rho sigma dB + sqrt(1 - rho^2) sigma dW,
/// sigma_t = exp(a + b q_t),   dq = -kappa q dt + dB,
/// ```
///
/// with independent ingredients across factors. The same Brownian motion `B`
/// drives both the price and the volatility state `q`, so `rho` is a
/// leverage correlation. `q_0 ~ N(0, 1/(2 kappa))` keeps `q` stationary; the
/// defaults make `E[sigma_t^2] = 1`, hence unit expected quadratic variation
/// per factor over the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvFactorParams {
    pub r: usize,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
    pub rho: f64,
}

impl Default for SvFactorParams {
    fn default() -> Self {
        SvFactorParams {
            r: 9,
            mu: 0.03,
            a: -5.0 / 16.0,
            b: 1.0 / 8.0,
            kappa: 1.0 / 40.0,
            rho: -0.3,
        }
    }
}

impl SvFactorParams {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::invalid("r", "at least one factor required"));
        }
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(Error::invalid(
                "kappa",
                format!("must be positive and finite, got {}", self.kappa),
            ));
        }
        if !(self.rho >= -1.0 && self.rho <= 1.0) {
            return Err(Error::invalid("rho", format!("must lie in [-1, 1], got {}", self.rho)));
        }
        Ok(())
    }
}

/// Draw from the stationary law of the volatility state: N(0, 1/(2 kappa)).
pub fn sample_ou_initial<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    (0.5 / kappa).sqrt() * rng.sample::<f64, _>(StandardNormal)
}

/// Simulate the `r` factors over `n` observation intervals of length `1/n`
/// and return the r-by-n panel of observation-grid increments.
///
/// The volatility state advances by its exact Ornstein-Uhlenbeck transition
/// on a grid refined `refinement`-fold; the price is an Euler step on the
/// same refined grid reusing the Brownian shock that moved the state, which
/// is what carries the leverage into the discretization. The state's initial
/// draw comes first in the stream so runs at different refinements share it.
pub fn simulate_sv_factors<R: Rng + ?Sized>(
    params: &SvFactorParams,
    n: usize,
    refinement: usize,
    rng: &mut R,
) -> Result<IncrementMatrix> {
    params.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "at least one observation interval required"));
    }
    if refinement == 0 {
        return Err(Error::invalid("refinement", "must be at least 1"));
    }
    let h = 1.0 / (n * refinement) as f64;
    let sqrt_h = h.sqrt();
    let decay = (-params.kappa * h).exp();
    // Exact OU innovation standard deviation over one substep.
    let ou_sd = ((1.0 - (-2.0 * params.kappa * h).exp()) / (2.0 * params.kappa)).sqrt();
    let rho_perp = (1.0 - params.rho * params.rho).sqrt();

    let mut out = IncrementMatrix::zeros(params.r, n);
    for j in 0..params.r {
        let mut q = sample_ou_initial(params.kappa, rng);
        for i in 0..n {
            let mut df = 0.0;
            for _ in 0..refinement {
                let z_b: f64 = rng.sample(StandardNormal);
                let z_w: f64 = rng.sample(StandardNormal);
                let sigma = (params.a + params.b * q).exp();
                df += params.mu * h
                    + sigma * sqrt_h * (params.rho * z_b + rho_perp * z_w);
                q = decay * q + ou_sd * z_b;
            }
            out[(j, i)] = df;
        }
    }
    Ok(out)
}

/// Increments of `r` independent standard Wiener factors: i.i.d. N(0, 1/n).
pub fn wiener_factor_increments<R: Rng + ?Sized>(r: usize, n: usize, rng: &mut R) -> IncrementMatrix {
    let sd = (1.0 / n as f64).sqrt();
    IncrementMatrix::from_fn(r, n, |_, _| sd * rng.sample::<f64, _>(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replication_stream;

    fn single_factor() -> SvFactorParams {
        SvFactorParams { r: 1, ..SvFactorParams::default() }
    }

    fn realized_variance(m: &IncrementMatrix, row: usize) -> f64 {
        m.row(row).iter().map(|x| x * x).sum()
    }

    #[test]
    fn shape_and_validation() {
        let mut rng = replication_stream(31, 0);
        let m = simulate_sv_factors(&SvFactorParams::default(), 26, 1, &mut rng).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (9, 26));
        assert!(simulate_sv_factors(&SvFactorParams { kappa: 0.0, ..Default::default() }, 26, 1, &mut rng).is_err());
        assert!(simulate_sv_factors(&SvFactorParams { rho: -1.5, ..Default::default() }, 26, 1, &mut rng).is_err());
        assert!(simulate_sv_factors(&SvFactorParams::default(), 26, 0, &mut rng).is_err());
    }

    /// Stationary initial state: sample variance close to 1/(2 kappa) = 20.
    #[test]
    fn ou_initial_variance_matches_stationary_law() {
        let mut rng = replication_stream(32, 0);
        let reps = 4000;
        let draws: Vec<f64> = (0..reps).map(|_| sample_ou_initial(1.0 / 40.0, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / reps as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (reps - 1) as f64;
        // SE of a normal sample variance: sigma^2 sqrt(2/reps).
        let se = 20.0 * (2.0 / reps as f64).sqrt();
        assert!((var - 20.0).abs() < 3.0 * se, "variance {var} vs 20 (se {se})");
    }

    /// Unit expected realized variance per factor at the defaults.
    #[test]
    fn realized_variance_mean_is_one() {
        let params = single_factor();
        let n = 78;
        let reps = 4000;
        let mut total = 0.0;
        for rep in 0..reps {
            let mut rng = replication_stream(33, rep);
            let m = simulate_sv_factors(&params, n, 1, &mut rng).unwrap();
            total += realized_variance(&m, 0);
        }
        let mean = total / reps as f64;
        assert!((mean - 1.0).abs() < 0.1, "mean realized variance {mean}");
    }

    /// Refinement changes the discretization, not the realized-variance mean.
    /// Runs share the initial volatility state through the stream layout.
    #[test]
    fn refinement_leaves_realized_variance_mean_stable() {
        let params = single_factor();
        let n = 39;
        let reps = 20_000;
        let mut means = [0.0f64; 2];
        for (k, refinement) in [(0usize, 1usize), (1, 10)] {
            let mut total = 0.0;
            for rep in 0..reps {
                let mut rng = replication_stream(34, rep as u64);
                let m = simulate_sv_factors(&params, n, refinement, &mut rng).unwrap();
                total += realized_variance(&m, 0);
            }
            means[k] = total / reps as f64;
        }
        let rel = (means[0] - means[1]).abs() / means[1];
        assert!(rel < 0.02, "refinement shift {rel} (means {means:?})");
    }

    /// With b = 0, rho = 0, mu = 0 the factor is a scaled Wiener process.
    #[test]
    fn constant_volatility_reduction() {
        let params = SvFactorParams { b: 0.0, rho: 0.0, mu: 0.0, ..single_factor() };
        let target = (2.0 * params.a).exp();
        let n = 78;
        let reps = 2000;
        let mut rng = replication_stream(35, 0);
        let mut rvs = Vec::with_capacity(reps);
        let mut increments = Vec::new();
        for _ in 0..reps {
            let m = simulate_sv_factors(&params, n, 1, &mut rng).unwrap();
            rvs.push(realized_variance(&m, 0));
            if increments.len() < 50_000 {
                increments.extend(m.row(0).iter().copied());
            }
        }
        let mean = rvs.iter().sum::<f64>() / reps as f64;
        // Only chi-squared noise remains: sd = target * sqrt(2/n).
        let se = target * (2.0 / n as f64).sqrt() / (reps as f64).sqrt();
        assert!((mean - target).abs() < 4.0 * se, "mean {mean} vs {target}");
        let inc_var = increments.iter().map(|x| x * x).sum::<f64>() / increments.len() as f64;
        assert!((inc_var - target / n as f64).abs() / (target / n as f64) < 0.05);
    }

    /// Drift shows up in the increment mean.
    #[test]
    fn drift_enters_increments() {
        let params = SvFactorParams { mu: 5.0, b: 0.0, rho: 0.0, ..single_factor() };
        let mut rng = replication_stream(36, 0);
        let reps = 2000;
        let mut total = 0.0;
        for _ in 0..reps {
            let m = simulate_sv_factors(&params, 26, 1, &mut rng).unwrap();
            total += m.row(0).sum();
        }
        let mean = total / reps as f64;
        assert!((mean - 5.0).abs() < 0.1, "total drift {mean}");
    }

    /// Negative leverage: a negative price shock raises next-interval
    /// volatility, so Corr(dF_i, |dF_(i+1)|) < 0. Amplified parameters keep
    /// the per-interval volatility response well above sampling noise.
    #[test]
    fn leverage_correlation_is_negative() {
        let params = SvFactorParams { r: 1, mu: 0.0, a: 0.0, b: 2.0, kappa: 1.0, rho: -1.0 };
        let n = 100;
        let reps = 4000;
        let mut rng = replication_stream(37, 0);
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(reps * (n - 1));
        for _ in 0..reps {
            let m = simulate_sv_factors(&params, n, 1, &mut rng).unwrap();
            for i in 0..n - 1 {
                pairs.push((m[(0, i)], m[(0, i + 1)].abs()));
            }
        }
        let len = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / len;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / len;
        let (mut num, mut dx2, mut dy2) = (0.0, 0.0, 0.0);
        for (x, y) in pairs {
            num += (x - mx) * (y - my);
            dx2 += (x - mx) * (x - mx);
            dy2 += (y - my) * (y - my);
        }
        let corr = num / (dx2.sqrt() * dy2.sqrt());
        assert!(corr < -0.1, "expected negative leverage, got corr {corr}");
    }

    #[test]
    fn wiener_factors_have_unit_quadratic_variation_mean() {
        let mut rng = replication_stream(38, 0);
        let reps = 2000;
        let n = 78;
        let mut total = 0.0;
        for _ in 0..reps {
            let m = wiener_factor_increments(2, n, &mut rng);
            total += realized_variance(&m, 1);
        }
        let mean = total / reps as f64;
        let se = (2.0 / n as f64).sqrt() / (reps as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean}");
    }
}
