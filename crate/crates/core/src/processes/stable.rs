//! One-sided alpha-stable sampling.

use crate::error::{Error, Result};
use rand::{Rng, RngExt};
use rand_distr::Exp1;

/// Clamp a uniform draw away from 0 and 1 so the trigonometric kernel below
/// never divides by an exact zero.
fn clamp_open01(u: f64) -> f64 {
    u.clamp(1e-12, 1.0 - 1e-12)
}

/// Draw from the one-sided (positive) alpha-stable law with Laplace
/// transform `E[exp(-u S)] = exp(-u^alpha)`, `alpha` in (0, 1).
///
/// Kanter's representation: with `U ~ Uniform(0, pi)` and `W ~ Exp(1)`,
///
/// ```text
/// S = sin(alpha U) / sin(U)^(1/alpha) * ( sin((1-alpha) U) / W )^((1-alpha)/alpha)
/// ```
pub fn sample_one_sided_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in the open interval (0, 1), got {alpha}"),
        ));
    }
    Ok(sample_one_sided_stable_unchecked(alpha, rng))
}

/// Same as [`sample_one_sided_stable`] without the domain check. Hot-path
/// variant for callers that validated `alpha` once up front.
pub(crate) fn sample_one_sided_stable_unchecked<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = std::f64::consts::PI * clamp_open01(rng.random::<f64>());
    let w: f64 = rng.sample(Exp1);
    let s1 = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let s2 = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
    s1 * s2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replication_stream;

    /// CDF of the alpha = 1/2 one-sided stable law (Levy distribution with
    /// scale 1/2): F(x) = erfc(1 / (2 sqrt(x))).
    fn half_stable_cdf(x: f64) -> f64 {
        statrs::function::erf::erfc(1.0 / (2.0 * x.sqrt()))
    }

    #[test]
    fn rejects_alpha_outside_open_unit_interval() {
        let mut rng = replication_stream(1, 0);
        for bad in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(sample_one_sided_stable(bad, &mut rng).is_err());
        }
    }

    #[test]
    fn draws_are_positive() {
        let mut rng = replication_stream(2, 0);
        for _ in 0..10_000 {
            let s = sample_one_sided_stable(0.6, &mut rng).unwrap();
            assert!(s > 0.0 && s.is_finite());
        }
    }

    /// Kolmogorov-Smirnov check against the closed-form alpha = 1/2 CDF.
    #[test]
    fn half_stable_matches_levy_cdf() {
        let mut rng = replication_stream(3, 0);
        let n = 30_000;
        let mut draws: Vec<f64> = (0..n)
            .map(|_| sample_one_sided_stable(0.5, &mut rng).unwrap())
            .collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, &x) in draws.iter().enumerate() {
            let f = half_stable_cdf(x);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            ks = ks.max((f - lo).abs()).max((f - hi).abs());
        }
        assert!(ks < 0.015, "KS statistic {ks} too large");
    }

    /// Empirical Laplace transform matches exp(-u^alpha) at several u.
    #[test]
    fn laplace_transform_matches() {
        for (stream, alpha) in [(0u64, 0.25), (1, 0.5), (2, 0.75)] {
            let mut rng = replication_stream(4, stream);
            let n = 20_000;
            for u in [0.5, 1.0, 2.0] {
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for _ in 0..n {
                    let v = (-u * sample_one_sided_stable(alpha, &mut rng).unwrap()).exp();
                    sum += v;
                    sumsq += v * v;
                }
                let mean = sum / n as f64;
                let var = (sumsq / n as f64 - mean * mean).max(0.0);
                let se = (var / n as f64).sqrt();
                let theory = (-u.powf(alpha)).exp();
                assert!(
                    (mean - theory).abs() < 4.0 * se + 1e-12,
                    "alpha={alpha} u={u}: {mean} vs {theory} (se={se})"
                );
            }
        }
    }
}
