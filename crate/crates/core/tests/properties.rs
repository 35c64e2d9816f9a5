//! Property suite for the pure kernels: spectral identities, estimator
//! invariances, and stream reproducibility. Statistical behavior lives in
//! the acceptance gate; everything here is exact or near-exact, so shrunk
//! counterexamples point straight at a logic bug.

use approx::relative_eq;
use hffactors_core::estimators::{
    count_above, estimate_bn, estimate_onatski_ed, estimate_pc_p1, estimate_pelger,
    estimate_perturbed_ratio, EstimatorConfig,
};
use hffactors_core::processes::PtsParams;
use hffactors_core::rng::{replication_stream, study_stream_id};
use hffactors_core::spectra::{
    realized_correlation_spectrum, realized_spectrum, Spectrum, SpectrumSource,
};
use hffactors_core::IncrementMatrix;
use proptest::prelude::*;
use rand::RngExt;
use rand_distr::StandardNormal;

fn normal_matrix(d: usize, n: usize, seed: u64) -> IncrementMatrix {
    let mut rng = replication_stream(seed, 0);
    IncrementMatrix::from_fn(d, n, |_, _| rng.sample(StandardNormal))
}

/// Covariance spectra with enough padding for every estimator: the raw
/// values land in the stored block and `d` clears `r_max + 5`.
fn covariance_spectrum() -> impl Strategy<Value = Spectrum> {
    (prop::collection::vec(0.001f64..100.0, 1..=40), 25usize..=60, 0usize..=100).prop_map(
        |(values, pad, extra_n)| {
            let d = values.len() + pad;
            let n = values.len() + extra_n;
            Spectrum::from_values(values, d, n, SpectrumSource::Covariance).unwrap()
        },
    )
}

/// Rescale every eigenvalue by an exact power of two. Scaling by powers of
/// two commutes with floating-point rounding, so invariance checks against
/// these spectra hold exactly, not merely within tolerance.
fn scale_spectrum(s: &Spectrum, c: f64) -> Spectrum {
    let values = s.values().iter().map(|v| v * c).collect();
    Spectrum::from_values(values, s.d(), s.n(), s.source()).unwrap()
}

proptest! {
    #[test]
    fn realized_spectrum_is_sorted_and_preserves_the_trace(
        d in 1usize..=30,
        n in 1usize..=30,
        seed in 0u64..1 << 48,
    ) {
        let m = normal_matrix(d, n, seed);
        let s = realized_spectrum(&m).unwrap();
        prop_assert_eq!(s.values().len(), d.min(n));
        for pair in s.values().windows(2) {
            prop_assert!(pair[0] >= pair[1]);
        }
        prop_assert!(s.values().iter().all(|&v| v >= 0.0));
        let frobenius_sq: f64 = m.iter().map(|x| x * x).sum();
        prop_assert!(relative_eq!(s.sum(), frobenius_sq, max_relative = 1e-10));
    }

    #[test]
    fn correlation_spectrum_ignores_component_scales(
        scales in prop::collection::vec(0.01f64..100.0, 1..=16),
        n in 2usize..=24,
        seed in 0u64..1 << 48,
    ) {
        let d = scales.len();
        let m = normal_matrix(d, n, seed);
        let mut scaled = m.clone();
        for (i, &c) in scales.iter().enumerate() {
            scaled.row_mut(i).iter_mut().for_each(|v| *v *= c);
        }
        let base = realized_correlation_spectrum(&m).unwrap();
        let moved = realized_correlation_spectrum(&scaled).unwrap();
        prop_assert!(relative_eq!(base.sum(), d as f64, max_relative = 1e-9));
        let tol = 1e-9 * base.eigenvalue(1).max(1.0);
        for (a, b) in base.values().iter().zip(moved.values().iter()) {
            prop_assert!((a - b).abs() <= tol, "{a} vs {b}");
        }
    }

    #[test]
    fn padded_median_matches_the_literal_definition(
        s in covariance_spectrum(),
    ) {
        let mut padded = s.values().to_vec();
        padded.resize(s.d(), 0.0);
        padded.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expected = if s.d() % 2 == 1 {
            padded[s.d() / 2]
        } else {
            0.5 * (padded[s.d() / 2 - 1] + padded[s.d() / 2])
        };
        prop_assert_eq!(s.padded_median(), expected);
    }

    /// Thresholds and perturbations built from the spectrum itself scale
    /// with it, so a global rescaling never moves an integer estimate.
    #[test]
    fn estimators_are_invariant_under_rescaling(
        s in covariance_spectrum(),
        exponent in -12i32..=12,
        g in 0.0f64..10.0,
    ) {
        let c = 2f64.powi(exponent);
        let scaled = scale_spectrum(&s, c);
        let cfg = EstimatorConfig::default();
        prop_assert_eq!(estimate_bn(&scaled, &cfg).unwrap(), estimate_bn(&s, &cfg).unwrap());
        prop_assert_eq!(estimate_pc_p1(&scaled, &cfg), estimate_pc_p1(&s, &cfg));
        prop_assert_eq!(estimate_pelger(&scaled, &cfg), estimate_pelger(&s, &cfg));
        prop_assert_eq!(
            estimate_onatski_ed(&scaled, cfg.r_max).unwrap(),
            estimate_onatski_ed(&s, cfg.r_max).unwrap()
        );
        // The tunable ratio estimator takes its perturbation from the caller,
        // so it is equivariant: scale the perturbation along with the values.
        prop_assert_eq!(
            estimate_perturbed_ratio(&scaled, &cfg, c * g),
            estimate_perturbed_ratio(&s, &cfg, g)
        );
    }

    #[test]
    fn count_above_is_monotone_and_capped(
        s in covariance_spectrum(),
        t1 in 0.0f64..200.0,
        t2 in 0.0f64..200.0,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let r_max = 20;
        let at_hi = count_above(&s, hi, r_max);
        let at_lo = count_above(&s, lo, r_max);
        prop_assert!(at_hi <= at_lo);
        prop_assert!(at_lo <= r_max);
    }

    /// Raising the ratio margin can only disqualify candidates.
    #[test]
    fn perturbed_ratio_is_nonincreasing_in_gamma(
        s in covariance_spectrum(),
        g1 in 0.001f64..2.0,
        g2 in 0.001f64..2.0,
        g in 0.0f64..10.0,
    ) {
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let strict = EstimatorConfig { gamma: hi, ..EstimatorConfig::default() };
        let lax = EstimatorConfig { gamma: lo, ..EstimatorConfig::default() };
        prop_assert!(
            estimate_perturbed_ratio(&s, &strict, g) <= estimate_perturbed_ratio(&s, &lax, g)
        );
    }

    #[test]
    fn unit_moment_params_normalize_mean_and_variance(alpha in 0.01f64..0.99) {
        let params = PtsParams::unit_moment(alpha).unwrap();
        prop_assert!(relative_eq!(params.mean(), 1.0, max_relative = 1e-9));
        prop_assert!(relative_eq!(params.variance(), 1.0, max_relative = 1e-9));
        prop_assert!(params.log_laplace(0.0).abs() < 1e-12);
        // The transform is strictly decreasing and log-linear in intensity.
        prop_assert!(params.log_laplace(0.5) > params.log_laplace(1.0));
        let doubled = params.with_intensity(params.c * 2.0);
        prop_assert!(relative_eq!(
            doubled.log_laplace(1.0),
            2.0 * params.log_laplace(1.0),
            max_relative = 1e-9
        ));
    }

    #[test]
    fn replication_streams_replay_and_separate(
        seed in 0u64..1 << 48,
        s1 in 0u64..1 << 32,
        s2 in 0u64..1 << 32,
    ) {
        let draw = |stream: u64| {
            let mut rng = replication_stream(seed, stream);
            (0..8).map(|_| rng.random::<u64>()).collect::<Vec<_>>()
        };
        prop_assert_eq!(draw(s1), draw(s1));
        if s1 != s2 {
            prop_assert_ne!(draw(s1), draw(s2));
        }
    }

    #[test]
    fn study_stream_ids_are_collision_free(
        p1 in 0u32..1 << 16,
        r1 in 0u32..1 << 16,
        p2 in 0u32..1 << 16,
        r2 in 0u32..1 << 16,
    ) {
        let same_id = study_stream_id(p1, r1) == study_stream_id(p2, r2);
        prop_assert_eq!(same_id, (p1, r1) == (p2, r2));
    }
}
