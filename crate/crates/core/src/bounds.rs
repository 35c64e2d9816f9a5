//! Empirical scaling studies: measured norms of realized-covariance errors
//! against their theoretical envelopes.
//!
//! Three studies share a common shape: simulate panels over a grid of
//! `(d, n)` sizes, record a norm per replication, compare the median against
//! a closed-form envelope, and attach bootstrap percentile bands. Streams
//! are keyed by `(grid index, replication)`, so grid order is part of the
//! reproducibility contract.

use crate::error::{Error, Result};
use crate::montecarlo::{FactorKind, ModelConfig};
use crate::processes::{idiosyncratic_increments, IdioKind, IdiosyncraticSpec};
use crate::rng::{replication_stream, study_stream, study_stream_id};
use crate::spectra::{realized_covariance, realized_spectrum};
use nalgebra::DMatrix;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Bootstrap resamples behind every percentile band.
pub const BOOTSTRAP_SAMPLES: usize = 200;

/// Largest cross-section the dense-error study accepts; the error matrix is
/// materialized as a full `d x d` eigenproblem per replication.
pub const CONCENTRATION_DIM_CAP: usize = 400;

/// Leading eigenvalues tracked by the eigenvalue-scaling study.
pub const TRACKED_EIGENVALUES: usize = 7;

/// Stream reserved for bootstrap resampling. Study streams pack
/// `(point << 32) | rep` with tiny point indices, so this id is never a
/// simulation stream.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// One panel size in a study grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridPoint {
    pub d: usize,
    pub n: usize,
}

/// Concentration envelope for the realized-covariance error of a light-tailed
/// panel: `Lambda ((d + u)/n + sqrt((d + u)/n))` with `u = ln 4`, where
/// `Lambda` bounds the spectral norm of the population covariance.
pub fn concentration_envelope(d: usize, n: usize, big_lambda: f64) -> f64 {
    let x = (d as f64 + 4f64.ln()) / n as f64;
    big_lambda * (x + x.sqrt())
}

/// Norm envelope for heavy-tailed (jump-driven) noise:
/// `theta (ln d)^2 ((d/n) ln(d min n) + (ln(d min n))^2)`.
pub fn jump_envelope(d: usize, n: usize, theta: f64) -> f64 {
    let ld = (d as f64).ln();
    let lmin = (d.min(n) as f64).ln();
    theta * ld * ld * ((d as f64 / n as f64) * lmin + lmin * lmin)
}

/// `phi^|j-k|` Toeplitz matrix.
fn toeplitz(d: usize, phi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |j, k| phi.powi((j as i32 - k as i32).abs()))
}

fn toeplitz_lambda_max(d: usize, phi: f64) -> f64 {
    toeplitz(d, phi).symmetric_eigenvalues().fold(f64::NEG_INFINITY, |m, v| m.max(v))
}

fn median(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Value at quantile `q` of an ascending-sorted slice (nearest-rank).
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx]
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    sxy / sxx
}

/// 95% bootstrap percentile band for the median of `samples`.
fn bootstrap_median_band(samples: &[f64], rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut stats = Vec::with_capacity(BOOTSTRAP_SAMPLES);
    let mut buf = vec![0.0; samples.len()];
    for _ in 0..BOOTSTRAP_SAMPLES {
        for slot in buf.iter_mut() {
            *slot = samples[rng.random_range(0..samples.len())];
        }
        stats.push(median(&buf));
    }
    stats.sort_unstable_by(f64::total_cmp);
    (percentile(&stats, 0.025), percentile(&stats, 0.975))
}

/// 95% bootstrap band for the slope of `ln median` against `log_d`, where
/// `samples_per_point[i]` holds the replication values at `log_d[i]`.
fn bootstrap_slope_band(
    log_d: &[f64],
    samples_per_point: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let mut stats = Vec::with_capacity(BOOTSTRAP_SAMPLES);
    for _ in 0..BOOTSTRAP_SAMPLES {
        let points: Vec<(f64, f64)> = log_d
            .iter()
            .zip(samples_per_point)
            .map(|(&x, samples)| {
                let resampled: Vec<f64> = (0..samples.len())
                    .map(|_| samples[rng.random_range(0..samples.len())])
                    .collect();
                (x, median(&resampled).ln())
            })
            .collect();
        stats.push(ols_slope(&points));
    }
    stats.sort_unstable_by(f64::total_cmp);
    (percentile(&stats, 0.025), percentile(&stats, 0.975))
}

fn validate_study_inputs(replications: usize, theta: f64) -> Result<()> {
    if replications < 2 {
        return Err(Error::invalid("replications", "studies need at least 2 replications"));
    }
    if !theta.is_finite() || theta <= 0.0 {
        return Err(Error::invalid("theta", format!("must be positive and finite, got {theta}")));
    }
    Ok(())
}

/// Default grid for [`concentration_study`]: each `d` crossed with
/// `n in {d/4, d, 4d}`, plus a fixed `n = 400` leg so errors can be compared
/// across `d` at constant sampling frequency.
pub fn default_concentration_grid() -> Vec<GridPoint> {
    let mut grid = Vec::new();
    for d in [50, 100, 200, 400] {
        for n in [d / 4, d, 4 * d] {
            grid.push(GridPoint { d, n });
        }
    }
    grid.push(GridPoint { d: 50, n: 400 });
    grid.push(GridPoint { d: 200, n: 400 });
    grid
}

/// Default grid for [`jump_norm_study`]: growth in `d` at `n = 390` plus a
/// frequency sweep at `d = 100`.
pub fn default_jump_grid() -> Vec<GridPoint> {
    vec![
        GridPoint { d: 100, n: 390 },
        GridPoint { d: 400, n: 390 },
        GridPoint { d: 1600, n: 390 },
        GridPoint { d: 100, n: 26 },
        GridPoint { d: 100, n: 78 },
    ]
}

/// Default cross-section sizes for [`eigen_scaling_study`].
pub fn default_eigen_d_grid() -> Vec<usize> {
    vec![100, 300, 1000, 3000]
}

/// One grid point of the concentration study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationPoint {
    pub point: GridPoint,
    /// Median over replications of the spectral norm of
    /// `realized covariance - population covariance`.
    pub median_spectral: f64,
    /// Median Frobenius norm of the same error matrix.
    pub median_frobenius: f64,
    pub envelope: f64,
    /// `median_spectral / envelope`.
    pub ratio: f64,
    /// Bootstrap band for `median_spectral`.
    pub spectral_band: (f64, f64),
}

/// Result of [`concentration_study`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationStudy {
    pub points: Vec<ConcentrationPoint>,
    /// Largest over smallest observed/envelope ratio across the grid. Close
    /// to 1 would mean the envelope tracks the error exactly; the acceptance
    /// question is only that it stays bounded.
    pub ratio_spread: f64,
    /// Slope gap `d(ln frobenius)/d(ln d) - d(ln spectral)/d(ln d)` over the
    /// largest fixed-`n` leg of the grid, when one with at least two distinct
    /// `d` exists. Positive values mean the Frobenius norm grows strictly
    /// faster, so spectral-norm control is the sharper statement.
    pub frobenius_slope_gap: Option<f64>,
    pub theta: f64,
    pub phi: f64,
    pub replications: usize,
    pub master_seed: u64,
}

impl ConcentrationStudy {
    pub fn point(&self, d: usize, n: usize) -> Option<&ConcentrationPoint> {
        self.points.iter().find(|p| p.point.d == d && p.point.n == n)
    }

    /// Factor by which the median Frobenius error shrinks when `n` grows from
    /// `n_small` to `n_large` at fixed `d`. The Frobenius error contracts at
    /// the root-n rate at every aspect ratio, so quadrupling `n` should shrink
    /// it by about 2; the spectral error mixes in the `d/n` edge term, whose
    /// ratio depends on the aspect ratios themselves.
    pub fn shrink_factor(&self, d: usize, n_small: usize, n_large: usize) -> Option<f64> {
        let small = self.point(d, n_small)?;
        let large = self.point(d, n_large)?;
        Some(small.median_frobenius / large.median_frobenius)
    }
}

/// Group points by `n`, pick the group with the most distinct `d` (ties to
/// the largest `n`), and return it sorted by `d` when it has at least two.
fn largest_fixed_n_leg<T: Copy>(points: &[(GridPoint, T)]) -> Option<Vec<(f64, T)>> {
    let mut by_n: HashMap<usize, Vec<(usize, T)>> = HashMap::new();
    for (gp, value) in points {
        let group = by_n.entry(gp.n).or_default();
        if !group.iter().any(|(d, _)| *d == gp.d) {
            group.push((gp.d, *value));
        }
    }
    let (_, mut leg) = by_n
        .into_iter()
        .max_by_key(|(n, group)| (group.len(), *n))?;
    if leg.len() < 2 {
        return None;
    }
    leg.sort_by_key(|(d, _)| *d);
    Some(leg.into_iter().map(|(d, value)| ((d as f64).ln(), value)).collect())
}

/// Measure how the realized-covariance error of pure light-tailed noise
/// concentrates, against [`concentration_envelope`].
///
/// Panels are `sqrt(theta) A W` increments (no factors), whose population
/// covariance is exactly `theta` times the `phi`-Toeplitz matrix, so the
/// error matrix needs no plug-in estimate. `Lambda` in the envelope is
/// `theta lambda_max(Toeplitz)`.
pub fn concentration_study(
    grid: &[GridPoint],
    theta: f64,
    phi: f64,
    replications: usize,
    master_seed: u64,
) -> Result<ConcentrationStudy> {
    validate_study_inputs(replications, theta)?;
    if grid.is_empty() {
        return Err(Error::invalid("grid", "needs at least one point"));
    }
    let spec = IdiosyncraticSpec { kind: IdioKind::Wiener, theta, phi };
    spec.validate()?;
    let mut boot_rng = replication_stream(master_seed, BOOTSTRAP_STREAM);
    let mut points = Vec::with_capacity(grid.len());
    for (idx, gp) in grid.iter().enumerate() {
        if gp.d > CONCENTRATION_DIM_CAP {
            return Err(Error::DimensionCap { d: gp.d, cap: CONCENTRATION_DIM_CAP });
        }
        if gp.d < 2 || gp.n < 2 {
            return Err(Error::invalid("grid", format!("degenerate point {}x{}", gp.d, gp.n)));
        }
        let target = toeplitz(gp.d, phi) * theta;
        let big_lambda = theta * toeplitz_lambda_max(gp.d, phi);
        let samples: Vec<(f64, f64)> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = study_stream(master_seed, idx as u32, rep as u32);
                let z = idiosyncratic_increments(&spec, gp.n, gp.d, &mut rng)?;
                let err = realized_covariance(&z)? - &target;
                let spectral =
                    err.symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                Ok((spectral, err.norm()))
            })
            .collect::<Result<_>>()?;
        let spectral: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let frobenius: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let median_spectral = median(&spectral);
        let envelope = concentration_envelope(gp.d, gp.n, big_lambda);
        points.push(ConcentrationPoint {
            point: *gp,
            median_spectral,
            median_frobenius: median(&frobenius),
            envelope,
            ratio: median_spectral / envelope,
            spectral_band: bootstrap_median_band(&spectral, &mut boot_rng),
        });
    }
    let ratios: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    let ratio_spread = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let leg: Vec<(GridPoint, (f64, f64))> = points
        .iter()
        .map(|p| (p.point, (p.median_spectral, p.median_frobenius)))
        .collect();
    let frobenius_slope_gap = largest_fixed_n_leg(&leg).map(|leg| {
        let spec_pts: Vec<(f64, f64)> = leg.iter().map(|(x, v)| (*x, v.0.ln())).collect();
        let frob_pts: Vec<(f64, f64)> = leg.iter().map(|(x, v)| (*x, v.1.ln())).collect();
        ols_slope(&frob_pts) - ols_slope(&spec_pts)
    });
    Ok(ConcentrationStudy {
        points,
        ratio_spread,
        frobenius_slope_gap,
        theta,
        phi,
        replications,
        master_seed,
    })
}

/// One grid point of the jump-noise norm study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpPoint {
    pub point: GridPoint,
    /// Median over replications of the largest realized-covariance
    /// eigenvalue.
    pub median_norm: f64,
    pub envelope: f64,
    /// `median_norm / envelope`.
    pub ratio: f64,
    /// Bootstrap band for `median_norm`.
    pub band: (f64, f64),
}

/// Result of [`jump_norm_study`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpStudy {
    pub points: Vec<JumpPoint>,
    /// Growth exponent of the median norm in `d` over the largest fixed-`n`
    /// leg of the grid.
    pub slope_in_d: Option<f64>,
    /// Bootstrap band for `slope_in_d`.
    pub slope_band: Option<(f64, f64)>,
    pub alpha: f64,
    pub theta: f64,
    pub phi: f64,
    pub replications: usize,
    pub master_seed: u64,
}

impl JumpStudy {
    pub fn point(&self, d: usize, n: usize) -> Option<&JumpPoint> {
        self.points.iter().find(|p| p.point.d == d && p.point.n == n)
    }
}

/// Measure the spectral norm of the realized covariance of pure tempered
/// stable noise against [`jump_envelope`].
///
/// Only the leading eigenvalue is needed, so the spectrum is computed through
/// the smaller Gram side and the grid may go far beyond the dense cap.
pub fn jump_norm_study(
    grid: &[GridPoint],
    alpha: f64,
    theta: f64,
    phi: f64,
    replications: usize,
    master_seed: u64,
) -> Result<JumpStudy> {
    validate_study_inputs(replications, theta)?;
    if grid.is_empty() {
        return Err(Error::invalid("grid", "needs at least one point"));
    }
    let spec = IdiosyncraticSpec { kind: IdioKind::Nts { alpha }, theta, phi };
    spec.validate()?;
    let mut boot_rng = replication_stream(master_seed, BOOTSTRAP_STREAM);
    let mut points = Vec::with_capacity(grid.len());
    let mut samples_by_point = Vec::with_capacity(grid.len());
    for (idx, gp) in grid.iter().enumerate() {
        if gp.d < 2 || gp.n < 2 {
            return Err(Error::invalid("grid", format!("degenerate point {}x{}", gp.d, gp.n)));
        }
        let samples: Vec<f64> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = study_stream(master_seed, idx as u32, rep as u32);
                let z = idiosyncratic_increments(&spec, gp.n, gp.d, &mut rng)?;
                Ok(realized_spectrum(&z)?.eigenvalue(1))
            })
            .collect::<Result<_>>()?;
        let median_norm = median(&samples);
        let envelope = jump_envelope(gp.d, gp.n, theta);
        points.push(JumpPoint {
            point: *gp,
            median_norm,
            envelope,
            ratio: median_norm / envelope,
            band: bootstrap_median_band(&samples, &mut boot_rng),
        });
        samples_by_point.push(samples);
    }
    let leg: Vec<(GridPoint, usize)> =
        points.iter().enumerate().map(|(i, p)| (p.point, i)).collect();
    let (slope_in_d, slope_band) = match largest_fixed_n_leg(&leg) {
        Some(leg) => {
            let pts: Vec<(f64, f64)> = leg
                .iter()
                .map(|(x, i)| (*x, points[*i].median_norm.ln()))
                .collect();
            let log_d: Vec<f64> = leg.iter().map(|(x, _)| *x).collect();
            let per_point: Vec<Vec<f64>> =
                leg.iter().map(|(_, i)| samples_by_point[*i].clone()).collect();
            (
                Some(ols_slope(&pts)),
                Some(bootstrap_slope_band(&log_d, &per_point, &mut boot_rng)),
            )
        }
        None => (None, None),
    };
    Ok(JumpStudy {
        points,
        slope_in_d,
        slope_band,
        alpha,
        theta,
        phi,
        replications,
        master_seed,
    })
}

/// Result of [`eigen_scaling_study`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenScalingStudy {
    pub d_grid: Vec<usize>,
    pub n: usize,
    /// `medians[i][j-1]` is the median `j`-th realized-covariance eigenvalue
    /// at `d_grid[i]`.
    pub medians: Vec<[f64; TRACKED_EIGENVALUES]>,
    /// Growth exponent of each tracked eigenvalue in `d`.
    pub slopes: [f64; TRACKED_EIGENVALUES],
    /// Bootstrap bands for the slopes.
    pub slope_bands: [(f64, f64); TRACKED_EIGENVALUES],
    pub replications: usize,
    pub master_seed: u64,
}

/// Track how the leading realized eigenvalues of a full factor panel grow
/// with the cross-section size.
///
/// Panels use Brownian factors and Brownian idiosyncratic noise at default
/// scales, so eigenvalue growth reflects the loading-column sizes alone. The
/// first six pervasive-to-weak factors should reproduce their design
/// exponents; the seventh sits at the detectability boundary and grows
/// strictly slower.
pub fn eigen_scaling_study(
    d_grid: &[usize],
    n: usize,
    replications: usize,
    master_seed: u64,
) -> Result<EigenScalingStudy> {
    validate_study_inputs(replications, 1.0)?;
    if d_grid.len() < 2 {
        return Err(Error::invalid("d_grid", "needs at least two cross-section sizes"));
    }
    if !d_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("d_grid", "must be strictly increasing"));
    }
    if n < TRACKED_EIGENVALUES || d_grid[0] < TRACKED_EIGENVALUES {
        return Err(Error::invalid(
            "d_grid",
            format!("every panel needs at least {TRACKED_EIGENVALUES} eigenvalues"),
        ));
    }
    let mut medians = Vec::with_capacity(d_grid.len());
    let mut samples_by_point: Vec<[Vec<f64>; TRACKED_EIGENVALUES]> =
        Vec::with_capacity(d_grid.len());
    for (idx, &d) in d_grid.iter().enumerate() {
        let config = ModelConfig {
            n,
            d,
            factor_kind: FactorKind::Wiener,
            replications,
            master_seed,
            ..Default::default()
        };
        let reps: Vec<[f64; TRACKED_EIGENVALUES]> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let observations = crate::montecarlo::simulate_observations(
                    &config,
                    study_stream_id(idx as u32, rep as u32),
                )?;
                let spectrum = realized_spectrum(&observations)?;
                let mut values = [0.0; TRACKED_EIGENVALUES];
                for (j, slot) in values.iter_mut().enumerate() {
                    *slot = spectrum.eigenvalue(j + 1);
                }
                Ok(values)
            })
            .collect::<Result<_>>()?;
        let mut per_eigen: [Vec<f64>; TRACKED_EIGENVALUES] = Default::default();
        for rep_values in &reps {
            for (j, v) in rep_values.iter().enumerate() {
                per_eigen[j].push(*v);
            }
        }
        let mut point_medians = [0.0; TRACKED_EIGENVALUES];
        for (j, slot) in point_medians.iter_mut().enumerate() {
            *slot = median(&per_eigen[j]);
        }
        medians.push(point_medians);
        samples_by_point.push(per_eigen);
    }
    let log_d: Vec<f64> = d_grid.iter().map(|&d| (d as f64).ln()).collect();
    let mut slopes = [0.0; TRACKED_EIGENVALUES];
    let mut slope_bands = [(0.0, 0.0); TRACKED_EIGENVALUES];
    let mut boot_rng = replication_stream(master_seed, BOOTSTRAP_STREAM);
    for j in 0..TRACKED_EIGENVALUES {
        let pts: Vec<(f64, f64)> = log_d
            .iter()
            .zip(&medians)
            .map(|(&x, med)| (x, med[j].ln()))
            .collect();
        slopes[j] = ols_slope(&pts);
        let per_point: Vec<Vec<f64>> =
            samples_by_point.iter().map(|point| point[j].clone()).collect();
        slope_bands[j] = bootstrap_slope_band(&log_d, &per_point, &mut boot_rng);
    }
    Ok(EigenScalingStudy {
        d_grid: d_grid.to_vec(),
        n,
        medians,
        slopes,
        slope_bands,
        replications,
        master_seed,
    })
}
