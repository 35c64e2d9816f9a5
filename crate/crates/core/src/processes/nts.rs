//! Normal tempered stable (NTS) increment panels.

use crate::error::Result;
use crate::processes::pts::{sample_pts, PtsParams};
use crate::IncrementMatrix;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

/// Increments of a d-dimensional NTS Levy process over `n` intervals of
/// length `1/n`, returned as a d-by-n panel.
///
/// Components are independent: every entry draws its own subordinator
/// `V ~ PTS(alpha, c/n, lambda)` and equals `sqrt(V) zeta` with `zeta`
/// standard normal, so jumps hit one component at a time and cross-sectional
/// dependence enters only through the mixing matrix applied afterwards. The
/// intensity scaling `c/n` (unit-moment `c`, `lambda = 1 - alpha`) makes each
/// component's expected quadratic variation over the unit interval one.
pub fn nts_increments<R: Rng + ?Sized>(
    alpha: f64,
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<IncrementMatrix> {
    let unit = PtsParams::unit_moment(alpha)?;
    let per_interval = unit.with_intensity(unit.c / n as f64);
    let mut m = IncrementMatrix::zeros(d, n);
    for x in m.iter_mut() {
        let v = sample_pts(&per_interval, rng);
        *x = v.sqrt() * rng.sample::<f64, _>(StandardNormal);
    }
    Ok(m)
}

/// NTS panel with the subordinator draws supplied by the caller.
///
/// Entry `(i, j)` is `sqrt(mixing[(i, j)]) zeta_ij`. Exposed so tests and
/// variance experiments can pin the mixing draws; a zero entry forces a zero
/// increment.
pub fn nts_increments_with_mixing<R: Rng + ?Sized>(
    mixing: &IncrementMatrix,
    rng: &mut R,
) -> IncrementMatrix {
    let mut m = IncrementMatrix::zeros(mixing.nrows(), mixing.ncols());
    for (x, &v) in m.iter_mut().zip(mixing.iter()) {
        *x = v.sqrt() * rng.sample::<f64, _>(StandardNormal);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replication_stream;

    #[test]
    fn shape_and_alpha_validation() {
        let mut rng = replication_stream(21, 0);
        let m = nts_increments(0.5, 7, 3, &mut rng).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (3, 7));
        assert!(nts_increments(1.0, 7, 3, &mut rng).is_err());
    }

    #[test]
    fn zero_mixing_forces_zero_entries() {
        let mut rng = replication_stream(22, 0);
        let mixing = IncrementMatrix::from_row_slice(2, 2, &[1.0, 0.0, 4.0, 9.0]);
        let m = nts_increments_with_mixing(&mixing, &mut rng);
        assert_eq!(m[(0, 1)], 0.0);
        assert!(m[(0, 0)] != 0.0 && m[(1, 0)] != 0.0 && m[(1, 1)] != 0.0);
    }

    /// Unit expected quadratic variation per component: E[sum_i dL_i^2] = 1.
    #[test]
    fn component_quadratic_variation_is_one() {
        for alpha in [0.25, 0.75] {
            let mut rng = replication_stream(23, (alpha * 100.0) as u64);
            let (n, reps) = (39, 4000);
            let mut qvs = Vec::with_capacity(reps);
            for _ in 0..reps {
                let m = nts_increments(alpha, n, 1, &mut rng).unwrap();
                qvs.push(m.row(0).iter().map(|x| x * x).sum::<f64>());
            }
            let mean = qvs.iter().sum::<f64>() / reps as f64;
            let var = qvs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / reps as f64;
            let se = (var / reps as f64).sqrt();
            assert!(
                (mean - 1.0).abs() < 4.0 * se,
                "alpha={alpha}: mean QV {mean}, se {se}"
            );
        }
    }

    /// Per-entry subordination: squared increments are uncorrelated across
    /// components, while each entry keeps the mixed fourth moment
    /// E[dL^4] = 3 E[V^2].
    #[test]
    fn independent_mixing_moments() {
        let alpha = 0.5;
        let n = 10;
        let unit = PtsParams::unit_moment(alpha).unwrap();
        let v = unit.with_intensity(unit.c / n as f64);
        let second_moment = v.variance() + v.mean() * v.mean();
        let mut rng = replication_stream(24, 0);
        let reps = 20_000;
        let mut sq_pairs = Vec::with_capacity(reps * n);
        let mut fourths = Vec::with_capacity(2 * reps * n);
        for _ in 0..reps {
            let m = nts_increments(alpha, n, 2, &mut rng).unwrap();
            for i in 0..n {
                let (x, y) = (m[(0, i)] * m[(0, i)], m[(1, i)] * m[(1, i)]);
                sq_pairs.push((x, y));
                fourths.push(x * x);
                fourths.push(y * y);
            }
        }
        let count = sq_pairs.len() as f64;
        let mx = sq_pairs.iter().map(|p| p.0).sum::<f64>() / count;
        let my = sq_pairs.iter().map(|p| p.1).sum::<f64>() / count;
        let centred: Vec<f64> = sq_pairs.iter().map(|&(x, y)| (x - mx) * (y - my)).collect();
        let cov = centred.iter().sum::<f64>() / count;
        let cov_var = centred.iter().map(|c| (c - cov) * (c - cov)).sum::<f64>() / count;
        let cov_se = (cov_var / count).sqrt();
        assert!(
            cov.abs() < 4.0 * cov_se,
            "cross-component squared covariance {cov} (se {cov_se})"
        );

        let fcount = fourths.len() as f64;
        let m4 = fourths.iter().sum::<f64>() / fcount;
        let m4_var = fourths.iter().map(|f| (f - m4) * (f - m4)).sum::<f64>() / fcount;
        let m4_se = (m4_var / fcount).sqrt();
        let target = 3.0 * second_moment;
        assert!(
            (m4 - target).abs() < 4.0 * m4_se,
            "fourth moment {m4} vs {target} (se {m4_se})"
        );
    }
}
