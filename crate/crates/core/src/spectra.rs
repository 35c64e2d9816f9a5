//! Realized covariance, realized correlation, and their eigenvalue spectra.
//!
//! The realized covariance of a d-by-n increment panel `dY` is
//! `dY dY^T` (d-by-d). Its nonzero eigenvalues coincide with those of the
//! n-by-n Gram matrix `dY^T dY`, so spectra are always computed on the
//! smaller side; the estimation pipeline never materializes a d-by-d matrix
//! when `d > n`.

use crate::error::{Error, Result};
use crate::IncrementMatrix;
use nalgebra::{DMatrix, DVector};

/// Largest cross-section for which a dense d-by-d matrix may be formed.
pub const DEFAULT_DENSE_CAP: usize = 4000;

/// Relative threshold below which eigenvalues count as roundoff. Symmetric:
/// a value in `(-tol, tol)` times the largest eigenvalue is numerically
/// indistinguishable from zero either way, and tiny positive dust must not
/// masquerade as rank in ratio statistics.
const CLAMP_REL_TOL: f64 = 1e-10;

/// Relative tolerance on the trace identity of correlation spectra.
const CORRELATION_TRACE_REL_TOL: f64 = 1e-6;

/// Which matrix a spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Covariance,
    Correlation,
}

/// Descending, nonnegative eigenvalues of a realized d-by-d matrix.
///
/// Only the eigenvalues that can be nonzero are stored (at most
/// `min(d, n)` for a rank-deficient realized matrix); the spectrum is
/// logically padded with zeros out to length `d`. Accessors apply the
/// padding, so estimators never distinguish stored from padded zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    d: usize,
    n: usize,
    source: SpectrumSource,
    clamped_mass: f64,
}

impl Spectrum {
    /// Build a spectrum from raw eigenvalues (any order). Values are sorted
    /// descending and roundoff (anything within `1e-10` of zero relative to
    /// the largest eigenvalue, either sign) is clamped to exact zero. A
    /// negative value beyond that tolerance is an error, as is a correlation
    /// spectrum whose trace strays from `d`.
    pub fn from_values(
        mut values: Vec<f64>,
        d: usize,
        n: usize,
        source: SpectrumSource,
    ) -> Result<Self> {
        if values.len() > d {
            return Err(Error::invalid(
                "values",
                format!("{} eigenvalues exceed the dimension d = {d}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "eigenvalues must be finite"));
        }
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let max = values.first().copied().unwrap_or(0.0);
        if max < 0.0 {
            return Err(Error::invalid("values", "entire spectrum is negative"));
        }
        let mut clamped_mass = 0.0;
        for v in values.iter_mut() {
            if *v < -CLAMP_REL_TOL * max {
                return Err(Error::invalid(
                    "values",
                    format!("eigenvalue {v} is too negative for roundoff (max {max})"),
                ));
            }
            if v.abs() <= CLAMP_REL_TOL * max {
                clamped_mass += v.abs();
                *v = 0.0;
            }
        }
        if source == SpectrumSource::Correlation {
            let trace: f64 = values.iter().sum();
            if (trace - d as f64).abs() > CORRELATION_TRACE_REL_TOL * d as f64 {
                return Err(Error::invalid(
                    "values",
                    format!("correlation spectrum trace {trace} differs from d = {d}"),
                ));
            }
        }
        Ok(Spectrum { values, d, n, source, clamped_mass })
    }

    /// The j-th largest eigenvalue, 1-indexed, zero beyond the stored part.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        assert!(j >= 1, "eigenvalue ranks are 1-indexed");
        self.values.get(j - 1).copied().unwrap_or(0.0)
    }

    /// Stored (possibly nonzero) eigenvalues, descending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cross-section dimension: the padded spectrum length.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of observation intervals behind the realized matrix.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    /// Total magnitude of the roundoff that was clamped away.
    pub fn clamped_mass(&self) -> f64 {
        self.clamped_mass
    }

    /// Sum over the full padded spectrum (equals the matrix trace).
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Median of the padded spectrum: all `d` eigenvalues, zeros included.
    pub fn padded_median(&self) -> f64 {
        let at = |idx: usize| self.values.get(idx).copied().unwrap_or(0.0);
        if self.d % 2 == 1 {
            at(self.d / 2)
        } else {
            0.5 * (at(self.d / 2 - 1) + at(self.d / 2))
        }
    }
}

/// Dense realized covariance `dY dY^T`. Refuses to materialize the d-by-d
/// result above `cap`; prefer [`realized_spectrum`] in estimation pipelines.
pub fn realized_covariance_with_cap(m: &IncrementMatrix, cap: usize) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    if d > cap {
        return Err(Error::DimensionCap { d, cap });
    }
    let mut g = m * m.transpose();
    symmetrize(&mut g);
    Ok(g)
}

/// [`realized_covariance_with_cap`] at the default cap of 4000.
pub fn realized_covariance(m: &IncrementMatrix) -> Result<DMatrix<f64>> {
    realized_covariance_with_cap(m, DEFAULT_DENSE_CAP)
}

/// Realized variance of each component: diagonal of the realized covariance.
pub fn realized_variances(m: &IncrementMatrix) -> DVector<f64> {
    DVector::from_iterator(
        m.nrows(),
        m.row_iter().map(|row| row.iter().map(|x| x * x).sum::<f64>()),
    )
}

/// Eigenvalue spectrum of the realized covariance, computed on whichever
/// side of the Gram identity is smaller.
pub fn realized_spectrum(m: &IncrementMatrix) -> Result<Spectrum> {
    panel_spectrum(m, SpectrumSource::Covariance)
}

/// Eigenvalue spectrum of the realized correlation matrix
/// `D^(-1/2) [Y,Y] D^(-1/2)`, computed by scaling each component's
/// increments by its realized standard deviation before the Gram step.
pub fn realized_correlation_spectrum(m: &IncrementMatrix) -> Result<Spectrum> {
    let variances = realized_variances(m);
    for (index, v) in variances.iter().enumerate() {
        if !v.is_finite() || *v <= 0.0 {
            return Err(Error::DegenerateComponent { index });
        }
    }
    let mut scaled = m.clone();
    for (mut row, v) in scaled.row_iter_mut().zip(variances.iter()) {
        row /= v.sqrt();
    }
    panel_spectrum(&scaled, SpectrumSource::Correlation)
}

fn panel_spectrum(m: &IncrementMatrix, source: SpectrumSource) -> Result<Spectrum> {
    let (d, n) = (m.nrows(), m.ncols());
    if d == 0 || n == 0 {
        return Err(Error::invalid("panel", "increment panel must be nonempty"));
    }
    let mut gram = if d <= n {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    symmetrize(&mut gram);
    let eigen = gram.symmetric_eigenvalues();
    Spectrum::from_values(eigen.iter().copied().collect(), d, n, source)
}

fn symmetrize(g: &mut DMatrix<f64>) {
    let k = g.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            let avg = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = avg;
            g[(j, i)] = avg;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replication_stream;
    use rand::RngExt;
    use rand_distr::StandardNormal;

    fn random_panel(d: usize, n: usize, stream: u64) -> IncrementMatrix {
        let mut rng = replication_stream(61, stream);
        IncrementMatrix::from_fn(d, n, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn covariance_by_hand() {
        let m = IncrementMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let cov = realized_covariance(&m).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[5.0, 11.0, 11.0, 25.0]);
        assert_eq!(cov, expected);
    }

    #[test]
    fn variances_by_hand() {
        let m = IncrementMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let v = realized_variances(&m);
        assert_eq!(v.as_slice(), &[5.0, 25.0]);
    }

    #[test]
    fn spectrum_of_diagonal_panel() {
        let m = IncrementMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let s = realized_spectrum(&m).unwrap();
        assert_eq!(s.values().len(), 2);
        assert!((s.eigenvalue(1) - 4.0).abs() < 1e-12);
        assert!((s.eigenvalue(2) - 1.0).abs() < 1e-12);
        assert_eq!(s.eigenvalue(3), 0.0);
    }

    /// Both Gram routes agree with the dense covariance spectrum.
    #[test]
    fn gram_routes_agree_with_dense() {
        for (d, n, stream) in [(7usize, 13usize, 0u64), (13, 7, 1), (5, 5, 2)] {
            let m = random_panel(d, n, stream);
            let s = realized_spectrum(&m).unwrap();
            let dense = realized_covariance(&m).unwrap();
            let mut direct: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
            direct.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let scale = direct[0].abs().max(1.0);
            for j in 1..=d.min(n) {
                assert!(
                    (s.eigenvalue(j) - direct[j - 1]).abs() <= 1e-10 * scale,
                    "({d},{n}) rank {j}: {} vs {}",
                    s.eigenvalue(j),
                    direct[j - 1]
                );
            }
        }
    }

    #[test]
    fn correlation_trace_equals_dimension() {
        for (d, n, stream) in [(9usize, 4usize, 3u64), (4, 9, 4)] {
            let m = random_panel(d, n, stream);
            let s = realized_correlation_spectrum(&m).unwrap();
            assert!((s.sum() - d as f64).abs() < 1e-6 * d as f64);
            assert_eq!(s.source(), SpectrumSource::Correlation);
        }
    }

    /// Rescaling any component leaves the correlation spectrum unchanged.
    #[test]
    fn correlation_is_scale_invariant() {
        let m = random_panel(6, 11, 5);
        let base = realized_correlation_spectrum(&m).unwrap();
        let mut scaled = m.clone();
        for (i, factor) in [(0usize, 100.0), (3, 1e-3), (5, 7.5)] {
            let mut row = scaled.row_mut(i);
            row *= factor;
        }
        let s = realized_correlation_spectrum(&scaled).unwrap();
        for j in 1..=6 {
            assert!(
                (s.eigenvalue(j) - base.eigenvalue(j)).abs() <= 1e-10 * base.eigenvalue(1),
                "rank {j}"
            );
        }
    }

    #[test]
    fn zero_component_is_degenerate_for_correlation() {
        let mut m = random_panel(5, 8, 6);
        m.row_mut(3).fill(0.0);
        match realized_correlation_spectrum(&m) {
            Err(Error::DegenerateComponent { index }) => assert_eq!(index, 3),
            other => panic!("expected degenerate component, got {other:?}"),
        }
    }

    #[test]
    fn dense_cap_is_enforced() {
        let m = IncrementMatrix::zeros(DEFAULT_DENSE_CAP + 1, 2);
        assert!(matches!(
            realized_covariance(&m),
            Err(Error::DimensionCap { d, cap }) if d == DEFAULT_DENSE_CAP + 1 && cap == DEFAULT_DENSE_CAP
        ));
        assert!(realized_covariance_with_cap(&m, DEFAULT_DENSE_CAP + 1).is_ok());
    }

    #[test]
    fn padded_median_counts_zeros() {
        let s = Spectrum::from_values(vec![3.0, 1.0], 4, 2, SpectrumSource::Covariance).unwrap();
        assert_eq!(s.padded_median(), 0.5);
        let s = Spectrum::from_values(vec![5.0, 2.0, 1.0], 3, 3, SpectrumSource::Covariance).unwrap();
        assert_eq!(s.padded_median(), 2.0);
        let s = Spectrum::from_values(vec![4.0, 2.0, 1.0, 1.0], 7, 7, SpectrumSource::Covariance).unwrap();
        assert_eq!(s.padded_median(), 1.0);
    }

    #[test]
    fn construction_clamps_roundoff_but_rejects_real_negatives() {
        let s = Spectrum::from_values(vec![1.0, -1e-16], 2, 2, SpectrumSource::Covariance).unwrap();
        assert_eq!(s.eigenvalue(2), 0.0);
        assert!(s.clamped_mass() > 0.0);
        assert!(Spectrum::from_values(vec![1.0, -0.5], 2, 2, SpectrumSource::Covariance).is_err());
        assert!(Spectrum::from_values(vec![1.0; 3], 2, 2, SpectrumSource::Covariance).is_err());
    }
}
