//! Sparse factor loadings with per-column strength exponents.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

/// Number of factor columns in the reference design.
pub const FACTOR_COUNT: usize = 9;

/// How many rows of a loading column are nonzero, as a function of `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnSize {
    /// `round(d^p)` nonzero rows.
    Power(f64),
    /// `round(ln d)` nonzero rows.
    LogDim,
}

impl ColumnSize {
    /// Nearest-integer count, ties away from zero.
    fn count(&self, d: usize) -> usize {
        let raw = match self {
            ColumnSize::Power(p) => (d as f64).powf(*p),
            ColumnSize::LogDim => (d as f64).ln(),
        };
        raw.round() as usize
    }
}

/// Specification of a d-by-9 loading matrix: each column `j` places
/// `sizes[j]` nonzero entries, drawn i.i.d. `N(entry_mean, entry_sd^2)`, at
/// uniformly chosen rows without replacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadingSpec {
    pub d: usize,
    pub sizes: [ColumnSize; FACTOR_COUNT],
    pub entry_mean: f64,
    pub entry_sd: f64,
}

impl LoadingSpec {
    /// The reference design: column strengths d, d^0.85, d^0.75, d^(2/3),
    /// d^(2/3), d^0.6, d^(1/3), d^(1/4), ln d, entries N(1, 1). The first
    /// six columns are the strong factors (exponent above 1/2); the last
    /// three sit below the detection threshold.
    pub fn reference(d: usize) -> Self {
        LoadingSpec {
            d,
            sizes: [
                ColumnSize::Power(1.0),
                ColumnSize::Power(0.85),
                ColumnSize::Power(0.75),
                ColumnSize::Power(2.0 / 3.0),
                ColumnSize::Power(2.0 / 3.0),
                ColumnSize::Power(0.6),
                ColumnSize::Power(1.0 / 3.0),
                ColumnSize::Power(0.25),
                ColumnSize::LogDim,
            ],
            entry_mean: 1.0,
            entry_sd: 1.0,
        }
    }

    /// Per-column nonzero counts, validated against the dimension.
    pub fn column_counts(&self) -> Result<[usize; FACTOR_COUNT]> {
        let mut counts = [0usize; FACTOR_COUNT];
        for (j, size) in self.sizes.iter().enumerate() {
            let c = size.count(self.d);
            if c == 0 {
                return Err(Error::invalid(
                    "sizes",
                    format!("column {j} rounds to zero nonzero rows at d = {}", self.d),
                ));
            }
            if c > self.d {
                return Err(Error::invalid(
                    "sizes",
                    format!("column {j} wants {c} nonzero rows but d = {}", self.d),
                ));
            }
            counts[j] = c;
        }
        Ok(counts)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("d", "dimension must be positive"));
        }
        if !self.entry_sd.is_finite() || self.entry_sd < 0.0 {
            return Err(Error::invalid("entry_sd", "must be nonnegative and finite"));
        }
        self.column_counts().map(|_| ())
    }
}

/// Draw a loading matrix according to `spec`.
pub fn generate_loadings<R: Rng + ?Sized>(spec: &LoadingSpec, rng: &mut R) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let counts = spec.column_counts()?;
    let mut beta = DMatrix::zeros(spec.d, FACTOR_COUNT);
    for (j, &c) in counts.iter().enumerate() {
        let rows = rand::seq::index::sample(rng, spec.d, c);
        for row in rows {
            beta[(row, j)] =
                spec.entry_mean + spec.entry_sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replication_stream;

    #[test]
    fn reference_counts_at_d_100() {
        let counts = LoadingSpec::reference(100).column_counts().unwrap();
        assert_eq!(counts, [100, 50, 32, 22, 22, 16, 5, 3, 5]);
    }

    #[test]
    fn reference_counts_at_d_500() {
        let counts = LoadingSpec::reference(500).column_counts().unwrap();
        assert_eq!(counts, [500, 197, 106, 63, 63, 42, 8, 5, 6]);
    }

    #[test]
    fn generated_matrix_matches_counts() {
        let spec = LoadingSpec::reference(100);
        let mut rng = replication_stream(41, 0);
        let beta = generate_loadings(&spec, &mut rng).unwrap();
        assert_eq!((beta.nrows(), beta.ncols()), (100, FACTOR_COUNT));
        let counts = spec.column_counts().unwrap();
        for (j, &count) in counts.iter().enumerate() {
            let nonzeros = beta.column(j).iter().filter(|&&x| x != 0.0).count();
            assert_eq!(nonzeros, count, "column {j}");
        }
    }

    #[test]
    fn oversized_column_is_rejected() {
        let mut spec = LoadingSpec::reference(10);
        spec.sizes[3] = ColumnSize::Power(2.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn nonzero_entries_center_on_entry_mean() {
        let spec = LoadingSpec::reference(5000);
        let mut rng = replication_stream(42, 0);
        let beta = generate_loadings(&spec, &mut rng).unwrap();
        let full: Vec<f64> = beta.column(0).iter().copied().collect();
        let mean = full.iter().sum::<f64>() / full.len() as f64;
        let se = 1.0 / (full.len() as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "entry mean {mean}");
    }

    #[test]
    fn positions_are_roughly_uniform() {
        // Row 0 should carry a column-7 loading with frequency d_8 / d.
        let spec = LoadingSpec::reference(100);
        let p = spec.column_counts().unwrap()[7] as f64 / 100.0;
        let mut rng = replication_stream(43, 0);
        let reps = 4000;
        let mut hits = 0usize;
        for _ in 0..reps {
            let beta = generate_loadings(&spec, &mut rng).unwrap();
            if beta[(0, 7)] != 0.0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / reps as f64;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * se, "freq {freq} vs {p}");
    }
}
