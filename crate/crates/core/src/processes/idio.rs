//! Idiosyncratic noise: scaled, cross-sectionally mixed Levy increments.

use crate::error::{Error, Result};
use crate::processes::nts::nts_increments;
use crate::IncrementMatrix;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Base Levy process driving the idiosyncratic part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IdioKind {
    /// Standard Brownian increments.
    Wiener,
    /// Normal tempered stable increments with stability index `alpha`.
    Nts { alpha: f64 },
}

/// Idiosyncratic model `Z = sqrt(theta) A L`: `L` is a d-dimensional Levy
/// process with unit expected quadratic variation per component, and `A`
/// mixes the cross-section so that `A A^T` is the Toeplitz matrix with
/// entries `phi^|j-k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdiosyncraticSpec {
    pub kind: IdioKind,
    /// Noise scale. Zero is admitted to switch the noise off entirely,
    /// which exposes the factor rank exactly.
    pub theta: f64,
    /// Cross-sectional mixing weight, in [0, 1).
    pub phi: f64,
}

impl Default for IdiosyncraticSpec {
    fn default() -> Self {
        IdiosyncraticSpec { kind: IdioKind::Wiener, theta: 1.5, phi: 0.1 }
    }
}

impl IdiosyncraticSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() || self.theta < 0.0 {
            return Err(Error::invalid(
                "theta",
                format!("must be nonnegative and finite, got {}", self.theta),
            ));
        }
        if !(self.phi >= 0.0 && self.phi < 1.0) {
            return Err(Error::invalid("phi", format!("must lie in [0, 1), got {}", self.phi)));
        }
        if let IdioKind::Nts { alpha } = self.kind {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
            }
        }
        Ok(())
    }
}

/// Apply the mixing map `A` to every column of `m` in place, where `A`
/// realizes the stationary AR(1) recursion
///
/// ```text
/// X_1 = x_1,   X_j = phi X_(j-1) + sqrt(1 - phi^2) x_j,
/// ```
///
/// so that `A A^T` has entries `phi^|j-k|`. The recursion commutes with any
/// scalar factor on a column, which is why it can be applied directly to
/// subordinated Gaussian columns.
pub fn ar1_mix_columns(m: &mut IncrementMatrix, phi: f64) {
    if phi == 0.0 {
        return;
    }
    let s = (1.0 - phi * phi).sqrt();
    let d = m.nrows();
    for mut col in m.column_iter_mut() {
        for j in 1..d {
            col[j] = phi * col[j - 1] + s * col[j];
        }
    }
}

/// Generate the d-by-n panel of idiosyncratic increments over `n` intervals.
pub fn idiosyncratic_increments<R: Rng + ?Sized>(
    spec: &IdiosyncraticSpec,
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<IncrementMatrix> {
    spec.validate()?;
    if n == 0 || d == 0 {
        return Err(Error::invalid("n", "panel dimensions must be positive"));
    }
    let mut base = match spec.kind {
        IdioKind::Wiener => {
            let sd = (1.0 / n as f64).sqrt();
            IncrementMatrix::from_fn(d, n, |_, _| sd * rng.sample::<f64, _>(StandardNormal))
        }
        IdioKind::Nts { alpha } => nts_increments(alpha, n, d, rng)?,
    };
    ar1_mix_columns(&mut base, spec.phi);
    base *= spec.theta.sqrt();
    Ok(base)
}
