//! Stochastic ingredients of the simulated factor panel.
//!
//! The observed panel is `dY = beta dF + dZ`: sparse loadings `beta` on a
//! small set of factors `F` (stochastic-volatility or Wiener), plus
//! idiosyncratic noise `Z` built from Wiener or normal tempered stable
//! increments mixed across the cross-section.

pub mod idio;
pub mod loadings;
pub mod nts;
pub mod pts;
pub mod stable;
pub mod sv;

pub use idio::{ar1_mix_columns, idiosyncratic_increments, IdioKind, IdiosyncraticSpec};
pub use loadings::{generate_loadings, ColumnSize, LoadingSpec, FACTOR_COUNT};
pub use nts::{nts_increments, nts_increments_with_mixing};
pub use pts::{sample_pts, sample_pts_counted, PtsParams};
pub use stable::sample_one_sided_stable;
pub use sv::{sample_ou_initial, simulate_sv_factors, wiener_factor_increments, SvFactorParams};

use crate::error::{Error, Result};
use crate::IncrementMatrix;
use nalgebra::DMatrix;

/// Assemble observed increments `dY = beta dF + dZ`.
///
/// `beta` is d-by-r, `factor_increments` r-by-n, `idio_increments` d-by-n.
pub fn assemble_observations(
    beta: &DMatrix<f64>,
    factor_increments: &IncrementMatrix,
    idio_increments: &IncrementMatrix,
) -> Result<IncrementMatrix> {
    if beta.ncols() != factor_increments.nrows() {
        return Err(Error::ShapeMismatch {
            context: "assemble_observations",
            expected: format!("factor increments with {} rows", beta.ncols()),
            actual: format!("{} rows", factor_increments.nrows()),
        });
    }
    if beta.nrows() != idio_increments.nrows()
        || factor_increments.ncols() != idio_increments.ncols()
    {
        return Err(Error::ShapeMismatch {
            context: "assemble_observations",
            expected: format!("idiosyncratic panel {}x{}", beta.nrows(), factor_increments.ncols()),
            actual: format!("{}x{}", idio_increments.nrows(), idio_increments.ncols()),
        });
    }
    let mut out = idio_increments.clone();
    out.gemm(1.0, beta, factor_increments, 1.0);
    Ok(out)
}
