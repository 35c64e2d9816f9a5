//! Canonical experiment presets.
//!
//! Eight table presets cross factor dynamics (stochastic volatility or
//! Brownian) with idiosyncratic noise (Brownian or tempered stable at three
//! stability indices) over a common `(n, d)` grid. Four sweep presets vary
//! one tuning or model knob at the reference panel size `n = 78, d = 500`.

use crate::montecarlo::{FactorKind, ModelConfig, SweepParameter};
use crate::processes::{IdioKind, IdiosyncraticSpec};

/// Observation counts of the table grid.
pub const TABLE_GRID_N: [usize; 3] = [26, 78, 390];
/// Cross-section sizes of the table grid.
pub const TABLE_GRID_D: [usize; 4] = [100, 500, 1000, 1500];

pub const TABLE_PRESETS: [&str; 8] =
    ["table1", "table2", "table3", "table4", "table5", "table6", "table7", "table8"];
pub const SWEEP_PRESETS: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

/// A table experiment: one model evaluated on the full `(n, d)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePreset {
    pub id: &'static str,
    /// Model shared by all cells; `n` and `d` are overwritten per cell.
    pub base: ModelConfig,
    /// `(n, d)` cells in row order: `n` varies slowest.
    pub grid: Vec<(usize, usize)>,
}

impl TablePreset {
    /// One full configuration per grid cell.
    pub fn cell_configs(&self) -> Vec<ModelConfig> {
        self.grid
            .iter()
            .map(|&(n, d)| ModelConfig { n, d, ..self.base.clone() })
            .collect()
    }
}

/// A sweep experiment: one knob varied over a fixed value list.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPreset {
    pub id: &'static str,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub base: ModelConfig,
}

fn full_grid() -> Vec<(usize, usize)> {
    let mut grid = Vec::with_capacity(TABLE_GRID_N.len() * TABLE_GRID_D.len());
    for n in TABLE_GRID_N {
        for d in TABLE_GRID_D {
            grid.push((n, d));
        }
    }
    grid
}

fn base_model(factor_kind: FactorKind, idio_kind: IdioKind) -> ModelConfig {
    ModelConfig {
        factor_kind,
        idio: IdiosyncraticSpec { kind: idio_kind, ..Default::default() },
        ..Default::default()
    }
}

/// Look up a table preset by id (`table1` through `table8`).
pub fn table_preset(id: &str) -> Option<TablePreset> {
    let (factor_kind, idio_kind) = match id {
        "table1" => (FactorKind::Sv, IdioKind::Wiener),
        "table2" => (FactorKind::Sv, IdioKind::Nts { alpha: 0.25 }),
        "table3" => (FactorKind::Sv, IdioKind::Nts { alpha: 0.5 }),
        "table4" => (FactorKind::Sv, IdioKind::Nts { alpha: 0.75 }),
        "table5" => (FactorKind::Wiener, IdioKind::Wiener),
        "table6" => (FactorKind::Wiener, IdioKind::Nts { alpha: 0.25 }),
        "table7" => (FactorKind::Wiener, IdioKind::Nts { alpha: 0.5 }),
        "table8" => (FactorKind::Wiener, IdioKind::Nts { alpha: 0.75 }),
        _ => return None,
    };
    let id = TABLE_PRESETS.iter().find(|t| **t == id)?;
    Some(TablePreset { id, base: base_model(factor_kind, idio_kind), grid: full_grid() })
}

/// Look up a sweep preset by id (`fig1` through `fig4`).
pub fn sweep_preset(id: &str) -> Option<SweepPreset> {
    let light_noise = base_model(FactorKind::Sv, IdioKind::Wiener);
    let heavy_noise = base_model(FactorKind::Sv, IdioKind::Nts { alpha: 0.75 });
    match id {
        "fig1" => Some(SweepPreset {
            id: "fig1",
            parameter: SweepParameter::GScale,
            values: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            base: light_noise,
        }),
        "fig2" => Some(SweepPreset {
            id: "fig2",
            parameter: SweepParameter::Gamma,
            values: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5],
            base: light_noise,
        }),
        "fig3" => Some(SweepPreset {
            id: "fig3",
            parameter: SweepParameter::Theta,
            values: vec![0.5, 1.0, 1.5, 2.0, 3.0],
            base: heavy_noise,
        }),
        "fig4" => Some(SweepPreset {
            id: "fig4",
            parameter: SweepParameter::Phi,
            values: vec![0.0, 0.1, 0.3, 0.5, 0.7, 0.9],
            base: heavy_noise,
        }),
        _ => None,
    }
}
