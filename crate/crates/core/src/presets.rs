//! Parameter tables of the N = M = 7 benchmark runs (peak Rabi amplitudes in
//! units of `1/T`, real dipoles, zero phases, target `|f₇⟩`).
//!
//! The matching system uses `μ_kj = Ω̃_Skj` and `μ₀ₖ = 1`, i.e. every Stokes
//! pulse has peak field `Ẽ_Sk = 2`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::design::TargetSpec;
use crate::model::{FieldSet, SystemSpec};
use crate::C64;

pub const FIG2_PUMP: [f64; 7] = [60.0, 90.0, 60.0, 120.0, 90.0, 99.0, 135.0];

/// Row `k` holds `Ω̃_Sk1..Ω̃_Sk7`.
pub const FIG2_STOKES: [[f64; 7]; 7] = [
    [90.0, 15.0, 0.0, 150.0, 36.0, 18.0, 60.0],
    [90.0, 57.0, 24.0, 45.0, 69.0, 78.0, 90.0],
    [90.0, 75.0, 39.0, 36.0, 39.0, 78.0, 60.0],
    [60.0, 18.0, 24.0, 75.0, 66.0, 48.0, 120.0],
    [39.0, 27.0, 93.0, 15.0, 66.0, 78.0, 90.0],
    [93.0, 69.0, 18.0, 87.0, 72.0, 78.0, 99.0],
    [36.0, 54.0, 48.0, 57.0, 96.0, 78.0, 135.0],
];

/// `(k, j, Ω̃_Skj)` substitutions, one-based, applied on top of the base table.
pub const FIG3_STOKES_OVERRIDES: [(usize, usize, f64); 9] = [
    (1, 4, 39.0),
    (2, 5, 39.0),
    (2, 6, 48.0),
    (3, 2, 45.0),
    (4, 3, 81.0),
    (5, 2, 57.0),
    (5, 6, 48.0),
    (6, 2, 39.0),
    (7, 2, 24.0),
];

/// Leakage bounds quoted with each run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkBounds {
    pub max_p_x: f64,
    pub max_p_y: f64,
    pub min_final_p_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn bounds(self) -> BenchmarkBounds {
        let (max_p_x, max_p_y) = match self {
            Figure::Fig2 | Figure::Fig5 => (0.003, 0.0005),
            Figure::Fig3 => (0.002, 0.0003),
            Figure::Fig4 => (0.0003, 0.0001),
        };
        BenchmarkBounds {
            max_p_x,
            max_p_y,
            min_final_p_f: 0.99,
        }
    }

    /// The run's peak Rabi table, taken verbatim.
    pub fn fields(self) -> FieldSet {
        let mut pump = FIG2_PUMP;
        let mut stokes = FIG2_STOKES;
        match self {
            Figure::Fig2 => {}
            Figure::Fig3 => {
                for (k, j, v) in FIG3_STOKES_OVERRIDES {
                    stokes[k - 1][j - 1] = v;
                }
            }
            Figure::Fig4 => {
                stokes[0][6] = 0.0;
                stokes[1][6] = 0.0;
                pump[0] = 0.0;
                pump[1] = 0.0;
            }
            Figure::Fig5 => {
                for row in stokes.iter_mut() {
                    row[0] = 0.0;
                    row[1] = 0.0;
                }
            }
        }
        table_fields(&pump, &stokes)
    }

    /// System whose dipoles equal the Stokes table (see module docs).
    pub fn system(self) -> SystemSpec {
        system_for(&self.fields())
    }

    pub fn target(self) -> TargetSpec {
        TargetSpec::last(7)
    }
}

/// Builds a width-1 field set from real tables.
pub fn table_fields(pump: &[f64], stokes: &[[f64; 7]]) -> FieldSet {
    let n = pump.len();
    let flat: Vec<C64> = stokes.iter().flat_map(|row| row.iter().map(|&v| C64::new(v, 0.0))).collect();
    FieldSet::new(
        DVector::from_iterator(n, pump.iter().map(|&v| C64::new(v, 0.0))),
        DMatrix::from_row_slice(n, 7, &flat),
        1.0,
    )
    .expect("valid table")
}

/// `μ_kj = Ω̃_Skj`, `μ₀ₖ = 1`.
pub fn system_for(fields: &FieldSet) -> SystemSpec {
    SystemSpec::new(
        DVector::from_element(fields.n_intermediate(), C64::new(1.0, 0.0)),
        fields.peak_rabi_stokes.clone(),
    )
    .expect("consistent shapes")
}
