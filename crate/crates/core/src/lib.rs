//! Field design and dynamics for complete adiabatic population transfer in a
//! degenerate `(1 + N + M)`-level system.
//!
//! An initial state `|0⟩` couples through `N` nondegenerate intermediate states
//! `|i_k⟩` to an `M`-fold degenerate manifold `|f_j⟩`. With `2N`
//! counter-intuitively ordered Gaussian pulses whose peak Rabi frequencies obey
//! `Ω̃*_Pk = η · Ω̃_SkM`, the dressed Hamiltonian carries a null eigenstate with
//! nodes on every intermediate state and on every unwanted degenerate state.
//! Following it adiabatically moves all population from `|0⟩` to the target.
//!
//! Units are natural: `ħ = 1`, times are in units of the pulse width `T`, Rabi
//! amplitudes in `1/T`. Hamiltonian entries store `Ω`, half of the physical
//! Rabi frequency `2Ω`.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and parallel sweeps live in the `nullpass` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod design;
pub mod error;
pub mod linalg;
pub mod model;
pub mod nullspace;
pub mod ode;
pub mod presets;
pub mod propagate;

pub use nalgebra::{self, DMatrix, DVector};
pub use num_complex::Complex;

/// Complex double used for all amplitudes.
pub type C64 = Complex<f64>;

pub use design::{
    check_feasibility, condition_pumps, design_fields, effective_dipoles, verify_design, Design,
    DesignReport, StokesDrive, TargetSpec, VerifyOutcome,
};
pub use error::Error;
pub use model::{hamiltonian, rabi_pump, rabi_stokes, FieldSet, PulseSpec, StateVector, SystemSpec};
pub use nullspace::{
    analytic_lambda1, cofactor_matrix, det_s, nonadiabatic_coupling, numeric_null_space, s_matrix,
    track_complement, track_eigenvector, CouplingDiagnostics, NodeLabel, NullVector, TrackingOptions,
};
pub use propagate::{
    adiabaticity_report, populations, propagate, AdiabaticityReport, Populations,
    PropagationConfig, Trajectory,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;
