//! Pulse design for the multi-node null eigenstate.
//!
//! Given the Stokes drives, the pump amplitudes are fixed by
//! `Ω̃*_Pk = η · Σ_j c_j Ω̃_Skj`, which forces the unique null eigenvector of
//! `H(t)` to have nodes on all intermediate states and on the degenerate
//! directions orthogonal to the target `Σ_j c_j |f_j⟩`. The condition involves
//! only the target's effective dipoles, never those of the unwanted states.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{greedy_square_block, hadamard_ratio, select_rows, SINGULAR_RTOL};
use crate::model::{FieldSet, PulseSpec, SystemSpec};
use crate::{Error, Result, C64};

/// Relative magnitude below which an effective target coupling counts as zero.
pub const PRUNE_RTOL: f64 = 1e-12;

/// Relative residual bound used by [`verify_design`].
pub const VERIFY_RTOL: f64 = 1e-10;

/// Target direction `|f'_M⟩ = Σ_j c_j |f_j⟩` in the degenerate manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub coefficients: DVector<C64>,
}

impl TargetSpec {
    pub fn new(coefficients: DVector<C64>) -> Result<Self> {
        let norm = coefficients.norm();
        if coefficients.is_empty() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "target coefficients must have unit norm (got {norm})"
            )));
        }
        Ok(Self { coefficients })
    }

    /// Normalizes `coefficients` before wrapping them.
    pub fn normalized(coefficients: DVector<C64>) -> Result<Self> {
        let norm = coefficients.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("target coefficients are all zero".into()));
        }
        Self::new(coefficients / C64::new(norm, 0.0))
    }

    /// Pure basis target `|f_index⟩` (zero-based) in an `m`-fold manifold.
    pub fn basis(m: usize, index: usize) -> Result<Self> {
        if index >= m {
            return Err(Error::IndexOutOfRange {
                what: "target",
                index,
                len: m,
            });
        }
        let mut c = DVector::zeros(m);
        c[index] = C64::new(1.0, 0.0);
        Ok(Self { coefficients: c })
    }

    /// `|f_M⟩`, the last degenerate state.
    pub fn last(m: usize) -> Self {
        Self::basis(m, m - 1).expect("m >= 1")
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `Σ_j c_j · columns_j(a)`.
    pub fn combine_columns(&self, a: &DMatrix<C64>) -> DVector<C64> {
        a * &self.coefficients
    }
}

/// Outcome of a feasibility check or a design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub feasible: bool,
    pub eta: C64,
    /// Zero-based pumps removed because their effective target dipole vanishes.
    pub pruned_pumps: Vec<usize>,
    /// `μ'_kM = Σ_j c_j μ_kj`.
    pub effective_target_dipoles: DVector<C64>,
    /// Determinant of the selected `M × M` dipole sub-block.
    pub det_check: C64,
    /// Zero-based intermediate rows forming that sub-block.
    pub selected_rows: Vec<usize>,
    pub notes: Vec<String>,
}

/// Amplitude and phase driving Stokes transition `k` (all of `|i_k⟩ → |f_j⟩`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesDrive {
    pub peak_field: f64,
    pub phase: f64,
}

impl StokesDrive {
    pub fn new(peak_field: f64, phase: f64) -> Self {
        Self { peak_field, phase }
    }
}

/// A designed field configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub fields: FieldSet,
    pub report: DesignReport,
    /// Pump pulses realizing the designed amplitudes (`Ẽ_Pk`, `φ_Pk`).
    pub pump_pulses: Vec<PulseSpec>,
    pub stokes_pulses: Vec<PulseSpec>,
}

/// Result of checking a field set against the design condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOutcome {
    pub satisfied: bool,
    /// `max_k |Ω̃*_Pk − η̂ Σ_j c_j Ω̃_Skj|`.
    pub residual: f64,
    /// Least-squares proportionality constant `η̂`.
    pub eta_fit: C64,
}

fn check_target(m: usize, target: &TargetSpec) -> Result<()> {
    if target.len() != m {
        return Err(Error::Shape(format!(
            "target has {} coefficients but the manifold has {m} states",
            target.len()
        )));
    }
    Ok(())
}

/// `μ'_kM = Σ_j c_j μ_kj` for every intermediate state.
pub fn effective_dipoles(system: &SystemSpec, target: &TargetSpec) -> Result<DVector<C64>> {
    check_target(system.n_degenerate(), target)?;
    Ok(target.combine_columns(&system.mu_stokes))
}

fn small_entries(v: &DVector<C64>) -> Vec<usize> {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    v.iter()
        .enumerate()
        .filter(|(_, z)| z.norm() <= PRUNE_RTOL * scale || scale == 0.0)
        .map(|(k, _)| k)
        .collect()
}

/// Feasibility of complete transfer into `target`.
///
/// Feasible iff `M ≤ N` and some `M × M` block of the Stokes dipole matrix is
/// nonsingular. The check is basis independent in the degenerate manifold, so
/// it is done on `μ` directly for superposition targets too.
pub fn check_feasibility(system: &SystemSpec, target: &TargetSpec) -> Result<DesignReport> {
    let n = system.n_intermediate();
    let m = system.n_degenerate();
    let effective = effective_dipoles(system, target)?;
    let pruned_pumps = small_entries(&effective);
    let mut notes = Vec::new();

    let (feasible, det_check, selected_rows) = match greedy_square_block(&system.mu_stokes) {
        None => {
            notes.push(format!(
                "M = {m} exceeds N = {n}: the null eigenspace is degenerate and the nonadiabatic \
                 coupling inside it leaks population into unwanted states regardless of how slowly \
                 the fields vary; complete transfer cannot be guaranteed without {} more \
                 intermediate states",
                m - n
            ));
            (false, C64::new(0.0, 0.0), Vec::new())
        }
        Some((rows, det)) => {
            let ratio = hadamard_ratio(&select_rows(&system.mu_stokes, &rows));
            let ok = ratio >= SINGULAR_RTOL;
            if !ok {
                notes.push(format!(
                    "every {m}x{m} block of the Stokes dipole matrix is singular \
                     (best Hadamard ratio {ratio:e})"
                ));
            }
            (ok, det, rows)
        }
    };
    if feasible && !pruned_pumps.is_empty() {
        notes.push(format!(
            "{} pump(s) removed: the target has zero dipole to those intermediates",
            pruned_pumps.len()
        ));
    }
    Ok(DesignReport {
        feasible,
        eta: C64::new(1.0, 0.0),
        pruned_pumps,
        effective_target_dipoles: effective,
        det_check,
        selected_rows,
        notes,
    })
}

/// Pump amplitudes `Ω̃_Pk = (η Σ_j c_j Ω̃_Skj)*` for a given Stokes block.
///
/// No feasibility gate is applied, so this also builds the `M > N` instances
/// used to demonstrate leakage. Entries whose effective coupling vanishes are
/// set to exactly zero.
pub fn condition_pumps(stokes: &DMatrix<C64>, target: &TargetSpec, eta: C64) -> Result<DVector<C64>> {
    check_target(stokes.ncols(), target)?;
    if eta == C64::new(0.0, 0.0) {
        return Err(Error::ZeroEta);
    }
    let s = target.combine_columns(stokes);
    let mut pumps = s.map(|z| (eta * z).conj());
    for k in small_entries(&s) {
        pumps[k] = C64::new(0.0, 0.0);
    }
    Ok(pumps)
}

/// Designs the 2N pulses for transfer into `target`.
///
/// Stokes amplitudes come from the supplied drives; pumps follow the design
/// condition with proportionality constant `eta`.
pub fn design_fields(
    system: &SystemSpec,
    target: &TargetSpec,
    eta: C64,
    width: f64,
    stokes: &[StokesDrive],
) -> Result<Design> {
    if eta == C64::new(0.0, 0.0) {
        return Err(Error::ZeroEta);
    }
    let n = system.n_intermediate();
    let m = system.n_degenerate();
    if stokes.len() != n {
        return Err(Error::Shape(format!("expected {n} Stokes drives, got {}", stokes.len())));
    }
    if let Some(bad) = stokes.iter().find(|s| !(s.peak_field >= 0.0) || !s.phase.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad Stokes drive {bad:?}")));
    }
    let mut report = check_feasibility(system, target)?;
    if !report.feasible {
        return Err(Error::Infeasible(report.notes.join("; ")));
    }
    report.eta = eta;

    let stokes_rabi = DMatrix::from_fn(n, m, |k, j| {
        system.mu_stokes[(k, j)] * C64::from_polar(stokes[k].peak_field, stokes[k].phase) * 0.5
    });
    match greedy_square_block(&stokes_rabi) {
        Some((rows, _)) if hadamard_ratio(&select_rows(&stokes_rabi, &rows)) >= SINGULAR_RTOL => {}
        _ => return Err(Error::SingularStokes),
    }

    let mut pumps = condition_pumps(&stokes_rabi, target, eta)?;
    for &k in &report.pruned_pumps {
        pumps[k] = C64::new(0.0, 0.0);
    }

    let mut pump_pulses = Vec::with_capacity(n);
    for k in 0..n {
        let mu = system.mu_pump[k];
        let rabi = pumps[k];
        let (field, phase) = if rabi.norm() == 0.0 {
            (0.0, 0.0)
        } else if mu.norm() == 0.0 {
            return Err(Error::UndrivablePump(k));
        } else {
            (2.0 * rabi.norm() / mu.norm(), rabi.arg() - mu.arg())
        };
        pump_pulses.push(PulseSpec::pump(field, phase, 0.0, width));
    }
    let stokes_pulses = stokes
        .iter()
        .map(|s| PulseSpec::stokes(s.peak_field, s.phase, 0.0, width))
        .collect();

    Ok(Design {
        fields: FieldSet::new(pumps, stokes_rabi, width)?,
        report,
        pump_pulses,
        stokes_pulses,
    })
}

/// Residual of the design condition for an arbitrary field set.
///
/// Fits `η̂` by least squares over the nonvanishing target couplings, then
/// takes the worst entry of `Ω̃*_P − η̂ s` including the pruned ones, where
/// any leftover pump amplitude counts in full.
pub fn verify_design(system: &SystemSpec, fields: &FieldSet, target: &TargetSpec) -> Result<VerifyOutcome> {
    if system.n_intermediate() != fields.n_intermediate() || system.n_degenerate() != fields.n_degenerate() {
        return Err(Error::Shape("fields do not match the system".into()));
    }
    check_target(fields.n_degenerate(), target)?;
    let s = target.combine_columns(&fields.peak_rabi_stokes);
    let p_conj = fields.peak_rabi_pump.map(|z| z.conj());
    let denom: f64 = s.iter().map(|z| z.norm_sqr()).sum();
    let eta_fit = if denom > 0.0 {
        s.iter().zip(p_conj.iter()).map(|(sk, pk)| sk.conj() * pk).sum::<C64>() / denom
    } else {
        C64::new(0.0, 0.0)
    };
    let residual = s
        .iter()
        .zip(p_conj.iter())
        .map(|(sk, pk)| (pk - eta_fit * sk).norm())
        .fold(0.0, f64::max);
    let scale = fields.max_peak();
    let satisfied = eta_fit.norm() > 0.0 && residual < VERIFY_RTOL * scale;
    Ok(VerifyOutcome {
        satisfied,
        residual,
        eta_fit,
    })
}

/// Restricts a system to the intermediate states in `keep` (zero-based).
///
/// With `M < N` and a nonsingular block on `keep`, the dropped `N − M`
/// intermediates and their `2(N − M)` pulses are unnecessary for the transfer.
pub fn reduce_intermediates(system: &SystemSpec, keep: &[usize]) -> Result<SystemSpec> {
    let n = system.n_intermediate();
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::IndexOutOfRange {
            what: "intermediate",
            index: bad,
            len: n,
        });
    }
    SystemSpec::new(
        DVector::from_iterator(keep.len(), keep.iter().map(|&k| system.mu_pump[k])),
        select_rows(&system.mu_stokes, keep),
    )
}
