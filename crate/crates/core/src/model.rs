//! System and field data model and the rotating-wave interaction Hamiltonian.
//!
//! Basis ordering is `(z₀; x₁..x_N; y₁..y_M)`: the initial state, then the
//! intermediate states, then the degenerate manifold. All indices in this API
//! are zero-based.

use alloc::format;
use alloc::vec::Vec;

// std builds resolve these to inherent f64 methods
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Dimensions and transition dipoles of the bare system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// `μ₀ₖ = ⟨0|μ̂|i_k⟩`, length `N`.
    pub mu_pump: DVector<C64>,
    /// `μₖⱼ = ⟨i_k|μ̂|f_j⟩`, shape `N × M`.
    pub mu_stokes: DMatrix<C64>,
}

impl SystemSpec {
    pub fn new(mu_pump: DVector<C64>, mu_stokes: DMatrix<C64>) -> Result<Self> {
        let n = mu_pump.len();
        if n == 0 || mu_stokes.ncols() == 0 {
            return Err(Error::Shape(format!(
                "need N >= 1 and M >= 1 (got N = {}, M = {})",
                n,
                mu_stokes.ncols()
            )));
        }
        if mu_stokes.nrows() != n {
            return Err(Error::Shape(format!(
                "mu_stokes has {} rows but mu_pump has length {}",
                mu_stokes.nrows(),
                n
            )));
        }
        Ok(Self { mu_pump, mu_stokes })
    }

    pub fn n_intermediate(&self) -> usize {
        self.mu_pump.len()
    }

    pub fn n_degenerate(&self) -> usize {
        self.mu_stokes.ncols()
    }

    /// Hilbert-space dimension `1 + N + M`.
    pub fn dim(&self) -> usize {
        1 + self.n_intermediate() + self.n_degenerate()
    }
}

/// One Gaussian laser pulse `Ẽ cos(ωt + φ) exp[-(t - delay)²/T²]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub peak_field: f64,
    pub phase: f64,
    /// Carrier frequency. Inert in the interaction picture.
    pub carrier: f64,
    pub width: f64,
    pub delay: f64,
}

impl PulseSpec {
    /// Pump pulse, delayed by one width behind the Stokes pulses.
    pub fn pump(peak_field: f64, phase: f64, carrier: f64, width: f64) -> Self {
        Self {
            peak_field,
            phase,
            carrier,
            width,
            delay: width,
        }
    }

    pub fn stokes(peak_field: f64, phase: f64, carrier: f64, width: f64) -> Self {
        Self {
            peak_field,
            phase,
            carrier,
            width,
            delay: 0.0,
        }
    }

    fn validate(&self, role: &str, expected_delay: f64) -> Result<()> {
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(Error::InvalidParameter(format!("{role} width must be positive")));
        }
        if !(self.peak_field >= 0.0) || !(self.carrier >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{role} peak field and carrier must be nonnegative"
            )));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidParameter(format!("{role} phase must be finite")));
        }
        if (self.delay - expected_delay).abs() > 1e-12 * self.width {
            return Err(Error::InvalidParameter(format!(
                "{role} delay {} breaks counter-intuitive ordering (expected {})",
                self.delay, expected_delay
            )));
        }
        Ok(())
    }

    /// `Ẽ · exp(iφ)`.
    fn phasor(&self) -> C64 {
        C64::from_polar(self.peak_field, self.phase)
    }
}

/// Peak Rabi amplitudes of the 2N pulses. Fully determines `H(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    /// `Ω̃_Pk`, length `N`.
    pub peak_rabi_pump: DVector<C64>,
    /// `Ω̃_Skj`, shape `N × M`.
    pub peak_rabi_stokes: DMatrix<C64>,
    pub width: f64,
}

impl FieldSet {
    pub fn new(peak_rabi_pump: DVector<C64>, peak_rabi_stokes: DMatrix<C64>, width: f64) -> Result<Self> {
        if peak_rabi_pump.is_empty() || peak_rabi_stokes.ncols() == 0 {
            return Err(Error::Shape("field set needs N >= 1 and M >= 1".into()));
        }
        if peak_rabi_stokes.nrows() != peak_rabi_pump.len() {
            return Err(Error::Shape(format!(
                "{} pump amplitudes but {} Stokes rows",
                peak_rabi_pump.len(),
                peak_rabi_stokes.nrows()
            )));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!("width must be positive, got {width}")));
        }
        Ok(Self {
            peak_rabi_pump,
            peak_rabi_stokes,
            width,
        })
    }

    /// Builds peak Rabi amplitudes from pulse parameters:
    /// `2Ω̃_Pk = μ₀ₖ Ẽ_Pk e^{iφ_Pk}` and `2Ω̃_Skj = μₖⱼ Ẽ_Sk e^{iφ_Sk}`.
    pub fn from_pulses(system: &SystemSpec, pumps: &[PulseSpec], stokes: &[PulseSpec]) -> Result<Self> {
        let n = system.n_intermediate();
        let m = system.n_degenerate();
        if pumps.len() != n || stokes.len() != n {
            return Err(Error::Shape(format!(
                "expected {n} pump and {n} Stokes pulses, got {} and {}",
                pumps.len(),
                stokes.len()
            )));
        }
        let width = pumps[0].width;
        for p in pumps {
            p.validate("pump", width)?;
        }
        for s in stokes {
            s.validate("Stokes", 0.0)?;
            if (s.width - width).abs() > 1e-12 * width {
                return Err(Error::InvalidParameter("all pulses must share one width".into()));
            }
        }
        let pump = DVector::from_fn(n, |k, _| system.mu_pump[k] * pumps[k].phasor() * 0.5);
        let stokes_rabi =
            DMatrix::from_fn(n, m, |k, j| system.mu_stokes[(k, j)] * stokes[k].phasor() * 0.5);
        Self::new(pump, stokes_rabi, width)
    }

    pub fn n_intermediate(&self) -> usize {
        self.peak_rabi_pump.len()
    }

    pub fn n_degenerate(&self) -> usize {
        self.peak_rabi_stokes.ncols()
    }

    pub fn dim(&self) -> usize {
        1 + self.n_intermediate() + self.n_degenerate()
    }

    /// Largest peak Rabi magnitude over all 2N pulses (and all Stokes entries).
    pub fn max_peak(&self) -> f64 {
        self.peak_rabi_pump
            .iter()
            .chain(self.peak_rabi_stokes.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Pump envelope `exp[-(t - T)²/T²]`.
    pub fn pump_envelope(&self, t: f64) -> f64 {
        let u = (t - self.width) / self.width;
        (-u * u).exp()
    }

    /// Stokes envelope `exp[-t²/T²]`.
    pub fn stokes_envelope(&self, t: f64) -> f64 {
        let u = t / self.width;
        (-u * u).exp()
    }

    /// Every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            peak_rabi_pump: self.peak_rabi_pump.map(|z| z * factor),
            peak_rabi_stokes: self.peak_rabi_stokes.map(|z| z * factor),
            width: self.width,
        }
    }

    fn check_system(&self, system: &SystemSpec) -> Result<()> {
        if system.n_intermediate() != self.n_intermediate() || system.n_degenerate() != self.n_degenerate() {
            return Err(Error::Shape(format!(
                "fields are {}x{} but system is {}x{}",
                self.n_intermediate(),
                self.n_degenerate(),
                system.n_intermediate(),
                system.n_degenerate()
            )));
        }
        Ok(())
    }

    /// `out = H(t) · psi` using the block structure directly.
    pub(crate) fn apply_hamiltonian(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let n = self.n_intermediate();
        let m = self.n_degenerate();
        let gp = self.pump_envelope(t);
        let gs = self.stokes_envelope(t);
        let z0 = psi[0];
        let x = &psi[1..1 + n];
        let y = &psi[1 + n..];

        let mut acc0 = C64::new(0.0, 0.0);
        for k in 0..n {
            acc0 += self.peak_rabi_pump[k] * x[k];
        }
        out[0] = acc0 * gp;

        for k in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                acc += self.peak_rabi_stokes[(k, j)] * y[j];
            }
            out[1 + k] = self.peak_rabi_pump[k].conj() * z0 * gp + acc * gs;
        }
        for j in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += self.peak_rabi_stokes[(k, j)].conj() * x[k];
            }
            out[1 + n + j] = acc * gs;
        }
    }
}

/// A state amplitude vector at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub components: DVector<C64>,
    pub time: f64,
}

impl StateVector {
    pub fn new(components: DVector<C64>, time: f64) -> Self {
        Self { components, time }
    }

    /// `|0⟩` in a space of dimension `dim`.
    pub fn initial(dim: usize, time: f64) -> Self {
        let mut v = DVector::zeros(dim);
        v[0] = C64::new(1.0, 0.0);
        Self::new(v, time)
    }

    pub fn norm(&self) -> f64 {
        self.components.norm()
    }

    pub fn as_slice(&self) -> &[C64] {
        self.components.as_slice()
    }

    pub fn to_vec(&self) -> Vec<C64> {
        self.components.iter().copied().collect()
    }
}

/// Half-Rabi pump entry `Ω_Pk(t) = Ω̃_Pk exp[-(t - T)²/T²]` for zero-based `k`.
pub fn rabi_pump(fields: &FieldSet, k: usize, t: f64) -> Result<C64> {
    let n = fields.n_intermediate();
    if k >= n {
        return Err(Error::IndexOutOfRange {
            what: "pump",
            index: k,
            len: n,
        });
    }
    Ok(fields.peak_rabi_pump[k] * fields.pump_envelope(t))
}

/// Half-Rabi Stokes entry `Ω_Skj(t) = Ω̃_Skj exp[-t²/T²]` for zero-based `k`, `j`.
pub fn rabi_stokes(fields: &FieldSet, k: usize, j: usize, t: f64) -> Result<C64> {
    let n = fields.n_intermediate();
    let m = fields.n_degenerate();
    if k >= n {
        return Err(Error::IndexOutOfRange {
            what: "intermediate",
            index: k,
            len: n,
        });
    }
    if j >= m {
        return Err(Error::IndexOutOfRange {
            what: "degenerate",
            index: j,
            len: m,
        });
    }
    Ok(fields.peak_rabi_stokes[(k, j)] * fields.stokes_envelope(t))
}

/// Dense interaction-picture Hamiltonian at time `t`.
///
/// Row/column 0 couples to the intermediates through `Ω_Pk`, the intermediates
/// couple to the degenerate states through `Ω_Skj`, and every other entry is
/// exactly zero. The lower triangle is filled with conjugates so the result is
/// Hermitian entrywise.
pub fn hamiltonian(system: &SystemSpec, fields: &FieldSet, t: f64) -> Result<DMatrix<C64>> {
    fields.check_system(system)?;
    Ok(hamiltonian_of(fields, t))
}

pub(crate) fn hamiltonian_of(fields: &FieldSet, t: f64) -> DMatrix<C64> {
    let n = fields.n_intermediate();
    let m = fields.n_degenerate();
    let gp = fields.pump_envelope(t);
    let gs = fields.stokes_envelope(t);
    let mut h = DMatrix::zeros(1 + n + m, 1 + n + m);
    for k in 0..n {
        let p = fields.peak_rabi_pump[k] * gp;
        h[(0, 1 + k)] = p;
        h[(1 + k, 0)] = p.conj();
        for j in 0..m {
            let s = fields.peak_rabi_stokes[(k, j)] * gs;
            h[(1 + k, 1 + n + j)] = s;
            h[(1 + n + j, 1 + k)] = s.conj();
        }
    }
    h
}
