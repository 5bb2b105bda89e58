//! Time-dependent Schrödinger propagation `i dψ/dt = H(t) ψ` (ħ = 1).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

// std builds resolve these to inherent f64 methods
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DVector;

use crate::design::TargetSpec;
use crate::model::{FieldSet, StateVector, SystemSpec};
use crate::ode::{dopri5, AdaptiveOptions, Stats};
use crate::{Error, Result, C64};

/// Integration window and accuracy. Times are in units of the pulse width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub output_stride: f64,
    /// Runs whose worst norm drift exceeds this are rejected.
    pub norm_tolerance: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            t_start: -4.0,
            t_end: 5.0,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.05,
            output_stride: 0.01,
            norm_tolerance: 1e-9,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_start < self.t_end) || !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "window [{}, {}] must be finite with t_start < t_end",
                self.t_start, self.t_end
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0 && self.output_stride > 0.0 && self.norm_tolerance > 0.0) {
            return Err(Error::InvalidParameter("max step, stride and norm tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Same window and stride with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            ..*self
        }
    }

    /// Sample times (in units of the width) from `t_start` to `t_end`, end included.
    pub fn sample_times(&self) -> Vec<f64> {
        let count = ((self.t_end - self.t_start) / self.output_stride * (1.0 + 1e-12)).floor() as usize;
        let mut times: Vec<f64> = (0..=count).map(|i| self.t_start + i as f64 * self.output_stride).collect();
        if let Some(&last) = times.last() {
            if (self.t_end - last).abs() > 1e-9 * self.output_stride {
                times.push(self.t_end);
            } else {
                *times.last_mut().unwrap() = self.t_end;
            }
        }
        times
    }
}

/// Aggregated populations of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    /// All intermediate states.
    pub p_x: f64,
    /// Degenerate manifold minus the target direction.
    pub p_y: f64,
    /// `|⟨target|ψ⟩|²`.
    pub p_f: f64,
}

/// A sampled propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sample times in units of the width.
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `|ψ_i|²` per sample, basis order `(0; i₁..i_N; f₁..f_M)`.
    pub populations: Vec<Vec<f64>>,
    pub p_x: Vec<f64>,
    pub p_y: Vec<f64>,
    pub p_f: Vec<f64>,
    /// `|‖ψ‖ − 1|` per sample.
    pub norm_error: Vec<f64>,
    pub n_intermediate: usize,
    pub stats: Stats,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn max_p_x(&self) -> f64 {
        self.p_x.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_p_y(&self) -> f64 {
        self.p_y.iter().copied().fold(0.0, f64::max)
    }

    pub fn final_p_f(&self) -> f64 {
        self.p_f.last().copied().unwrap_or(0.0)
    }

    pub fn max_norm_error(&self) -> f64 {
        self.norm_error.iter().copied().fold(0.0, f64::max)
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory has at least one sample")
    }
}

/// Populations of a single state vector.
pub fn state_populations(psi: &[C64], n_intermediate: usize, target: &TargetSpec) -> Populations {
    let x = &psi[1..1 + n_intermediate];
    let y = &psi[1 + n_intermediate..];
    let p_x = x.iter().map(|z| z.norm_sqr()).sum();
    let p_manifold: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    let amp: C64 = target.coefficients.iter().zip(y).map(|(c, z)| c.conj() * z).sum();
    let p_f = amp.norm_sqr();
    Populations {
        p_x,
        p_y: (p_manifold - p_f).max(0.0),
        p_f,
    }
}

/// `(P_x, P_y, P_f)` for every sample of `trajectory` with respect to `target`.
pub fn populations(trajectory: &Trajectory, target: &TargetSpec) -> Vec<Populations> {
    trajectory
        .states
        .iter()
        .map(|s| state_populations(s.as_slice(), trajectory.n_intermediate, target))
        .collect()
}

/// Evolves `psi` from absolute time `t_from` to `t_to` (either direction).
pub fn evolve(fields: &FieldSet, psi: &[C64], t_from: f64, t_to: f64, opts: &AdaptiveOptions) -> Result<(Vec<C64>, Stats)> {
    if psi.len() != fields.dim() {
        return Err(Error::Shape(format!("state has {} components, expected {}", psi.len(), fields.dim())));
    }
    dopri5(schrodinger_rhs(fields), t_from, psi, t_to, &[], opts, |_, _| {})
}

/// `f(t, ψ) = −i H(t) ψ`.
pub fn schrodinger_rhs(fields: &FieldSet) -> impl FnMut(f64, &[C64], &mut [C64]) + '_ {
    move |t, psi, out| {
        fields.apply_hamiltonian(t, psi, out);
        for z in out.iter_mut() {
            *z = C64::new(z.im, -z.re);
        }
    }
}

fn window_warnings(fields: &FieldSet, config: &PropagationConfig) -> Vec<String> {
    let w = fields.width;
    let edges = [config.t_start * w, config.t_end * w];
    let mut out = Vec::new();
    for &t in &edges {
        let gp = fields.pump_envelope(t);
        let gs = fields.stokes_envelope(t);
        if gp > 1e-6 || gs > 1e-6 {
            out.push(format!(
                "window edge t = {:.3}T: envelopes still at pump {gp:.2e}, Stokes {gs:.2e} of peak",
                t / w
            ));
        }
    }
    out
}

/// Propagates `initial` over the configured window and samples it every stride.
pub fn propagate(
    system: &SystemSpec,
    fields: &FieldSet,
    target: &TargetSpec,
    initial: &StateVector,
    config: &PropagationConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if system.n_intermediate() != fields.n_intermediate() || system.n_degenerate() != fields.n_degenerate() {
        return Err(Error::Shape("fields do not match the system".into()));
    }
    if target.len() != fields.n_degenerate() {
        return Err(Error::Shape("target does not match the degenerate manifold".into()));
    }
    if initial.components.len() != fields.dim() {
        return Err(Error::Shape("initial state has the wrong dimension".into()));
    }
    if (initial.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("initial state norm {} is not 1", initial.norm())));
    }
    let width = fields.width;
    let n = fields.n_intermediate();
    let sample_times = config.sample_times();
    let abs_times: Vec<f64> = sample_times.iter().map(|t| t * width).collect();
    let opts = AdaptiveOptions {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        max_step: config.max_step * width,
        initial_step: None,
        ..AdaptiveOptions::default()
    };

    let cap = abs_times.len();
    let mut traj = Trajectory {
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        populations: Vec::with_capacity(cap),
        p_x: Vec::with_capacity(cap),
        p_y: Vec::with_capacity(cap),
        p_f: Vec::with_capacity(cap),
        norm_error: Vec::with_capacity(cap),
        n_intermediate: n,
        stats: Stats::default(),
        warnings: window_warnings(fields, config),
    };
    let (_, stats) = dopri5(
        schrodinger_rhs(fields),
        config.t_start * width,
        initial.as_slice(),
        config.t_end * width,
        &abs_times,
        &opts,
        |t, psi| {
            let pops: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            let norm = pops.iter().sum::<f64>().sqrt();
            let agg = state_populations(psi, n, target);
            traj.times.push(t / width);
            traj.states.push(StateVector::new(DVector::from_column_slice(psi), t));
            traj.populations.push(pops);
            traj.p_x.push(agg.p_x);
            traj.p_y.push(agg.p_y);
            traj.p_f.push(agg.p_f);
            traj.norm_error.push((norm - 1.0).abs());
        },
    )?;
    traj.stats = stats;
    let drift = traj.max_norm_error();
    if drift > config.norm_tolerance {
        return Err(Error::Tolerance(format!(
            "norm drifted by {drift:e} (limit {:e}); tighten rel_tol/abs_tol",
            config.norm_tolerance
        )));
    }
    Ok(traj)
}

/// One rung of the adiabaticity ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityRung {
    /// Multiplier on every `Ω̃·T`.
    pub area_scale: f64,
    pub max_p_x: f64,
    pub max_p_y: f64,
    pub final_infidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticityReport {
    pub rungs: Vec<AdiabaticityRung>,
}

impl AdiabaticityReport {
    /// Final infidelity decreases strictly along the ladder.
    pub fn infidelity_decreasing(&self) -> bool {
        self.rungs.windows(2).all(|w| w[1].final_infidelity < w[0].final_infidelity)
    }

    pub fn min_max_p_y(&self) -> f64 {
        self.rungs.iter().map(|r| r.max_p_y).fold(f64::INFINITY, f64::min)
    }
}

/// Reruns the propagation with every pulse area `Ω̃·T` multiplied by each entry
/// of `area_scales` (typically `[1, 2, 4]`) and collects the leakage maxima.
pub fn adiabaticity_report(
    system: &SystemSpec,
    fields: &FieldSet,
    target: &TargetSpec,
    config: &PropagationConfig,
    area_scales: &[f64],
) -> Result<AdiabaticityReport> {
    let initial = StateVector::initial(fields.dim(), config.t_start * fields.width);
    let mut rungs = Vec::with_capacity(area_scales.len());
    for &scale in area_scales {
        let scaled = fields.scaled(scale);
        let traj = propagate(system, &scaled, target, &initial, config)?;
        rungs.push(AdiabaticityRung {
            area_scale: scale,
            max_p_x: traj.max_p_x(),
            max_p_y: traj.max_p_y(),
            final_infidelity: 1.0 - traj.final_p_f(),
        });
    }
    Ok(AdiabaticityReport { rungs })
}
