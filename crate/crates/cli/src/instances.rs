//! Seeded random scenarios for tests, sweeps and the `generate` subcommand.

use nullpass_core::presets::Figure;
use nullpass_core::{DMatrix, DVector, PropagationConfig, StokesDrive, SystemSpec, TargetSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::AppError;
use crate::scenario::{FieldSource, Scenario};

/// Shape and drive strength of a random instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub n_intermediate: usize,
    pub n_degenerate: usize,
    /// Haar-random target instead of the last degenerate state.
    pub superposition: bool,
    /// Stokes dipole magnitudes are drawn uniformly from this range.
    pub dipole_range: (f64, f64),
    /// Peak field of every Stokes drive.
    pub stokes_field: f64,
}

impl InstanceSpec {
    /// Stokes Rabi amplitudes between 30 and 90 (`Ω̃_S = μ` at `Ẽ_S = 2`), zero drive phases.
    pub fn new(n_intermediate: usize, n_degenerate: usize) -> Self {
        Self {
            n_intermediate,
            n_degenerate,
            superposition: false,
            dipole_range: (30.0, 90.0),
            stokes_field: 2.0,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    let r = if hi > lo { rng.random_range(lo..hi) } else { lo };
    C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Haar-random unit vector of length `m`.
pub fn haar_target(rng: &mut ChaCha8Rng, m: usize) -> TargetSpec {
    loop {
        let v = DVector::from_fn(m, |_, _| gaussian(rng));
        if let Ok(t) = TargetSpec::normalized(v) {
            return t;
        }
    }
}

/// Random complex dipoles, designed pumps with `η = 1`.
pub fn random_instance(spec: &InstanceSpec, seed: u64) -> Result<Scenario, AppError> {
    let (n, m) = (spec.n_intermediate, spec.n_degenerate);
    if n == 0 || m == 0 {
        return Err(AppError::scenario("instances need at least one intermediate and one degenerate state"));
    }
    let (lo, hi) = spec.dipole_range;
    if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(AppError::scenario("dipole range must satisfy 0 < lo <= hi"));
    }
    let mut r = rng(seed);
    let mu_stokes = DMatrix::from_fn(n, m, |_, _| polar(&mut r, lo, hi));
    let mu_pump = DVector::from_fn(n, |_, _| polar(&mut r, 0.5, 2.0));
    let target = if spec.superposition {
        haar_target(&mut r, m)
    } else {
        TargetSpec::last(m)
    };
    let system = SystemSpec::new(mu_pump, mu_stokes)?;
    let label = format!(
        "random_n{n}_m{m}_{}seed{seed}",
        if spec.superposition { "sup_" } else { "" }
    );
    Ok(designed(label, system, target, spec.stokes_field))
}

/// The N = M = 7 benchmark system driven toward a Haar-random superposition.
pub fn benchmark_superposition(seed: u64, stokes_field: f64) -> Scenario {
    let fig = Figure::Fig2;
    let target = haar_target(&mut rng(seed), fig.system().n_degenerate());
    designed(format!("fig2_sup_seed{seed}"), fig.system(), target, stokes_field)
}

fn designed(label: String, system: SystemSpec, target: TargetSpec, stokes_field: f64) -> Scenario {
    let (n, _) = (system.n_intermediate(), system.n_degenerate());
    Scenario {
        label,
        target,
        source: FieldSource::Design {
            eta: C64::new(1.0, 0.0),
            width: 1.0,
            drives: vec![StokesDrive::new(stokes_field, 0.0); n],
        },
        pump_phase_shift: vec![0.0; n],
        stokes_phase_shift: vec![0.0; n],
        propagation: PropagationConfig::default(),
        bounds: None,
        system,
    }
}
