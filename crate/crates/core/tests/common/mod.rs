#![allow(dead_code)]

use nullpass_core::{DMatrix, DVector, FieldSet, SystemSpec, TargetSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Complex number with magnitude uniform in `[lo, hi)` and uniform phase.
pub fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(rng.random_range(lo..hi), rng.random_range(0.0..std::f64::consts::TAU))
}

/// Haar-random unit vector.
pub fn unit_vector(rng: &mut ChaCha8Rng, len: usize) -> TargetSpec {
    TargetSpec::normalized(DVector::from_fn(len, |_, _| gaussian(rng))).unwrap()
}

/// Random system with complex dipoles and Stokes Rabi amplitudes of
/// magnitude in `[lo, hi)`, Stokes drive `Ẽ = 2` (so `Ω̃_S = μ`) and pumps
/// from the design condition with `η = 1`.
pub fn designed_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, lo: f64, hi: f64) -> (SystemSpec, FieldSet, TargetSpec) {
    let stokes = DMatrix::from_fn(n, m, |_, _| polar(rng, lo, hi));
    let target = TargetSpec::last(m);
    let pumps = nullpass_core::condition_pumps(&stokes, &target, C64::new(1.0, 0.0)).unwrap();
    let mu_pump = DVector::from_fn(n, |_, _| polar(rng, 0.5, 2.0));
    let system = SystemSpec::new(mu_pump, stokes.clone()).unwrap();
    let fields = FieldSet::new(pumps, stokes, 1.0).unwrap();
    (system, fields, target)
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
