mod common;

use common::{designed_instance, polar, rng};
use nullpass_core::nullspace::{phase_distance, refine_coupling, uniform_grid};
use nullpass_core::presets::Figure;
use nullpass_core::{
    analytic_lambda1, hamiltonian, nonadiabatic_coupling, numeric_null_space, track_complement, track_eigenvector, DMatrix,
    DVector, Error, FieldSet, NodeLabel, NullVector, SystemSpec, TargetSpec, TrackingOptions, C64,
};
use proptest::prelude::*;

/// Right singular vector of the smallest singular value.
fn svd_null_vector(h: &DMatrix<C64>) -> (DVector<C64>, f64) {
    let svd = h.clone().svd(false, true);
    let (i, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, &s)| if s < b.1 { (i, s) } else { b });
    let v_t = svd.v_t.unwrap();
    (v_t.row(i).adjoint(), s)
}

fn null_basis_orthogonal_to(h: &DMatrix<C64>, n: usize, exclude: &[&DVector<C64>]) -> Vec<DVector<C64>> {
    let null = numeric_null_space(h, n, 1e-9 * h.norm()).unwrap();
    let mut out: Vec<DVector<C64>> = Vec::new();
    for v in null {
        let mut w = v.components().clone();
        for e in exclude.iter().copied().chain(out.iter()) {
            w -= e * e.dotc(&w);
        }
        if w.norm() > 1e-6 {
            let norm = w.norm();
            out.push(w / C64::new(norm, 0.0));
        }
    }
    out
}

fn analytic_track(system: &SystemSpec, fields: &FieldSet, target: &TargetSpec, grid: &[f64]) -> Vec<NullVector> {
    grid.iter().map(|&t| analytic_lambda1(system, fields, target, t).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn analytic_lambda1_matches_the_svd_oracle(seed in any::<u64>(), n in 2usize..=6, t in -1.0f64..2.0) {
        let (system, fields, target) = designed_instance(&mut rng(seed), n, n, 10.0, 100.0);
        let h = hamiltonian(&system, &fields, t).unwrap();
        let lambda = analytic_lambda1(&system, &fields, &target, t).unwrap();
        let (oracle, smallest) = svd_null_vector(&h);
        prop_assert!(smallest < 1e-12 * h.norm());
        prop_assert!(phase_distance(lambda.components(), &oracle) < 1e-10);
        prop_assert!((&h * lambda.components()).norm() < 1e-12 * h.norm());
    }

    #[test]
    fn null_dimension_for_fewer_targets(seed in any::<u64>(), m in 1usize..=4, extra in 1usize..=3, t in -1.0f64..2.0) {
        let n = m + extra;
        let (system, fields, _) = designed_instance(&mut rng(seed), n, m, 10.0, 100.0);
        let h = hamiltonian(&system, &fields, t).unwrap();
        prop_assert_eq!(numeric_null_space(&h, n, 1e-9 * h.norm()).unwrap().len(), n - m + 1);
        // oracle: rank-nullity from the singular values
        let sv = h.clone().svd(false, false).singular_values;
        let zeros = sv.iter().filter(|&&s| s < 1e-9 * h.norm()).count();
        prop_assert_eq!(zeros, n - m + 1);
    }
}

#[test]
fn three_two_system_has_a_two_dimensional_null_space() {
    let (system, fields, _) = designed_instance(&mut rng(9), 3, 2, 10.0, 50.0);
    let h = hamiltonian(&system, &fields, 0.5).unwrap();
    assert_eq!(numeric_null_space(&h, 3, 1e-9 * h.norm()).unwrap().len(), 2);
}

#[test]
fn numeric_null_space_rejects_non_hermitian_input() {
    let mut h = DMatrix::<C64>::zeros(4, 4);
    h[(0, 1)] = C64::new(1.0, 0.0);
    assert!(numeric_null_space(&h, 1, 1e-9).is_err());
}

#[test]
fn analytic_lambda1_requires_the_design_condition() {
    let fig = Figure::Fig2;
    let mut fields = fig.fields();
    fields.peak_rabi_pump[2] *= -1.0;
    assert!(matches!(
        analytic_lambda1(&fig.system(), &fields, &fig.target(), 0.0),
        Err(Error::ConditionViolated { .. })
    ));
}

#[test]
fn fig2_tracking_keeps_the_node_profile() {
    let fig = Figure::Fig2;
    let (system, fields, target) = (fig.system(), fig.fields(), fig.target());
    let grid = uniform_grid(-4.0, 5.0, 901);
    let seed = analytic_lambda1(&system, &fields, &target, grid[0]).unwrap();
    let sampler = |t: f64| hamiltonian(&system, &fields, t).unwrap();
    let tracked = track_eigenvector(sampler, seed.components(), &grid, 7, &TrackingOptions::for_fields(&fields)).unwrap();
    for (v, &t) in tracked.iter().zip(&grid) {
        assert_eq!(v.label, NodeLabel::Lambda1, "t = {t}");
        assert_eq!(v.node_count(), 13);
        let analytic = analytic_lambda1(&system, &fields, &target, t).unwrap();
        assert!(v.phase_distance(&analytic) < 1e-8, "t = {t}: {}", v.phase_distance(&analytic));
    }
}

#[test]
fn tracking_loss_is_reported() {
    // a state orthogonal to every eigenvector block it could follow cannot exist,
    // so force loss with an impossible overlap threshold
    let fig = Figure::Fig2;
    let (system, fields) = (fig.system(), fig.fields());
    let grid = uniform_grid(-1.0, 1.0, 5);
    let seed = DVector::from_fn(15, |i, _| C64::new(if i == 0 { 1.0 } else { 0.3 }, 0.0));
    let opts = TrackingOptions { degeneracy_tol: 0.0, min_overlap: 0.999 };
    let res = track_eigenvector(|t| hamiltonian(&system, &fields, t).unwrap(), &seed, &grid, 7, &opts);
    assert!(matches!(res, Err(Error::TrackingLost { .. })));
}

fn fewer_targets_instance(seed: u64, n: usize, m: usize) -> (SystemSpec, FieldSet, TargetSpec) {
    let mut r = rng(seed);
    let stokes = DMatrix::from_fn(n, m, |_, _| polar(&mut r, 30.0, 90.0));
    let target = TargetSpec::last(m);
    let pumps = nullpass_core::condition_pumps(&stokes, &target, C64::new(1.0, 0.0)).unwrap();
    let system = SystemSpec::new(DVector::from_element(n, C64::new(1.0, 0.0)), stokes.clone()).unwrap();
    (system, FieldSet::new(pumps, stokes, 1.0).unwrap(), target)
}

#[test]
fn fewer_targets_lambda1_never_gains_intermediate_amplitude() {
    for (seed, n, m) in [(1u64, 3usize, 2usize), (2, 4, 2), (3, 5, 3), (4, 4, 1)] {
        let (system, fields, target) = fewer_targets_instance(seed, n, m);
        let grid = uniform_grid(-3.0, 4.0, 701);
        let start = analytic_lambda1(&system, &fields, &target, grid[0]).unwrap();
        let sampler = |t: f64| hamiltonian(&system, &fields, t).unwrap();
        let tracked = track_eigenvector(sampler, start.components(), &grid, n, &TrackingOptions::for_fields(&fields)).unwrap();
        let worst_x = tracked
            .iter()
            .map(|v| v.components().rows(1, n).norm())
            .fold(0.0, f64::max);
        assert!(worst_x < 1e-8, "N={n} M={m}: |x| reached {worst_x:e}");
        assert!(tracked.iter().all(|v| v.label == NodeLabel::Lambda1));
    }
}

#[test]
fn fewer_targets_coupling_to_lambda3_vanishes() {
    for (seed, n, m) in [(5u64, 3usize, 2usize), (6, 4, 2), (7, 5, 2)] {
        let (system, fields, target) = fewer_targets_instance(seed, n, m);
        let grid = uniform_grid(-3.0, 4.0, 701);
        let lambda1 = analytic_track(&system, &fields, &target, &grid);
        let sampler = |t: f64| hamiltonian(&system, &fields, t).unwrap();
        let h0 = sampler(grid[0]);
        let seeds = null_basis_orthogonal_to(&h0, n, &[lambda1[0].components()]);
        assert_eq!(seeds.len(), n - m);
        for s in &seeds {
            let l3 = track_complement(sampler, s, &lambda1, &grid, n, &TrackingOptions::for_fields(&fields)).unwrap();
            assert!(l3.iter().skip(1).all(|v| v.label == NodeLabel::Lambda3));
            let chi = nonadiabatic_coupling(&lambda1, &l3, &grid).unwrap();
            let worst = chi.iter().map(|d| d.chi).fold(0.0, f64::max);
            assert!(worst < 1e-8, "N={n} M={m}: chi {worst:e}");
        }
    }
}

#[test]
fn more_targets_than_intermediates_couples_the_null_pair() {
    let mut r = rng(21);
    let (n, m) = (2, 3);
    let stokes = DMatrix::from_fn(n, m, |_, _| polar(&mut r, 30.0, 90.0));
    let target = TargetSpec::last(m);
    let pumps = nullpass_core::condition_pumps(&stokes, &target, C64::new(1.0, 0.0)).unwrap();
    let system = SystemSpec::new(DVector::from_element(n, C64::new(1.0, 0.0)), stokes.clone()).unwrap();
    let fields = FieldSet::new(pumps, stokes, 1.0).unwrap();
    let sampler = |t: f64| hamiltonian(&system, &fields, t).unwrap();
    let h = sampler(0.5);
    assert_eq!(numeric_null_space(&h, n, 1e-9 * h.norm()).unwrap().len(), m - n + 1);

    let conv = refine_coupling(
        |grid| {
            let lambda1 = analytic_track(&system, &fields, &target, grid);
            let seed = null_basis_orthogonal_to(&sampler(grid[0]), n, &[lambda1[0].components()]);
            let partner = track_complement(sampler, &seed[0], &lambda1, grid, n, &TrackingOptions::for_fields(&fields))?;
            Ok((partner, lambda1))
        },
        -2.0,
        3.0,
        101,
        5,
        1e-12,
    )
    .unwrap();
    assert!(conv.converged);
    assert!(conv.max_chi > 1e-2, "max chi {}", conv.max_chi);
}

#[test]
fn coupling_of_a_state_with_itself_vanishes_for_real_tracks() {
    let grid = uniform_grid(0.0, 1.0, 11);
    let track: Vec<NullVector> = grid
        .iter()
        .map(|&t| NullVector::classify(DVector::from_vec(vec![C64::new(t.cos(), 0.0), C64::new(0.0, 0.0), C64::new(t.sin(), 0.0)]), t, 1))
        .collect();
    let chi = nonadiabatic_coupling(&track, &track, &grid).unwrap();
    assert!(chi.iter().all(|d| d.chi < 1e-3));
    assert!(matches!(nonadiabatic_coupling(&track[..2], &track[..2], &grid[..2]), Err(Error::GridTooShort { .. })));
}
