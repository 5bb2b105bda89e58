#![allow(clippy::needless_range_loop)]

mod common;

use common::{gaussian, gaussian_matrix, polar, rng, unit_vector};
use nullpass_core::presets::{Figure, FIG2_PUMP};
use nullpass_core::{
    analytic_lambda1, check_feasibility, design_fields, effective_dipoles, hamiltonian, numeric_null_space, verify_design,
    DMatrix, DVector, Error, NodeLabel, StokesDrive, SystemSpec, TargetSpec, C64,
};
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_system(seed: u64, n: usize, m: usize) -> SystemSpec {
    let mut r = rng(seed);
    SystemSpec::new(DVector::from_fn(n, |_, _| polar(&mut r, 0.5, 2.0)), DMatrix::from_fn(n, m, |_, _| polar(&mut r, 5.0, 60.0))).unwrap()
}

fn random_drives(seed: u64, n: usize) -> Vec<StokesDrive> {
    let mut r = rng(seed ^ 0x5eed);
    (0..n).map(|_| StokesDrive::new(polar(&mut r, 1.0, 3.0).norm(), polar(&mut r, 1.0, 2.0).arg())).collect()
}

fn unit_drives(n: usize) -> Vec<StokesDrive> {
    vec![StokesDrive::new(2.0, 0.0); n]
}

#[test]
fn fig2_design_reproduces_the_benchmark_pumps() {
    let fig = Figure::Fig2;
    let design = design_fields(&fig.system(), &fig.target(), c(1.0), 1.0, &unit_drives(7)).unwrap();
    for k in 0..7 {
        assert!((design.fields.peak_rabi_pump[k] - c(FIG2_PUMP[k])).norm() < 1e-12, "pump {k}");
    }
    assert!(common::max_abs_diff(&design.fields.peak_rabi_stokes, &fig.fields().peak_rabi_stokes) < 1e-12);
    assert!(design.report.feasible);
    assert!(design.report.pruned_pumps.is_empty());
    // μ₀ₖ = 1 means Ẽ_Pk = 2 Ω̃_Pk
    assert!((design.pump_pulses[6].peak_field - 270.0).abs() < 1e-9);
    assert!(verify_design(&fig.system(), &fig.fields(), &fig.target()).unwrap().satisfied);
}

#[test]
fn fig4_design_prunes_the_first_two_pumps() {
    let fig = Figure::Fig4;
    let design = design_fields(&fig.system(), &fig.target(), c(1.0), 1.0, &unit_drives(7)).unwrap();
    assert_eq!(design.report.pruned_pumps, vec![0, 1]);
    assert_eq!(design.fields.peak_rabi_pump[0], c(0.0));
    assert_eq!(design.fields.peak_rabi_pump[1], c(0.0));
    assert_eq!(design.pump_pulses[0].peak_field, 0.0);
    for k in 2..7 {
        assert!((design.fields.peak_rabi_pump[k] - c(FIG2_PUMP[k])).norm() < 1e-12);
    }
    assert!((&design.fields.peak_rabi_pump - &fig.fields().peak_rabi_pump).norm() < 1e-12);
}

#[test]
fn perturbed_pump_fails_verification_by_the_perturbation() {
    let fig = Figure::Fig2;
    let mut fields = fig.fields();
    fields.peak_rabi_pump[0] *= 1.01;
    let out = verify_design(&fig.system(), &fields, &fig.target()).unwrap();
    assert!(!out.satisfied);
    // the least-squares fit spreads the 0.6 error; the worst entry stays of that order
    assert!(out.residual > 0.3 && out.residual <= 0.6 + 1e-9, "residual {}", out.residual);
}

#[test]
fn zero_pumps_fail_verification() {
    let fig = Figure::Fig2;
    let mut fields = fig.fields();
    fields.peak_rabi_pump.fill(c(0.0));
    assert!(!verify_design(&fig.system(), &fields, &fig.target()).unwrap().satisfied);
}

#[test]
fn feasibility_examples() {
    let id = SystemSpec::new(DVector::from_element(3, c(1.0)), DMatrix::identity(3, 3)).unwrap();
    let report = check_feasibility(&id, &TargetSpec::last(3)).unwrap();
    assert!(report.feasible);
    assert!((report.det_check - c(1.0)).norm() < 1e-15);

    let mut dup = gaussian_matrix(&mut rng(1), 3, 3);
    let row = dup.row(0).into_owned();
    dup.set_row(1, &row);
    let singular = SystemSpec::new(DVector::from_element(3, c(1.0)), dup).unwrap();
    assert!(!check_feasibility(&singular, &TargetSpec::last(3)).unwrap().feasible);
    assert!(matches!(
        design_fields(&singular, &TargetSpec::last(3), c(1.0), 1.0, &unit_drives(3)),
        Err(Error::Infeasible(_))
    ));

    let wide = random_system(2, 2, 3);
    let report = check_feasibility(&wide, &TargetSpec::last(3)).unwrap();
    assert!(!report.feasible);
    assert!(report.notes.iter().any(|n| n.contains("regardless of how slowly")));
}

#[test]
fn zero_eta_is_rejected() {
    let system = random_system(3, 3, 3);
    assert!(matches!(
        design_fields(&system, &TargetSpec::last(3), c(0.0), 1.0, &unit_drives(3)),
        Err(Error::ZeroEta)
    ));
}

#[test]
fn effective_dipole_examples() {
    let system = random_system(4, 4, 3);
    let e3 = effective_dipoles(&system, &TargetSpec::last(3)).unwrap();
    assert!((e3 - system.mu_stokes.column(2)).norm() < 1e-15);

    let mut zero_first = system.mu_stokes.clone();
    zero_first.column_mut(0).fill(c(0.0));
    let s = SystemSpec::new(system.mu_pump.clone(), zero_first).unwrap();
    assert_eq!(effective_dipoles(&s, &TargetSpec::basis(3, 0).unwrap()).unwrap().norm(), 0.0);

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let t = TargetSpec::new(DVector::from_vec(vec![c(h), c(h), c(0.0)])).unwrap();
    let got = effective_dipoles(&system, &t).unwrap();
    for k in 0..4 {
        let avg = (system.mu_stokes[(k, 0)] + system.mu_stokes[(k, 1)]) * 0.5;
        assert!((got[k] - avg * std::f64::consts::SQRT_2).norm() < 1e-13);
    }
}

#[test]
fn complex_dipoles_give_the_designed_pump_phases() {
    let n = 4;
    let system = random_system(5, n, n);
    let target = TargetSpec::last(n);
    let eta = C64::from_polar(1.3, 0.7);
    let drives = random_drives(5, n);
    let design = design_fields(&system, &target, eta, 1.0, &drives).unwrap();
    for k in 0..n {
        let expected = -drives[k].phase - system.mu_pump[k].arg() - system.mu_stokes[(k, n - 1)].arg() - eta.arg();
        let got = design.pump_pulses[k].phase;
        let diff = C64::from_polar(1.0, got - expected);
        assert!((diff - c(1.0)).norm() < 1e-12, "pump {k}: {got} vs {expected}");
        // condition (μ₀ₖ Ẽ_Pk e^{iφ_Pk})* = η μ_kM Ẽ_Sk e^{iφ_Sk}
        let lhs = (system.mu_pump[k] * C64::from_polar(design.pump_pulses[k].peak_field, got)).conj();
        let rhs = eta * system.mu_stokes[(k, n - 1)] * C64::from_polar(drives[k].peak_field, drives[k].phase);
        assert!((lhs - rhs).norm() < 1e-10 * rhs.norm());
    }
}

#[test]
fn undrivable_pump_is_an_error() {
    let mut system = random_system(6, 3, 3);
    system.mu_pump[1] = c(0.0);
    assert!(matches!(
        design_fields(&system, &TargetSpec::last(3), c(1.0), 1.0, &unit_drives(3)),
        Err(Error::UndrivablePump(1))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn design_verify_round_trip(seed in any::<u64>(), m in 1usize..=5, extra in 0usize..=2, superpose in any::<bool>()) {
        let n = m + extra;
        let system = random_system(seed, n, m);
        let target = if superpose { unit_vector(&mut rng(seed ^ 1), m) } else { TargetSpec::last(m) };
        let eta = gaussian(&mut rng(seed ^ 2)) + c(0.1);
        let design = design_fields(&system, &target, eta, 1.0, &random_drives(seed, n)).unwrap();
        let out = verify_design(&system, &design.fields, &target).unwrap();
        prop_assert!(out.satisfied, "residual {}", out.residual);
        prop_assert!((out.eta_fit - eta).norm() < 1e-10 * eta.norm());
    }

    #[test]
    fn pruning_consistency(seed in any::<u64>(), m in 2usize..=5, zeros in 1usize..=2) {
        let n = m + 1;
        let mut mu = random_system(seed, n, m).mu_stokes;
        for k in 0..zeros {
            mu[(k, m - 1)] = c(0.0);
        }
        let system = SystemSpec::new(DVector::from_element(n, c(1.0)), mu).unwrap();
        let design = design_fields(&system, &TargetSpec::last(m), c(1.0), 1.0, &unit_drives(n)).unwrap();
        let expected: Vec<usize> = (0..zeros).collect();
        prop_assert_eq!(&design.report.pruned_pumps, &expected);
        for k in 0..n {
            prop_assert_eq!(design.fields.peak_rabi_pump[k] == c(0.0), k < zeros);
        }
        prop_assert!(verify_design(&system, &design.fields, &TargetSpec::last(m)).unwrap().satisfied);
    }

    #[test]
    fn basis_change_leaves_pumps_unchanged(seed in any::<u64>(), m in 1usize..=4, extra in 0usize..=2) {
        let n = m + extra;
        let system = random_system(seed, n, m);
        let target = unit_vector(&mut rng(seed ^ 3), m);
        // random unitary from the QR factor of a Gaussian matrix
        let u = gaussian_matrix(&mut rng(seed ^ 4), m, m).qr().q();
        // |f_j⟩ → Σ_i U_ij |f'_i⟩: dipoles become μ U^†, coefficients U c
        let rotated = SystemSpec::new(system.mu_pump.clone(), &system.mu_stokes * u.adjoint()).unwrap();
        let rotated_target = TargetSpec::normalized(&u * &target.coefficients).unwrap();
        let drives = random_drives(seed, n);
        let a = design_fields(&system, &target, c(1.0), 1.0, &drives).unwrap();
        let b = design_fields(&rotated, &rotated_target, c(1.0), 1.0, &drives).unwrap();
        let scale = a.fields.max_peak();
        prop_assert!((a.fields.peak_rabi_pump - b.fields.peak_rabi_pump).norm() < 1e-10 * scale);
    }

    #[test]
    fn eta_scaling_scales_pumps(seed in any::<u64>(), m in 1usize..=4, factor in 0.1f64..10.0) {
        let n = m + 1;
        let system = random_system(seed, n, m);
        let target = TargetSpec::last(m);
        let drives = random_drives(seed, n);
        let eta = gaussian(&mut rng(seed)) + c(0.1);
        let a = design_fields(&system, &target, eta, 1.0, &drives).unwrap();
        let b = design_fields(&system, &target, eta * factor, 1.0, &drives).unwrap();
        prop_assert!((a.fields.peak_rabi_pump * c(factor) - &b.fields.peak_rabi_pump).norm() < 1e-12 * b.fields.max_peak());
        prop_assert!(verify_design(&system, &b.fields, &target).unwrap().satisfied);
    }

    #[test]
    fn designed_fields_carry_the_full_node_null_vector(seed in any::<u64>(), m in 1usize..=5, extra in 0usize..=2, t in -2.0f64..3.0) {
        let n = m + extra;
        let system = random_system(seed, n, m);
        let target = TargetSpec::last(m);
        let design = design_fields(&system, &target, c(1.0), 1.0, &random_drives(seed, n)).unwrap();
        let lambda = analytic_lambda1(&system, &design.fields, &target, t).unwrap();
        prop_assert_eq!(lambda.label, NodeLabel::Lambda1);
        prop_assert_eq!(lambda.node_count(), m + n - 1);
        let h = hamiltonian(&system, &design.fields, t).unwrap();
        let residual = (&h * lambda.components()).norm();
        prop_assert!(residual < 1e-12 * h.norm(), "residual {}", residual);
        let null = numeric_null_space(&h, n, 1e-9 * h.norm()).unwrap();
        prop_assert_eq!(null.len(), n - m + 1);
        // Λ₁ lies inside the numerically computed null space
        let inside: f64 = null.iter().map(|v| v.components().dotc(lambda.components()).norm_sqr()).sum();
        prop_assert!((inside - 1.0).abs() < 1e-10);
    }
}
