//! Null-eigenstate structure of the dressed Hamiltonian.
//!
//! The analytic route builds the designed null vector `Λ₁` in closed form; the
//! numeric route diagonalizes `H(t)` and keeps the near-zero eigenspace. The two
//! are independent and are checked against each other in the tests.

use alloc::format;
use alloc::vec::Vec;

// std builds resolve these to inherent f64 methods
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::design::{verify_design, TargetSpec};
use crate::linalg::{cofactors, greedy_square_block, hadamard_ratio, lu_determinant, select_rows, SINGULAR_RTOL};
use crate::model::{FieldSet, StateVector, SystemSpec};
use crate::{Error, Result, C64};

/// Absolute node threshold on unit-norm vectors.
pub const NODE_TOL: f64 = 1e-10;

/// Default null-space cutoff relative to the largest peak Rabi amplitude.
pub const NULL_RTOL: f64 = 1e-9;

/// Tracking treats eigenvalues as degenerate only within this multiple of the
/// largest peak amplitude, a few hundred times the eigensolver noise. Near the
/// window edges whole families of eigenvalues fall towards zero; a looser
/// cutoff would admit them early and let the track drift into them.
pub const DEGENERACY_RTOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLabel {
    /// Nodes on every intermediate state and on `f₁..f_{M−1}`.
    Lambda1,
    /// Supported on the intermediate states only.
    Lambda3,
    Generic,
}

/// A dressed eigenvector with its node profile.
#[derive(Debug, Clone, PartialEq)]
pub struct NullVector {
    pub vector: StateVector,
    pub node_profile: Vec<bool>,
    pub label: NodeLabel,
}

impl NullVector {
    /// Wraps `components` (normalized here) and classifies its nodes.
    pub fn classify(components: DVector<C64>, time: f64, n_intermediate: usize) -> Self {
        let norm = components.norm();
        let components = if norm > 0.0 {
            components / C64::new(norm, 0.0)
        } else {
            components
        };
        let node_profile: Vec<bool> = components.iter().map(|z| z.norm() < NODE_TOL).collect();
        let n = n_intermediate;
        let x_nodes = node_profile[1..1 + n].iter().all(|&b| b);
        let y = &node_profile[1 + n..];
        let label = if x_nodes && y[..y.len() - 1].iter().all(|&b| b) && !(node_profile[0] && y[y.len() - 1]) {
            NodeLabel::Lambda1
        } else if node_profile[0] && y.iter().all(|&b| b) {
            NodeLabel::Lambda3
        } else {
            NodeLabel::Generic
        };
        Self {
            vector: StateVector::new(components, time),
            node_profile,
            label,
        }
    }

    pub fn components(&self) -> &DVector<C64> {
        &self.vector.components
    }

    pub fn time(&self) -> f64 {
        self.vector.time
    }

    pub fn node_count(&self) -> usize {
        self.node_profile.iter().filter(|&&b| b).count()
    }

    /// `min_θ ‖self − e^{iθ} other‖` for unit vectors.
    pub fn phase_distance(&self, other: &NullVector) -> f64 {
        phase_distance(self.components(), other.components())
    }
}

/// `min_θ ‖a − e^{iθ} b‖`.
pub fn phase_distance(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    // direct difference at the optimal phase; the expanded form cancels badly
    let overlap = b.dotc(a);
    let rot = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter().zip(b.iter()).map(|(x, y)| (x - rot * y).norm_sqr()).sum::<f64>().sqrt()
}

/// Nonadiabatic coupling strength between two tracked states at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingDiagnostics {
    pub chi: f64,
    pub pair: (NodeLabel, NodeLabel),
    pub time: f64,
}

/// Options for [`track_eigenvector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingOptions {
    /// Eigenvalues within this distance of the followed one form one
    /// degenerate block.
    pub degeneracy_tol: f64,
    /// Tracking is declared lost below this overlap with the previous vector.
    pub min_overlap: f64,
}

impl TrackingOptions {
    pub fn for_fields(fields: &FieldSet) -> Self {
        Self {
            degeneracy_tol: DEGENERACY_RTOL * fields.max_peak().max(f64::MIN_POSITIVE),
            min_overlap: 0.5,
        }
    }
}

impl Default for TrackingOptions {
    fn default() -> Self {
        Self {
            degeneracy_tol: 1e-11,
            min_overlap: 0.5,
        }
    }
}

/// Stokes coupling block `Ω_Skj(t)` (`N × M`; the square `S` when `M = N`).
pub fn s_matrix(fields: &FieldSet, t: f64) -> DMatrix<C64> {
    let gs = fields.stokes_envelope(t);
    fields.peak_rabi_stokes.map(|z| z * gs)
}

/// `det S(t)`; requires `M = N`.
pub fn det_s(fields: &FieldSet, t: f64) -> Result<C64> {
    let (n, m) = fields.peak_rabi_stokes.shape();
    if n != m {
        return Err(Error::NotSquare { n, m });
    }
    Ok(lu_determinant(&s_matrix(fields, t)))
}

/// Cofactor matrix `A_kj = (−1)^(k+j) Δ_kj` of a square matrix.
pub fn cofactor_matrix(s: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if !s.is_square() {
        return Err(Error::NotSquare {
            n: s.nrows(),
            m: s.ncols(),
        });
    }
    Ok(cofactors(s))
}

fn check_hermitian(h: &DMatrix<C64>) -> Result<()> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::Shape(format!("expected a nonempty square matrix, got {:?}", h.shape())));
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let skew = (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if skew > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidParameter(format!("matrix is not Hermitian (|H - H^†| = {skew:e})")));
    }
    Ok(())
}

fn eigen(h: &DMatrix<C64>) -> Result<(DVector<f64>, DMatrix<C64>)> {
    let e = h.clone().try_symmetric_eigen(1e-15, 0).ok_or(Error::Decomposition)?;
    Ok((e.eigenvalues, e.eigenvectors))
}

/// Rotates `v` so its largest-magnitude component is real positive.
fn fix_phase_by_largest(v: &mut DVector<C64>) {
    let big = v.iter().copied().fold(C64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() { b } else { a });
    if big.norm() > 0.0 {
        let rot = big.conj() / big.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Orthonormal basis of the eigenspace with `|λ| < tol`, from a full
/// Hermitian eigendecomposition.
///
/// `n_intermediate` is only used to label the node structure. Each vector's
/// largest component is made real positive.
pub fn numeric_null_space(h: &DMatrix<C64>, n_intermediate: usize, tol: f64) -> Result<Vec<NullVector>> {
    check_hermitian(h)?;
    if n_intermediate + 2 > h.nrows() {
        return Err(Error::Shape(format!("dimension {} too small for N = {n_intermediate}", h.nrows())));
    }
    let (values, vectors) = eigen(h)?;
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l.abs() < tol)
        .map(|(i, _)| {
            let mut v = vectors.column(i).into_owned();
            fix_phase_by_largest(&mut v);
            NullVector::classify(v, f64::NAN, n_intermediate)
        })
        .collect())
}

/// Designed null vector `(z₀; 0…0; −z₀ ξ(t) c)` with `ξ(t) = η e^{2t/T − 1}`.
///
/// `η` is recovered from the fields by the design-condition fit, `z₀` is real
/// positive. Fails when the fields violate the design condition or, for
/// `M ≤ N`, when no nonsingular `M × M` Stokes block exists.
pub fn analytic_lambda1(system: &SystemSpec, fields: &FieldSet, target: &TargetSpec, t: f64) -> Result<NullVector> {
    let check = verify_design(system, fields, target)?;
    if !check.satisfied {
        return Err(Error::ConditionViolated {
            residual: check.residual,
        });
    }
    if fields.n_degenerate() <= fields.n_intermediate() {
        match greedy_square_block(&fields.peak_rabi_stokes) {
            Some((rows, _)) if hadamard_ratio(&select_rows(&fields.peak_rabi_stokes, &rows)) >= SINGULAR_RTOL => {}
            _ => return Err(Error::SingularStokes),
        }
    }
    Ok(lambda1_from_eta(fields, target, check.eta_fit, t))
}

pub(crate) fn lambda1_from_eta(fields: &FieldSet, target: &TargetSpec, eta: C64, t: f64) -> NullVector {
    let n = fields.n_intermediate();
    let m = fields.n_degenerate();
    let tau = t / fields.width;
    // ln|ξ| = ln|η| + 2t/T − 1, evaluated so neither tail overflows
    let log_xi = eta.norm().ln() + 2.0 * tau - 1.0;
    let (z0, y_mag) = if log_xi > 0.0 {
        let inv = (-log_xi).exp();
        let d = (1.0 + inv * inv).sqrt();
        (inv / d, 1.0 / d)
    } else {
        let r = log_xi.exp();
        let d = (1.0 + r * r).sqrt();
        (1.0 / d, r / d)
    };
    let unit_eta = eta / eta.norm();
    let mut v = DVector::zeros(1 + n + m);
    v[0] = C64::new(z0, 0.0);
    for j in 0..m {
        v[1 + n + j] = -unit_eta * target.coefficients[j] * y_mag;
    }
    NullVector::classify(v, t, n)
}

/// Follows the eigenvector continuously connected to `seed` along `grid`.
///
/// At each point the previous vector is projected onto the eigenspace of the
/// eigenvalue it overlaps most (its whole degenerate block) and renormalized,
/// which keeps the overlap with the previous point real positive.
pub fn track_eigenvector<F>(
    sampler: F,
    seed: &DVector<C64>,
    grid: &[f64],
    n_intermediate: usize,
    opts: &TrackingOptions,
) -> Result<Vec<NullVector>>
where
    F: Fn(f64) -> DMatrix<C64>,
{
    track_inner(sampler, seed, grid, n_intermediate, opts, None)
}

/// Like [`track_eigenvector`], but the followed vector is kept orthogonal to
/// `reference[i]` at every grid point. Used to pick out the partner of the
/// designed state inside a degenerate null space.
pub fn track_complement<F>(
    sampler: F,
    seed: &DVector<C64>,
    reference: &[NullVector],
    grid: &[f64],
    n_intermediate: usize,
    opts: &TrackingOptions,
) -> Result<Vec<NullVector>>
where
    F: Fn(f64) -> DMatrix<C64>,
{
    if reference.len() != grid.len() {
        return Err(Error::Shape("reference track and grid differ in length".into()));
    }
    track_inner(sampler, seed, grid, n_intermediate, opts, Some(reference))
}

fn track_inner<F>(
    sampler: F,
    seed: &DVector<C64>,
    grid: &[f64],
    n_intermediate: usize,
    opts: &TrackingOptions,
    reference: Option<&[NullVector]>,
) -> Result<Vec<NullVector>>
where
    F: Fn(f64) -> DMatrix<C64>,
{
    let mut out = Vec::with_capacity(grid.len());
    let seed_norm = seed.norm();
    if !(seed_norm > 0.0) {
        return Err(Error::InvalidParameter("seed vector is zero".into()));
    }
    let mut prev = seed / C64::new(seed_norm, 0.0);
    for (i, &t) in grid.iter().enumerate() {
        let h = sampler(t);
        check_hermitian(&h)?;
        let (values, vectors) = eigen(&h)?;
        let overlaps: Vec<f64> = vectors.column_iter().map(|v| v.dotc(&prev).norm()).collect();
        let best = overlaps
            .iter()
            .enumerate()
            .fold((0, -1.0), |b, (j, &o)| if o > b.1 { (j, o) } else { b })
            .0;
        let lambda = values[best];
        let mut p = DVector::zeros(prev.len());
        for (j, v) in vectors.column_iter().enumerate() {
            if (values[j] - lambda).abs() <= opts.degeneracy_tol {
                p += v * v.dotc(&prev);
            }
        }
        if let Some(r) = reference {
            let r = r[i].components();
            p -= r * r.dotc(&p);
        }
        let overlap = p.norm();
        if overlap < opts.min_overlap {
            return Err(Error::TrackingLost { time: t, overlap });
        }
        let mut next = p / C64::new(overlap, 0.0);
        let phase = next.dotc(&prev);
        if phase.norm() > 0.0 {
            let rot = phase / phase.norm();
            next.iter_mut().for_each(|z| *z *= rot);
        }
        out.push(NullVector::classify(next.clone(), t, n_intermediate));
        prev = next;
    }
    Ok(out)
}

/// `χ(t) = |⟨a(t)| d b/dt(t)⟩|` with second-order finite differences
/// (central inside the grid, one-sided at the ends; nonuniform spacing allowed).
pub fn nonadiabatic_coupling(a: &[NullVector], b: &[NullVector], grid: &[f64]) -> Result<Vec<CouplingDiagnostics>> {
    let len = grid.len();
    if len < 3 {
        return Err(Error::GridTooShort { needed: 3, got: len });
    }
    if a.len() != len || b.len() != len {
        return Err(Error::Shape(format!(
            "tracks of length {} and {} on a grid of {len}",
            a.len(),
            b.len()
        )));
    }
    let vb = |i: usize| b[i].components();
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let deriv = if i == 0 {
            let (h1, h2) = (grid[1] - grid[0], grid[2] - grid[1]);
            vb(0) * C64::from(-(2.0 * h1 + h2) / (h1 * (h1 + h2)))
                + vb(1) * C64::from((h1 + h2) / (h1 * h2))
                + vb(2) * C64::from(-h1 / (h2 * (h1 + h2)))
        } else if i == len - 1 {
            let (h1, h2) = (grid[i - 1] - grid[i - 2], grid[i] - grid[i - 1]);
            vb(i - 2) * C64::from(h2 / (h1 * (h1 + h2)))
                + vb(i - 1) * C64::from(-(h1 + h2) / (h1 * h2))
                + vb(i) * C64::from((2.0 * h2 + h1) / (h2 * (h1 + h2)))
        } else {
            let (h1, h2) = (grid[i] - grid[i - 1], grid[i + 1] - grid[i]);
            vb(i - 1) * C64::from(-h2 / (h1 * (h1 + h2)))
                + vb(i) * C64::from((h2 - h1) / (h1 * h2))
                + vb(i + 1) * C64::from(h1 / (h2 * (h1 + h2)))
        };
        out.push(CouplingDiagnostics {
            chi: a[i].components().dotc(&deriv).norm(),
            pair: (a[i].label, b[i].label),
            time: grid[i],
        });
    }
    Ok(out)
}

/// Uniform grid of `points` samples on `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, points: usize) -> Vec<f64> {
    let steps = (points.max(2) - 1) as f64;
    (0..points.max(2)).map(|i| t0 + (t1 - t0) * i as f64 / steps).collect()
}

/// Coupling converged under grid refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergedCoupling {
    pub diagnostics: Vec<CouplingDiagnostics>,
    pub max_chi: f64,
    pub points: usize,
    pub converged: bool,
}

/// Doubles the grid resolution on `[t0, t1]` until `max χ` changes by less
/// than 1% (or stays below `abs_floor`), up to `max_refinements` doublings.
///
/// `tracks` must return the pair `(a, b)` sampled on the grid it is given.
pub fn refine_coupling<F>(
    mut tracks: F,
    t0: f64,
    t1: f64,
    initial_points: usize,
    max_refinements: usize,
    abs_floor: f64,
) -> Result<ConvergedCoupling>
where
    F: FnMut(&[f64]) -> Result<(Vec<NullVector>, Vec<NullVector>)>,
{
    let mut points = initial_points.max(3);
    let mut last: Option<f64> = None;
    let mut result;
    let mut refinements = 0;
    loop {
        let grid = uniform_grid(t0, t1, points);
        let (a, b) = tracks(&grid)?;
        let diagnostics = nonadiabatic_coupling(&a, &b, &grid)?;
        let max_chi = diagnostics.iter().map(|d| d.chi).fold(0.0, f64::max);
        let converged = match last {
            Some(prev) => (max_chi <= abs_floor && prev <= abs_floor) || (max_chi - prev).abs() <= 0.01 * max_chi.max(prev),
            None => false,
        };
        result = ConvergedCoupling {
            diagnostics,
            max_chi,
            points,
            converged,
        };
        if converged || refinements == max_refinements {
            break;
        }
        last = Some(max_chi);
        points = 2 * points - 1;
        refinements += 1;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hamiltonian;
    use alloc::vec;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn zero_matrix_null_space_is_everything() {
        let h: DMatrix<C64> = DMatrix::zeros(5, 5);
        let basis = numeric_null_space(&h, 2, 1e-9).unwrap();
        assert_eq!(basis.len(), 5);
        for a in &basis {
            for b in &basis {
                let ip = b.components().dotc(a.components()).norm();
                let expect = if core::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h: DMatrix<C64> = DMatrix::zeros(4, 4);
        h[(0, 1)] = r(1.0);
        assert!(numeric_null_space(&h, 1, 1e-9).is_err());
    }

    #[test]
    fn det_requires_square() {
        let f = FieldSet::new(DVector::from_element(2, r(1.0)), DMatrix::from_element(2, 3, r(1.0)), 1.0).unwrap();
        assert_eq!(det_s(&f, 0.0).unwrap_err(), Error::NotSquare { n: 2, m: 3 });
        assert_eq!(s_matrix(&f, 0.0).shape(), (2, 3));
    }

    #[test]
    fn diagonal_stokes_determinant() {
        let f = FieldSet::new(DVector::from_element(4, r(1.0)), DMatrix::identity(4, 4), 1.0).unwrap();
        assert!((det_s(&f, 0.0).unwrap() - r(1.0)).norm() < 1e-15);
        let ratio = det_s(&f, 0.7).unwrap() / det_s(&f, 0.0).unwrap();
        assert!((ratio - r((-4.0 * 0.49f64).exp())).norm() < 1e-14);
    }

    #[test]
    fn lambda1_limits() {
        let f = FieldSet::new(
            DVector::from_vec(vec![r(2.0), r(1.0)]),
            DMatrix::from_row_slice(2, 2, &[r(1.0), r(2.0), r(3.0), r(1.0)]),
            1.0,
        )
        .unwrap();
        let sys = SystemSpec::new(DVector::from_element(2, r(1.0)), f.peak_rabi_stokes.clone()).unwrap();
        let target = TargetSpec::last(2);
        let early = analytic_lambda1(&sys, &f, &target, -40.0).unwrap();
        assert!((early.components()[0] - r(1.0)).norm() < 1e-15);
        let late = analytic_lambda1(&sys, &f, &target, 1e4).unwrap();
        assert!((late.components()[4].norm() - 1.0).abs() < 1e-15);
        assert!(late.components()[0].norm() < 1e-15);
        assert_eq!(early.label, NodeLabel::Lambda1);
        assert_eq!(late.label, NodeLabel::Lambda1);
        let mid = analytic_lambda1(&sys, &f, &target, 0.5).unwrap();
        let h = hamiltonian(&sys, &f, 0.5).unwrap();
        assert!((h * mid.components()).norm() < 1e-13);
        assert_eq!(mid.node_count(), 3);
    }

    #[test]
    fn lambda1_rejects_violated_condition() {
        let f = FieldSet::new(DVector::from_vec(vec![r(1.0), r(1.0)]), DMatrix::identity(2, 2), 1.0).unwrap();
        let sys = SystemSpec::new(DVector::from_element(2, r(1.0)), DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(
            analytic_lambda1(&sys, &f, &TargetSpec::last(2), 0.0),
            Err(Error::ConditionViolated { .. })
        ));
    }

    #[test]
    fn constant_hamiltonian_tracks_constant() {
        let mut h: DMatrix<C64> = DMatrix::zeros(4, 4);
        h[(0, 1)] = r(1.0);
        h[(1, 0)] = r(1.0);
        h[(2, 3)] = C64::new(0.0, 2.0);
        h[(3, 2)] = C64::new(0.0, -2.0);
        let seed = {
            let mut v = DVector::zeros(4);
            v[0] = r(1.0 / 2f64.sqrt());
            v[1] = r(1.0 / 2f64.sqrt());
            v
        };
        let grid = uniform_grid(0.0, 1.0, 11);
        let track = track_eigenvector(|_| h.clone(), &seed, &grid, 1, &TrackingOptions::default()).unwrap();
        for v in &track {
            assert!((v.components() - &seed).norm() < 1e-12);
        }
        let chi = nonadiabatic_coupling(&track, &track, &grid).unwrap();
        assert!(chi.iter().all(|d| d.chi < 1e-10));
    }

    #[test]
    fn short_grid_rejected() {
        let v = NullVector::classify(DVector::from_element(3, r(1.0)), 0.0, 1);
        let a = vec![v.clone(), v];
        assert_eq!(
            nonadiabatic_coupling(&a, &a, &[0.0, 1.0]).unwrap_err(),
            Error::GridTooShort { needed: 3, got: 2 }
        );
    }

    #[test]
    fn finite_difference_is_second_order_on_rotation() {
        // a = (cos ωt, sin ωt), b = (−sin ωt, cos ωt): ⟨a|db/dt⟩ = −ω
        let omega = 1.7;
        let grid: Vec<f64> = (0..41).map(|i| 0.1 * i as f64 + 0.002 * (i % 3) as f64).collect();
        let mk = |t: f64, f: &dyn Fn(f64) -> (f64, f64)| {
            let (p, q) = f(t);
            NullVector::classify(DVector::from_vec(vec![r(p), r(q), r(0.0)]), t, 1)
        };
        let a: Vec<_> = grid.iter().map(|&t| mk(t, &|t| ((omega * t).cos(), (omega * t).sin()))).collect();
        let b: Vec<_> = grid.iter().map(|&t| mk(t, &|t| (-(omega * t).sin(), (omega * t).cos()))).collect();
        let chi = nonadiabatic_coupling(&a, &b, &grid).unwrap();
        for d in &chi {
            assert!((d.chi - omega).abs() < 0.05 * omega, "{d:?}");
        }
    }

    #[test]
    fn labels() {
        let v = NullVector::classify(DVector::from_vec(vec![r(0.0), r(1.0), r(1.0), r(0.0), r(0.0)]), 0.0, 2);
        assert_eq!(v.label, NodeLabel::Lambda3);
        let g = NullVector::classify(DVector::from_vec(vec![r(1.0), r(1.0), r(0.0), r(1.0), r(0.0)]), 0.0, 2);
        assert_eq!(g.label, NodeLabel::Generic);
    }
}
