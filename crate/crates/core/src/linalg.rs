//! Small dense complex linear algebra: LU determinants, cofactors and the
//! nonsingular sub-block search used by the feasibility check.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::C64;

/// Relative singularity cutoff: `|det| / Π‖row‖ < SINGULAR_RTOL` counts as zero.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Determinant by LU factorization with partial pivoting.
///
/// Empty matrices have determinant one.
pub fn lu_determinant(a: &DMatrix<C64>) -> C64 {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.nrows();
    let mut lu = a.clone();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let (pivot, mag) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            lu.swap_rows(pivot, col);
            det = -det;
        }
        let p = lu[(col, col)];
        det *= p;
        for r in col + 1..n {
            let factor = lu[(r, col)] / p;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for c in col + 1..n {
                let v = lu[(col, c)];
                lu[(r, c)] -= factor * v;
            }
        }
    }
    det
}

/// Submatrix with row `row` and column `col` deleted.
pub fn minor_matrix(a: &DMatrix<C64>, row: usize, col: usize) -> DMatrix<C64> {
    a.clone().remove_row(row).remove_column(col)
}

/// Cofactor matrix `A_kj = (-1)^(k+j) Δ_kj`, where `Δ_kj` is the determinant of
/// the complementary minor. Defined for singular input as well.
pub fn cofactors(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert!(a.is_square(), "cofactors of a non-square matrix");
    let n = a.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    }
    DMatrix::from_fn(n, n, |k, j| {
        let minor = lu_determinant(&minor_matrix(a, k, j));
        if (k + j) % 2 == 0 {
            minor
        } else {
            -minor
        }
    })
}

/// The rows `rows` of `a`, in the given order.
pub fn select_rows(a: &DMatrix<C64>, rows: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(rows.len(), a.ncols(), |r, c| a[(rows[r], c)])
}

/// Scale-free singularity measure `|det B| / Π_k ‖row_k(B)‖` (Hadamard ratio, in `[0, 1]`).
pub fn hadamard_ratio(b: &DMatrix<C64>) -> f64 {
    let det = lu_determinant(b).norm();
    let denom: f64 = b.row_iter().map(|r| r.norm()).product();
    if denom == 0.0 {
        0.0
    } else {
        det / denom
    }
}

/// Chooses `ncols` rows of a tall `nrows × ncols` matrix whose square block is
/// as well-conditioned as a greedy search can find.
///
/// Runs Gaussian elimination with pivoting over the whole remaining column at
/// every step, so each pivot maximizes the magnitude of the next factor of the
/// block determinant. Returns the chosen rows (sorted ascending) together with
/// the block determinant, or `None` when the matrix is wider than it is tall.
pub fn greedy_square_block(a: &DMatrix<C64>) -> Option<(Vec<usize>, C64)> {
    let (n, m) = a.shape();
    if m > n {
        return None;
    }
    let mut work = a.clone();
    let mut free: Vec<usize> = (0..n).collect();
    let mut chosen = Vec::with_capacity(m);
    for col in 0..m {
        let (slot, _) = free
            .iter()
            .enumerate()
            .map(|(i, &r)| (i, work[(r, col)].norm()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        let pivot_row = free.remove(slot);
        chosen.push(pivot_row);
        let p = work[(pivot_row, col)];
        if p == C64::new(0.0, 0.0) {
            continue;
        }
        for &r in &free {
            let factor = work[(r, col)] / p;
            for c in col..m {
                let v = work[(pivot_row, c)];
                work[(r, c)] -= factor * v;
            }
        }
    }
    chosen.sort_unstable();
    let det = lu_determinant(&select_rows(a, &chosen));
    Some((chosen, det))
}
