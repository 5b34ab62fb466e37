//! Small dense linear-algebra helpers shared by the energy solver and the
//! oracle, so both agree on rank decisions for degenerate instances.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for declaring a row dependent on the rows already kept.
pub const RANK_RTOL: f64 = 1e-10;

/// Jacobi-scaled condition estimate above which the SPD solve falls back to
/// least squares.
pub const COND_LIMIT: f64 = 1e12;

/// Greedy selection of a maximal independent set of rows, scanned in index
/// order. A row is kept when its component orthogonal to the kept rows is
/// larger than `RANK_RTOL` times its own norm. Two passes of Gram-Schmidt
/// keep the orthogonal basis accurate.
pub fn independent_rows(a: &DMatrix<f64>) -> Vec<usize> {
    let max_norm = (0..a.nrows())
        .map(|i| a.row(i).norm())
        .fold(0.0_f64, f64::max);
    if max_norm == 0.0 {
        return Vec::new();
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    for i in 0..a.nrows() {
        let row: DVector<f64> = a.row(i).transpose();
        let norm = row.norm();
        if norm <= 1e-14 * max_norm {
            continue;
        }
        let mut r = row.clone();
        for _ in 0..2 {
            for e in &basis {
                let proj = e.dot(&r);
                r.axpy(-proj, e, 1.0);
            }
        }
        let rn = r.norm();
        if rn > RANK_RTOL * norm {
            basis.push(r / rn);
            kept.push(i);
        }
    }
    kept
}

/// Numerical rank, consistent with [`independent_rows`].
pub fn rank(a: &DMatrix<f64>) -> usize {
    independent_rows(a).len()
}

/// Matrix made of the given rows of `a`.
pub fn select_rows(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Matrix made of the given columns of `a`.
pub fn select_columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

pub fn select(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn one_norm(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Outcome of [`spd_solve`].
#[derive(Debug, Clone)]
pub struct SpdSolution {
    pub x: DVector<f64>,
    /// Condition estimate of the Jacobi-scaled matrix.
    pub condition: f64,
    /// True when the Cholesky route was rejected and least squares was used.
    pub fallback: bool,
}

/// Solves `l x = b` for symmetric positive semidefinite `l`.
///
/// The matrix is first scaled symmetrically to unit diagonal; the condition
/// of the scaled matrix is estimated from the Cholesky factor. Above
/// [`COND_LIMIT`], or when Cholesky fails, an SVD least-squares solve is used
/// instead. One step of iterative refinement is applied on the Cholesky path.
pub fn spd_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> SpdSolution {
    let n = l.nrows();
    if n == 0 {
        return SpdSolution {
            x: DVector::zeros(0),
            condition: 1.0,
            fallback: false,
        };
    }
    let scale = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let d = l[(i, i)];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        }),
    );
    let scaled = DMatrix::from_fn(n, n, |i, j| l[(i, j)] * scale[i] * scale[j]);
    let rhs = b.component_mul(&scale);

    if let Some(chol) = scaled.clone().cholesky() {
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let condition = if lo > 0.0 {
            (hi / lo).powi(2)
        } else {
            f64::INFINITY
        };
        if condition <= COND_LIMIT {
            let mut y = chol.solve(&rhs);
            let r = &rhs - &scaled * &y;
            y += chol.solve(&r);
            return SpdSolution {
                x: y.component_mul(&scale),
                condition,
                fallback: false,
            };
        }
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let y = svd
        .solve(&rhs, smax * 1e-14)
        .unwrap_or_else(|_| DVector::zeros(n));
    SpdSolution {
        x: y.component_mul(&scale),
        condition,
        fallback: true,
    }
}

/// Number of square submatrices of an `n x m` matrix.
pub fn square_submatrix_count(n: usize, m: usize) -> u128 {
    (1..=n.min(m))
        .map(|k| binomial(n, k) * binomial(m, k))
        .sum()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Maximum absolute determinant over all square submatrices of `a`,
/// by exhaustive enumeration. Fails when the number of submatrices exceeds
/// `limit`.
pub fn max_abs_subdeterminant(a: &DMatrix<f64>, limit: u128) -> Result<f64> {
    let (n, m) = a.shape();
    let count = square_submatrix_count(n, m);
    if count > limit {
        return Err(Error::TooLarge { count, limit });
    }
    let mut best = 0.0_f64;
    for k in 1..=n.min(m) {
        for rows in (0..n).combinations(k) {
            let sub_rows = select_rows(a, &rows);
            for cols in (0..m).combinations(k) {
                let sub = select_columns(&sub_rows, &cols);
                best = best.max(sub.determinant().abs());
            }
        }
    }
    Ok(best)
}
