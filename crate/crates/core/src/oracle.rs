//! Ground-truth LP solutions by exhaustive enumeration of basic solutions.

use itertools::Itertools;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::PositiveLP;

/// Limit on the number of basis candidates (column subsets) enumerated.
pub const BASIS_LIMIT: u128 = 1_000_000;

/// Relative tolerance for two vertex costs to count as tied.
pub const TIE_RTOL: f64 = 1e-9;

/// Largest `m` accepted by [`feasibility_distance`] (it visits `2^m` faces).
pub const PROJECTION_MAX_VARIABLES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub optimal_value: f64,
    /// Distinct optimal basic feasible solutions, in enumeration order.
    pub optimal_vertices: Vec<DVector<f64>>,
    /// Union of the supports of the optimal solutions (sorted).
    pub support: Vec<usize>,
    /// Average of the optimal vertices; its support is exactly `support`.
    pub xstar_interior: DVector<f64>,
    /// Number of distinct basic feasible solutions found.
    pub basic_feasible: usize,
}

fn feasibility_tol(lp: &PositiveLP) -> f64 {
    1e-9 * linalg::inf_norm(lp.b()).max(1.0)
}

fn same_point(u: &DVector<f64>, v: &DVector<f64>) -> bool {
    let scale = linalg::inf_norm(u).max(linalg::inf_norm(v)).max(1.0);
    linalg::inf_norm(&(u - v)) <= 1e-9 * scale
}

/// All distinct basic feasible solutions of `Ax = b, x ≥ 0`.
pub fn basic_feasible_solutions(lp: &PositiveLP) -> Result<Vec<DVector<f64>>> {
    let rows = linalg::independent_rows(lp.a());
    let r = rows.len();
    let m = lp.m();
    let count = linalg::binomial(m, r);
    if count > BASIS_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: BASIS_LIMIT,
        });
    }
    let a_s = linalg::select_rows(lp.a(), &rows);
    let b_s = linalg::select(lp.b(), &rows);
    let tol = feasibility_tol(lp);

    let mut found: Vec<DVector<f64>> = Vec::new();
    for cols in (0..m).combinations(r) {
        let basis = linalg::select_columns(&a_s, &cols);
        if linalg::rank(&basis) < r {
            continue;
        }
        let Some(xb) = basis.lu().solve(&b_s) else {
            continue;
        };
        let mut v = DVector::zeros(m);
        for (k, &j) in cols.iter().enumerate() {
            v[j] = xb[k];
        }
        let clean = 1e-12 * linalg::inf_norm(&v).max(1.0);
        if v.iter().any(|&e| e < -clean) {
            continue;
        }
        v.iter_mut().for_each(|e| {
            if e.abs() <= clean {
                *e = 0.0;
            }
        });
        if lp.residual_inf(&v) > tol {
            continue;
        }
        if !found.iter().any(|u| same_point(u, &v)) {
            found.push(v);
        }
    }
    Ok(found)
}

/// Minimum of `cᵀx` over the feasible set, with every optimal vertex, the
/// optimal support `I` and a relative-interior optimal point.
pub fn solve_exhaustive(lp: &PositiveLP) -> Result<OracleResult> {
    let vertices = basic_feasible_solutions(lp)?;
    if vertices.is_empty() {
        return Err(Error::Infeasible);
    }
    let optimal_value = vertices
        .iter()
        .map(|v| lp.cost(v))
        .fold(f64::INFINITY, f64::min);
    let tie = TIE_RTOL * optimal_value.abs().max(1.0);
    let optimal_vertices: Vec<DVector<f64>> = vertices
        .iter()
        .filter(|v| lp.cost(v) - optimal_value <= tie)
        .cloned()
        .collect();
    let mut xstar_interior = DVector::zeros(lp.m());
    for v in &optimal_vertices {
        xstar_interior += v;
    }
    xstar_interior /= optimal_vertices.len() as f64;
    let support = (0..lp.m())
        .filter(|&i| optimal_vertices.iter().any(|v| v[i] > 0.0))
        .collect();
    Ok(OracleResult {
        optimal_value,
        optimal_vertices,
        support,
        xstar_interior,
        basic_feasible: vertices.len(),
    })
}

/// Euclidean distance from `x` to `F = { z : Az = b, z ≥ 0 }`.
///
/// The projection onto `F` is the projection onto the affine hull of the
/// face given by its support, so it suffices to project onto every face
/// `{ Az = b, z_j = 0 for j ∉ S }` and keep the nearest nonnegative result.
pub fn feasibility_distance(lp: &PositiveLP, x: &DVector<f64>) -> Result<f64> {
    let m = lp.m();
    if x.len() != m {
        return Err(Error::Dimension("x has the wrong length".into()));
    }
    if m > PROJECTION_MAX_VARIABLES {
        return Err(Error::TooLarge {
            count: 1u128 << m,
            limit: 1u128 << PROJECTION_MAX_VARIABLES,
        });
    }
    let tol = feasibility_tol(lp);
    let mut best = f64::INFINITY;
    for mask in 0u32..(1u32 << m) {
        let cols: Vec<usize> = (0..m).filter(|&j| mask & (1 << j) != 0).collect();
        let mut z = DVector::zeros(m);
        if !cols.is_empty() {
            let a_s = linalg::select_columns(lp.a(), &cols);
            let x_s = linalg::select(x, &cols);
            let svd = a_s.clone().svd(true, true);
            let shift = match svd.solve(&(&a_s * &x_s - lp.b()), 1e-12) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let z_s = x_s - shift;
            for (k, &j) in cols.iter().enumerate() {
                z[j] = z_s[k];
            }
        }
        if z.iter().any(|&v| v < -1e-12) || lp.residual_inf(&z) > tol {
            continue;
        }
        z.iter_mut().for_each(|v| *v = v.max(0.0));
        best = best.min((x - z).norm());
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Infeasible)
    }
}
