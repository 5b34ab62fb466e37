//! Minimum-energy solutions `q(x)`: the electrical flow of `Af = b` under
//! resistances `c_i / x_i`, restricted to the support of `x`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, spd_solve};
use crate::problem::{PositiveLP, StateVector};

/// Limit on the number of square submatrices enumerated for `M`.
pub const SUBDETERMINANT_LIMIT: u128 = 1_000_000;

/// Relative tolerance on `‖Aq − b‖∞` before a support is declared infeasible.
pub const RESIDUAL_RTOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EnergySolution {
    /// Minimum-energy solution, zero off the support.
    pub q: DVector<f64>,
    /// Potentials of the retained rows, zero on every other row.
    pub p: DVector<f64>,
    /// `bᵀp`.
    pub btp: f64,
    /// `qᵀRq` with `R = diag(c_i / x_i)` on the support.
    pub energy: f64,
    pub support: Vec<usize>,
    /// Rows of `A` kept as a maximal independent set on the support.
    pub rows: Vec<usize>,
    pub condition: f64,
    /// Set when the Laplacian solve fell back to least squares.
    pub fallback: bool,
}

/// Restricted Laplacian `L_B = A_B R_B⁻¹ A_Bᵀ` on the retained rows.
struct Restricted {
    a_sel: DMatrix<f64>,
    conductance: DVector<f64>,
    laplacian: DMatrix<f64>,
    rows: Vec<usize>,
}

fn restrict(lp: &PositiveLP, state: &StateVector) -> Result<Restricted> {
    let support = state.support();
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let a_b = linalg::select_columns(lp.a(), support);
    let rows = linalg::independent_rows(&a_b);
    let a_sel = linalg::select_rows(&a_b, &rows);
    let conductance = DVector::from_iterator(
        support.len(),
        support.iter().map(|&i| state.x()[i] / lp.c()[i]),
    );
    let weighted = DMatrix::from_fn(a_sel.nrows(), a_sel.ncols(), |r, k| {
        a_sel[(r, k)] * conductance[k]
    });
    let laplacian = &weighted * a_sel.transpose();
    Ok(Restricted {
        a_sel,
        conductance,
        laplacian,
        rows,
    })
}

pub fn min_energy_solution(lp: &PositiveLP, state: &StateVector) -> Result<EnergySolution> {
    if state.len() != lp.m() {
        return Err(Error::Dimension(format!(
            "state has {} entries, problem has {} variables",
            state.len(),
            lp.m()
        )));
    }
    let support = state.support();
    let restricted = restrict(lp, state)?;
    let b_sel = linalg::select(lp.b(), &restricted.rows);
    let solved = spd_solve(&restricted.laplacian, &b_sel);

    let flow = (restricted.a_sel.transpose() * &solved.x).component_mul(&restricted.conductance);
    let mut q = DVector::zeros(lp.m());
    let mut energy = 0.0;
    for (k, &i) in support.iter().enumerate() {
        q[i] = flow[k];
        energy += lp.c()[i] / state.x()[i] * flow[k] * flow[k];
    }
    let mut p = DVector::zeros(lp.n());
    for (k, &r) in restricted.rows.iter().enumerate() {
        p[r] = solved.x[k];
    }

    let residual = lp.residual_inf(&q);
    if !(residual <= RESIDUAL_RTOL * linalg::inf_norm(lp.b()).max(1.0)) {
        return Err(Error::InfeasibleOnSupport { residual });
    }

    Ok(EnergySolution {
        btp: b_sel.dot(&solved.x),
        q,
        p,
        energy,
        support: support.to_vec(),
        rows: restricted.rows,
        condition: solved.condition,
        fallback: solved.fallback,
    })
}

/// `M`, the largest absolute subdeterminant of `A`, and `β = M‖b‖₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubdeterminantBound {
    pub m: f64,
    pub beta: f64,
}

pub fn subdeterminant_bound(lp: &PositiveLP) -> Result<SubdeterminantBound> {
    let m = linalg::max_abs_subdeterminant(lp.a(), SUBDETERMINANT_LIMIT)?;
    Ok(SubdeterminantBound {
        m,
        beta: m * linalg::one_norm(lp.b()),
    })
}

/// Both sides of the potential bound `‖A_Bᵀp_B‖∞ ≤ ‖c‖₁·M/ε` and of the
/// per-column bound `‖A_Bᵀ L_B⁻¹ A_i‖∞ ≤ (c_i/x_i)·M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialBoundReport {
    /// `min_{i ∈ supp(y)} x_i / y_i`.
    pub epsilon: f64,
    pub potential_norm: f64,
    pub potential_bound: f64,
    /// Largest ratio of column-bound left side to right side over the support.
    pub column_ratio: f64,
}

impl PotentialBoundReport {
    pub fn holds(&self) -> bool {
        let slack = 1e-9 * self.potential_bound.max(1.0);
        self.potential_norm <= self.potential_bound + slack && self.column_ratio <= 1.0 + 1e-9
    }
}

/// Evaluates the potential bounds at `state` given a feasible `y` whose
/// support lies inside the support of `state`.
pub fn potential_bound_check(
    lp: &PositiveLP,
    state: &StateVector,
    y: &DVector<f64>,
    bound: SubdeterminantBound,
) -> Result<PotentialBoundReport> {
    if y.len() != lp.m() {
        return Err(Error::Dimension("y has the wrong length".into()));
    }
    let tol = RESIDUAL_RTOL * linalg::inf_norm(lp.b()).max(1.0);
    if y.iter().any(|&v| v < 0.0) || lp.residual_inf(y) > tol {
        return Err(Error::InvalidState("y is not feasible".into()));
    }
    let mut epsilon = f64::INFINITY;
    for (i, &yi) in y.iter().enumerate() {
        if yi > 0.0 {
            if !state.in_support(i) {
                return Err(Error::InvalidState(format!(
                    "supp(y) contains {i}, which is outside supp(x)"
                )));
            }
            epsilon = epsilon.min(state.x()[i] / yi);
        }
    }

    let sol = min_energy_solution(lp, state)?;
    let support = state.support();
    let a_b = linalg::select_columns(lp.a(), support);
    let potential_norm = linalg::inf_norm(&(a_b.transpose() * &sol.p));
    let potential_bound = lp.cost_one_norm() * bound.m / epsilon;

    let restricted = restrict(lp, state)?;
    let mut column_ratio = 0.0_f64;
    for (k, &i) in support.iter().enumerate() {
        let col = restricted.a_sel.column(k).into_owned();
        let z = spd_solve(&restricted.laplacian, &col).x;
        let lhs = linalg::inf_norm(&(restricted.a_sel.transpose() * z));
        let rhs = lp.c()[i] / state.x()[i] * bound.m;
        column_ratio = column_ratio.max(lhs / rhs);
    }

    Ok(PotentialBoundReport {
        epsilon,
        potential_norm,
        potential_bound,
        column_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{fig1, ladder_family, PositiveLP};
    use approx::assert_abs_diff_eq;

    fn state(x: &[f64]) -> StateVector {
        StateVector::from_slice(x).unwrap()
    }

    #[test]
    fn fig1_unit_state() {
        let sol = min_energy_solution(&fig1([1.0, 1.0]), &state(&[1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(sol.q[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.q[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.btp, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.energy, 2.0 / 3.0, epsilon = 1e-15);
        assert!(!sol.fallback);
    }

    #[test]
    fn vertex_is_its_own_flow() {
        let sol = min_energy_solution(&fig1([1.0, 1.0]), &state(&[1.0, 0.0])).unwrap();
        assert_eq!(sol.support, vec![0]);
        assert_abs_diff_eq!(sol.q[0], 1.0, epsilon = 1e-15);
        assert_eq!(sol.q[1], 0.0);
    }

    #[test]
    fn empty_support() {
        assert!(matches!(
            min_energy_solution(&fig1([1.0, 1.0]), &state(&[0.0, 0.0])),
            Err(Error::EmptySupport)
        ));
    }

    #[test]
    fn infeasible_support() {
        // x1 + x2 = 1 and x2 = 2 cannot hold with x1 alone.
        let lp = PositiveLP::from_rows(
            "t",
            &[vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            min_energy_solution(&lp, &state(&[1.0, 0.0])),
            Err(Error::InfeasibleOnSupport { .. })
        ));
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let lp = PositiveLP::from_rows(
            "dup",
            &[vec![1.0, 1.0], vec![1.0, 1.0]],
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let sol = min_energy_solution(&lp, &state(&[1.0, 1.0])).unwrap();
        assert_eq!(sol.rows, vec![0]);
        assert_eq!(sol.p[1], 0.0);
        assert_abs_diff_eq!(sol.q[0], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn bound_fig1_and_path() {
        let b = subdeterminant_bound(&fig1([1.0, 1.0])).unwrap();
        assert_eq!(b, SubdeterminantBound { m: 1.0, beta: 1.0 });
        let lp = PositiveLP::from_rows(
            "path",
            &[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]],
            vec![1.0, 1.0],
            vec![1.0; 3],
            vec![1.0; 3],
        )
        .unwrap();
        assert_abs_diff_eq!(subdeterminant_bound(&lp).unwrap().m, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ladder_is_unimodular() {
        let lp = ladder_family(3).unwrap();
        assert_abs_diff_eq!(subdeterminant_bound(&lp).unwrap().m, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn potential_bound_fig1() {
        let lp = fig1([1.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, 0.0]);
        let bound = subdeterminant_bound(&lp).unwrap();
        let r = potential_bound_check(&lp, &state(&[1.0, 1.0]), &y, bound).unwrap();
        assert_eq!(r.epsilon, 1.0);
        assert_eq!(r.potential_bound, 3.0);
        assert_abs_diff_eq!(r.potential_norm, 2.0 / 3.0, epsilon = 1e-15);
        assert!(r.holds());

        let at_opt = potential_bound_check(&lp, &state(&[1.0, 0.0]), &y, bound).unwrap();
        assert_eq!(at_opt.epsilon, 1.0);
        assert!(at_opt.holds());
    }

    #[test]
    fn potential_bound_rejects_infeasible_y() {
        let lp = fig1([1.0, 1.0]);
        let bound = subdeterminant_bound(&lp).unwrap();
        let y = DVector::from_vec(vec![2.0, 0.0]);
        assert!(potential_bound_check(&lp, &state(&[1.0, 1.0]), &y, bound).is_err());
    }
}
