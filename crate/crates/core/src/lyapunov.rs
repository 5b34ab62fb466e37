//! Lyapunov function `V(x) = 2cᵀD⁻¹x − Σ_{i∈I} (c_i x*_i / d_i) ln x_i`, its
//! closed-form time derivative, the barrier `W`, and trajectory audits.

use std::fmt;

use nalgebra::DVector;

use crate::dynamics::Trajectory;
use crate::energy::{self, EnergySolution};
use crate::error::{Error, Result};
use crate::oracle::OracleResult;
use crate::problem::{PositiveLP, StateVector};

/// An optimal solution `x*` whose support is the optimal support `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReference {
    pub xstar: DVector<f64>,
    /// `I = supp(x*)`, sorted.
    pub support: Vec<usize>,
    pub optimal_value: f64,
}

impl LyapunovReference {
    pub fn new(lp: &PositiveLP, xstar: DVector<f64>) -> Self {
        let support = (0..xstar.len()).filter(|&i| xstar[i] > 0.0).collect();
        let optimal_value = lp.cost(&xstar);
        LyapunovReference {
            xstar,
            support,
            optimal_value,
        }
    }

    /// Uses the oracle's relative-interior optimum, so `supp(x*) = I`.
    pub fn from_oracle(lp: &PositiveLP, oracle: &OracleResult) -> Self {
        Self::new(lp, oracle.xstar_interior.clone())
    }
}

fn check_positive_on(x: &DVector<f64>, support: &[usize]) -> Result<()> {
    match support.iter().find(|&&i| !(x[i] > 0.0)) {
        Some(&i) => Err(Error::BoundaryContact(i)),
        None => Ok(()),
    }
}

pub fn lyapunov_value(
    lp: &PositiveLP,
    x: &DVector<f64>,
    reference: &LyapunovReference,
) -> Result<f64> {
    check_positive_on(x, &reference.support)?;
    let (c, d) = (lp.c(), lp.d());
    let linear: f64 = (0..lp.m()).map(|i| c[i] * x[i] / d[i]).sum();
    let log_part: f64 = reference
        .support
        .iter()
        .map(|&i| c[i] * reference.xstar[i] / d[i] * x[i].ln())
        .sum();
    Ok(2.0 * linear - log_part)
}

/// The three terms `cᵀq ≤ √(cᵀx)·√(bᵀp) ≤ (cᵀx + bᵀp)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchySchwarzChain {
    pub ctq: f64,
    pub geometric: f64,
    pub arithmetic: f64,
}

impl CauchySchwarzChain {
    /// Whether the chain is nondecreasing within relative `rtol`.
    pub fn is_monotone(&self, rtol: f64) -> bool {
        let scale = self.arithmetic.abs().max(1.0);
        self.ctq <= self.geometric + rtol * scale
            && self.geometric <= self.arithmetic + rtol * scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    /// `2(cᵀq − cᵀx) + cᵀx* − bᵀp`.
    pub vdot: f64,
    pub chain: CauchySchwarzChain,
    pub ctx: f64,
    pub ctq: f64,
    pub btp: f64,
}

/// Closed-form derivative from an already computed energy solution.
pub fn derivative_from_energy(
    lp: &PositiveLP,
    x: &DVector<f64>,
    sol: &EnergySolution,
    reference: &LyapunovReference,
) -> Derivative {
    let ctx = lp.cost(x);
    let ctq = lp.cost(&sol.q);
    let btp = sol.btp;
    Derivative {
        vdot: 2.0 * (ctq - ctx) + reference.optimal_value - btp,
        chain: CauchySchwarzChain {
            ctq,
            geometric: ctx.max(0.0).sqrt() * btp.max(0.0).sqrt(),
            arithmetic: 0.5 * (ctx + btp),
        },
        ctx,
        ctq,
        btp,
    }
}

pub fn lyapunov_derivative(
    lp: &PositiveLP,
    state: &StateVector,
    reference: &LyapunovReference,
) -> Result<Derivative> {
    check_positive_on(state.x(), &reference.support)?;
    let sol = energy::min_energy_solution(lp, state)?;
    Ok(derivative_from_energy(lp, state.x(), &sol, reference))
}

/// `∇V · D(q − x)` evaluated coordinate-wise; an independent route to `V̇`.
pub fn derivative_by_chain_rule(
    lp: &PositiveLP,
    x: &DVector<f64>,
    q: &DVector<f64>,
    reference: &LyapunovReference,
) -> f64 {
    let c = lp.c();
    (0..lp.m())
        .filter(|&i| x[i] > 0.0)
        .map(|i| {
            let grad_times_d = 2.0 * c[i] - c[i] * reference.xstar[i] / x[i];
            grad_times_d * (q[i] - x[i])
        })
        .sum()
}

/// `W(x) = Σ_{j∈supp(y)} (c_j y_j / d_j) ln x_j` for an optimal `y`.
pub fn barrier_value(lp: &PositiveLP, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let support: Vec<usize> = (0..y.len()).filter(|&i| y[i] > 0.0).collect();
    check_positive_on(x, &support)?;
    Ok(support
        .iter()
        .map(|&j| lp.c()[j] * y[j] / lp.d()[j] * x[j].ln())
        .sum())
}

/// Explicit lower bound on `x_h(t)`, `h ∈ I`, implied by `V(x(t)) ≤ V(x(0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFloor {
    /// Upper bound `K` on `ln(1 / x_h(t))`.
    pub log_inverse_bound: f64,
    /// `exp(−K)`.
    pub floor: f64,
}

/// Assembles the bound
/// `ln(1/x_h(t)) ≤ d_max/(c_min x*_min) · ( 2m c_max x_max(0)/d_min
///   + (c_max/d_min) β ln(1/δ) + ((m−1) c_max/d_min) β ln(max(β, x_max(0))/δ) )`
/// with `δ = min(1, min_{i∈I} x_i(0))`.
pub fn boundary_floor(
    lp: &PositiveLP,
    x0: &DVector<f64>,
    reference: &LyapunovReference,
    beta: f64,
) -> BoundaryFloor {
    let fold = |v: &DVector<f64>| {
        v.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &e| {
            (lo.min(e), hi.max(e))
        })
    };
    let (c_min, c_max) = fold(lp.c());
    let (d_min, d_max) = fold(lp.d());
    let m = lp.m() as f64;
    let x_max0 = x0.iter().fold(0.0_f64, |a, &v| a.max(v));
    let xstar_min = reference
        .support
        .iter()
        .map(|&i| reference.xstar[i])
        .fold(f64::INFINITY, f64::min);
    let delta = reference
        .support
        .iter()
        .map(|&i| x0[i])
        .fold(1.0_f64, f64::min);
    let upper = beta.max(x_max0);
    let inner = 2.0 * m * c_max * x_max0 / d_min
        + c_max / d_min * beta * (1.0 / delta).ln()
        + (m - 1.0) * c_max / d_min * beta * (upper / delta).ln();
    let k = d_max / (c_min * xstar_min) * inner;
    BoundaryFloor {
        log_inverse_bound: k,
        floor: (-k).exp(),
    }
}

/// Tolerances for [`monotonicity_audit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditConfig {
    /// Per-step allowance for `V` increases is `v_constant · h² · max(1, |V(x₀)|)`.
    pub v_constant: f64,
    /// Allowance for `|V̇_fd − V̇|` is `fd_constant · h · d_max² · max(1, |V(x₀)|)`;
    /// the second derivative of `V` carries two factors of `d`.
    pub fd_constant: f64,
    /// `|V̇|` at the final state must not exceed `10 · gap_tolerance`.
    pub gap_tolerance: f64,
    /// Base allowance below `−cᵀy` for the discrete slope of `W`.
    pub barrier_tolerance: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            v_constant: 10.0,
            fd_constant: 10.0,
            gap_tolerance: 1e-6,
            barrier_tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub records: usize,
    pub v_initial: f64,
    pub v_final: f64,
    /// Allowed increase of `V` per Euler step.
    pub v_step_tolerance: f64,
    pub max_v_increase: f64,
    /// Record indices where `V` rose by more than the allowance.
    pub v_violations: Vec<usize>,
    pub max_vdot: f64,
    pub fd_tolerance: f64,
    pub max_fd_discrepancy: f64,
    pub final_vdot: f64,
    pub final_vdot_tolerance: f64,
    pub barrier_min_slope: f64,
    pub barrier_slope_bound: f64,
    /// `V̇` and the finite-difference slope at every record.
    pub vdot_analytic: Vec<f64>,
    pub vdot_fd: Vec<f64>,
    pub barrier: Vec<f64>,
}

impl AuditReport {
    pub fn v_monotone(&self) -> bool {
        self.v_violations.is_empty()
    }
    pub fn fd_agrees(&self) -> bool {
        self.max_fd_discrepancy <= self.fd_tolerance
    }
    pub fn vdot_vanishes(&self) -> bool {
        self.final_vdot.abs() <= self.final_vdot_tolerance
    }
    pub fn barrier_ok(&self) -> bool {
        self.barrier_min_slope >= self.barrier_slope_bound
    }
    pub fn passes(&self) -> bool {
        self.v_monotone() && self.fd_agrees() && self.vdot_vanishes() && self.barrier_ok()
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(f, "records: {}", self.records)?;
        writeln!(f, "V: {:.12e} -> {:.12e}", self.v_initial, self.v_final)?;
        writeln!(
            f,
            "V non-increasing: {} (max increase {:.3e}, allowance {:.3e}, violations {})",
            verdict(self.v_monotone()),
            self.max_v_increase,
            self.v_step_tolerance,
            self.v_violations.len()
        )?;
        writeln!(f, "max Vdot: {:.3e}", self.max_vdot)?;
        writeln!(
            f,
            "finite-difference agreement: {} (max discrepancy {:.3e}, allowance {:.3e})",
            verdict(self.fd_agrees()),
            self.max_fd_discrepancy,
            self.fd_tolerance
        )?;
        writeln!(
            f,
            "final Vdot: {} ({:.3e}, allowance {:.3e})",
            verdict(self.vdot_vanishes()),
            self.final_vdot,
            self.final_vdot_tolerance
        )?;
        writeln!(
            f,
            "barrier slope: {} (min {:.6e}, bound {:.6e})",
            verdict(self.barrier_ok()),
            self.barrier_min_slope,
            self.barrier_slope_bound
        )
    }
}

/// Central differences of `values` over `times`; one-sided at the ends.
pub fn finite_difference(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (lo, hi) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            (values[hi] - values[lo]) / (times[hi] - times[lo])
        })
        .collect()
}

/// Audits a recorded trajectory: `V` non-increasing up to `O(h²)` per step,
/// finite-difference slope of `V` within `O(h)` of the closed form on the
/// interior, `V̇ → 0` at the end, and the barrier slope bound `Ẇ ≥ −cᵀy`.
pub fn monotonicity_audit(
    trajectory: &Trajectory,
    lp: &PositiveLP,
    reference: &LyapunovReference,
    config: &AuditConfig,
) -> Result<AuditReport> {
    let records = &trajectory.records;
    let h = trajectory.h;
    let mut times = Vec::with_capacity(records.len());
    let mut v = Vec::with_capacity(records.len());
    let mut vdot = Vec::with_capacity(records.len());
    let mut barrier = Vec::with_capacity(records.len());
    for rec in records {
        let state = StateVector::from_parts(rec.x.clone(), rec.support());
        times.push(rec.time);
        v.push(lyapunov_value(lp, &rec.x, reference)?);
        vdot.push(lyapunov_derivative(lp, &state, reference)?.vdot);
        barrier.push(barrier_value(lp, &rec.x, &reference.xstar)?);
    }
    let scale = v.first().map_or(1.0, |v0| v0.abs().max(1.0));

    let v_step_tolerance = config.v_constant * h * h * scale;
    let mut max_v_increase = f64::NEG_INFINITY;
    let mut v_violations = Vec::new();
    for k in 1..v.len() {
        let stride = (records[k].step - records[k - 1].step) as f64;
        let allowance = v_step_tolerance * stride;
        let inc = v[k] - v[k - 1];
        max_v_increase = max_v_increase.max(inc);
        if inc > allowance {
            v_violations.push(k);
        }
    }

    let fd = finite_difference(&times, &v);
    let max_fd_discrepancy = (1..fd.len().saturating_sub(1))
        .map(|k| (fd[k] - vdot[k]).abs())
        .fold(0.0_f64, f64::max);

    let cty = lp.cost(&reference.xstar);
    let d_max = lp.d().iter().fold(0.0_f64, |a, &b| a.max(b));
    let barrier_min_slope = barrier
        .windows(2)
        .zip(times.windows(2))
        .map(|(w, t)| (w[1] - w[0]) / (t[1] - t[0]))
        .fold(f64::INFINITY, f64::min);
    let barrier_slope_bound = -cty - config.barrier_tolerance * cty.max(1.0) - h * d_max * cty;

    Ok(AuditReport {
        records: records.len(),
        v_initial: v.first().copied().unwrap_or(f64::NAN),
        v_final: v.last().copied().unwrap_or(f64::NAN),
        v_step_tolerance,
        max_v_increase: if v.len() > 1 { max_v_increase } else { 0.0 },
        v_violations,
        max_vdot: vdot.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        fd_tolerance: config.fd_constant * h * d_max * d_max * scale,
        max_fd_discrepancy,
        final_vdot: vdot.last().copied().unwrap_or(f64::NAN),
        final_vdot_tolerance: 10.0 * config.gap_tolerance,
        barrier_min_slope: if barrier.len() > 1 {
            barrier_min_slope
        } else {
            0.0
        },
        barrier_slope_bound,
        vdot_analytic: vdot,
        vdot_fd: fd,
        barrier,
    })
}
