//! Forward-Euler integration of `ẋ = D(q(x) − x)` restricted to the support
//! of `x`, with per-step monitors and stopping rules.

use nalgebra::DVector;

use crate::energy::{self, EnergySolution};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lyapunov::{self, LyapunovReference};
use crate::problem::{zero_threshold, PositiveLP, StateVector};

/// `f_i = d_i (q_i − x_i)` on the support, `0` elsewhere.
pub fn rhs(lp: &PositiveLP, state: &StateVector) -> Result<DVector<f64>> {
    let sol = energy::min_energy_solution(lp, state)?;
    Ok(rhs_from_energy(lp, state, &sol))
}

fn rhs_from_energy(lp: &PositiveLP, state: &StateVector, sol: &EnergySolution) -> DVector<f64> {
    let mut f = DVector::zeros(lp.m());
    for &i in state.support() {
        f[i] = lp.d()[i] * (sol.q[i] - state.x()[i]);
    }
    f
}

/// Result of one Euler step.
#[derive(Debug, Clone)]
pub struct Step {
    pub state: StateVector,
    /// Coordinates that crossed the zero threshold and left the support.
    pub dropped: Vec<usize>,
    /// Protected coordinates that would have crossed zero; they are held at
    /// the threshold instead.
    pub held: Vec<usize>,
}

/// `x_i ← (1 − h d_i) x_i + h d_i q_i` on the support, given `q = q(x)`.
///
/// Coordinates driven to or below the zero threshold are set to zero and
/// dropped, unless listed in `protected` (the optimal support, when known).
pub fn euler_update(
    lp: &PositiveLP,
    state: &StateVector,
    sol: &EnergySolution,
    h: f64,
    protected: &[usize],
) -> Step {
    let mut next = state.x().clone();
    for &i in state.support() {
        let hd = h * lp.d()[i];
        next[i] = (1.0 - hd) * state.x()[i] + hd * sol.q[i];
    }
    let tol = zero_threshold(&next);
    let mut support = Vec::with_capacity(state.support().len());
    let mut dropped = Vec::new();
    let mut held = Vec::new();
    for &i in state.support() {
        if next[i] > tol {
            support.push(i);
        } else if protected.contains(&i) {
            next[i] = tol;
            support.push(i);
            held.push(i);
        } else {
            next[i] = 0.0;
            dropped.push(i);
        }
    }
    Step {
        state: StateVector::from_parts(next, support),
        dropped,
        held,
    }
}

/// One Euler step from `state`.
pub fn euler_step(lp: &PositiveLP, state: &StateVector, h: f64) -> Result<StateVector> {
    let sol = energy::min_energy_solution(lp, state)?;
    let step = euler_update(lp, state, &sol, h, &[]);
    if step.state.x().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(0));
    }
    Ok(step.state)
}

/// When to stop integrating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// `‖Ax − b‖∞ ≤ feasibility` and `|cᵀx − cᵀq| ≤ gap`.
    Converged { feasibility: f64, gap: f64 },
    /// `|cᵀx − target| ≤ tolerance`.
    CostWithin { target: f64, tolerance: f64 },
    /// Run exactly `max_steps` steps.
    Never,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::Converged {
            feasibility: 1e-6,
            gap: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub h: f64,
    /// Target accuracy used by the default iteration budget.
    pub epsilon: f64,
    pub max_steps: usize,
    pub record_every: usize,
    pub stop: StopRule,
    /// Overrides the default divergence limit `10⁶ · max(‖x₀‖∞, β)`.
    pub divergence_limit: Option<f64>,
}

/// `h = 1/(2‖c‖₁)`.
pub fn default_step_size(lp: &PositiveLP) -> f64 {
    1.0 / (2.0 * lp.cost_one_norm())
}

/// `⌈(1/h) ln(‖c‖₁ / ε)⌉`.
pub fn iteration_budget(lp: &PositiveLP, h: f64, epsilon: f64) -> usize {
    ((1.0 / h) * (lp.cost_one_norm() / epsilon).ln())
        .ceil()
        .max(0.0) as usize
}

impl IntegratorConfig {
    pub fn for_problem(lp: &PositiveLP) -> Self {
        let h = default_step_size(lp);
        let epsilon = 0.1;
        IntegratorConfig {
            h,
            epsilon,
            max_steps: iteration_budget(lp, h, epsilon),
            record_every: 1,
            stop: StopRule::default(),
            divergence_limit: None,
        }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }
    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }
    pub fn with_record_every(mut self, record_every: usize) -> Self {
        self.record_every = record_every.max(1);
        self
    }
    pub fn with_stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }

    /// Ensures `0 < h d_i ≤ 1`; returns the warning issued when `h` had to
    /// be clamped.
    pub fn sanitize(&mut self, lp: &PositiveLP) -> Result<Option<String>> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "step size must be positive, got {}",
                self.h
            )));
        }
        let d_max = lp.d().iter().fold(0.0_f64, |a, &b| a.max(b));
        if self.h * d_max > 1.0 {
            let old = self.h;
            self.h = 1.0 / d_max;
            return Ok(Some(format!(
                "step size {old} violates h*d_i <= 1; clamped to {}",
                self.h
            )));
        }
        Ok(None)
    }
}

/// Monitors recorded at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub step: usize,
    /// Continuous time `step · h`.
    pub time: f64,
    pub x: DVector<f64>,
    pub ctx: f64,
    pub residual_inf: f64,
    /// `NaN` when no Lyapunov reference was supplied.
    pub v: f64,
    pub vdot: f64,
    pub btp: f64,
    pub ctq: f64,
}

impl Record {
    pub fn support(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&i| self.x[i] > 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub records: Vec<Record>,
    /// Number of Euler steps taken.
    pub steps: usize,
    pub outcome: Outcome,
    /// `(step, coordinate)` pairs dropped from the support.
    pub dropped: Vec<(usize, usize)>,
    /// `(step, coordinate)` pairs of protected coordinates held at the threshold.
    pub held: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_record(&self) -> &Record {
        self.records
            .last()
            .expect("a trajectory always records its final state")
    }
    pub fn final_state(&self) -> &DVector<f64> {
        &self.final_record().x
    }
    pub fn converged(&self) -> bool {
        self.outcome == Outcome::Converged
    }
}

fn monitors(
    lp: &PositiveLP,
    step: usize,
    h: f64,
    state: &StateVector,
    sol: &EnergySolution,
    reference: Option<&LyapunovReference>,
) -> Result<Record> {
    let x = state.x();
    let (v, vdot) = match reference {
        Some(r) => (
            lyapunov::lyapunov_value(lp, x, r)?,
            lyapunov::derivative_from_energy(lp, x, sol, r).vdot,
        ),
        None => (f64::NAN, f64::NAN),
    };
    Ok(Record {
        step,
        time: step as f64 * h,
        x: x.clone(),
        ctx: lp.cost(x),
        residual_inf: lp.residual_inf(x),
        v,
        vdot,
        btp: sol.btp,
        ctq: lp.cost(&sol.q),
    })
}

fn default_divergence_limit(lp: &PositiveLP, x0: &StateVector) -> f64 {
    let beta = energy::subdeterminant_bound(lp)
        .map(|b| b.beta)
        .unwrap_or_else(|_| linalg::one_norm(lp.b()));
    1e6 * linalg::inf_norm(x0.x()).max(beta)
}

/// Runs Euler steps from `x0` until the stop rule fires or `max_steps` steps
/// have been taken. With a reference the Lyapunov monitors are filled in and
/// the optimal support is protected from zero-crossing.
pub fn integrate(
    lp: &PositiveLP,
    x0: &StateVector,
    config: &IntegratorConfig,
    reference: Option<&LyapunovReference>,
) -> Result<Trajectory> {
    let mut config = config.clone();
    let mut warnings: Vec<String> = config.sanitize(lp)?.into_iter().collect();
    if x0.len() != lp.m() {
        return Err(Error::Dimension(format!(
            "initial state has {} entries, problem has {} variables",
            x0.len(),
            lp.m()
        )));
    }
    let protected: &[usize] = match reference {
        Some(r) => {
            if !x0.covers(&r.support) {
                return Err(Error::InvalidState(
                    "initial state must be positive on the optimal support".into(),
                ));
            }
            &r.support
        }
        None => &[],
    };
    let limit = config
        .divergence_limit
        .unwrap_or_else(|| default_divergence_limit(lp, x0));
    let h = config.h;

    let mut records = Vec::new();
    let mut dropped = Vec::new();
    let mut held = Vec::new();
    let mut state = x0.clone();
    let mut step = 0;
    let outcome = loop {
        let sol = energy::min_energy_solution(lp, &state)?;
        if sol.fallback && !warnings.iter().any(|w| w.starts_with("least-squares")) {
            warnings.push(format!("least-squares fallback first used at step {step}"));
        }
        let ctx = lp.cost(state.x());
        let done = match config.stop {
            StopRule::Converged { feasibility, gap } => {
                lp.residual_inf(state.x()) <= feasibility && (ctx - lp.cost(&sol.q)).abs() <= gap
            }
            StopRule::CostWithin { target, tolerance } => (ctx - target).abs() <= tolerance,
            StopRule::Never => false,
        };
        let last = done || step >= config.max_steps;
        if last || step % config.record_every == 0 {
            records.push(monitors(lp, step, h, &state, &sol, reference)?);
        }
        if done {
            break Outcome::Converged;
        }
        if last {
            break Outcome::StepLimit;
        }

        let next = euler_update(lp, &state, &sol, h, protected);
        step += 1;
        if next.state.x().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(step));
        }
        let norm = linalg::inf_norm(next.state.x());
        if norm > limit {
            return Err(Error::Diverged { step, norm, limit });
        }
        dropped.extend(next.dropped.iter().map(|&i| (step, i)));
        if !next.held.is_empty() {
            warnings.push(format!(
                "step {step}: optimal-support coordinates {:?} reached the zero threshold; reduce h",
                next.held
            ));
        }
        held.extend(next.held.iter().map(|&i| (step, i)));
        if state.support().is_empty() {
            return Err(Error::EmptySupport);
        }
        state = next.state;
    };

    Ok(Trajectory {
        h,
        records,
        steps: step,
        outcome,
        dropped,
        held,
        warnings,
    })
}

/// Rectangle sampled on a regular `nx × ny` grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x1: f64,
    pub x2: f64,
    pub dx1: f64,
    pub dx2: f64,
}

fn grid_axis(range: (f64, f64), n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![range.0];
    }
    (0..n)
        .map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Evaluates the vector field on the grid points with `x > 0`.
pub fn flow_field(lp: &PositiveLP, grid: &Grid) -> Result<Vec<FieldSample>> {
    if lp.m() != 2 {
        return Err(Error::NotPlanar(lp.m()));
    }
    let mut out = Vec::with_capacity(grid.nx * grid.ny);
    for &x2 in &grid_axis(grid.x2, grid.ny) {
        for &x1 in &grid_axis(grid.x1, grid.nx) {
            if x1 <= 0.0 || x2 <= 0.0 {
                continue;
            }
            let state = StateVector::from_slice(&[x1, x2])?;
            let f = rhs(lp, &state)?;
            out.push(FieldSample {
                x1,
                x2,
                dx1: f[0],
                dx2: f[1],
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::fig1;
    use approx::assert_abs_diff_eq;

    fn state(x: &[f64]) -> StateVector {
        StateVector::from_slice(x).unwrap()
    }

    #[test]
    fn rhs_fig1() {
        let f = rhs(&fig1([1.0, 1.0]), &state(&[1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(f[0], -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], -2.0 / 3.0, epsilon = 1e-15);
        let f = rhs(&fig1([5.0, 1.0]), &state(&[1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(f[0], -5.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[1], -2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn fixed_point() {
        let lp = fig1([1.0, 1.0]);
        let s = state(&[1.0, 0.0]);
        assert_eq!(rhs(&lp, &s).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(euler_step(&lp, &s, 1.0 / 6.0).unwrap(), s);
    }

    #[test]
    fn one_step_fig1() {
        let next = euler_step(&fig1([1.0, 1.0]), &state(&[1.0, 1.0]), 1.0 / 6.0).unwrap();
        assert_abs_diff_eq!(next.x()[0], 17.0 / 18.0, epsilon = 1e-15);
        assert_abs_diff_eq!(next.x()[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_crossing_drops_unprotected() {
        // Force a crossing: h*d = 1 with a negative flow on arc 1.
        let lp2 = fig1([1.0, 1.0]);
        let s2 = state(&[1.0, 1.0]);
        let mut sol2 = energy::min_energy_solution(&lp2, &s2).unwrap();
        sol2.q[1] = -0.5;
        let step = euler_update(&lp2, &s2, &sol2, 1.0, &[]);
        assert_eq!(step.dropped, vec![1]);
        assert_eq!(step.state.support(), &[0]);
        let held = euler_update(&lp2, &s2, &sol2, 1.0, &[1]);
        assert_eq!(held.held, vec![1]);
        assert!(held.state.x()[1] > 0.0);
    }

    #[test]
    fn defaults_follow_cost_norm() {
        let lp = fig1([1.0, 1.0]);
        let cfg = IntegratorConfig::for_problem(&lp);
        assert_abs_diff_eq!(cfg.h, 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(cfg.max_steps, (6.0 * 30.0_f64.ln()).ceil() as usize);
    }

    #[test]
    fn oversized_step_is_clamped() {
        let lp = fig1([5.0, 1.0]);
        let mut cfg = IntegratorConfig::for_problem(&lp).with_h(1.0);
        assert!(cfg.sanitize(&lp).unwrap().is_some());
        assert_abs_diff_eq!(cfg.h, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn fixed_point_converges_in_zero_steps() {
        let lp = fig1([1.0, 1.0]);
        let t = integrate(
            &lp,
            &state(&[1.0, 0.0]),
            &IntegratorConfig::for_problem(&lp),
            None,
        )
        .unwrap();
        assert!(t.converged());
        assert_eq!(t.steps, 0);
        assert_eq!(t.records.len(), 1);
    }

    #[test]
    fn flow_field_requires_two_variables() {
        let lp = crate::problem::ladder_family(3).unwrap();
        let g = Grid {
            x1: (0.0, 1.0),
            x2: (0.0, 1.0),
            nx: 3,
            ny: 3,
        };
        assert!(matches!(flow_field(&lp, &g), Err(Error::NotPlanar(8))));
    }

    #[test]
    fn flow_field_skips_boundary() {
        let g = Grid {
            x1: (0.0, 1.0),
            x2: (0.0, 1.0),
            nx: 3,
            ny: 3,
        };
        let field = flow_field(&fig1([5.0, 1.0]), &g).unwrap();
        assert_eq!(field.len(), 4);
    }
}
