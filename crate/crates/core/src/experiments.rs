//! Experiment drivers shared by the CLI and the acceptance suite.

use nalgebra::DVector;

use crate::analysis::{self, EntryMeasurement, EntryPrediction};
use crate::dynamics::{integrate, iteration_budget, IntegratorConfig, StopRule, Trajectory};
use crate::error::{Error, Result};
use crate::lyapunov::{monotonicity_audit, AuditConfig, AuditReport, LyapunovReference};
use crate::oracle::{self, OracleResult};
use crate::problem::{ladder_family, ladder_initial_state, DPolicy, PositiveLP, StateVector};
use crate::random::{self, InstanceShape};

/// Interior starting points for the two-variable example.
pub const FIG1_STARTS: [[f64; 2]; 8] = [
    [0.1, 0.1],
    [0.5, 0.5],
    [0.9, 0.9],
    [0.2, 0.8],
    [0.8, 0.2],
    [0.05, 0.6],
    [0.6, 0.05],
    [1.2, 1.0],
];

/// Reactivity settings of the two-variable example.
pub const FIG1_REACTIVITIES: [[f64; 2]; 3] = [[5.0, 1.0], [1.0, 1.0], [1.0, 5.0]];

/// The default step cap of `solve` is this multiple of the iteration budget.
pub const SOLVE_BUDGET_MULTIPLE: usize = 200;

/// Default step cap of a comparison cell, as a multiple of the budget.
pub const COMPARE_CAP_MULTIPLE: usize = 20;

/// Reactivity policies compared on the ladder family.
pub const COMPARE_POLICIES: [DPolicy; 2] = [DPolicy::DiagCost, DPolicy::Uniform];

pub const COMPARE_F: [u32; 3] = [10, 50, 100];

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub trajectory: Trajectory,
    pub oracle: Option<OracleResult>,
    pub audit: Option<AuditReport>,
}

impl SolveReport {
    /// `cᵀx_T − optimum`, when the oracle ran.
    pub fn oracle_gap(&self, lp: &PositiveLP) -> Option<f64> {
        self.oracle
            .as_ref()
            .map(|o| lp.cost(self.trajectory.final_state()) - o.optimal_value)
    }
}

/// Runs the oracle (when the instance is small enough), integrates with
/// Lyapunov monitors and audits the run. Infeasible instances are an error.
pub fn solve(lp: &PositiveLP, x0: &StateVector, config: &IntegratorConfig) -> Result<SolveReport> {
    let oracle = match oracle::solve_exhaustive(lp) {
        Ok(o) => Some(o),
        Err(Error::TooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let reference = oracle
        .as_ref()
        .map(|o| LyapunovReference::from_oracle(lp, o));
    let trajectory = integrate(lp, x0, config, reference.as_ref())?;
    let audit = match &reference {
        Some(r) => {
            let gap = match config.stop {
                StopRule::Converged { gap, .. } => gap,
                _ => AuditConfig::default().gap_tolerance,
            };
            let cfg = AuditConfig {
                gap_tolerance: gap,
                ..AuditConfig::default()
            };
            Some(monotonicity_audit(&trajectory, lp, r, &cfg)?)
        }
        None => None,
    };
    Ok(SolveReport {
        trajectory,
        oracle,
        audit,
    })
}

/// One cell of the convergence-time comparison on the ladder family.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareCell {
    pub f: u32,
    pub policy: &'static str,
    pub h: f64,
    pub budget: usize,
    /// Steps until `|cᵀx − (4f − 1)| ≤ ε`; `None` if not reached within `cap`.
    pub steps_to_threshold: Option<usize>,
    pub cap: usize,
    pub final_ctx: f64,
    pub optimum: f64,
}

impl CompareCell {
    pub fn within_budget(&self) -> bool {
        self.steps_to_threshold.is_some_and(|s| s <= self.budget)
    }
}

pub fn policy_label(policy: &DPolicy) -> &'static str {
    match policy {
        DPolicy::Uniform => "identity",
        DPolicy::DiagCost => "diag-cost",
        DPolicy::Explicit(_) => "explicit",
    }
}

/// Runs the ladder instance `f` with `h = 1/(2‖c‖₁)` from `1/100` on the
/// optimal arcs and `100` elsewhere, until `cᵀx` is within `epsilon` of
/// `4f − 1` or `cap` steps have elapsed (default: [`COMPARE_CAP_MULTIPLE`]
/// times the iteration budget).
pub fn compare_cell(
    f: u32,
    policy: &DPolicy,
    epsilon: f64,
    cap: Option<usize>,
) -> Result<CompareCell> {
    let lp = ladder_family(f)?.with_policy(policy)?;
    let optimum = 4.0 * f64::from(f) - 1.0;
    let base = IntegratorConfig::for_problem(&lp);
    let budget = iteration_budget(&lp, base.h, epsilon);
    let cap = cap.unwrap_or(budget * COMPARE_CAP_MULTIPLE);
    let config = IntegratorConfig {
        epsilon,
        max_steps: cap,
        record_every: cap.max(1),
        stop: StopRule::CostWithin {
            target: optimum,
            tolerance: epsilon,
        },
        ..base
    };
    let x0 = StateVector::new(ladder_initial_state(0.01, 100.0))?;
    let t = integrate(&lp, &x0, &config, None)?;
    Ok(CompareCell {
        f,
        policy: policy_label(policy),
        h: config.h,
        budget,
        steps_to_threshold: t.converged().then_some(t.steps),
        cap,
        final_ctx: lp.cost(t.final_state()),
        optimum,
    })
}

#[derive(Debug, Clone)]
pub struct SlopeRow {
    pub c: [f64; 2],
    pub d: [f64; 2],
    pub prediction: EntryPrediction,
    pub measurement: EntryMeasurement,
}

pub fn slope_study(c: [f64; 2], d: [f64; 2], x0: [f64; 2]) -> Result<SlopeRow> {
    let prediction = analysis::predict_entry(c, d)?;
    let trajectory = analysis::run_entry_experiment(c, d, x0)?;
    let measurement = analysis::measure_entry_slope(&trajectory)?;
    Ok(SlopeRow {
        c,
        d,
        prediction,
        measurement,
    })
}

/// Terminal state of the dynamics against the oracle on one random instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub optimum: f64,
    pub final_ctx: f64,
    pub residual_inf: f64,
    pub steps: usize,
    pub converged: bool,
}

impl SuiteRow {
    pub fn relative_error(&self) -> f64 {
        (self.final_ctx - self.optimum).abs() / self.optimum.abs().max(1e-300)
    }
}

/// Planted random instances solved from the all-ones state.
pub fn oracle_suite(seed: u64, count: usize, max_steps: usize) -> Result<Vec<SuiteRow>> {
    let mut rng = random::rng(seed);
    let mut rows = Vec::with_capacity(count);
    for k in 0..count {
        let lp =
            random::planted_instance(&mut rng, InstanceShape::default(), &format!("planted-{k}"));
        let o = oracle::solve_exhaustive(&lp)?;
        let x0 = StateVector::new(DVector::from_element(lp.m(), 1.0))?;
        let cfg = IntegratorConfig::for_problem(&lp)
            .with_max_steps(max_steps)
            .with_record_every(max_steps);
        let t = integrate(&lp, &x0, &cfg, None)?;
        let x = t.final_state();
        rows.push(SuiteRow {
            name: lp.name().to_string(),
            n: lp.n(),
            m: lp.m(),
            optimum: o.optimal_value,
            final_ctx: lp.cost(x),
            residual_inf: lp.residual_inf(x),
            steps: t.steps,
            converged: t.converged(),
        });
    }
    Ok(rows)
}
