//! Acceptance suite. Prints one PASS/FAIL line per criterion (with detail
//! lines underneath) and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::Rng;

use physarum::analysis::Regime;
use physarum::dynamics::{integrate, IntegratorConfig, StopRule, Trajectory};
use physarum::energy::{min_energy_solution, subdeterminant_bound};
use physarum::experiments::{self, COMPARE_F, COMPARE_POLICIES, FIG1_REACTIVITIES, FIG1_STARTS};
use physarum::lyapunov::{lyapunov_derivative, LyapunovReference};
use physarum::oracle::solve_exhaustive;
use physarum::problem::fig1;
use physarum::random::{self, InstanceShape};
use physarum::{DPolicy, PositiveLP, StateVector};

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        if !ok {
            self.pass = false;
            self.details.push(format!("FAILED: {}", detail.into()));
        }
    }

    fn note(&mut self, detail: impl Into<String>) {
        self.details.push(detail.into());
    }
}

fn random_instances(count: usize) -> Vec<PositiveLP> {
    let mut rng = random::rng(SEED);
    (0..count)
        .map(|k| {
            random::planted_instance(&mut rng, InstanceShape::default(), &format!("planted-{k}"))
        })
        .collect()
}

fn solve_config(lp: &PositiveLP) -> IntegratorConfig {
    let cfg = IntegratorConfig::for_problem(lp);
    let budget = physarum::dynamics::iteration_budget(lp, cfg.h, cfg.epsilon);
    cfg.with_max_steps(budget * experiments::SOLVE_BUDGET_MULTIPLE)
}

fn fig1_anchors() -> Outcome {
    let mut out = Outcome::new();
    let expected = [Some(-9.0 / 5.0), Some(-1.0), None];
    for (d, expect) in FIG1_REACTIVITIES.iter().zip(expected) {
        let lp = fig1(*d);
        let mut worst_gap = 0.0_f64;
        let mut slopes = Vec::new();
        let mut slowest = Duration::ZERO;
        for start in FIG1_STARTS {
            let t0 = Instant::now();
            let run = integrate(
                &lp,
                &StateVector::from_slice(&start).unwrap(),
                &solve_config(&lp),
                None,
            );
            let elapsed = t0.elapsed();
            slowest = slowest.max(elapsed);
            let run = match run {
                Ok(r) => r,
                Err(e) => {
                    out.check(false, format!("d = {d:?}, x0 = {start:?}: {e}"));
                    continue;
                }
            };
            let x = run.final_state();
            let gap = (lp.cost(x) - 1.0).abs();
            let dist = (x[0] - 1.0).abs().max(x[1].abs());
            worst_gap = worst_gap.max(gap);
            out.check(
                run.converged() && gap <= 1e-3 && dist <= 1e-3,
                format!("d = {d:?}, x0 = {start:?}: final x = ({}, {})", x[0], x[1]),
            );
            out.check(
                elapsed < Duration::from_secs(1),
                format!("d = {d:?}, x0 = {start:?}: run took {elapsed:?}"),
            );

            let t0 = Instant::now();
            let row = experiments::slope_study([1.0, 2.0], *d, start);
            let elapsed = t0.elapsed();
            slowest = slowest.max(elapsed);
            out.check(
                elapsed < Duration::from_secs(1),
                format!("d = {d:?}, x0 = {start:?}: slope run took {elapsed:?}"),
            );
            match row {
                Ok(row) => {
                    let m = row.measurement;
                    match expect {
                        Some(s) => out.check(
                            m.regime == Regime::Sloped && ((m.slope - s) / s).abs() <= 0.05,
                            format!(
                                "d = {d:?}, x0 = {start:?}: measured {:?} slope {}",
                                m.regime, m.slope
                            ),
                        ),
                        None => out.check(
                            m.regime == Regime::Horizontal,
                            format!(
                                "d = {d:?}, x0 = {start:?}: classified {:?} (exponent {})",
                                m.regime, m.exponent
                            ),
                        ),
                    }
                    slopes.push(m.slope);
                }
                Err(e) => out.check(false, format!("d = {d:?}, x0 = {start:?}: {e}")),
            }
        }
        let (lo, hi) = slopes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
                (a.min(s), b.max(s))
            });
        out.note(format!(
            "d = {d:?}: max |c^T x - 1| = {worst_gap:.2e}, measured slopes in [{lo:.4}, {hi:.4}], slowest run {slowest:?}"
        ));
    }
    out
}

fn energy_identities() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = random::rng(SEED ^ 1);
    let mut states = 0;
    let mut worst_identity = 0.0_f64;
    let mut worst_ratio = 0.0_f64;
    for lp in random_instances(20) {
        let bound = subdeterminant_bound(&lp).unwrap();
        let mut done = 0;
        while done < 50 {
            let mut x = random::positive_state(&mut rng, lp.m(), 1e-3, 1e3);
            if rng.gen_bool(0.2) {
                x[rng.gen_range(0..lp.m())] = 0.0;
            }
            let sol = match min_energy_solution(&lp, &StateVector::new(x.clone()).unwrap()) {
                Ok(s) => s,
                Err(physarum::Error::InfeasibleOnSupport { .. }) => continue,
                Err(e) => {
                    out.check(false, format!("{}: {e}", lp.name()));
                    break;
                }
            };
            let qrq: f64 = (0..lp.m())
                .filter(|&i| x[i] > 0.0)
                .map(|i| lp.c()[i] * sol.q[i] * sol.q[i] / x[i])
                .sum();
            let rel = (sol.btp - qrq).abs() / qrq.abs().max(f64::MIN_POSITIVE);
            worst_identity = worst_identity.max(rel);
            out.check(
                rel <= 1e-9,
                format!("{}: b^T p = {}, q^T R q = {qrq}", lp.name(), sol.btp),
            );
            let qmax = sol.q.amax();
            worst_ratio = worst_ratio.max(qmax / bound.beta);
            out.check(
                qmax <= bound.beta * (1.0 + 1e-9),
                format!(
                    "{}: |q|_inf = {qmax} exceeds M |b|_1 = {}",
                    lp.name(),
                    bound.beta
                ),
            );
            done += 1;
            states += 1;
        }
    }
    out.check(states == 1000, format!("only {states} states evaluated"));
    out.note(format!(
        "{states} states: max relative identity error {worst_identity:.2e}, max |q|_inf / (M |b|_1) = {worst_ratio:.4}"
    ));
    out
}

fn lyapunov_suite() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = random::rng(SEED ^ 2);
    let mut max_vdot = f64::NEG_INFINITY;
    let mut max_vdot_above_optimum = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut violations_below_optimum = 0;
    let mut chain_failures = 0;
    let instances = random_instances(20);
    for lp in &instances {
        let oracle = solve_exhaustive(lp).unwrap();
        let reference = LyapunovReference::from_oracle(lp, &oracle);
        for _ in 0..10_000 {
            let x = random::positive_state(&mut rng, lp.m(), 1e-3, 1e3);
            let der = lyapunov_derivative(lp, &StateVector::new(x).unwrap(), &reference).unwrap();
            max_vdot = max_vdot.max(der.vdot);
            if der.ctx >= oracle.optimal_value {
                max_vdot_above_optimum = max_vdot_above_optimum.max(der.vdot);
            }
            if der.vdot > 1e-8 {
                violations += 1;
                if der.ctx < oracle.optimal_value {
                    violations_below_optimum += 1;
                }
                if violations <= 5 {
                    out.check(
                        false,
                        format!(
                            "{}: Vdot = {} at c^T x = {} (optimum {})",
                            lp.name(),
                            der.vdot,
                            der.ctx,
                            oracle.optimal_value
                        ),
                    );
                }
            }
            if !der.chain.is_monotone(1e-9) {
                chain_failures += 1;
            }
        }
    }
    out.check(
        chain_failures == 0,
        format!("chain violated at {chain_failures} states"),
    );
    out.check(violations == 0, format!("Vdot > 1e-8 at {violations} states, {violations_below_optimum} of them with c^T x below the optimum"));
    out.note(format!(
        "200000 sampled states: max Vdot = {max_vdot:.3e}; max Vdot over states with c^T x >= optimum = {max_vdot_above_optimum:.3e}"
    ));

    let mut runs = 0;
    let mut worst_final = 0.0_f64;
    let mut check_run = |out: &mut Outcome, lp: &PositiveLP, x0: &[f64]| {
        let report =
            experiments::solve(lp, &StateVector::from_slice(x0).unwrap(), &solve_config(lp))
                .unwrap();
        if !report.trajectory.converged() {
            return;
        }
        runs += 1;
        let audit = report.audit.expect("oracle ran");
        out.check(
            audit.v_monotone(),
            format!(
                "{}: V increased by {} (allowance {})",
                lp.name(),
                audit.max_v_increase,
                audit.v_step_tolerance
            ),
        );
        worst_final = worst_final.max(audit.final_vdot.abs());
        out.check(
            audit.final_vdot.abs() <= 1e-5,
            format!("{}: final Vdot = {}", lp.name(), audit.final_vdot),
        );
    };
    for d in FIG1_REACTIVITIES {
        for start in FIG1_STARTS {
            check_run(&mut out, &fig1(d), &start);
        }
    }
    for lp in &instances {
        check_run(&mut out, lp, &vec![1.0; lp.m()]);
    }
    out.note(format!(
        "{runs} converged runs audited: max |final Vdot| = {worst_final:.3e}"
    ));
    out
}

fn oracle_equivalence() -> Outcome {
    let mut out = Outcome::new();
    let t0 = Instant::now();
    let rows = experiments::oracle_suite(SEED, 50, 200_000).unwrap();
    let elapsed = t0.elapsed();
    let mut worst = 0.0_f64;
    for r in &rows {
        worst = worst.max(r.relative_error());
        out.check(
            r.relative_error() <= 1e-2 && r.residual_inf <= 1e-6,
            format!(
                "{}: c^T x = {}, optimum {}, residual {}",
                r.name, r.final_ctx, r.optimum, r.residual_inf
            ),
        );
    }
    out.check(
        elapsed < Duration::from_secs(30),
        format!("suite took {elapsed:?}"),
    );
    out.note(format!(
        "{} instances in {elapsed:.2?}: max relative error {worst:.2e}",
        rows.len()
    ));
    out
}

fn residual_law() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = random::rng(SEED ^ 3);
    let mut instances: Vec<PositiveLP> = random_instances(20);
    instances.push(fig1([1.0, 1.0]));
    for f in COMPARE_F {
        instances.push(physarum::problem::ladder_family(f).unwrap());
    }
    let mut worst = 0.0_f64;
    for lp in instances {
        let lp = lp.with_policy(&DPolicy::Uniform).unwrap();
        let x0 = random::positive_state(&mut rng, lp.m(), 0.1, 10.0);
        let base = IntegratorConfig::for_problem(&lp);
        // After 200 steps the residual must still be far above rounding level.
        let h = base.h.min(0.01);
        let cfg = base
            .with_h(h)
            .with_max_steps(200)
            .with_stop(StopRule::Never);
        let run = integrate(&lp, &StateVector::new(x0).unwrap(), &cfg, None).unwrap();
        let r0 = run.records[0].residual_inf;
        out.check(
            run.records.len() == 201,
            format!("{}: {} records", lp.name(), run.records.len()),
        );
        out.check(
            run.dropped.is_empty(),
            format!(
                "{}: coordinates {:?} clamped to zero",
                lp.name(),
                run.dropped
            ),
        );
        for rec in &run.records {
            let expected = (1.0 - cfg.h).powi(rec.step as i32) * r0;
            let rel = (rec.residual_inf - expected).abs() / expected;
            worst = worst.max(rel);
            if rel > 1e-9 {
                out.check(
                    false,
                    format!(
                        "{} step {}: residual {} vs {expected}",
                        lp.name(),
                        rec.step,
                        rec.residual_inf
                    ),
                );
                break;
            }
        }
    }
    out.note(format!(
        "24 instances x 200 steps: max relative deviation {worst:.2e}"
    ));
    out
}

fn check_bounds(
    out: &mut Outcome,
    lp: &PositiveLP,
    run: &Trajectory,
    support: &[usize],
    beta: f64,
) {
    let x0 = &run.records[0].x;
    let mut min_on_support = f64::INFINITY;
    for rec in &run.records {
        for i in 0..lp.m() {
            let cap = x0[i].max(beta) + 1e-9;
            if rec.x[i] > cap {
                out.check(
                    false,
                    format!(
                        "{} step {}: x_{} = {} > {cap}",
                        lp.name(),
                        rec.step,
                        i + 1,
                        rec.x[i]
                    ),
                );
                return;
            }
        }
        for &i in support {
            min_on_support = min_on_support.min(rec.x[i]);
        }
    }
    out.check(
        min_on_support > 0.0,
        format!("{}: x touched zero on I", lp.name()),
    );
}

fn boundedness() -> Outcome {
    let mut out = Outcome::new();
    let mut runs: Vec<(PositiveLP, Vec<f64>)> = Vec::new();
    for d in FIG1_REACTIVITIES {
        for start in FIG1_STARTS {
            runs.push((fig1(d), start.to_vec()));
        }
    }
    for lp in random_instances(20) {
        let m = lp.m();
        runs.push((lp, vec![1.0; m]));
    }
    for policy in COMPARE_POLICIES {
        let lp = physarum::problem::ladder_family(10)
            .unwrap()
            .with_policy(&policy)
            .unwrap();
        runs.push((
            lp,
            physarum::problem::ladder_initial_state(0.01, 100.0)
                .as_slice()
                .to_vec(),
        ));
    }
    let count = runs.len();
    for (lp, x0) in runs {
        let oracle = solve_exhaustive(&lp).unwrap();
        let beta = subdeterminant_bound(&lp).unwrap().beta;
        let run = integrate(
            &lp,
            &StateVector::from_slice(&x0).unwrap(),
            &solve_config(&lp),
            Some(&LyapunovReference::from_oracle(&lp, &oracle)),
        )
        .unwrap();
        check_bounds(&mut out, &lp, &run, &oracle.support, beta);
    }
    out.note(format!("{count} runs checked at every step"));
    out
}

fn comparison() -> Outcome {
    let mut out = Outcome::new();
    let t0 = Instant::now();
    for f in COMPARE_F {
        let cells: Vec<_> = COMPARE_POLICIES
            .iter()
            .map(|p| experiments::compare_cell(f, p, 0.1, None).unwrap())
            .collect();
        for c in &cells {
            let steps = c
                .steps_to_threshold
                .map_or(format!("> {}", c.cap), |s| s.to_string());
            out.note(format!(
                "f = {f}, D = {}: budget {}, steps to threshold {steps}, final c^T x {:.4} (optimum {})",
                c.policy, c.budget, c.final_ctx, c.optimum
            ));
            out.check(
                c.within_budget(),
                format!("f = {f}, D = {}: not within budget {}", c.policy, c.budget),
            );
        }
        let steps = |i: usize| cells[i].steps_to_threshold.unwrap_or(usize::MAX);
        out.check(
            steps(0) <= steps(1),
            format!("f = {f}: diag-cost slower than identity"),
        );
    }
    let elapsed = t0.elapsed();
    out.check(
        elapsed < Duration::from_secs(60),
        format!("comparison took {elapsed:?}"),
    );
    out.note(format!("total {elapsed:.2?}"));
    out
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        (
            "two-variable anchors: convergence and entry slopes",
            fig1_anchors,
        ),
        ("energy identity and flow bound", energy_identities),
        ("Lyapunov function", lyapunov_suite),
        (
            "oracle equivalence on planted instances",
            oracle_equivalence,
        ),
        ("uniform-dynamics residual law", residual_law),
        ("boundedness and boundary avoidance", boundedness),
        ("reactivity comparison on the ladder family", comparison),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let t0 = Instant::now();
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name} ({:.2?})", t0.elapsed());
        for d in outcome.details.iter().take(12) {
            println!("     {d}");
        }
        if outcome.details.len() > 12 {
            println!("     ... {} more", outcome.details.len() - 12);
        }
        failures += usize::from(!outcome.pass);
    }
    println!("{} of 7 criteria passed", 7 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
