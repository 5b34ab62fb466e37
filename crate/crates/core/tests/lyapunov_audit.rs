use nalgebra::DVector;

use physarum::dynamics::{integrate, IntegratorConfig, StopRule, Trajectory};
use physarum::energy::subdeterminant_bound;
use physarum::experiments::{FIG1_REACTIVITIES, FIG1_STARTS};
use physarum::lyapunov::{boundary_floor, monotonicity_audit, AuditConfig, LyapunovReference};
use physarum::oracle::solve_exhaustive;
use physarum::problem::{
    fig1, ladder_family, ladder_initial_state, DPolicy, PositiveLP, StateVector,
};

fn run(lp: &PositiveLP, x0: &[f64], h: f64, steps: usize) -> Trajectory {
    let config = IntegratorConfig::for_problem(lp)
        .with_h(h)
        .with_max_steps(steps)
        .with_stop(StopRule::Never);
    integrate(lp, &StateVector::from_slice(x0).unwrap(), &config, None).unwrap()
}

#[test]
fn finite_difference_discrepancy_is_first_order() {
    let lp = fig1([5.0, 1.0]);
    let r = LyapunovReference::new(&lp, DVector::from_vec(vec![1.0, 0.0]));
    let horizon = 5.0;
    let discrepancy = |h: f64| {
        let t = run(&lp, &[0.2, 0.8], h, (horizon / h).round() as usize);
        monotonicity_audit(&t, &lp, &r, &AuditConfig::default())
            .unwrap()
            .max_fd_discrepancy
    };
    let coarse = discrepancy(0.01);
    let fine = discrepancy(0.005);
    let ratio = fine / coarse;
    assert!(
        (0.3..=0.7).contains(&ratio),
        "coarse {coarse:e}, fine {fine:e}, ratio {ratio}"
    );
}

fn floor_holds(lp: &PositiveLP, x0: &[f64], h: f64, steps: usize) {
    let oracle = solve_exhaustive(lp).unwrap();
    let r = LyapunovReference::from_oracle(lp, &oracle);
    let beta = subdeterminant_bound(lp).unwrap().beta;
    let x0v = DVector::from_vec(x0.to_vec());
    let floor = boundary_floor(lp, &x0v, &r, beta);
    assert!(floor.floor > 0.0 || floor.log_inverse_bound.is_finite());
    let t = run(lp, x0, h, steps);
    for rec in &t.records {
        for &i in &r.support {
            assert!(
                rec.x[i] >= floor.floor,
                "{}: x[{i}] = {:e} below floor {:e} at step {}",
                lp.name(),
                rec.x[i],
                floor.floor,
                rec.step
            );
            assert!(-rec.x[i].ln() <= floor.log_inverse_bound);
        }
    }
}

#[test]
fn boundary_floor_holds_on_fig1_runs() {
    for d in FIG1_REACTIVITIES {
        let lp = fig1(d);
        for x0 in FIG1_STARTS {
            floor_holds(&lp, &x0, 0.01, 3000);
        }
    }
}

#[test]
fn boundary_floor_holds_on_ladder_runs() {
    let lp = ladder_family(10).unwrap();
    let x0 = ladder_initial_state(0.1, 2.0);
    for policy in [DPolicy::Uniform, DPolicy::DiagCost] {
        let lp = lp.with_policy(&policy).unwrap();
        let h = 0.5 / lp.d().iter().fold(0.0_f64, |a, &b| a.max(b));
        floor_holds(&lp, x0.as_slice(), h, 2000);
    }
}

#[test]
fn barrier_slope_bound_holds_on_fig1_runs() {
    for d in FIG1_REACTIVITIES {
        let lp = fig1(d);
        let r = LyapunovReference::new(&lp, DVector::from_vec(vec![1.0, 0.0]));
        for x0 in FIG1_STARTS {
            let t = run(&lp, &x0, 0.01, 2000);
            let audit = monotonicity_audit(&t, &lp, &r, &AuditConfig::default()).unwrap();
            assert!(audit.barrier_ok(), "d = {d:?}, x0 = {x0:?}: {audit}");
        }
    }
}
