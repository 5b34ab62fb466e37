//! How two-variable trajectories enter the optimum `(1, 0)` of
//! `min c1 x1 + c2 x2 s.t. x1 + x2 = 1, x ≥ 0` with `c2 > c1 > 0`.
//!
//! Near the optimum write `x = (1 − ε1, ε2)`. Linearizing gives
//! `ε2 ∝ exp(−r2 t)` with `r2 = (c2 − c1) d2 / c2`, and `ε1` decays at rate
//! `min(d1, r2)`. When `d1 > r2` both decay at rate `r2` and the trajectory
//! follows a line of slope `dx2/dx1 = ((c2 − c1) d2 − c2 d1) / (c1 d1)`;
//! when `d1 < r2` it enters tangentially to the `x1` axis.

use nalgebra::DVector;

use crate::dynamics::{integrate, IntegratorConfig, StopRule, Trajectory};
use crate::error::{Error, Result};
use crate::problem::{PositiveLP, StateVector};

/// Relative tolerance for `d1 = r2` to count as the critical case.
pub const CRITICAL_RTOL: f64 = 1e-12;

/// Window bounds on `|ε1|` and `ε2` used for the tail fit.
pub const TAIL_WINDOW: (f64, f64) = (1e-8, 1e-2);

pub const MIN_TAIL_STATES: usize = 20;

/// Horizontal entry is declared when the log-log exponent of `ε2` against
/// `|ε1|` exceeds `1 + HORIZONTAL_MARGIN`.
pub const HORIZONTAL_MARGIN: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Horizontal,
    Sloped,
    Critical,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Horizontal => "horizontal",
            Regime::Sloped => "sloped",
            Regime::Critical => "critical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryPrediction {
    pub regime: Regime,
    /// `dx2/dx1` of the entry line; only in the sloped regime.
    pub slope: Option<f64>,
    pub rate_eps1: f64,
    pub rate_eps2: f64,
}

fn check_costs(c: [f64; 2]) -> Result<()> {
    if c[0] > 0.0 && c[1] > c[0] {
        Ok(())
    } else {
        Err(Error::CostOrder)
    }
}

pub fn predict_entry(c: [f64; 2], d: [f64; 2]) -> Result<EntryPrediction> {
    check_costs(c)?;
    if !(d[0] > 0.0 && d[1] > 0.0) {
        return Err(Error::InvalidProblem(
            "reactivities must be positive".into(),
        ));
    }
    let [c1, c2] = c;
    let [d1, d2] = d;
    let rate_eps2 = (c2 - c1) * d2 / c2;
    let regime = if (d1 - rate_eps2).abs() <= CRITICAL_RTOL * d1.max(rate_eps2) {
        Regime::Critical
    } else if d1 < rate_eps2 {
        Regime::Horizontal
    } else {
        Regime::Sloped
    };
    let slope = (regime == Regime::Sloped).then(|| ((c2 - c1) * d2 - c2 * d1) / (c1 * d1));
    Ok(EntryPrediction {
        regime,
        slope,
        rate_eps1: d1.min(rate_eps2),
        rate_eps2,
    })
}

/// `q_i = x_i c_{3−i} / (x1 c2 + x2 c1)` for two parallel unit-demand arcs.
pub fn closed_form_q2(c: [f64; 2], x: [f64; 2]) -> Result<[f64; 2]> {
    if !(x[0] >= 0.0 && x[1] >= 0.0) || x[0] + x[1] == 0.0 {
        return Err(Error::InvalidState(
            "x must be nonnegative and nonzero".into(),
        ));
    }
    let n = x[0] * c[1] + x[1] * c[0];
    Ok([x[0] * c[1] / n, x[1] * c[0] / n])
}

/// Linearized `ε1(t)` for `ε2(t) = exp(−r2 t)` and integration constant `C`:
/// `c1 d1 / (c2 d1 − (c2 − c1) d2) · (e^{−r2 t} − e^{−d1 t}) + C e^{−d1 t}`.
pub fn predicted_eps1_curve(c: [f64; 2], d: [f64; 2], constant: f64, t: f64) -> Result<f64> {
    let pred = predict_entry(c, d)?;
    if pred.regime == Regime::Critical {
        return Err(Error::Inconclusive);
    }
    let [c1, c2] = c;
    let [d1, d2] = d;
    let k = c1 * d1 / (c2 * d1 - (c2 - c1) * d2);
    Ok(k * ((-pred.rate_eps2 * t).exp() - (-d1 * t).exp()) + constant * (-d1 * t).exp())
}

/// `ε2(t) = exp(−r2 t)`, the normalization used by [`predicted_eps1_curve`].
pub fn predicted_eps2_curve(c: [f64; 2], d: [f64; 2], t: f64) -> Result<f64> {
    Ok((-predict_entry(c, d)?.rate_eps2 * t).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryMeasurement {
    /// Measured `dx2/dx1 = −ε2/ε1`, averaged over the fit window.
    pub slope: f64,
    /// Least-squares exponent of `ln ε2` against `ln |ε1|`.
    pub exponent: f64,
    pub regime: Regime,
    /// Records inside the tail window.
    pub window: usize,
    /// Records used for the fit (the later half of the window).
    pub fitted: usize,
}

/// Fits the entry direction from the tail of a trajectory converging to
/// `(1, 0)`. The fit uses the later half of the records whose `|ε1|` and
/// `ε2` both lie in [`TAIL_WINDOW`], so transients have decayed.
pub fn measure_entry_slope(trajectory: &Trajectory) -> Result<EntryMeasurement> {
    let (lo, hi) = TAIL_WINDOW;
    let inside = |e: f64| e > lo && e < hi;
    let tail: Vec<(f64, f64)> = trajectory
        .records
        .iter()
        .filter(|r| r.x.len() == 2)
        .map(|r| (1.0 - r.x[0], r.x[1]))
        .filter(|&(e1, e2)| inside(e1.abs()) && inside(e2))
        .collect();
    if tail.len() < MIN_TAIL_STATES {
        return Err(Error::InsufficientTail {
            found: tail.len(),
            needed: MIN_TAIL_STATES,
        });
    }
    let fit = &tail[tail.len() / 2..];
    let count = fit.len() as f64;

    let slope = -fit.iter().map(|&(e1, e2)| e2 / e1).sum::<f64>() / count;

    let (lx, ly): (Vec<f64>, Vec<f64>) =
        fit.iter().map(|&(e1, e2)| (e1.abs().ln(), e2.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / count;
    let my = ly.iter().sum::<f64>() / count;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let exponent = if sxx > 0.0 { sxy / sxx } else { f64::NAN };

    let regime = if exponent > 1.0 + HORIZONTAL_MARGIN {
        Regime::Horizontal
    } else {
        Regime::Sloped
    };
    Ok(EntryMeasurement {
        slope,
        exponent,
        regime,
        window: tail.len(),
        fitted: fit.len(),
    })
}

/// The two-variable instance with costs `c` and reactivities `d`.
pub fn entry_instance(c: [f64; 2], d: [f64; 2]) -> Result<PositiveLP> {
    PositiveLP::from_rows(
        "entry",
        &[vec![1.0, 1.0]],
        vec![1.0],
        c.to_vec(),
        d.to_vec(),
    )
}

/// Step size for entry experiments: `h · max(d) = 0.02`, fine enough that
/// the Euler path resolves the tail window with many records.
pub fn entry_step_size(d: [f64; 2]) -> f64 {
    0.02 / d[0].max(d[1])
}

/// Integrates from `x0` far enough into the tail to measure the entry slope.
pub fn run_entry_experiment(c: [f64; 2], d: [f64; 2], x0: [f64; 2]) -> Result<Trajectory> {
    check_costs(c)?;
    let lp = entry_instance(c, d)?;
    let config = IntegratorConfig::for_problem(&lp)
        .with_h(entry_step_size(d))
        .with_max_steps(2_000_000)
        .with_stop(StopRule::Converged {
            feasibility: 1e-10,
            gap: 1e-10,
        });
    integrate(
        &lp,
        &StateVector::new(DVector::from_vec(x0.to_vec()))?,
        &config,
        None,
    )
}
