//! CSV artifacts. Numbers are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{FieldSample, Trajectory};
use crate::error::Result;
use crate::lyapunov::AuditReport;

pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn trajectory_header(m: usize, with_audit: bool) -> String {
    let mut cols = vec!["step".to_string(), "time".to_string()];
    cols.extend((1..=m).map(|i| format!("x_{i}")));
    cols.extend(
        ["ctx", "residual_inf", "V", "Vdot", "btp", "ctq"]
            .iter()
            .map(|s| s.to_string()),
    );
    if with_audit {
        cols.push("Vdot_fd".into());
        cols.push("W".into());
    }
    cols.join(",")
}

/// `step,time,x_1..x_m,ctx,residual_inf,V,Vdot,btp,ctq`, followed by
/// `Vdot_fd,W` when an audit is supplied.
pub fn trajectory_csv(trajectory: &Trajectory, audit: Option<&AuditReport>) -> String {
    let m = trajectory.records.first().map_or(0, |r| r.x.len());
    let mut out = trajectory_header(m, audit.is_some());
    out.push('\n');
    for (k, r) in trajectory.records.iter().enumerate() {
        let _ = write!(out, "{},{}", r.step, num(r.time));
        for v in r.x.iter() {
            let _ = write!(out, ",{}", num(*v));
        }
        for v in [r.ctx, r.residual_inf, r.v, r.vdot, r.btp, r.ctq] {
            let _ = write!(out, ",{}", num(v));
        }
        if let Some(a) = audit {
            let _ = write!(out, ",{},{}", num(a.vdot_fd[k]), num(a.barrier[k]));
        }
        out.push('\n');
    }
    out
}

pub fn field_csv(samples: &[FieldSample]) -> String {
    let mut out = String::from("x1,x2,dx1,dx2\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(s.x1),
            num(s.x2),
            num(s.dx1),
            num(s.dx2)
        );
    }
    out
}

/// Several two-variable trajectories in one file, keyed by `traj`.
pub fn bundle_csv(trajectories: &[Trajectory]) -> String {
    let mut out = String::from("traj,step,time,x_1,x_2\n");
    for (k, t) in trajectories.iter().enumerate() {
        for r in &t.records {
            let _ = writeln!(
                out,
                "{k},{},{},{},{}",
                r.step,
                num(r.time),
                num(r.x[0]),
                num(r.x[1])
            );
        }
    }
    out
}

/// Points of the predicted entry line `x2 = slope · (x1 − 1)`.
pub fn entry_line_csv(slope: f64, x1_from: f64, points: usize) -> String {
    let mut out = String::from("x1,x2\n");
    let points = points.max(2);
    for k in 0..points {
        let x1 = x1_from + (1.0 - x1_from) * k as f64 / (points - 1) as f64;
        let _ = writeln!(out, "{},{}", num(x1), num(slope * (x1 - 1.0)));
    }
    out
}
