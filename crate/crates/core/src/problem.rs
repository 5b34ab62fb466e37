//! Positive linear programs `min cᵀx s.t. Ax = b, x ≥ 0` with a reactivity
//! vector `d`, plus builders for graph-based instances.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// A positive LP together with its reactivities (the diagonal of `D`).
///
/// Immutable after construction; `c > 0`, `d > 0`, no all-zero column.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveLP {
    name: String,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    d: DVector<f64>,
}

/// Report-only validation of raw instance data.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    /// Violations; the instance is valid iff this is empty.
    pub problems: Vec<String>,
    /// Non-fatal observations such as redundant rows.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }

    /// Checks dimensions, positivity of `c` and `d`, zero columns and rank.
    pub fn check(a: &DMatrix<f64>, b: &[f64], c: &[f64], d: &[f64]) -> Self {
        let (n, m) = a.shape();
        let mut problems = Vec::new();
        let mut notes = Vec::new();
        if n == 0 || m == 0 {
            problems.push(format!("empty constraint matrix ({n} x {m})"));
        }
        if b.len() != n {
            problems.push(format!("b has {} entries, expected {n}", b.len()));
        }
        if c.len() != m {
            problems.push(format!("c has {} entries, expected {m}", c.len()));
        }
        if d.len() != m {
            problems.push(format!("d has {} entries, expected {m}", d.len()));
        }
        if a.iter().chain(b).chain(c).chain(d).any(|v| !v.is_finite()) {
            problems.push("non-finite entry".to_string());
        }
        if let Some(i) = c.iter().position(|&v| !(v > 0.0)) {
            problems.push(format!("cost not strictly positive (c[{i}] = {})", c[i]));
        }
        if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
            problems.push(format!(
                "reactivity not strictly positive (d[{i}] = {})",
                d[i]
            ));
        }
        for j in 0..m {
            if a.column(j).iter().all(|&v| v == 0.0) {
                problems.push(format!("column {j} of A is all zero"));
            }
        }
        let rank = linalg::rank(a);
        if n > 0 && rank < n {
            notes.push(format!("redundant rows: rank {rank} < n = {n}"));
        }
        ValidationReport {
            n,
            m,
            rank,
            problems,
            notes,
        }
    }
}

impl PositiveLP {
    pub fn new(
        name: impl Into<String>,
        a: DMatrix<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        d: Vec<f64>,
    ) -> Result<Self> {
        let report = ValidationReport::check(&a, &b, &c, &d);
        if !report.is_valid() {
            return Err(Error::InvalidProblem(report.problems.join("; ")));
        }
        Ok(PositiveLP {
            name: name.into(),
            a,
            b: DVector::from_vec(b),
            c: DVector::from_vec(c),
            d: DVector::from_vec(d),
        })
    }

    /// Builds from a row-major constraint matrix.
    pub fn from_rows(
        name: impl Into<String>,
        rows: &[Vec<f64>],
        b: Vec<f64>,
        c: Vec<f64>,
        d: Vec<f64>,
    ) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("ragged rows in A".into()));
        }
        let a = DMatrix::from_fn(n, m, |i, j| rows[i][j]);
        Self::new(name, a, b, c, d)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }
    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }
    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }
    /// Number of constraints.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Number of variables.
    pub fn m(&self) -> usize {
        self.a.ncols()
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport::check(
            &self.a,
            self.b.as_slice(),
            self.c.as_slice(),
            self.d.as_slice(),
        )
    }

    /// Same instance with a different reactivity vector.
    pub fn with_reactivity(&self, d: Vec<f64>) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.a.clone(),
            self.b.as_slice().to_vec(),
            self.c.as_slice().to_vec(),
            d,
        )
    }

    pub fn with_policy(&self, policy: &DPolicy) -> Result<Self> {
        self.with_reactivity(policy.reactivities(self.c.as_slice())?)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    pub fn residual_inf(&self, x: &DVector<f64>) -> f64 {
        linalg::inf_norm(&self.residual(x))
    }

    pub fn cost(&self, x: &DVector<f64>) -> f64 {
        self.c.dot(x)
    }

    pub fn cost_one_norm(&self) -> f64 {
        linalg::one_norm(&self.c)
    }
}

/// Rule for choosing the reactivities `d`.
#[derive(Debug, Clone, PartialEq)]
pub enum DPolicy {
    /// `D = I`.
    Uniform,
    /// `D = diag(c)`.
    DiagCost,
    Explicit(Vec<f64>),
}

impl DPolicy {
    pub fn reactivities(&self, c: &[f64]) -> Result<Vec<f64>> {
        match self {
            DPolicy::Uniform => Ok(vec![1.0; c.len()]),
            DPolicy::DiagCost => Ok(c.to_vec()),
            DPolicy::Explicit(d) if d.len() == c.len() => Ok(d.clone()),
            DPolicy::Explicit(d) => Err(Error::Dimension(format!(
                "reactivity vector has {} entries, expected {}",
                d.len(),
                c.len()
            ))),
        }
    }
}

/// Coordinates at or below this value count as zero.
pub fn zero_threshold(x: &DVector<f64>) -> f64 {
    1e-12 * linalg::inf_norm(x).max(1.0)
}

/// A nonnegative state with its support `{ i : x_i > 0 }`.
///
/// Entries at or below [`zero_threshold`] are stored as exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    x: DVector<f64>,
    support: Vec<usize>,
}

impl StateVector {
    pub fn new(x: DVector<f64>) -> Result<Self> {
        if let Some(i) = x.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidState(format!(
                "entry {i} is {} (must be finite and nonnegative)",
                x[i]
            )));
        }
        let tol = zero_threshold(&x);
        let mut x = x;
        let mut support = Vec::with_capacity(x.len());
        for (i, v) in x.iter_mut().enumerate() {
            if *v <= tol {
                *v = 0.0;
            } else {
                support.push(i);
            }
        }
        Ok(StateVector { x, support })
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(x))
    }

    /// Constructs without reclassifying; the caller guarantees that `support`
    /// lists exactly the positive entries.
    pub(crate) fn from_parts(x: DVector<f64>, support: Vec<usize>) -> Self {
        StateVector { x, support }
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }
    pub fn support(&self) -> &[usize] {
        &self.support
    }
    pub fn len(&self) -> usize {
        self.x.len()
    }
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
    pub fn in_support(&self, i: usize) -> bool {
        self.support.binary_search(&i).is_ok()
    }

    /// True when every coordinate is positive (the open orthant `G`).
    pub fn is_interior(&self) -> bool {
        self.support.len() == self.x.len()
    }

    /// True when `x_i > 0` for every `i` in `required`.
    pub fn covers(&self, required: &[usize]) -> bool {
        required.iter().all(|&i| self.in_support(i))
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.x
    }
}

/// A directed arc with a positive cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub cost: f64,
}

/// Directed graph used by [`build_incidence_lp`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Network {
    pub nodes: usize,
    pub arcs: Vec<Arc>,
}

impl Network {
    pub fn new(nodes: usize) -> Self {
        Network {
            nodes,
            arcs: Vec::new(),
        }
    }

    pub fn arc(mut self, tail: usize, head: usize, cost: f64) -> Self {
        self.arcs.push(Arc { tail, head, cost });
        self
    }
}

/// Min-cost flow LP of a network: `A` is the node-arc incidence matrix with
/// `+1` at the tail and `-1` at the head of every arc, `b` the demands
/// (positive at sources), `c` the arc costs.
pub fn build_incidence_lp(
    name: impl Into<String>,
    network: &Network,
    demands: &[f64],
    policy: &DPolicy,
) -> Result<PositiveLP> {
    if demands.len() != network.nodes {
        return Err(Error::Dimension(format!(
            "{} demands for {} nodes",
            demands.len(),
            network.nodes
        )));
    }
    let total: f64 = demands.iter().sum();
    let scale = demands.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    if total.abs() > 1e-12 * scale {
        return Err(Error::UnbalancedDemands(total));
    }
    let mut a = DMatrix::zeros(network.nodes, network.arcs.len());
    for (j, arc) in network.arcs.iter().enumerate() {
        if !(arc.cost > 0.0) {
            return Err(Error::NonPositiveCost {
                arc: j,
                cost: arc.cost,
            });
        }
        if arc.tail >= network.nodes || arc.head >= network.nodes || arc.tail == arc.head {
            return Err(Error::InvalidProblem(format!(
                "arc {j} ({} -> {}) is not a proper arc of a {}-node graph",
                arc.tail, arc.head, network.nodes
            )));
        }
        a[(arc.tail, j)] = 1.0;
        a[(arc.head, j)] = -1.0;
    }
    let c: Vec<f64> = network.arcs.iter().map(|a| a.cost).collect();
    let d = policy.reactivities(&c)?;
    PositiveLP::new(name, a, demands.to_vec(), c, d)
}

/// `minimize x1 + 2 x2 s.t. x1 + x2 = 1, x ≥ 0` with reactivities `d`.
pub fn fig1(d: [f64; 2]) -> PositiveLP {
    PositiveLP::from_rows(
        "fig1",
        &[vec![1.0, 1.0]],
        vec![1.0],
        vec![1.0, 2.0],
        d.to_vec(),
    )
    .expect("built-in instance is valid")
}

/// Arcs `0..4` form the optimal path of [`ladder_family`].
pub const LADDER_OPTIMAL_ARCS: [usize; 4] = [0, 1, 2, 3];

/// Source `s = 0`, sink `t = 7`.
pub const LADDER_NODES: usize = 8;

/// Unit-demand network with two arc-disjoint s-t paths of four arcs each:
/// the optimal path `s→a1→a2→a3→t` with costs `(f, f, f, f-1)` and the
/// alternative `s→b1→b2→b3→t` with costs `(f+1, f, f, f)`. The unique
/// optimum costs `4f - 1`; the alternative costs `4f + 1`.
///
/// Nodes: `s = 0`, `a1..a3 = 1..3`, `b1..b3 = 4..6`, `t = 7`.
/// Reactivities are uniform; use [`PositiveLP::with_policy`] to change them.
pub fn ladder_family(f: u32) -> Result<PositiveLP> {
    if f < 2 {
        return Err(Error::LadderParameter(f));
    }
    let f = f64::from(f);
    let network = Network::new(LADDER_NODES)
        .arc(0, 1, f)
        .arc(1, 2, f)
        .arc(2, 3, f)
        .arc(3, 7, f - 1.0)
        .arc(0, 4, f + 1.0)
        .arc(4, 5, f)
        .arc(5, 6, f)
        .arc(6, 7, f);
    let mut demands = vec![0.0; LADDER_NODES];
    demands[0] = 1.0;
    demands[7] = -1.0;
    build_incidence_lp(
        format!("ladder-{}", f as u32),
        &network,
        &demands,
        &DPolicy::Uniform,
    )
}

/// Initial state used by the convergence-time comparison: `low` on the
/// optimal arcs and `high` elsewhere.
pub fn ladder_initial_state(low: f64, high: f64) -> DVector<f64> {
    DVector::from_fn(8, |i, _| {
        if LADDER_OPTIMAL_ARCS.contains(&i) {
            low
        } else {
            high
        }
    })
}
