//! Linear programs of the form
//!
//! ```text
//! min  c·x   s.t.  A x ∘ b,  l ≤ x ≤ u
//! ```
//!
//! with `∘ ∈ {≤, =, ≥}` chosen per row and bounds that may be infinite.
//! Besides the data model this module hosts the deterministic two-phase
//! simplex solver, the minimum-norm refinement of optimal solutions and a
//! brute-force vertex enumerator that is used as a test oracle.

mod dense;
mod min_norm;
mod oracle;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use min_norm::{min_norm_from_vertex, min_norm_optimal, MinNormMethod, MinNormSolution, QP_MAX_ITERS, QP_TOL};
pub use oracle::{enumerate_outcome_oracle, ORACLE_MAX_DIM};
pub use simplex::{solve, solve_with_limit, PIVOT_TOL};

/// Feasibility tolerance used for the verdicts returned by [`solve`].
pub const FEAS_TOL: f64 = 1e-9;
/// Slack allowed on the objective when describing the optimal face.
pub const OPT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Comparison {
    Le,
    Eq,
    Ge,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Le => "<=",
            Comparison::Eq => "=",
            Comparison::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "<=" => Some(Comparison::Le),
            "=" | "==" => Some(Comparison::Eq),
            ">=" => Some(Comparison::Ge),
            _ => None,
        }
    }
}

/// Lower bound of a variable: a finite real or `-∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LowerBound {
    NegInf,
    Finite(f64),
}

/// Upper bound of a variable: a finite real or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum UpperBound {
    Finite(f64),
    PosInf,
}

impl LowerBound {
    pub fn finite(self) -> Option<f64> {
        match self {
            LowerBound::Finite(v) => Some(v),
            LowerBound::NegInf => None,
        }
    }

    /// Value as an extended real (`-∞` for [`LowerBound::NegInf`]).
    pub fn value(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }
}

impl UpperBound {
    pub fn finite(self) -> Option<f64> {
        match self {
            UpperBound::Finite(v) => Some(v),
            UpperBound::PosInf => None,
        }
    }

    pub fn value(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// One stored coefficient `A[row, col] = value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Negative zero is folded into positive zero so that bit equality of
/// features coincides with numeric equality.
pub(crate) fn canonical(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// A validated linear program.
///
/// Coefficients are kept sorted by `(row, col)`; explicit zeros are dropped
/// because an absent entry and a zero entry describe the same problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance {
    m: usize,
    n: usize,
    a: Vec<Entry>,
    row_start: Vec<usize>,
    b: Vec<f64>,
    circ: Vec<Comparison>,
    c: Vec<f64>,
    l: Vec<LowerBound>,
    u: Vec<UpperBound>,
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { what, expected, got });
    }
    Ok(())
}

fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

impl LpInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
        b: Vec<f64>,
        circ: Vec<Comparison>,
        c: Vec<f64>,
        l: Vec<LowerBound>,
        u: Vec<UpperBound>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("an LP needs at least one variable".into()));
        }
        check_len("b", m, b.len())?;
        check_len("circ", m, circ.len())?;
        check_len("c", n, c.len())?;
        check_len("l", n, l.len())?;
        check_len("u", n, u.len())?;
        check_finite("b", &b)?;
        check_finite("c", &c)?;

        let mut a = Vec::new();
        for (row, col, value) in entries {
            if row >= m {
                return Err(Error::IndexOutOfRange { what: "row", index: row, limit: m });
            }
            if col >= n {
                return Err(Error::IndexOutOfRange { what: "col", index: col, limit: n });
            }
            if !value.is_finite() {
                return Err(Error::NonFinite("A"));
            }
            a.push(Entry { row, col, value });
        }
        a.sort_by_key(|e| (e.row, e.col));
        if let Some(w) = a.windows(2).find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col)) {
            return Err(Error::DuplicateEntry { row: w[0].row, col: w[0].col });
        }
        a.retain(|e| e.value != 0.0);

        let mut l = l;
        let mut u = u;
        for j in 0..n {
            if let LowerBound::Finite(v) = l[j] {
                if !v.is_finite() {
                    return Err(Error::NonFinite("l"));
                }
                l[j] = LowerBound::Finite(canonical(v));
            }
            if let UpperBound::Finite(v) = u[j] {
                if !v.is_finite() {
                    return Err(Error::NonFinite("u"));
                }
                u[j] = UpperBound::Finite(canonical(v));
            }
            if let (LowerBound::Finite(lo), UpperBound::Finite(hi)) = (l[j], u[j]) {
                if lo > hi {
                    return Err(Error::InvalidBounds(j));
                }
            }
        }

        let mut row_start = vec![0; m + 1];
        for e in &a {
            row_start[e.row + 1] += 1;
        }
        for i in 0..m {
            row_start[i + 1] += row_start[i];
        }

        Ok(Self {
            m,
            n,
            a,
            row_start,
            b: b.into_iter().map(canonical).collect(),
            circ,
            c: c.into_iter().map(canonical).collect(),
            l,
            u,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzero coefficients sorted by `(row, col)`.
    pub fn entries(&self) -> &[Entry] {
        &self.a
    }

    pub fn row(&self, i: usize) -> &[Entry] {
        &self.a[self.row_start[i]..self.row_start[i + 1]]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn circ(&self) -> &[Comparison] {
        &self.circ
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn l(&self) -> &[LowerBound] {
        &self.l
    }

    pub fn u(&self) -> &[UpperBound] {
        &self.u
    }

    pub fn dense_a(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.m];
        for e in &self.a {
            dense[e.row][e.col] = e.value;
        }
        dense
    }

    /// `a_i · x`, accumulated in ascending column order.
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        self.row(i).iter().map(|e| e.value * x[e.col]).sum()
    }

    pub fn all_bounds_finite(&self) -> bool {
        self.l.iter().all(|b| b.finite().is_some()) && self.u.iter().all(|b| b.finite().is_some())
    }
}

/// `c · x`, summed in ascending index order.
pub fn objective(lp: &LpInstance, x: &[f64]) -> Result<f64> {
    check_len("x", lp.n, x.len())?;
    Ok(lp.c.iter().zip(x).map(|(c, x)| c * x).sum())
}

/// Largest constraint or bound violation of `x`; zero exactly when `x` is feasible.
pub fn violation(lp: &LpInstance, x: &[f64]) -> Result<f64> {
    check_len("x", lp.n, x.len())?;
    check_finite("x", x)?;
    let mut worst = 0.0_f64;
    for i in 0..lp.m {
        let r = lp.row_dot(i, x) - lp.b[i];
        let v = match lp.circ[i] {
            Comparison::Le => r.max(0.0),
            Comparison::Eq => r.abs(),
            Comparison::Ge => (-r).max(0.0),
        };
        worst = worst.max(v);
    }
    for j in 0..lp.n {
        if let LowerBound::Finite(lo) = lp.l[j] {
            worst = worst.max(lo - x[j]);
        }
        if let UpperBound::Finite(hi) = lp.u[j] {
            worst = worst.max(x[j] - hi);
        }
    }
    Ok(worst)
}

/// Solver verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: f64, solution: Vec<f64> },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    /// Optimal objective as an extended real: `+∞` when infeasible, `-∞`
    /// when unbounded.
    pub fn objective_value(&self) -> f64 {
        match self {
            LpOutcome::Infeasible => f64::INFINITY,
            LpOutcome::Unbounded => f64::NEG_INFINITY,
            LpOutcome::Optimal { value, .. } => *value,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            LpOutcome::Infeasible => "infeasible",
            LpOutcome::Unbounded => "unbounded",
            LpOutcome::Optimal { .. } => "optimal",
        }
    }

    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { solution, .. } => Some(solution),
            _ => None,
        }
    }
}
