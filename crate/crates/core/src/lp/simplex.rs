//! Dense two-phase primal simplex with Bland's rule.
//!
//! The LP is rewritten over nonnegative variables `y`:
//!
//! * `l ≤ x` finite: `x = l + y` (plus a row `y ≤ u - l` when `u` is finite),
//! * only `u` finite: `x = u - y`,
//! * free: `x = y⁺ - y⁻`.
//!
//! Every row then receives a slack or surplus column, right-hand sides are made
//! nonnegative, and rows without a usable slack get an artificial column.
//! Phase 1 minimizes the sum of artificials, phase 2 the original objective.
//! Once an optimal basis is known the basic values are recomputed from the
//! unpivoted matrix to shed the rounding accumulated by the tableau updates.

use super::dense::solve_square;
use super::{Comparison, LowerBound, LpInstance, LpOutcome, UpperBound, FEAS_TOL};
use crate::error::{Error, Result};

/// Smallest magnitude accepted as a pivot element.
pub const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + y[col]`
    Shift { col: usize, offset: f64 },
    /// `x = offset - y[col]`
    Neg { col: usize, offset: f64 },
    /// `x = y[pos] - y[neg]`
    Free { pos: usize, neg: usize },
}

struct StandardForm {
    /// Equality rows over all structural, slack and artificial columns.
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    is_artificial: Vec<bool>,
    basis: Vec<usize>,
    vars: Vec<VarMap>,
}

fn standard_form(lp: &LpInstance) -> StandardForm {
    let mut vars = Vec::with_capacity(lp.n());
    let mut ncols = 0;
    let mut offsets = Vec::with_capacity(lp.n());
    // (structural column, bound) rows y ≤ u - l
    let mut bound_rows = Vec::new();
    let mut cost = Vec::new();
    for j in 0..lp.n() {
        let cj = lp.c()[j];
        let map = match (lp.l()[j], lp.u()[j]) {
            (LowerBound::Finite(lo), up) => {
                if let UpperBound::Finite(hi) = up {
                    bound_rows.push((ncols, hi - lo));
                }
                cost.push(cj);
                ncols += 1;
                VarMap::Shift { col: ncols - 1, offset: lo }
            }
            (LowerBound::NegInf, UpperBound::Finite(hi)) => {
                cost.push(-cj);
                ncols += 1;
                VarMap::Neg { col: ncols - 1, offset: hi }
            }
            (LowerBound::NegInf, UpperBound::PosInf) => {
                cost.push(cj);
                cost.push(-cj);
                ncols += 2;
                VarMap::Free { pos: ncols - 2, neg: ncols - 1 }
            }
        };
        offsets.push(match map {
            VarMap::Shift { offset, .. } | VarMap::Neg { offset, .. } => offset,
            VarMap::Free { .. } => 0.0,
        });
        vars.push(map);
    }
    let structural = ncols;

    // Rows over structural columns plus their sense.
    let mut proto: Vec<(Vec<f64>, f64, Comparison)> = Vec::new();
    for i in 0..lp.m() {
        let mut row = vec![0.0; structural];
        let mut rhs = lp.b()[i];
        for e in lp.row(i) {
            match vars[e.col] {
                VarMap::Shift { col, .. } => row[col] += e.value,
                VarMap::Neg { col, .. } => row[col] -= e.value,
                VarMap::Free { pos, neg } => {
                    row[pos] += e.value;
                    row[neg] -= e.value;
                }
            }
            rhs -= e.value * offsets[e.col];
        }
        proto.push((row, rhs, lp.circ()[i]));
    }
    for &(col, width) in &bound_rows {
        let mut row = vec![0.0; structural];
        row[col] = 1.0;
        proto.push((row, width, Comparison::Le));
    }

    let nrows = proto.len();
    let nslack = proto.iter().filter(|p| p.2 != Comparison::Eq).count();
    let mut rows = Vec::with_capacity(nrows);
    let mut rhs = Vec::with_capacity(nrows);
    let mut basis = Vec::with_capacity(nrows);
    let mut needs_artificial = Vec::new();
    let mut slack = structural;
    for (r, (row, b, sense)) in proto.into_iter().enumerate() {
        let mut full = row;
        full.resize(structural + nslack, 0.0);
        let slack_col = match sense {
            Comparison::Le => {
                full[slack] = 1.0;
                slack += 1;
                Some(slack - 1)
            }
            Comparison::Ge => {
                full[slack] = -1.0;
                slack += 1;
                Some(slack - 1)
            }
            Comparison::Eq => None,
        };
        let mut b = b;
        if b < 0.0 {
            full.iter_mut().for_each(|v| *v = -*v);
            b = -b;
        }
        match slack_col {
            Some(s) if full[s] > 0.0 => basis.push(s),
            _ => {
                basis.push(usize::MAX);
                needs_artificial.push(r);
            }
        }
        rows.push(full);
        rhs.push(b);
    }
    cost.resize(structural + nslack, 0.0);
    let total = structural + nslack + needs_artificial.len();
    let mut is_artificial = vec![false; structural + nslack];
    for (k, &r) in needs_artificial.iter().enumerate() {
        let col = structural + nslack + k;
        for (rr, row) in rows.iter_mut().enumerate() {
            row.resize(total, 0.0);
            if rr == r {
                row[col] = 1.0;
            }
        }
        basis[r] = col;
        is_artificial.push(true);
        cost.push(0.0);
    }
    for row in rows.iter_mut() {
        row.resize(total, 0.0);
    }

    StandardForm { rows, rhs, cost, is_artificial, basis, vars }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Original row index of each tableau row (rows may be dropped).
    origin: Vec<usize>,
    reduced: Vec<f64>,
    pivots: usize,
    max_pivots: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn price(&mut self, cost: &[f64]) {
        self.reduced = cost.to_vec();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (rc, a) in self.reduced.iter_mut().zip(row) {
                    *rc -= cb * a;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        self.rows[r][col] = 1.0;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for (rr, row) in self.rows.iter_mut().enumerate() {
            if rr == r {
                continue;
            }
            let f = row[col];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[col] = 0.0;
            self.rhs[rr] -= f * pivot_rhs;
            if self.rhs[rr] < 0.0 && self.rhs[rr] > -FEAS_TOL {
                self.rhs[rr] = 0.0;
            }
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.reduced[col] = 0.0;
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    /// Runs Bland's rule over the columns allowed by `allowed`.
    fn iterate(&mut self, allowed: &[bool]) -> Result<Phase> {
        loop {
            let entering = (0..self.reduced.len())
                .find(|&j| allowed[j] && self.reduced[j] < -COST_TOL && !self.basis.contains(&j));
            let Some(col) = entering else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[r].max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if (tie && self.basis[r] < self.basis[br]) || (!tie && ratio < bratio) {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            if self.pivots >= self.max_pivots {
                return Err(Error::SolverStall(self.pivots));
            }
            self.pivot(r, col);
        }
    }
}

/// Solves `lp` with the default pivot budget of `50·(m+n)`.
pub fn solve(lp: &LpInstance) -> Result<LpOutcome> {
    solve_with_limit(lp, 50 * (lp.m() + lp.n()))
}

pub fn solve_with_limit(lp: &LpInstance, max_pivots: usize) -> Result<LpOutcome> {
    let sf = standard_form(lp);
    let ncols = sf.cost.len();
    let scale = sf.rhs.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let mut t = Tableau {
        rows: sf.rows.clone(),
        rhs: sf.rhs.clone(),
        basis: sf.basis.clone(),
        origin: (0..sf.rows.len()).collect(),
        reduced: Vec::new(),
        pivots: 0,
        max_pivots,
    };

    if sf.is_artificial.iter().any(|&a| a) {
        let phase1_cost: Vec<f64> = sf.is_artificial.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
        t.price(&phase1_cost);
        let all = vec![true; ncols];
        if let Phase::Unbounded = t.iterate(&all)? {
            unreachable!("phase 1 objective is bounded below by zero");
        }
        let infeasibility: f64 = t
            .basis
            .iter()
            .zip(&t.rhs)
            .filter(|(b, _)| sf.is_artificial[**b])
            .map(|(_, v)| *v)
            .sum();
        if infeasibility > FEAS_TOL * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut r = 0;
        while r < t.rows.len() {
            if sf.is_artificial[t.basis[r]] {
                let col = (0..ncols)
                    .find(|&j| !sf.is_artificial[j] && t.rows[r][j].abs() > PIVOT_TOL && !t.basis.contains(&j));
                match col {
                    Some(j) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        // Redundant row.
                        t.rows.remove(r);
                        t.rhs.remove(r);
                        t.basis.remove(r);
                        t.origin.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    let allowed: Vec<bool> = sf.is_artificial.iter().map(|a| !a).collect();
    t.price(&sf.cost);
    if let Phase::Unbounded = t.iterate(&allowed)? {
        return Ok(LpOutcome::Unbounded);
    }

    let y = basic_solution(&sf, &t);
    let x: Vec<f64> = sf
        .vars
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, offset } => offset + y[col],
            VarMap::Neg { col, offset } => offset - y[col],
            VarMap::Free { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let x = clamp_to_bounds(lp, x);
    let value = super::objective(lp, &x)?;
    Ok(LpOutcome::Optimal { value, solution: x })
}

/// Recomputes the basic variables from the unpivoted rows; falls back to the
/// tableau values if the basis matrix is numerically singular.
fn basic_solution(sf: &StandardForm, t: &Tableau) -> Vec<f64> {
    let mut y = vec![0.0; sf.cost.len()];
    let k = t.basis.len();
    let matrix: Vec<Vec<f64>> = t
        .origin
        .iter()
        .map(|&r| t.basis.iter().map(|&col| sf.rows[r][col]).collect())
        .collect();
    let rhs: Vec<f64> = t.origin.iter().map(|&r| sf.rhs[r]).collect();
    let values = solve_square(matrix, rhs, 1e-13).unwrap_or_else(|| t.rhs.clone());
    debug_assert_eq!(values.len(), k);
    for (&col, v) in t.basis.iter().zip(values) {
        y[col] = v.max(0.0);
    }
    y
}

fn clamp_to_bounds(lp: &LpInstance, mut x: Vec<f64>) -> Vec<f64> {
    for (j, xj) in x.iter_mut().enumerate() {
        if let LowerBound::Finite(lo) = lp.l()[j] {
            *xj = xj.max(lo);
        }
        if let UpperBound::Finite(hi) = lp.u()[j] {
            *xj = xj.min(hi);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{violation, Comparison, LowerBound, LpInstance, LpOutcome, UpperBound};
    use super::*;

    fn cyclic(variant: Comparison, lo: LowerBound, hi: UpperBound, pairs: &[(usize, usize)]) -> LpInstance {
        let entries: Vec<_> = pairs
            .iter()
            .enumerate()
            .flat_map(|(i, &(a, b))| [(i, a, 1.0), (i, b, 1.0)])
            .collect();
        LpInstance::new(4, 4, entries, vec![1.0; 4], vec![variant; 4], vec![1.0; 4], vec![lo; 4], vec![hi; 4])
            .unwrap()
    }

    const CYCLE: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];

    #[test]
    fn sample_lp_optimum() {
        let out = solve(&sample_lp()).unwrap();
        let LpOutcome::Optimal { value, solution } = out else { panic!("{out:?}") };
        assert!((value - 1.0).abs() < 1e-12);
        assert!((solution[0] - 1.0).abs() < 1e-12 && solution[1].abs() < 1e-12);
    }

    #[test]
    fn cyclic_variants() {
        let infeasible = cyclic(Comparison::Eq, LowerBound::Finite(1.0), UpperBound::PosInf, &CYCLE);
        assert_eq!(solve(&infeasible).unwrap(), LpOutcome::Infeasible);
        let unbounded = cyclic(Comparison::Le, LowerBound::NegInf, UpperBound::Finite(1.0), &CYCLE);
        assert_eq!(solve(&unbounded).unwrap(), LpOutcome::Unbounded);
        let bounded = cyclic(Comparison::Eq, LowerBound::NegInf, UpperBound::Finite(1.0), &CYCLE);
        let out = solve(&bounded).unwrap();
        assert!((out.objective_value() - 2.0).abs() < 1e-12);
        assert!(violation(&bounded, out.solution().unwrap()).unwrap() <= 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        // x1 + x2 = 1 appears twice; phase 1 must drop the dependent row.
        let lp = cyclic(
            Comparison::Eq,
            LowerBound::NegInf,
            UpperBound::Finite(1.0),
            &[(0, 1), (1, 0), (2, 3), (3, 2)],
        );
        let out = solve(&lp).unwrap();
        assert!((out.objective_value() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_objective_in_box() {
        let out = solve(&box_only(0.0, 1.0, 3.0)).unwrap();
        let LpOutcome::Optimal { value, solution } = out else { panic!() };
        assert_eq!(value, 0.0);
        assert!((1.0..=3.0).contains(&solution[0]));
    }

    #[test]
    fn free_variable_and_ge_rows() {
        // min x s.t. x ≥ -2.5 (as a row), x free.
        let lp = LpInstance::new(
            1,
            1,
            [(0, 0, 1.0)],
            vec![-2.5],
            vec![Comparison::Ge],
            vec![1.0],
            vec![LowerBound::NegInf],
            vec![UpperBound::PosInf],
        )
        .unwrap();
        let out = solve(&lp).unwrap();
        assert_eq!(out.solution().unwrap(), &[-2.5]);
        let zero_row = LpInstance::new(
            1,
            1,
            [],
            vec![1.0],
            vec![Comparison::Eq],
            vec![0.0],
            vec![LowerBound::Finite(0.0)],
            vec![UpperBound::Finite(1.0)],
        )
        .unwrap();
        assert_eq!(solve(&zero_row).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn stall_is_reported() {
        assert_eq!(solve_with_limit(&sample_lp(), 0), Err(Error::SolverStall(0)));
    }
}
