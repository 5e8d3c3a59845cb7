//! Minimum-ℓ2-norm point of the optimal face.
//!
//! Stage one is the simplex solve that fixes the optimal value `v*`. Stage two
//! minimizes `½‖x‖²` over `{x feasible, c·x ≤ v* + OPT_TOL}` with a primal
//! active-set method started at the simplex vertex. Each iteration solves the
//! equality-constrained least-norm problem on the current working set. If the
//! working set repeats at a fixed point (degenerate cycling), or the iteration
//! budget runs out, the problem is re-solved with a dual active-set method
//! (Goldfarb–Idnani) started at the origin, and the result records that.

use super::dense::{dot, norm};
use super::{objective, solve, Comparison, LowerBound, LpInstance, LpOutcome, UpperBound, OPT_TOL};
use crate::error::{Error, Result};
use std::collections::HashSet;

/// KKT residual accepted for a minimum-norm solution.
pub const QP_TOL: f64 = 1e-8;
/// Iteration budget of the primal active-set method.
pub const QP_MAX_ITERS: usize = 200;

const DEPENDENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinNormMethod {
    PrimalActiveSet,
    /// The primal method cycled or ran out of iterations.
    DualFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormSolution {
    pub x: Vec<f64>,
    pub method: MinNormMethod,
    pub iterations: usize,
    pub kkt_residual: f64,
}

/// `normal · x ≤ rhs`, or `=` when `equality` is set.
#[derive(Debug, Clone)]
struct Constraint {
    normal: Vec<f64>,
    rhs: f64,
    equality: bool,
}

impl Constraint {
    fn slack(&self, x: &[f64]) -> f64 {
        self.rhs - dot(&self.normal, x)
    }
}

fn face_constraints(lp: &LpInstance, value: f64) -> Vec<Constraint> {
    let n = lp.n();
    let dense = lp.dense_a();
    let mut out = Vec::new();
    for (i, row) in dense.iter().enumerate() {
        if lp.circ()[i] == Comparison::Eq {
            out.push(Constraint { normal: row.clone(), rhs: lp.b()[i], equality: true });
        }
    }
    out.push(Constraint { normal: lp.c().to_vec(), rhs: value + OPT_TOL, equality: false });
    for (i, row) in dense.iter().enumerate() {
        match lp.circ()[i] {
            Comparison::Le => out.push(Constraint { normal: row.clone(), rhs: lp.b()[i], equality: false }),
            Comparison::Ge => out.push(Constraint {
                normal: row.iter().map(|v| -v).collect(),
                rhs: -lp.b()[i],
                equality: false,
            }),
            Comparison::Eq => {}
        }
    }
    for j in 0..n {
        if let LowerBound::Finite(lo) = lp.l()[j] {
            let mut e = vec![0.0; n];
            e[j] = -1.0;
            out.push(Constraint { normal: e, rhs: -lo, equality: false });
        }
        if let UpperBound::Finite(hi) = lp.u()[j] {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            out.push(Constraint { normal: e, rhs: hi, equality: false });
        }
    }
    out
}

/// Orthonormal basis `Q` of a set of linearly independent rows `A`, with the
/// lower-triangular factor `L` such that `A = L Q`.
#[derive(Debug, Clone, Default)]
struct RowBasis {
    q: Vec<Vec<f64>>,
    l: Vec<Vec<f64>>,
}

impl RowBasis {
    fn len(&self) -> usize {
        self.q.len()
    }

    /// Appends `a`; returns false (and leaves the basis unchanged) when `a` is
    /// numerically in the span of the current rows.
    fn push(&mut self, a: &[f64]) -> bool {
        let k = self.q.len();
        let mut v = a.to_vec();
        let mut coeffs = vec![0.0; k + 1];
        for _ in 0..2 {
            for (i, q) in self.q.iter().enumerate() {
                let d = dot(q, &v);
                coeffs[i] += d;
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= d * qi);
            }
        }
        let nv = norm(&v);
        if nv <= DEPENDENT_TOL * norm(a).max(1e-300) {
            return false;
        }
        v.iter_mut().for_each(|vi| *vi /= nv);
        coeffs[k] = nv;
        self.q.push(v);
        self.l.push(coeffs);
        true
    }

    /// Least-norm `y` with `A y = rhs`.
    fn least_norm(&self, rhs: &[f64], n: usize) -> Vec<f64> {
        let k = self.len();
        let mut w = vec![0.0; k];
        for i in 0..k {
            let s: f64 = (0..i).map(|t| self.l[i][t] * w[t]).sum();
            w[i] = (rhs[i] - s) / self.l[i][i];
        }
        let mut y = vec![0.0; n];
        for (wi, q) in w.iter().zip(&self.q) {
            y.iter_mut().zip(q).for_each(|(yi, qi)| *yi += wi * qi);
        }
        y
    }

    /// Coefficients `μ` with `Aᵀ μ = P v`, `P` the projector onto the row span.
    fn coefficients(&self, v: &[f64]) -> Vec<f64> {
        let k = self.len();
        let t: Vec<f64> = self.q.iter().map(|q| dot(q, v)).collect();
        let mut mu = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|r| self.l[r][i] * mu[r]).sum();
            mu[i] = (t[i] - s) / self.l[i][i];
        }
        mu
    }

    /// Component of `v` orthogonal to the row span.
    fn project_out(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for _ in 0..2 {
            for q in &self.q {
                let d = dot(q, &out);
                out.iter_mut().zip(q).for_each(|(o, qi)| *o -= d * qi);
            }
        }
        out
    }
}

fn basis_of<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Option<RowBasis> {
    let mut basis = RowBasis::default();
    for row in rows {
        if !basis.push(row) {
            return None;
        }
    }
    Some(basis)
}

/// Max of primal infeasibility, stationarity error, multiplier sign error and
/// complementarity error for `x` with the given active set.
fn kkt_residual(cons: &[Constraint], active: &[usize], x: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for c in cons {
        let s = c.slack(x);
        worst = worst.max(if c.equality { s.abs() } else { (-s).max(0.0) });
    }
    let mut basis = RowBasis::default();
    let mut kept = Vec::new();
    for &i in active {
        if basis.push(&cons[i].normal) {
            kept.push(i);
        }
    }
    let off_span = basis.project_out(x);
    worst = worst.max(off_span.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
    // x + Aᵀλ = 0  ⇒  λ = -μ with Aᵀμ = x.
    let mu = basis.coefficients(x);
    for (&i, m) in kept.iter().zip(&mu) {
        let lambda = -m;
        if !cons[i].equality {
            worst = worst.max((-lambda).max(0.0));
            worst = worst.max((lambda * cons[i].slack(x)).abs());
        }
    }
    worst
}

fn primal_active_set(cons: &[Constraint], x0: &[f64]) -> Option<(Vec<f64>, Vec<usize>, usize)> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut working: Vec<usize> = Vec::new();
    let mut basis = RowBasis::default();
    for (i, c) in cons.iter().enumerate() {
        let scale = 1.0 + c.rhs.abs();
        let tight = c.equality || c.slack(&x).abs() <= 1e-9 * scale;
        // Dependent rows (including repeated equalities) are implied by the kept ones.
        if tight && basis.push(&c.normal) {
            working.push(i);
        }
    }

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for iter in 1..=QP_MAX_ITERS {
        let rhs: Vec<f64> = working.iter().map(|&i| cons[i].rhs).collect();
        let y = basis.least_norm(&rhs, n);
        let p: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let step_tol = 1e-12 * (1.0 + norm(&x));
        if norm(&p) <= step_tol {
            x = y;
            let mu = basis.coefficients(&x);
            // λ = -μ must be nonnegative on inequalities; drop the most negative.
            let mut drop: Option<(usize, f64)> = None;
            for (pos, (&i, m)) in working.iter().zip(&mu).enumerate() {
                let lambda = -m;
                if !cons[i].equality && lambda < -1e-12 && drop.is_none_or(|(_, best)| lambda < best) {
                    drop = Some((pos, lambda));
                }
            }
            let Some((pos, _)) = drop else {
                return Some((x, working, iter));
            };
            let mut key = working.clone();
            key.sort_unstable();
            if !seen.insert(key) {
                return None;
            }
            working.remove(pos);
            basis = basis_of(working.iter().map(|&i| cons[i].normal.as_slice()))?;
        } else {
            let mut alpha = 1.0;
            let mut blocking = None;
            for (i, c) in cons.iter().enumerate() {
                if c.equality || working.contains(&i) {
                    continue;
                }
                let ap = dot(&c.normal, &p);
                if ap <= 1e-14 * norm(&c.normal) * norm(&p) {
                    continue;
                }
                let t = c.slack(&x).max(0.0) / ap;
                if t < alpha {
                    alpha = t;
                    blocking = Some(i);
                }
            }
            x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
            if alpha > 0.0 {
                seen.clear();
            } else {
                let mut key = working.clone();
                key.sort_unstable();
                if !seen.insert(key) {
                    return None;
                }
            }
            if let Some(i) = blocking {
                if !basis.push(&cons[i].normal) {
                    return None;
                }
                working.push(i);
            }
        }
    }
    None
}

/// Goldfarb–Idnani dual active set for `min ½‖x‖²` (identity Hessian).
fn dual_active_set(cons: &[Constraint], n: usize) -> Option<(Vec<f64>, Vec<usize>, usize)> {
    let budget = 20 * (n + cons.len());
    let mut x = vec![0.0; n];
    // Active constraints in "≥" orientation: sign * normal · x ≥ sign * rhs.
    let mut active: Vec<(usize, f64)> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let mut basis = RowBasis::default();
    let mut iters = 0;

    let oriented = |i: usize, sign: f64| -> (Vec<f64>, f64) {
        (cons[i].normal.iter().map(|v| sign * v).collect(), sign * cons[i].rhs)
    };

    let rebuild = |active: &[(usize, f64)]| -> Option<RowBasis> {
        let mut b = RowBasis::default();
        for &(i, sign) in active {
            let (nv, _) = oriented(i, sign);
            if !b.push(&nv) {
                return None;
            }
        }
        Some(b)
    };

    let mut pending_equalities: Vec<usize> = (0..cons.len()).filter(|&i| cons[i].equality).collect();
    pending_equalities.reverse();
    loop {
        iters += 1;
        if iters > budget {
            return None;
        }
        // Pick the next constraint to add.
        let (p, sign, is_eq) = if let Some(i) = pending_equalities.pop() {
            let s = -cons[i].slack(&x); // normal·x - rhs
            let sign = if s > 0.0 { -1.0 } else { 1.0 };
            (i, sign, true)
        } else {
            let mut pick: Option<(usize, f64)> = None;
            for (i, c) in cons.iter().enumerate() {
                if c.equality || active.iter().any(|&(a, _)| a == i) {
                    continue;
                }
                let viol = -c.slack(&x);
                let tol = 1e-10 * (1.0 + c.rhs.abs());
                if viol > tol && pick.is_none_or(|(_, best)| viol > best) {
                    pick = Some((i, viol));
                }
            }
            match pick {
                None => {
                    let idx = active.iter().map(|&(i, _)| i).collect();
                    return Some((x, idx, iters));
                }
                Some((i, _)) => (i, -1.0, false),
            }
        };
        let (np, beta) = oriented(p, sign);
        let mut up = 0.0;
        loop {
            let s = dot(&np, &x) - beta;
            let z = basis.project_out(&np);
            let r = basis.coefficients(&np);
            let mut t1 = f64::INFINITY;
            let mut k = None;
            for (pos, (&(i, _), ri)) in active.iter().zip(&r).enumerate() {
                if cons[i].equality || *ri <= 1e-14 {
                    continue;
                }
                let t = u[pos] / ri;
                if t < t1 {
                    t1 = t;
                    k = Some(pos);
                }
            }
            let zn = dot(&z, &np);
            let t2 = if norm(&z) > 1e-12 * norm(&np) && zn > 0.0 { (-s).max(0.0) / zn } else { f64::INFINITY };
            let t = t1.min(t2);
            if t.is_infinite() {
                if is_eq && s.abs() <= 1e-10 * (1.0 + beta.abs()) {
                    // Redundant equality.
                    break;
                }
                return None;
            }
            if t2.is_finite() {
                x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += t * zi);
            }
            u.iter_mut().zip(&r).for_each(|(ui, ri)| *ui -= t * ri);
            up += t;
            if t2 <= t1 {
                active.push((p, sign));
                u.push(up);
                if !basis.push(&np) {
                    return None;
                }
                break;
            }
            let k = k.expect("t1 finite");
            active.remove(k);
            u.remove(k);
            basis = rebuild(&active)?;
            iters += 1;
            if iters > budget {
                return None;
            }
        }
    }
}

/// Minimum-norm optimal solution of `lp`, solving it first.
pub fn min_norm_optimal(lp: &LpInstance) -> Result<MinNormSolution> {
    match solve(lp)? {
        LpOutcome::Optimal { solution, .. } => min_norm_from_vertex(lp, &solution),
        _ => Err(Error::NotOptimal),
    }
}

/// Minimum-norm optimal solution given an optimal vertex `vertex` of `lp`.
pub fn min_norm_from_vertex(lp: &LpInstance, vertex: &[f64]) -> Result<MinNormSolution> {
    let value = objective(lp, vertex)?;
    let cons = face_constraints(lp, value);
    if let Some((x, active, iterations)) = primal_active_set(&cons, vertex) {
        let kkt = kkt_residual(&cons, &active, &x);
        if kkt <= QP_TOL {
            return Ok(MinNormSolution { x, method: MinNormMethod::PrimalActiveSet, iterations, kkt_residual: kkt });
        }
    }
    let (x, active, iterations) = dual_active_set(&cons, lp.n()).ok_or(Error::QpNoConvergence(QP_MAX_ITERS))?;
    let kkt = kkt_residual(&cons, &active, &x);
    if kkt > QP_TOL {
        return Err(Error::QpNoConvergence(iterations));
    }
    Ok(MinNormSolution { x, method: MinNormMethod::DualFallback, iterations, kkt_residual: kkt })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn cyclic_bounded() -> LpInstance {
        LpInstance::new(
            4,
            4,
            [(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0), (1, 2, 1.0), (2, 2, 1.0), (2, 3, 1.0), (3, 3, 1.0), (3, 0, 1.0)],
            vec![1.0; 4],
            vec![Comparison::Eq; 4],
            vec![1.0; 4],
            vec![LowerBound::NegInf; 4],
            vec![UpperBound::Finite(1.0); 4],
        )
        .unwrap()
    }

    #[test]
    fn cyclic_face_center() {
        let sol = min_norm_optimal(&cyclic_bounded()).unwrap();
        for v in &sol.x {
            assert!((v - 0.5).abs() < 1e-8, "{:?}", sol.x);
        }
        assert!(sol.kkt_residual <= QP_TOL);
    }

    #[test]
    fn constant_objective_boxes() {
        assert!(min_norm_optimal(&box_only(0.0, -2.0, 3.0)).unwrap().x[0].abs() < 1e-12);
        assert!((min_norm_optimal(&box_only(0.0, 1.0, 3.0)).unwrap().x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_route_agrees_on_cycle() {
        let lp = cyclic_bounded();
        let cons = face_constraints(&lp, 2.0);
        let (x, active, _) = dual_active_set(&cons, 4).unwrap();
        assert!(kkt_residual(&cons, &active, &x) <= QP_TOL);
        for v in &x {
            assert!((v - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_non_optimal() {
        let lp = LpInstance::new(
            1,
            1,
            [(0, 0, 1.0)],
            vec![2.0],
            vec![Comparison::Ge],
            vec![1.0],
            vec![LowerBound::NegInf],
            vec![UpperBound::Finite(1.0)],
        )
        .unwrap();
        assert_eq!(min_norm_optimal(&lp), Err(Error::NotOptimal));
    }

    #[test]
    fn row_basis_least_norm() {
        let mut b = RowBasis::default();
        assert!(b.push(&[1.0, 1.0, 0.0]));
        assert!(!b.push(&[2.0, 2.0, 0.0]));
        assert!(b.push(&[0.0, 1.0, 1.0]));
        let y = b.least_norm(&[1.0, 1.0], 3);
        assert!((y[0] + y[1] - 1.0).abs() < 1e-12 && (y[1] + y[2] - 1.0).abs() < 1e-12);
        // least-norm point lies in the row span
        assert!(norm(&b.project_out(&y)) < 1e-12);
        let mu = b.coefficients(&y);
        let back: Vec<f64> = (0..3).map(|j| mu[0] * [1.0, 1.0, 0.0][j] + mu[1] * [0.0, 1.0, 1.0][j]).collect();
        for (u, v) in back.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
