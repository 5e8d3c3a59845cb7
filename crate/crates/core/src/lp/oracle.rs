//! Brute-force LP oracle: enumerates every basic solution.
//!
//! A point is basic when `n` linearly independent constraint hyperplanes
//! (rows taken with equality, or bounds) are tight at it. The optimum of a
//! bounded feasible LP is attained at one of them. Infinite bounds are
//! replaced by a box `|x_j| ≤ M`; the LP is declared unbounded when growing the
//! box from `BOX_SMALL` to `BOX_LARGE` keeps improving the optimum.
//!
//! None of this shares code with the simplex path; it exists to check it.

use super::dense::solve_square;
use super::{objective, Comparison, LpInstance, LpOutcome};
use crate::error::{Error, Result};

/// Largest `m` and `n` accepted by [`enumerate_outcome_oracle`].
pub const ORACLE_MAX_DIM: usize = 8;

const BOX_SMALL: f64 = 1e6;
const BOX_LARGE: f64 = 1e7;

struct Hyperplane {
    normal: Vec<f64>,
    rhs: f64,
}

fn best_vertex(lp: &LpInstance, dense: &[Vec<f64>], big: f64) -> Option<(f64, Vec<f64>)> {
    let n = lp.n();
    let lo: Vec<f64> = lp.l().iter().map(|b| b.finite().unwrap_or(-big)).collect();
    let hi: Vec<f64> = lp.u().iter().map(|b| b.finite().unwrap_or(big)).collect();

    let mut planes: Vec<Hyperplane> = dense
        .iter()
        .zip(lp.b())
        .map(|(row, &b)| Hyperplane { normal: row.clone(), rhs: b })
        .collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push(Hyperplane { normal: e.clone(), rhs: lo[j] });
        if hi[j] != lo[j] {
            planes.push(Hyperplane { normal: e, rhs: hi[j] });
        }
    }

    let feasible = |x: &[f64]| -> bool {
        let scale = x.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let tol = 1e-9 * scale;
        let rows_ok = dense.iter().zip(lp.b()).zip(lp.circ()).all(|((row, &b), &circ)| {
            let ax: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            match circ {
                Comparison::Le => ax <= b + tol,
                Comparison::Eq => (ax - b).abs() <= tol,
                Comparison::Ge => ax >= b - tol,
            }
        });
        rows_ok && x.iter().zip(lo.iter().zip(&hi)).all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let k = planes.len();
    if k < n {
        return None;
    }
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let matrix: Vec<Vec<f64>> = pick.iter().map(|&p| planes[p].normal.clone()).collect();
        let rhs: Vec<f64> = pick.iter().map(|&p| planes[p].rhs).collect();
        if let Some(x) = solve_square(matrix, rhs, 1e-10) {
            if feasible(&x) {
                let value = objective(lp, &x).expect("length checked");
                if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
                    best = Some((value, x));
                }
            }
        }
        // Next combination in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < k - n + i {
                pick[i] += 1;
                for t in i + 1..n {
                    pick[t] = pick[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Classifies `lp` by enumerating all basic solutions. Limited to `m, n ≤ 8`.
pub fn enumerate_outcome_oracle(lp: &LpInstance) -> Result<LpOutcome> {
    if lp.m() > ORACLE_MAX_DIM || lp.n() > ORACLE_MAX_DIM {
        return Err(Error::TooLarge { m: lp.m(), n: lp.n(), limit: ORACLE_MAX_DIM });
    }
    let dense = lp.dense_a();
    let has_infinite = !lp.all_bounds_finite();
    let Some((value, x)) = best_vertex(lp, &dense, BOX_LARGE) else {
        return Ok(LpOutcome::Infeasible);
    };
    if has_infinite {
        let improves = best_vertex(lp, &dense, BOX_SMALL)
            .is_some_and(|(small, _)| value < small - 1e-6 * (1.0 + small.abs()));
        if improves {
            return Ok(LpOutcome::Unbounded);
        }
    }
    Ok(LpOutcome::Optimal { value, solution: x })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::sample_lp;
    use super::super::{LowerBound, UpperBound};
    use super::*;

    #[test]
    fn sample_lp_matches_hand_value() {
        let out = enumerate_outcome_oracle(&sample_lp()).unwrap();
        assert!((out.objective_value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_row_is_infeasible() {
        let lp = LpInstance::new(
            1,
            2,
            [],
            vec![1.0],
            vec![Comparison::Eq],
            vec![1.0, 1.0],
            vec![LowerBound::Finite(0.0); 2],
            vec![UpperBound::Finite(1.0); 2],
        )
        .unwrap();
        assert_eq!(enumerate_outcome_oracle(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded_ray() {
        let lp = LpInstance::new(
            1,
            2,
            [(0, 0, 1.0), (0, 1, 1.0)],
            vec![1.0],
            vec![Comparison::Le],
            vec![1.0, 0.0],
            vec![LowerBound::NegInf, LowerBound::Finite(0.0)],
            vec![UpperBound::PosInf, UpperBound::Finite(1.0)],
        )
        .unwrap();
        assert_eq!(enumerate_outcome_oracle(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn rejects_large_instances() {
        let lp = LpInstance::new(
            0,
            9,
            [],
            vec![],
            vec![],
            vec![0.0; 9],
            vec![LowerBound::Finite(0.0); 9],
            vec![UpperBound::PosInf; 9],
        )
        .unwrap();
        assert!(matches!(enumerate_outcome_oracle(&lp), Err(Error::TooLarge { .. })));
    }
}
