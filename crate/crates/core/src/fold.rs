//! Stable partition pairs, solution folding and the twin harness.
//!
//! If two LP graphs cannot be told apart by color refinement, they agree on
//! feasibility, on the optimal objective (with `+∞` for infeasible and `-∞`
//! for unbounded problems) and, when both are optimal, on the minimum-norm
//! solution up to a permutation of variables. [`check_twin_properties`]
//! evaluates all three clauses on a concrete pair and reports each one.
//!
//! Folding replaces every coordinate of a point by the average over its
//! variable class. For a stable partition pair this maps feasible points to
//! feasible points with the same objective.

use std::collections::BTreeMap;

use num::{BigRational, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{encode, LpGraph};
use crate::lp::{min_norm_from_vertex, objective, solve, violation, LpInstance, LpOutcome};
use crate::wl::{exact, joint_colors, run_wl, PartitionPair};

/// Largest `n` for which [`check_twin_properties`] searches permutations exhaustively.
pub const EXHAUSTIVE_PERM_LIMIT: usize = 8;

fn check_partition(what: &str, classes: &[Vec<usize>], size: usize) -> Result<()> {
    let mut seen = vec![false; size];
    for class in classes {
        if class.is_empty() {
            return Err(Error::InvalidPartition(format!("{what}: empty class")));
        }
        for &k in class {
            if k >= size {
                return Err(Error::InvalidPartition(format!("{what}: index {k} out of range {size}")));
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidPartition(format!("{what}: index {k} appears twice")));
            }
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("{what}: index {k} not covered")));
    }
    Ok(())
}

fn owners(classes: &[Vec<usize>], size: usize) -> Vec<usize> {
    let mut owner = vec![0; size];
    for (k, class) in classes.iter().enumerate() {
        for &i in class {
            owner[i] = k;
        }
    }
    owner
}

/// Checks the four stable-partition conditions exactly:
/// constant constraint features per `I_p`, constant variable features per
/// `J_q`, and constant class sums `Σ_{j∈J_q} E[i,j]` over `i ∈ I_p` (and the
/// transposed condition).
pub fn is_stable_partition(g: &LpGraph, pp: &PartitionPair) -> Result<bool> {
    check_partition("constraint partition", &pp.i_classes, g.m())?;
    check_partition("variable partition", &pp.j_classes, g.n())?;
    let same_features = pp.i_classes.iter().all(|c| c.iter().all(|&i| g.hv()[i] == g.hv()[c[0]]))
        && pp.j_classes.iter().all(|c| c.iter().all(|&j| g.hw()[j] == g.hw()[c[0]]));
    if !same_features {
        return Ok(false);
    }
    let row_owner = owners(&pp.i_classes, g.m());
    let col_owner = owners(&pp.j_classes, g.n());
    let mut row_sums: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); g.m()];
    let mut col_sums: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); g.n()];
    for e in g.edges() {
        let w = exact(e.value);
        *row_sums[e.row].entry(col_owner[e.col]).or_insert_with(BigRational::zero) += &w;
        *col_sums[e.col].entry(row_owner[e.row]).or_insert_with(BigRational::zero) += w;
    }
    let strip = |mut m: BTreeMap<usize, BigRational>| {
        m.retain(|_, v| !v.is_zero());
        m
    };
    let row_sums: Vec<_> = row_sums.into_iter().map(strip).collect();
    let col_sums: Vec<_> = col_sums.into_iter().map(strip).collect();
    let rows_ok = pp.i_classes.iter().all(|c| c.iter().all(|&i| row_sums[i] == row_sums[c[0]]));
    let cols_ok = pp.j_classes.iter().all(|c| c.iter().all(|&j| col_sums[j] == col_sums[c[0]]));
    Ok(rows_ok && cols_ok)
}

/// Replaces each coordinate by the mean of its class. Classes whose entries
/// are already equal are left untouched, which makes folding idempotent
/// bit for bit.
pub fn fold_solution(x: &[f64], j_classes: &[Vec<usize>]) -> Result<Vec<f64>> {
    check_partition("variable partition", j_classes, x.len())?;
    let mut out = x.to_vec();
    for class in j_classes {
        let first = x[class[0]];
        if class.iter().all(|&j| x[j] == first) {
            continue;
        }
        let mut members = class.clone();
        members.sort_unstable();
        let mean = members.iter().map(|&j| x[j]).sum::<f64>() / members.len() as f64;
        for &j in class {
            out[j] = mean;
        }
    }
    Ok(out)
}

/// Tolerance used by [`verify_fold_lemma`].
pub const FOLD_TOL: f64 = 1e-7;

/// Folds the simplex solution of `lp` over its own stable variable classes
/// and checks that the result is still feasible with the same objective.
pub fn verify_fold_lemma(lp: &LpInstance) -> Result<bool> {
    let LpOutcome::Optimal { solution, value } = solve(lp)? else {
        return Err(Error::NotOptimal);
    };
    fold_preserves(lp, &solution, value)
}

/// The fold check for a given optimal point `x` with objective `value`.
pub fn fold_preserves(lp: &LpInstance, x: &[f64], value: f64) -> Result<bool> {
    let stable = run_wl(&encode(lp)).stable;
    let folded = fold_solution(x, &stable.j_classes)?;
    Ok(violation(lp, &folded)? <= FOLD_TOL && (objective(lp, &folded)? - value).abs() <= FOLD_TOL)
}

/// Whether `x` is constant (within `tol`) on every class of `j_classes`.
pub fn class_constant(x: &[f64], j_classes: &[Vec<usize>], tol: f64) -> bool {
    j_classes.iter().all(|c| c.iter().all(|&j| (x[j] - x[c[0]]).abs() <= tol))
}

/// An extended real for reporting `Φ_obj`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedReal {
    PosInf,
    NegInf,
    Finite(f64),
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoluMatch {
    NotApplicable,
    Match,
    Mismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermSearch {
    /// Sorted comparison plus an exhaustive class-preserving matching.
    Exhaustive,
    /// `n` above [`EXHAUSTIVE_PERM_LIMIT`]: only the sorted comparison ran.
    SortedOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinDetails {
    pub outcome1: String,
    pub outcome2: String,
    pub obj1: ExtendedReal,
    pub obj2: ExtendedReal,
    pub min_norm1: Option<Vec<f64>>,
    pub min_norm2: Option<Vec<f64>>,
    pub max_sorted_gap: Option<f64>,
    pub perm_search: Option<PermSearch>,
    /// `σ_W` with `min_norm1[j] ≈ min_norm2[σ_W(j)]`, when searched for and found.
    pub witness: Option<Vec<usize>>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinReport {
    pub wl_indistinguishable: bool,
    pub feas_match: bool,
    pub obj_match: bool,
    pub solu_match_up_to_perm: SoluMatch,
    pub details: TwinDetails,
}

impl TwinReport {
    /// All three characteristics agree (and the pair is WL-indistinguishable).
    pub fn all_match(&self) -> bool {
        self.wl_indistinguishable && self.feas_match && self.obj_match && self.solu_match_up_to_perm != SoluMatch::Mismatch
    }

    /// False only when the pair is WL-indistinguishable yet some characteristic differs.
    pub fn consistent(&self) -> bool {
        !self.wl_indistinguishable || self.all_match()
    }
}

fn values_match(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Finds `σ` with `x1[j] ≈ x2[σ(j)]` and `colors1[j] == colors2[σ(j)]`.
fn class_matching(x1: &[f64], x2: &[f64], colors1: &[u32], colors2: &[u32], tol: f64) -> Option<Vec<usize>> {
    fn go(
        j: usize,
        x1: &[f64],
        x2: &[f64],
        c1: &[u32],
        c2: &[u32],
        tol: f64,
        used: &mut [bool],
        sigma: &mut Vec<usize>,
    ) -> bool {
        if j == x1.len() {
            return true;
        }
        for k in 0..x2.len() {
            if !used[k] && c1[j] == c2[k] && (x1[j] - x2[k]).abs() <= tol * 1f64.max(x1[j].abs()) {
                used[k] = true;
                sigma.push(k);
                if go(j + 1, x1, x2, c1, c2, tol, used, sigma) {
                    return true;
                }
                sigma.pop();
                used[k] = false;
            }
        }
        false
    }
    let mut used = vec![false; x2.len()];
    let mut sigma = Vec::with_capacity(x1.len());
    go(0, x1, x2, colors1, colors2, tol, &mut used, &mut sigma).then_some(sigma)
}

/// Evaluates the three twin clauses on `lp1`, `lp2`.
pub fn check_twin_properties(lp1: &LpInstance, lp2: &LpInstance, tol: f64) -> Result<TwinReport> {
    let (g1, g2) = (encode(lp1), encode(lp2));
    if g1.m() != g2.m() || g1.n() != g2.n() {
        return Err(Error::DimensionMismatch { what: "twin sizes", expected: g1.m() * g1.n(), got: g2.m() * g2.n() });
    }
    let (c1, c2) = joint_colors(&g1, &g2);
    let sorted = |v: &[u32]| {
        let mut s = v.to_vec();
        s.sort_unstable();
        s
    };
    let wl_indistinguishable = sorted(&c1.cv) == sorted(&c2.cv) && sorted(&c1.cw) == sorted(&c2.cw);

    let o1 = solve(lp1)?;
    let o2 = solve(lp2)?;
    let feas_match = o1.is_feasible() == o2.is_feasible();
    let (v1, v2) = (o1.objective_value(), o2.objective_value());
    let obj_match = values_match(v1, v2, tol);

    let mut details = TwinDetails {
        outcome1: o1.tag().into(),
        outcome2: o2.tag().into(),
        obj1: v1.into(),
        obj2: v2.into(),
        min_norm1: None,
        min_norm2: None,
        max_sorted_gap: None,
        perm_search: None,
        witness: None,
        tol,
    };
    let mut solu = SoluMatch::NotApplicable;
    if let (Some(x1), Some(x2)) = (o1.solution(), o2.solution()) {
        let y1 = min_norm_from_vertex(lp1, x1)?.x;
        let y2 = min_norm_from_vertex(lp2, x2)?.x;
        let mut s1 = y1.clone();
        let mut s2 = y2.clone();
        s1.sort_by(f64::total_cmp);
        s2.sort_by(f64::total_cmp);
        let gap = s1.iter().zip(&s2).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        let sorted_ok = s1.iter().zip(&s2).all(|(a, b)| (a - b).abs() <= tol * 1f64.max(a.abs()));
        details.max_sorted_gap = Some(gap);
        solu = if !sorted_ok {
            SoluMatch::Mismatch
        } else if lp1.n() <= EXHAUSTIVE_PERM_LIMIT {
            details.perm_search = Some(PermSearch::Exhaustive);
            details.witness = class_matching(&y1, &y2, &c1.cw, &c2.cw, tol);
            if details.witness.is_some() {
                SoluMatch::Match
            } else {
                SoluMatch::Mismatch
            }
        } else {
            details.perm_search = Some(PermSearch::SortedOnly);
            SoluMatch::Match
        };
        details.min_norm1 = Some(y1);
        details.min_norm2 = Some(y2);
    }
    Ok(TwinReport { wl_indistinguishable, feas_match, obj_match, solu_match_up_to_perm: solu, details })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_permutation, decode, PermPair};
    use crate::lp::fixtures::sample_lp;
    use crate::lp::{Comparison, LowerBound, UpperBound};
    use crate::wl::tests::cycle_split_pair;

    #[test]
    fn stable_partition_examples() {
        let (upper, _) = cycle_split_pair(Comparison::Eq, LowerBound::Finite(1.0), UpperBound::PosInf);
        let whole = PartitionPair { i_classes: vec![vec![0, 1, 2, 3]], j_classes: vec![vec![0, 1, 2, 3]] };
        assert!(is_stable_partition(&upper, &whole).unwrap());
        assert!(is_stable_partition(&upper, &PartitionPair::singletons(4, 4)).unwrap());
        let f = encode(&sample_lp());
        assert!(is_stable_partition(&f, &PartitionPair::singletons(2, 2)).unwrap());
        let merged = PartitionPair { i_classes: vec![vec![0, 1]], j_classes: vec![vec![0], vec![1]] };
        assert!(!is_stable_partition(&f, &merged).unwrap());
        let broken = PartitionPair { i_classes: vec![vec![0]], j_classes: vec![vec![0], vec![1]] };
        assert!(matches!(is_stable_partition(&f, &broken), Err(Error::InvalidPartition(_))));
    }

    #[test]
    fn sum_condition_is_checked() {
        // Equal features everywhere, but row sums into the single class differ.
        let g = LpGraph::from_parts(
            2,
            2,
            [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0)],
            vec![crate::graph::VFeature { b: 0.0, circ: Comparison::Le }; 2],
            vec![crate::graph::WFeature { c: 0.0, l: LowerBound::NegInf, u: UpperBound::PosInf }; 2],
        )
        .unwrap();
        let whole = PartitionPair { i_classes: vec![vec![0, 1]], j_classes: vec![vec![0, 1]] };
        assert!(!is_stable_partition(&g, &whole).unwrap());
    }

    #[test]
    fn folding_examples() {
        assert_eq!(fold_solution(&[1.0, 0.0, 1.0, 0.0], &[vec![0, 1, 2, 3]]).unwrap(), vec![0.5; 4]);
        let singletons: Vec<Vec<usize>> = (0..3).map(|j| vec![j]).collect();
        assert_eq!(fold_solution(&[0.1, -3.0, 7.0], &singletons).unwrap(), vec![0.1, -3.0, 7.0]);
        assert_eq!(fold_solution(&[2.0, 4.0], &[vec![0, 1]]).unwrap(), vec![3.0, 3.0]);
        let once = fold_solution(&[0.1, 0.2, 0.4], &[vec![0, 1, 2]]).unwrap();
        assert_eq!(fold_solution(&once, &[vec![0, 1, 2]]).unwrap(), once);
        assert!(fold_solution(&[1.0], &[vec![0, 1]]).is_err());
    }

    #[test]
    fn fold_lemma_on_cycle() {
        let (upper, _) = cycle_split_pair(Comparison::Eq, LowerBound::NegInf, UpperBound::Finite(1.0));
        let lp = decode(&upper);
        assert!(fold_preserves(&lp, &[1.0, 0.0, 1.0, 0.0], 2.0).unwrap());
        assert!(verify_fold_lemma(&lp).unwrap());
        assert!(verify_fold_lemma(&sample_lp()).unwrap());
        let (inf, _) = cycle_split_pair(Comparison::Eq, LowerBound::Finite(1.0), UpperBound::PosInf);
        assert_eq!(verify_fold_lemma(&decode(&inf)), Err(Error::NotOptimal));
    }

    #[test]
    fn cycle_split_twins() {
        let (a, b) = cycle_split_pair(Comparison::Eq, LowerBound::Finite(1.0), UpperBound::PosInf);
        let r = check_twin_properties(&decode(&a), &decode(&b), 1e-6).unwrap();
        assert!(r.wl_indistinguishable && r.feas_match && r.obj_match);
        assert_eq!(r.details.obj1, ExtendedReal::PosInf);
        assert_eq!(r.solu_match_up_to_perm, SoluMatch::NotApplicable);

        let (a, b) = cycle_split_pair(Comparison::Eq, LowerBound::NegInf, UpperBound::Finite(1.0));
        let r = check_twin_properties(&decode(&a), &decode(&b), 1e-6).unwrap();
        assert!(r.all_match());
        for x in [r.details.min_norm1.unwrap(), r.details.min_norm2.unwrap()] {
            assert!(x.iter().all(|v| (v - 0.5).abs() < 1e-8));
        }
    }

    #[test]
    fn isomorphic_copy_matches() {
        let lp = sample_lp();
        let p = PermPair::new(vec![1, 0], vec![1, 0]).unwrap();
        let other = decode(&apply_permutation(&encode(&lp), &p).unwrap());
        let r = check_twin_properties(&lp, &other, 1e-6).unwrap();
        assert!(r.all_match());
        assert_eq!(r.details.witness, Some(vec![1, 0]));
    }

    #[test]
    fn distinguishable_pair_is_reported_consistent() {
        let lp = sample_lp();
        let other = crate::lp::LpInstance::new(
            2,
            2,
            lp.entries().iter().map(|e| (e.row, e.col, e.value)),
            vec![7.0, 2.0],
            lp.circ().to_vec(),
            lp.c().to_vec(),
            lp.l().to_vec(),
            lp.u().to_vec(),
        )
        .unwrap();
        let r = check_twin_properties(&lp, &other, 1e-6).unwrap();
        assert!(!r.wl_indistinguishable);
        assert!(r.consistent());
    }
}
