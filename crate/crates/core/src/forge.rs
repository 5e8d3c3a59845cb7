//! Instance generators: the random sparse LP recipe, the cycle-split twin
//! families and a covering lift that turns any base LP into a pair of
//! larger LPs the WL test cannot separate.
//!
//! Every generator is a pure function of its configuration. Randomness comes
//! from ChaCha8 seeded with the configured `seed`; instance `k` of a batch
//! uses stream `k` of that seed, so batches can be generated in parallel and
//! any single instance can be regenerated on its own.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{min_norm_from_vertex, solve, Comparison, LowerBound, LpInstance, LpOutcome, UpperBound};

/// A ChaCha8 generator for stream `stream` of `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub m: usize,
    pub n: usize,
    pub nnz: usize,
    pub c_scale: f64,
    /// Standard deviation of the normal distribution for `l` and `u`.
    pub bound_sigma: f64,
    pub p_le: f64,
    pub p_eq: f64,
    /// Zero in the default recipe; property tests raise it to cover `≥` rows.
    #[serde(default)]
    pub p_ge: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { m: 10, n: 50, nnz: 100, c_scale: 0.01, bound_sigma: 10.0, p_le: 0.7, p_eq: 0.3, p_ge: 0.0, seed: 0 }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.nnz > self.m * self.n {
            return bad(format!("nnz {} exceeds m*n = {}", self.nnz, self.m * self.n));
        }
        let probs = [self.p_le, self.p_eq, self.p_ge];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return bad("row-type probabilities must be in [0, 1] and sum to 1".into());
        }
        if !(self.c_scale.is_finite() && self.bound_sigma.is_finite() && self.bound_sigma >= 0.0) {
            return bad("c_scale and bound_sigma must be finite, bound_sigma non-negative".into());
        }
        Ok(())
    }
}

/// Instance number 0 of the configured seed.
pub fn gen_random_lp(cfg: &GenConfig) -> Result<LpInstance> {
    gen_random_lp_stream(cfg, 0)
}

/// Instance number `stream` of the configured seed.
pub fn gen_random_lp_stream(cfg: &GenConfig, stream: u64) -> Result<LpInstance> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed, stream);
    let mut positions = rand::seq::index::sample(&mut rng, cfg.m * cfg.n, cfg.nnz).into_vec();
    positions.sort_unstable();
    let entries: Vec<_> = positions
        .into_iter()
        .map(|p| {
            // A standard normal draw is zero with probability zero, but an
            // explicit zero would silently shrink nnz.
            let mut v: f64 = StandardNormal.sample(&mut rng);
            while v == 0.0 {
                v = StandardNormal.sample(&mut rng);
            }
            (p / cfg.n, p % cfg.n, v)
        })
        .collect();
    let b: Vec<f64> = (0..cfg.m).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let c: Vec<f64> = (0..cfg.n).map(|_| cfg.c_scale * rng.random_range(-1.0..=1.0)).collect();
    let normal = Normal::new(0.0, cfg.bound_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let (mut l, mut u) = (Vec::with_capacity(cfg.n), Vec::with_capacity(cfg.n));
    for _ in 0..cfg.n {
        let (lo, hi): (f64, f64) = (normal.sample(&mut rng), normal.sample(&mut rng));
        let (lo, hi) = if lo > hi { (hi, lo) } else { (lo, hi) };
        l.push(LowerBound::Finite(lo));
        u.push(UpperBound::Finite(hi));
    }
    let circ = (0..cfg.m)
        .map(|_| {
            let t: f64 = rng.random();
            if t < cfg.p_le {
                Comparison::Le
            } else if t < cfg.p_le + cfg.p_eq {
                Comparison::Eq
            } else {
                Comparison::Ge
            }
        })
        .collect();
    LpInstance::new(cfg.m, cfg.n, entries, b, circ, c, l, u)
}

/// Instances `0..count` of the configured seed, generated in parallel.
pub fn gen_batch(cfg: &GenConfig, count: usize) -> Result<Vec<LpInstance>> {
    (0..count as u64).into_par_iter().map(|k| gen_random_lp_stream(cfg, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwinFamily {
    /// One cycle through all `k` constraints and `k` variables against two
    /// cycles of `k/2` constraints and variables each.
    CycleSplit { k: usize },
}

/// The three bound/row variants of the cycle-split families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwinVariant {
    /// `x_a + x_b = 1` with `x ≥ 1`.
    Infeasible,
    /// `x_a + x_b ≤ 1` with `x ≤ 1`.
    Unbounded,
    /// `x_a + x_b = 1` with `x ≤ 1`.
    Bounded,
}

fn cycle_lp(k: usize, pairs: &[(usize, usize)], variant: TwinVariant) -> Result<LpInstance> {
    let (circ, l, u) = match variant {
        TwinVariant::Infeasible => (Comparison::Eq, LowerBound::Finite(1.0), UpperBound::PosInf),
        TwinVariant::Unbounded => (Comparison::Le, LowerBound::NegInf, UpperBound::Finite(1.0)),
        TwinVariant::Bounded => (Comparison::Eq, LowerBound::NegInf, UpperBound::Finite(1.0)),
    };
    let entries = pairs.iter().enumerate().flat_map(|(i, &(a, b))| [(i, a, 1.0), (i, b, 1.0)]);
    LpInstance::new(k, k, entries, vec![1.0; k], vec![circ; k], vec![1.0; k], vec![l; k], vec![u; k])
}

/// The `(one cycle, two cycles)` pair of the requested family and variant.
pub fn gen_twin_pair(fam: TwinFamily, variant: TwinVariant) -> Result<(LpInstance, LpInstance)> {
    let TwinFamily::CycleSplit { k } = fam;
    if k < 4 || k % 2 != 0 {
        return Err(Error::InvalidConfig(format!("cycle-split size must be even and at least 4, got {k}")));
    }
    let h = k / 2;
    let one: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
    let two: Vec<_> = (0..k).map(|i| (i / h * h + i % h, i / h * h + (i + 1) % h)).collect();
    Ok((cycle_lp(k, &one, variant)?, cycle_lp(k, &two, variant)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftPattern {
    /// One randomly chosen base edge is wired through a nonzero cyclic
    /// shift, so each base cycle through it becomes one cycle `r` times longer.
    Cycle,
    /// Copies wired through arbitrary random permutations.
    Disjoint,
}

fn cover(base: &LpInstance, r: usize, wiring: impl Fn(usize, usize) -> usize) -> Result<LpInstance> {
    let (m, n) = (base.m(), base.n());
    let mut entries = Vec::with_capacity(base.entries().len() * r);
    for (k, e) in base.entries().iter().enumerate() {
        for s in 0..r {
            entries.push((s * m + e.row, wiring(k, s) * n + e.col, e.value));
        }
    }
    let rep = |len: usize| (0..r * len).map(move |t| t % len);
    LpInstance::new(
        r * m,
        r * n,
        entries,
        rep(m).map(|i| base.b()[i]).collect(),
        rep(m).map(|i| base.circ()[i]).collect(),
        rep(n).map(|j| base.c()[j]).collect(),
        rep(n).map(|j| base.l()[j]).collect(),
        rep(n).map(|j| base.u()[j]).collect(),
    )
}

/// Two `r`-fold covers of `base`.
///
/// Copy `s` of constraint `i` sits at row `s·m + i` and copy `s` of variable
/// `j` at column `s·n + j`. Every base coefficient `A[i, j]` becomes one
/// edge from each copy of `i` to exactly one copy of `j`, so class sums are
/// the base coefficients and both LPs share the lifted WL coloring. The
/// first LP uses `r` disjoint copies of `base`. The second rewires the copies
/// according to `pattern` and then relabels its rows and columns at random.
pub fn lift_replicate(base: &LpInstance, r: usize, pattern: LiftPattern, seed: u64) -> Result<(LpInstance, LpInstance)> {
    if r < 2 {
        return Err(Error::InvalidConfig(format!("lift factor must be at least 2, got {r}")));
    }
    let mut rng = seeded_rng(seed, 0);
    let blocks = cover(base, r, |_, s| s)?;
    let nnz = base.entries().len();
    let wirings: Vec<Vec<usize>> = match pattern {
        LiftPattern::Cycle => {
            let mut wirings = vec![(0..r).collect::<Vec<_>>(); nnz];
            if nnz > 0 {
                let t = rng.random_range(1..r);
                wirings[rng.random_range(0..nnz)] = (0..r).map(|s| (s + t) % r).collect();
            }
            wirings
        }
        LiftPattern::Disjoint => (0..nnz)
            .map(|_| {
                let mut p: Vec<usize> = (0..r).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect(),
    };
    let wired = cover(base, r, |k, s| wirings[k][s])?;
    let relabel = crate::graph::PermPair::random(wired.m(), wired.n(), &mut rng);
    let shuffled = crate::graph::decode(&crate::graph::apply_permutation(&crate::graph::encode(&wired), &relabel)?);
    Ok((blocks, shuffled))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub lp: LpInstance,
    pub feasible: bool,
    /// False only for unbounded LPs.
    pub bounded: bool,
    pub obj: Option<f64>,
    pub solution: Option<Vec<f64>>,
    pub min_norm_solution: Option<Vec<f64>>,
}

impl LabeledRecord {
    pub fn is_optimal(&self) -> bool {
        self.obj.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelOutput {
    pub records: Vec<LabeledRecord>,
    /// Input positions whose solve failed, with the error. These are left out of `records`.
    pub failed: Vec<(usize, Error)>,
}

fn label_one(lp: &LpInstance, with_min_norm: bool) -> Result<LabeledRecord> {
    let outcome = solve(lp)?;
    let min_norm_solution = match (&outcome, with_min_norm) {
        (LpOutcome::Optimal { solution, .. }, true) => Some(min_norm_from_vertex(lp, solution)?.x),
        _ => None,
    };
    Ok(LabeledRecord {
        lp: lp.clone(),
        feasible: outcome.is_feasible(),
        bounded: !matches!(outcome, LpOutcome::Unbounded),
        obj: outcome.is_optimal().then(|| outcome.objective_value()),
        solution: outcome.solution().map(<[f64]>::to_vec),
        min_norm_solution,
    })
}

/// Solves every LP (in parallel, results in input order).
pub fn label_dataset(lps: &[LpInstance], with_min_norm: bool) -> LabelOutput {
    let results: Vec<_> = lps.par_iter().map(|lp| label_one(lp, with_min_norm)).collect();
    let mut out = LabelOutput { records: Vec::with_capacity(lps.len()), failed: Vec::new() };
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(e) => out.failed.push((k, e)),
        }
    }
    out
}
