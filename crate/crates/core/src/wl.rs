//! Color refinement on LP graphs.
//!
//! Colors are canonical signatures rather than hashes, so no two distinct
//! signatures ever collide: a vertex's next color is determined by its current
//! color together with the sorted list of `(neighbor color, Σ weights)` pairs,
//! where the sums are exact rationals (every finite double is a dyadic
//! rational). Zero sums are omitted, matching "no edge" with "weight 0".
//! Signatures are sorted before being numbered, so color ids are a
//! deterministic function of the graph.
//!
//! Two graphs are compared by refining their disjoint union, which puts both
//! colorings in one id space.

use std::collections::BTreeMap;

use num::{BigRational, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LpGraph;
use crate::lp::{Comparison, LowerBound, UpperBound};

/// Exact value of an edge weight.
pub type ExactWeight = BigRational;

pub fn exact(v: f64) -> ExactWeight {
    BigRational::from_float(v).expect("edge weights are finite")
}

/// Colors of constraint (`cv`) and variable (`cw`) vertices. Ids are dense;
/// constraint colors come first, variable colors follow, so the two sides
/// never share an id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub cv: Vec<u32>,
    pub cw: Vec<u32>,
}

impl Coloring {
    pub fn num_v_colors(&self) -> usize {
        distinct(&self.cv)
    }

    pub fn num_w_colors(&self) -> usize {
        distinct(&self.cw)
    }

    pub fn num_colors(&self) -> usize {
        self.num_v_colors() + self.num_w_colors()
    }

    pub fn partition(&self) -> PartitionPair {
        PartitionPair { i_classes: classes(&self.cv), j_classes: classes(&self.cw) }
    }
}

fn distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Groups indices by color; classes are ordered by their smallest member.
fn classes(colors: &[u32]) -> Vec<Vec<usize>> {
    let mut by_color: BTreeMap<u32, usize> = BTreeMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (idx, &c) in colors.iter().enumerate() {
        let slot = *by_color.entry(c).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[slot].push(idx);
    }
    out
}

/// A partition of constraint indices and one of variable indices (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPair {
    pub i_classes: Vec<Vec<usize>>,
    pub j_classes: Vec<Vec<usize>>,
}

impl PartitionPair {
    pub fn singletons(m: usize, n: usize) -> Self {
        Self { i_classes: (0..m).map(|i| vec![i]).collect(), j_classes: (0..n).map(|j| vec![j]).collect() }
    }

    /// True when every class of `self` lies inside a class of `coarser`.
    pub fn refines(&self, coarser: &PartitionPair) -> bool {
        fn side(fine: &[Vec<usize>], coarse: &[Vec<usize>]) -> bool {
            let size = coarse.iter().map(Vec::len).sum();
            let mut owner = vec![usize::MAX; size];
            for (k, class) in coarse.iter().enumerate() {
                for &i in class {
                    if i < size {
                        owner[i] = k;
                    }
                }
            }
            fine.iter().all(|class| class.iter().all(|&i| i < size && owner[i] == owner[class[0]]))
        }
        side(&self.i_classes, &coarser.i_classes) && side(&self.j_classes, &coarser.j_classes)
    }
}

fn number<K: Ord + Clone>(keys: &[K], offset: u32) -> Vec<u32> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| offset + sorted.binary_search(k).expect("present") as u32)
        .collect()
}

fn lower_key(l: LowerBound) -> (u8, u64) {
    match l {
        LowerBound::NegInf => (0, 0),
        LowerBound::Finite(v) => (1, v.to_bits()),
    }
}

fn upper_key(u: UpperBound) -> (u8, u64) {
    match u {
        UpperBound::Finite(v) => (0, v.to_bits()),
        UpperBound::PosInf => (1, 0),
    }
}

/// Colors by exact feature equality (bitwise on doubles, by tag on `∘` and
/// infinite bounds).
pub fn initial_coloring(g: &LpGraph) -> Coloring {
    let vkeys: Vec<(u64, Comparison)> = g.hv().iter().map(|f| (f.b.to_bits(), f.circ)).collect();
    let wkeys: Vec<(u64, (u8, u64), (u8, u64))> =
        g.hw().iter().map(|f| (f.c.to_bits(), lower_key(f.l), upper_key(f.u))).collect();
    let cv = number(&vkeys, 0);
    let kv = distinct(&cv) as u32;
    Coloring { cv, cw: number(&wkeys, kv) }
}

type Signature = (u32, Vec<(u32, ExactWeight)>);

fn refine_with(g: &LpGraph, weights: &[ExactWeight], c: &Coloring) -> Coloring {
    let mut v_sums: Vec<BTreeMap<u32, ExactWeight>> = vec![BTreeMap::new(); g.m()];
    let mut w_sums: Vec<BTreeMap<u32, ExactWeight>> = vec![BTreeMap::new(); g.n()];
    for (e, w) in g.edges().iter().zip(weights) {
        *v_sums[e.row].entry(c.cw[e.col]).or_insert_with(BigRational::zero) += w;
        *w_sums[e.col].entry(c.cv[e.row]).or_insert_with(BigRational::zero) += w;
    }
    let signature = |own: u32, sums: BTreeMap<u32, ExactWeight>| -> Signature {
        (own, sums.into_iter().filter(|(_, s)| !s.is_zero()).collect())
    };
    let vsig: Vec<Signature> = v_sums.into_iter().zip(&c.cv).map(|(s, &own)| signature(own, s)).collect();
    let wsig: Vec<Signature> = w_sums.into_iter().zip(&c.cw).map(|(s, &own)| signature(own, s)).collect();
    let cv = number(&vsig, 0);
    let kv = distinct(&cv) as u32;
    Coloring { cv, cw: number(&wsig, kv) }
}

fn exact_weights(g: &LpGraph) -> Vec<ExactWeight> {
    g.edges().iter().map(|e| exact(e.value)).collect()
}

/// One round of refinement; the result is never coarser than `c`.
pub fn refine_step(g: &LpGraph, c: &Coloring) -> Coloring {
    refine_with(g, &exact_weights(g), c)
}

#[derive(Debug, Clone)]
pub struct WlRun {
    pub stable: PartitionPair,
    /// Initial coloring followed by the result of every refinement step.
    pub history: Vec<Coloring>,
}

impl WlRun {
    pub fn steps(&self) -> usize {
        self.history.len() - 1
    }

    pub fn final_coloring(&self) -> &Coloring {
        self.history.last().expect("history starts with the initial coloring")
    }
}

/// Refines to the coarsest stable partition pair.
pub fn run_wl(g: &LpGraph) -> WlRun {
    let weights = exact_weights(g);
    let mut history = vec![initial_coloring(g)];
    loop {
        let current = history.last().unwrap();
        if current.num_colors() == g.m() + g.n() {
            break;
        }
        let next = refine_with(g, &weights, current);
        let done = next.num_colors() == current.num_colors();
        history.push(next);
        if done {
            break;
        }
    }
    WlRun { stable: history.last().unwrap().partition(), history }
}

fn check_sizes(g1: &LpGraph, g2: &LpGraph) -> Result<()> {
    if g1.m() != g2.m() {
        return Err(Error::DimensionMismatch { what: "constraint count", expected: g1.m(), got: g2.m() });
    }
    if g1.n() != g2.n() {
        return Err(Error::DimensionMismatch { what: "variable count", expected: g1.n(), got: g2.n() });
    }
    Ok(())
}

/// Stable colorings of `g1` and `g2` in a shared id space.
pub fn joint_colors(g1: &LpGraph, g2: &LpGraph) -> (Coloring, Coloring) {
    let union = g1.disjoint_union(g2);
    let run = run_wl(&union);
    let c = run.final_coloring();
    let (m, n) = (g1.m(), g1.n());
    (
        Coloring { cv: c.cv[..m].to_vec(), cw: c.cw[..n].to_vec() },
        Coloring { cv: c.cv[m..].to_vec(), cw: c.cw[n..].to_vec() },
    )
}

fn sorted(v: &[u32]) -> Vec<u32> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

/// Whether the WL test separates `g1` from `g2`.
pub fn distinguishable(g1: &LpGraph, g2: &LpGraph) -> Result<bool> {
    check_sizes(g1, g2)?;
    let (c1, c2) = joint_colors(g1, g2);
    Ok(sorted(&c1.cv) != sorted(&c2.cv) || sorted(&c1.cw) != sorted(&c2.cw))
}

/// Equal constraint-color multisets and equal variable colors position by position.
pub fn w_equivalent(g1: &LpGraph, g2: &LpGraph) -> Result<bool> {
    check_sizes(g1, g2)?;
    let (c1, c2) = joint_colors(g1, g2);
    Ok(sorted(&c1.cv) == sorted(&c2.cv) && c1.cw == c2.cw)
}

/// Whether variables `j` and `j2` end up in the same stable class.
pub fn same_vertex_color(g: &LpGraph, j: usize, j2: usize) -> Result<bool> {
    for idx in [j, j2] {
        if idx >= g.n() {
            return Err(Error::IndexOutOfRange { what: "variable", index: idx, limit: g.n() });
        }
    }
    let run = run_wl(g);
    let cw = &run.final_coloring().cw;
    Ok(cw[j] == cw[j2])
}
