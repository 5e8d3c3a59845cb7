//! Weighted bipartite graph view of an LP.
//!
//! Constraint vertex `v_i` carries `(b_i, ∘_i)`, variable vertex `w_j` carries
//! `(c_j, l_j, u_j)` and the edge `(v_i, w_j)` has weight `A[i, j]`. The
//! encoding is lossless in both directions.
//!
//! Permutations act by `Ê[i, j] = E[σ_V(i), σ_W(j)]`, `ĥ^V_i = h^V_{σ_V(i)}`,
//! `ĥ^W_j = h^W_{σ_W(j)}`. Under this convention
//! `apply(apply(g, p), q) == apply(g, p.compose(&q))` with
//! `(p∘q)(i) = p(q(i))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Comparison, Entry, LowerBound, LpInstance, UpperBound};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VFeature {
    pub b: f64,
    pub circ: Comparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WFeature {
    pub c: f64,
    pub l: LowerBound,
    pub u: UpperBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpGraph {
    m: usize,
    n: usize,
    edges: Vec<Entry>,
    hv: Vec<VFeature>,
    hw: Vec<WFeature>,
}

impl LpGraph {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzero edge weights, sorted by `(constraint, variable)`.
    pub fn edges(&self) -> &[Entry] {
        &self.edges
    }

    pub fn hv(&self) -> &[VFeature] {
        &self.hv
    }

    pub fn hw(&self) -> &[WFeature] {
        &self.hw
    }

    /// `E[i, j]`, zero when there is no edge.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.edges
            .binary_search_by_key(&(i, j), |e| (e.row, e.col))
            .map(|k| self.edges[k].value)
            .unwrap_or(0.0)
    }

    pub fn from_parts(
        m: usize,
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        hv: Vec<VFeature>,
        hw: Vec<WFeature>,
    ) -> Result<Self> {
        let lp = LpInstance::new(
            m,
            n,
            edges,
            hv.iter().map(|f| f.b).collect(),
            hv.iter().map(|f| f.circ).collect(),
            hw.iter().map(|f| f.c).collect(),
            hw.iter().map(|f| f.l).collect(),
            hw.iter().map(|f| f.u).collect(),
        )?;
        Ok(encode(&lp))
    }

    /// Disjoint union: vertices of `other` are appended after those of `self`.
    pub fn disjoint_union(&self, other: &LpGraph) -> LpGraph {
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Entry { row: e.row + self.m, col: e.col + self.n, value: e.value }));
        edges.sort_by_key(|e| (e.row, e.col));
        LpGraph {
            m: self.m + other.m,
            n: self.n + other.n,
            edges,
            hv: self.hv.iter().chain(&other.hv).copied().collect(),
            hw: self.hw.iter().chain(&other.hw).copied().collect(),
        }
    }
}

pub fn encode(lp: &LpInstance) -> LpGraph {
    LpGraph {
        m: lp.m(),
        n: lp.n(),
        edges: lp.entries().to_vec(),
        hv: lp.b().iter().zip(lp.circ()).map(|(&b, &circ)| VFeature { b, circ }).collect(),
        hw: (0..lp.n()).map(|j| WFeature { c: lp.c()[j], l: lp.l()[j], u: lp.u()[j] }).collect(),
    }
}

pub fn decode(g: &LpGraph) -> LpInstance {
    LpInstance::new(
        g.m,
        g.n,
        g.edges.iter().map(|e| (e.row, e.col, e.value)),
        g.hv.iter().map(|f| f.b).collect(),
        g.hv.iter().map(|f| f.circ).collect(),
        g.hw.iter().map(|f| f.c).collect(),
        g.hw.iter().map(|f| f.l).collect(),
        g.hw.iter().map(|f| f.u).collect(),
    )
    .expect("an LpGraph always holds valid LP data")
}

/// A pair `(σ_V, σ_W)` of permutations, stored 0-based as `sigma[i] = σ(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermPair {
    sigma_v: Vec<usize>,
    sigma_w: Vec<usize>,
}

fn check_perm(what: &str, p: &[usize]) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &k in p {
        if k >= p.len() || std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidPermutation(format!("{what} is not a bijection")));
        }
    }
    Ok(())
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &k) in p.iter().enumerate() {
        inv[k] = i;
    }
    inv
}

impl PermPair {
    pub fn new(sigma_v: Vec<usize>, sigma_w: Vec<usize>) -> Result<Self> {
        check_perm("sigma_v", &sigma_v)?;
        check_perm("sigma_w", &sigma_w)?;
        Ok(Self { sigma_v, sigma_w })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Self { sigma_v: (0..m).collect(), sigma_w: (0..n).collect() }
    }

    pub fn random<R: rand::Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut p = Self::identity(m, n);
        p.sigma_v.shuffle(rng);
        p.sigma_w.shuffle(rng);
        p
    }

    pub fn sigma_v(&self) -> &[usize] {
        &self.sigma_v
    }

    pub fn sigma_w(&self) -> &[usize] {
        &self.sigma_w
    }

    pub fn inverse(&self) -> Self {
        Self { sigma_v: inverse(&self.sigma_v), sigma_w: inverse(&self.sigma_w) }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &PermPair) -> Self {
        Self {
            sigma_v: other.sigma_v.iter().map(|&i| self.sigma_v[i]).collect(),
            sigma_w: other.sigma_w.iter().map(|&j| self.sigma_w[j]).collect(),
        }
    }

    /// The vertex-output action `(σ_W y)_j = y_{σ_W(j)}`.
    pub fn permute_w<T: Clone>(&self, y: &[T]) -> Vec<T> {
        self.sigma_w.iter().map(|&j| y[j].clone()).collect()
    }
}

pub fn apply_permutation(g: &LpGraph, p: &PermPair) -> Result<LpGraph> {
    if p.sigma_v.len() != g.m {
        return Err(Error::DimensionMismatch { what: "sigma_v", expected: g.m, got: p.sigma_v.len() });
    }
    if p.sigma_w.len() != g.n {
        return Err(Error::DimensionMismatch { what: "sigma_w", expected: g.n, got: p.sigma_w.len() });
    }
    let inv = p.inverse();
    let mut edges: Vec<Entry> = g
        .edges
        .iter()
        .map(|e| Entry { row: inv.sigma_v[e.row], col: inv.sigma_w[e.col], value: e.value })
        .collect();
    edges.sort_by_key(|e| (e.row, e.col));
    Ok(LpGraph {
        m: g.m,
        n: g.n,
        edges,
        hv: p.sigma_v.iter().map(|&i| g.hv[i]).collect(),
        hw: p.sigma_w.iter().map(|&j| g.hw[j]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::fixtures::sample_lp;
    use crate::lp::solve;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn sample_lp_encoding() {
        let g = encode(&sample_lp());
        assert_eq!(g.hv()[0], VFeature { b: 1.0, circ: Comparison::Ge });
        assert_eq!(g.hv()[1], VFeature { b: 2.0, circ: Comparison::Eq });
        assert_eq!(g.hw()[0], WFeature { c: 1.0, l: LowerBound::Finite(0.0), u: UpperBound::PosInf });
        assert_eq!(g.hw()[1], WFeature { c: 2.0, l: LowerBound::Finite(-1.0), u: UpperBound::PosInf });
        let dense: Vec<Vec<f64>> = (0..2).map(|i| (0..2).map(|j| g.weight(i, j)).collect()).collect();
        assert_eq!(dense, vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert_eq!(decode(&g), sample_lp());
    }

    #[test]
    fn empty_topology() {
        let lp = LpInstance::new(
            2,
            3,
            [],
            vec![0.0, 1.0],
            vec![Comparison::Le, Comparison::Ge],
            vec![1.0; 3],
            vec![LowerBound::NegInf; 3],
            vec![UpperBound::PosInf; 3],
        )
        .unwrap();
        let g = encode(&lp);
        assert!(g.edges().is_empty());
        assert_eq!(decode(&g), lp);
    }

    #[test]
    fn swap_variables_of_sample_lp() {
        let g = encode(&sample_lp());
        let p = PermPair::new(vec![0, 1], vec![1, 0]).unwrap();
        let h = apply_permutation(&g, &p).unwrap();
        assert_eq!(h.hw()[0], WFeature { c: 2.0, l: LowerBound::Finite(-1.0), u: UpperBound::PosInf });
        assert_eq!(h.hw()[1], WFeature { c: 1.0, l: LowerBound::Finite(0.0), u: UpperBound::PosInf });
        let dense: Vec<Vec<f64>> = (0..2).map(|i| (0..2).map(|j| h.weight(i, j)).collect()).collect();
        assert_eq!(dense, vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert_eq!(apply_permutation(&h, &p).unwrap(), g);
        assert_eq!(apply_permutation(&g, &PermPair::identity(2, 2)).unwrap(), g);
    }

    #[test]
    fn rejects_bad_permutations() {
        assert!(PermPair::new(vec![0, 0], vec![0]).is_err());
        assert!(PermPair::new(vec![0, 2], vec![0]).is_err());
        let g = encode(&sample_lp());
        let p = PermPair::identity(3, 2);
        assert!(matches!(apply_permutation(&g, &p), Err(Error::DimensionMismatch { .. })));
    }

    fn arb_lp(max: usize) -> impl Strategy<Value = LpInstance> {
        (1..=max, 1..=max).prop_flat_map(|(m, n)| {
            (
                proptest::collection::vec(proptest::option::weighted(0.5, -4i32..=4), m * n),
                proptest::collection::vec(-3i32..=3, m),
                proptest::collection::vec(0u8..3, m),
                proptest::collection::vec(-3i32..=3, n),
                proptest::collection::vec((proptest::option::of(-3i32..=0), proptest::option::of(0i32..=3)), n),
            )
                .prop_map(move |(a, b, circ, c, bounds)| {
                    let entries: Vec<_> = a
                        .iter()
                        .enumerate()
                        .filter_map(|(k, v)| v.map(|v| (k / n, k % n, v as f64 / 2.0)))
                        .collect();
                    LpInstance::new(
                        m,
                        n,
                        entries,
                        b.iter().map(|&v| v as f64).collect(),
                        circ.iter().map(|&k| [Comparison::Le, Comparison::Eq, Comparison::Ge][k as usize]).collect(),
                        c.iter().map(|&v| v as f64).collect(),
                        bounds.iter().map(|(lo, _)| lo.map_or(LowerBound::NegInf, |v| LowerBound::Finite(v as f64))).collect(),
                        bounds.iter().map(|(_, hi)| hi.map_or(UpperBound::PosInf, |v| UpperBound::Finite(v as f64))).collect(),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn encode_decode_bijection(lp in arb_lp(6)) {
            let g = encode(&lp);
            prop_assert_eq!(decode(&g), lp);
            prop_assert_eq!(encode(&decode(&g)), g);
        }

        #[test]
        fn permutation_group_action(lp in arb_lp(10), seed in any::<u64>()) {
            let g = encode(&lp);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = PermPair::random(g.m(), g.n(), &mut rng);
            let q = PermPair::random(g.m(), g.n(), &mut rng);
            let lhs = apply_permutation(&apply_permutation(&g, &p).unwrap(), &q).unwrap();
            prop_assert_eq!(lhs, apply_permutation(&g, &p.compose(&q)).unwrap());
            let back = apply_permutation(&apply_permutation(&g, &p).unwrap(), &p.inverse()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn permuted_lp_solves_identically(lp in arb_lp(5), seed in any::<u64>()) {
            let g = encode(&lp);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = PermPair::random(g.m(), g.n(), &mut rng);
            let permuted = decode(&apply_permutation(&g, &p).unwrap());
            let a = solve(&lp).unwrap();
            let b = solve(&permuted).unwrap();
            prop_assert_eq!(a.tag(), b.tag());
            if a.is_optimal() {
                prop_assert!((a.objective_value() - b.objective_value()).abs() <= 1e-9);
            }
        }
    }
}
