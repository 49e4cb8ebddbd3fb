//! Exact combinatorial engines for the cluster expansion.
//!
//! For a finite configuration with `n` points the Ursell function is the
//! connected-graph sum
//!
//! ```text
//! k(gamma) = sum_{G connected on n vertices} prod_{{i,j} in G} (e^{-beta Phi(x_i, x_j)} - 1),
//! ```
//!
//! and the Ursell kernel `kbar(gamma, xi)` solves the non-integrated
//! Kirkwood-Salsburg recursion
//!
//! ```text
//! kbar(gamma, xi) = e^{-beta sum_{y in gamma \ x} Phi(x, y)}
//!                   sum_{eta subset xi} k_eta(x) kbar((gamma \ x) eta, xi \ eta),
//! kbar(empty, xi) = 1{xi = empty},
//! ```
//!
//! with `k_eta(x) = prod_{y in eta} (e^{-beta Phi(x, y)} - 1)` and an
//! arbitrary anchor `x in gamma` (here: first in insertion order; the choice
//! is itself checked to be immaterial). The dominator `Q` replaces the graph
//! sums by tree sums of absolute edge factors:
//!
//! ```text
//! Q({x}, xi)   = e^{2 beta B_Phi (|xi|+1)} sum_{T tree on {x} cup xi} prod_edges |e^{-beta Phi} - 1|,
//! Q({x}, o)    = e^{2 beta B_Phi},
//! Q(gamma, xi) = sum over ordered partitions xi_1, ..., xi_N of xi of prod_i Q({x_i}, xi_i).
//! ```
//!
//! Everything is enumerated exactly, with size guards; out-of-range edges
//! contribute exact zeros, which prunes most terms of sparse configurations.

use std::collections::HashMap;

use crate::configuration::{Configuration, MarkedPoint};
use crate::error::{Error, Result};
use crate::potential::PathPairPotential;

/// A labeled tree on `{0, ..., n-1}`: `n - 1` edges, connected, acyclic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

/// A labeled graph on `{0, ..., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Result of a cluster evaluation, with the number of combinatorial terms
/// the enumeration visited (graphs for `k`, trees for single-point `Q`,
/// expanded subset terms for the kernel and the product form of `Q`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterValue {
    pub value: f64,
    pub terms_evaluated: u64,
}

const TREE_GUARD: usize = 9;
const GRAPH_GUARD: usize = 6;
const KERNEL_GUARD: usize = 8;
const Q_BUDGET: usize = 1 << 22;

fn prufer_to_edges(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    debug_assert_eq!(seq.len(), n - 2);
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&i| degree[i] == 1)
        .map(std::cmp::Reverse)
        .collect();
    for &s in seq {
        let std::cmp::Reverse(leaf) = heap.pop().expect("leaf available");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[s] -= 1;
        if degree[s] == 1 {
            heap.push(std::cmp::Reverse(s));
        }
    }
    let std::cmp::Reverse(a) = heap.pop().expect("two leaves left");
    let std::cmp::Reverse(b) = heap.pop().expect("two leaves left");
    edges.push((a.min(b), a.max(b)));
    edges
}

/// All labeled trees on `n` vertices, one per Prufer sequence, hence exactly
/// `n^{n-2}` of them. Guarded to `2 <= n <= 9`.
pub fn enumerate_trees(n: usize) -> Result<impl Iterator<Item = LabeledTree>> {
    if !(2..=TREE_GUARD).contains(&n) {
        return Err(Error::SizeGuard {
            what: "tree vertices",
            got: n,
            limit: TREE_GUARD,
        });
    }
    let total = (n as u64).pow(n as u32 - 2);
    let mut seq = vec![0usize; n - 2];
    let mut emitted = 0u64;
    Ok(std::iter::from_fn(move || {
        if emitted >= total {
            return None;
        }
        let tree = LabeledTree {
            n,
            edges: prufer_to_edges(n, &seq),
        };
        emitted += 1;
        // Odometer increment over {0..n-1}^{n-2}.
        for digit in seq.iter_mut().rev() {
            *digit += 1;
            if *digit < n {
                break;
            }
            *digit = 0;
        }
        Some(tree)
    }))
}

#[cfg(test)]
fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

fn mask_is_connected(n: usize, edge_mask: u32, pairs: &[(usize, usize)]) -> bool {
    let mut adj = [0u32; 8];
    for (e, &(i, j)) in pairs.iter().enumerate() {
        if edge_mask >> e & 1 == 1 {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
    }
    let mut visited = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[v] & !visited;
        }
        visited |= next;
        frontier = next;
    }
    visited == (1u32 << n) - 1
}

/// All connected graphs on `n` vertices, by filtering the `2^{n(n-1)/2}`
/// edge subsets. Guarded to `2 <= n <= 6`.
pub fn enumerate_connected_graphs(n: usize) -> Result<impl Iterator<Item = LabeledGraph>> {
    if !(2..=GRAPH_GUARD).contains(&n) {
        return Err(Error::SizeGuard {
            what: "graph vertices",
            got: n,
            limit: GRAPH_GUARD,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let n_pairs = pairs.len();
    let mut mask = 0u32;
    let done = 1u32 << n_pairs;
    Ok(std::iter::from_fn(move || {
        while mask < done {
            let m = mask;
            mask += 1;
            if mask_is_connected(n, m, &pairs) {
                let edges = pairs
                    .iter()
                    .enumerate()
                    .filter(|(e, _)| m >> e & 1 == 1)
                    .map(|(_, &p)| p)
                    .collect();
                return Some(LabeledGraph { n, edges });
            }
        }
        None
    }))
}

/// `k_eta(x) = prod_{y in eta} (e^{-beta Phi(x, y)} - 1)`; the empty product
/// is `1`, a hard-core overlap contributes `-1`, out of range contributes `0`.
pub fn k_eta(
    x: &MarkedPoint,
    eta: &Configuration,
    phi: &PathPairPotential,
    beta: f64,
) -> Result<f64> {
    if eta.contains(x) {
        return Err(Error::NotDisjoint);
    }
    let mut prod = 1.0;
    for y in eta.points() {
        prod *= phi.pair_energy(x, y)?.mayer(beta);
        if prod == 0.0 {
            return Ok(0.0);
        }
    }
    Ok(prod)
}

/// Pairwise Mayer factors of the points of `gamma` (then `xi`, if given),
/// as a dense symmetric matrix.
fn mayer_matrix(
    points: &[&MarkedPoint],
    phi: &PathPairPotential,
    beta: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let f = phi.pair_energy(points[i], points[j])?.mayer(beta);
            m[i][j] = f;
            m[j][i] = f;
        }
    }
    Ok(m)
}

/// The Ursell function `k(gamma)` by direct connected-graph summation.
/// `k(empty) = 0`, `k(singleton) = 1`; guarded to `|gamma| <= 6`.
pub fn ursell_function(
    gamma: &Configuration,
    phi: &PathPairPotential,
    beta: f64,
) -> Result<ClusterValue> {
    let n = gamma.len();
    if n == 0 {
        return Ok(ClusterValue {
            value: 0.0,
            terms_evaluated: 0,
        });
    }
    if n == 1 {
        return Ok(ClusterValue {
            value: 1.0,
            terms_evaluated: 1,
        });
    }
    let points: Vec<&MarkedPoint> = gamma.points().iter().collect();
    let mayer = mayer_matrix(&points, phi, beta)?;
    let mut sum = 0.0;
    let mut terms = 0u64;
    for graph in enumerate_connected_graphs(n)? {
        terms += 1;
        let mut prod = 1.0;
        for &(i, j) in &graph.edges {
            prod *= mayer[i][j];
            if prod == 0.0 {
                break;
            }
        }
        sum += prod;
    }
    Ok(ClusterValue {
        value: sum,
        terms_evaluated: terms,
    })
}

/// Anchor choice in the kernel recursion; the solution does not depend on
/// it, which [`ursell_kernel_anchored`] lets tests verify.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnchorRule {
    FirstInserted,
    LastInserted,
}

struct KernelEval<'a> {
    mayer: &'a [Vec<f64>],
    /// Boltzmann pair factors e^{-beta Phi} (0 on the infinite state).
    boltz: &'a [Vec<f64>],
    memo: HashMap<(u32, u32), f64>,
    terms: u64,
    anchor: AnchorRule,
}

impl KernelEval<'_> {
    fn eval(&mut self, gamma_mask: u32, xi_mask: u32) -> f64 {
        if gamma_mask == 0 {
            return if xi_mask == 0 { 1.0 } else { 0.0 };
        }
        if let Some(&v) = self.memo.get(&(gamma_mask, xi_mask)) {
            return v;
        }
        let anchor = match self.anchor {
            AnchorRule::FirstInserted => gamma_mask.trailing_zeros() as usize,
            AnchorRule::LastInserted => 31 - gamma_mask.leading_zeros() as usize,
        };
        let rest_gamma = gamma_mask & !(1u32 << anchor);
        // Prefactor e^{-beta E(anchor | gamma \ anchor)}.
        let mut prefactor = 1.0;
        let mut g = rest_gamma;
        while g != 0 {
            let y = g.trailing_zeros() as usize;
            g &= g - 1;
            prefactor *= self.boltz[anchor][y];
            if prefactor == 0.0 {
                break;
            }
        }
        let value = if prefactor == 0.0 {
            0.0
        } else {
            // Subset sum over eta <= xi, iterating submasks.
            let mut total = 0.0;
            let mut eta = xi_mask;
            loop {
                self.terms += 1;
                let mut keta = 1.0;
                let mut e = eta;
                while e != 0 && keta != 0.0 {
                    let y = e.trailing_zeros() as usize;
                    e &= e - 1;
                    keta *= self.mayer[anchor][y];
                }
                if keta != 0.0 {
                    total += keta * self.eval(rest_gamma | eta, xi_mask & !eta);
                }
                if eta == 0 {
                    break;
                }
                eta = (eta - 1) & xi_mask;
            }
            prefactor * total
        };
        self.memo.insert((gamma_mask, xi_mask), value);
        value
    }
}

/// The Ursell kernel `kbar(gamma, xi)` by memoized recursion over
/// (remaining gamma, subset of xi) states. Guarded to `|gamma| + |xi| <= 8`.
pub fn ursell_kernel(
    gamma: &Configuration,
    xi: &Configuration,
    phi: &PathPairPotential,
    beta: f64,
) -> Result<ClusterValue> {
    ursell_kernel_anchored(gamma, xi, phi, beta, AnchorRule::FirstInserted)
}

/// [`ursell_kernel`] with an explicit anchor rule.
pub fn ursell_kernel_anchored(
    gamma: &Configuration,
    xi: &Configuration,
    phi: &PathPairPotential,
    beta: f64,
    anchor: AnchorRule,
) -> Result<ClusterValue> {
    let (ng, nx) = (gamma.len(), xi.len());
    if ng + nx > KERNEL_GUARD {
        return Err(Error::SizeGuard {
            what: "kernel points",
            got: ng + nx,
            limit: KERNEL_GUARD,
        });
    }
    if xi.points().iter().any(|p| gamma.contains(p)) {
        return Err(Error::NotDisjoint);
    }
    let points: Vec<&MarkedPoint> = gamma.points().iter().chain(xi.points().iter()).collect();
    let mayer = mayer_matrix(&points, phi, beta)?;
    let mut boltz = vec![vec![1.0; points.len()]; points.len()];
    for i in 0..points.len() {
        for j in 0..points.len() {
            if i != j {
                boltz[i][j] = mayer[i][j] + 1.0;
            }
        }
    }
    let mut eval = KernelEval {
        mayer: &mayer,
        boltz: &boltz,
        memo: HashMap::new(),
        terms: 0,
        anchor,
    };
    let gamma_mask = (1u32 << ng) - 1;
    let xi_mask = ((1u32 << nx) - 1) << ng;
    let value = eval.eval(gamma_mask, xi_mask);
    Ok(ClusterValue {
        value,
        terms_evaluated: eval.terms,
    })
}

/// `Q({x}, xi)`: the scaled tree sum of absolute Mayer factors over
/// `{x} cup xi`. Guarded to `|xi| <= 7`.
pub fn q_single(
    x: &MarkedPoint,
    xi: &Configuration,
    phi: &PathPairPotential,
    beta: f64,
    b_phi: f64,
) -> Result<ClusterValue> {
    if xi.len() + 1 > TREE_GUARD - 1 {
        return Err(Error::SizeGuard {
            what: "Q tree points",
            got: xi.len(),
            limit: TREE_GUARD - 2,
        });
    }
    if xi.contains(x) {
        return Err(Error::NotDisjoint);
    }
    let scale = (2.0 * beta * b_phi * (xi.len() as f64 + 1.0)).exp();
    if xi.is_empty() {
        return Ok(ClusterValue {
            value: (2.0 * beta * b_phi).exp(),
            terms_evaluated: 1,
        });
    }
    let points: Vec<&MarkedPoint> = std::iter::once(x).chain(xi.points().iter()).collect();
    let mayer = mayer_matrix(&points, phi, beta)?;
    let n = points.len();
    let mut sum = 0.0;
    let mut terms = 0u64;
    for tree in enumerate_trees(n)? {
        terms += 1;
        let mut prod = 1.0;
        for &(i, j) in &tree.edges {
            prod *= mayer[i][j].abs();
            if prod == 0.0 {
                break;
            }
        }
        sum += prod;
    }
    Ok(ClusterValue {
        value: scale * sum,
        terms_evaluated: terms,
    })
}

/// `Q(gamma, xi)`: the sum over ordered splittings of `xi` into `|gamma|`
/// pairwise-disjoint blocks, one per point of `gamma`, of the products of
/// single-point `Q` values. Matches the recursion driven by the anchor
/// functional and reduces to [`q_single`] for a one-point `gamma`.
pub fn q_full(
    gamma: &Configuration,
    xi: &Configuration,
    phi: &PathPairPotential,
    beta: f64,
    b_phi: f64,
) -> Result<ClusterValue> {
    let (ng, nx) = (gamma.len(), xi.len());
    if ng == 0 {
        let v = if nx == 0 { 1.0 } else { 0.0 };
        return Ok(ClusterValue {
            value: v,
            terms_evaluated: 1,
        });
    }
    if nx >= usize::BITS as usize - 2 || ng.saturating_mul(1usize << nx) > Q_BUDGET {
        return Err(Error::SizeGuard {
            what: "Q budget |gamma|*2^|xi|",
            got: ng << nx,
            limit: Q_BUDGET,
        });
    }
    if xi.points().iter().any(|p| gamma.contains(p)) {
        return Err(Error::NotDisjoint);
    }
    // Cache Q({x_i}, eta) for every gamma point and submask of xi.
    let full = (1u32 << nx) - 1;
    let mut singles = vec![vec![0.0f64; (full + 1) as usize]; ng];
    let mut terms = 0u64;
    for (i, x) in gamma.points().iter().enumerate() {
        let mut eta = full;
        loop {
            let sub: Configuration = xi
                .points()
                .iter()
                .enumerate()
                .filter(|(k, _)| eta >> k & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect();
            let q = q_single(x, &sub, phi, beta, b_phi)?;
            terms += q.terms_evaluated;
            singles[i][eta as usize] = q.value;
            if eta == 0 {
                break;
            }
            eta = (eta - 1) & full;
        }
    }
    // Ordered-partition convolution: block i takes a submask of what is left.
    let mut memo: HashMap<(usize, u32), f64> = HashMap::new();
    fn rec(
        i: usize,
        remaining: u32,
        ng: usize,
        singles: &[Vec<f64>],
        memo: &mut HashMap<(usize, u32), f64>,
    ) -> f64 {
        if i == ng {
            return if remaining == 0 { 1.0 } else { 0.0 };
        }
        if let Some(&v) = memo.get(&(i, remaining)) {
            return v;
        }
        let mut total = 0.0;
        let mut eta = remaining;
        loop {
            let q = singles[i][eta as usize];
            if q != 0.0 {
                total += q * rec(i + 1, remaining & !eta, ng, singles, memo);
            }
            if eta == 0 {
                break;
            }
            eta = (eta - 1) & remaining;
        }
        memo.insert((i, remaining), total);
        total
    }
    let value = rec(0, full, ng, &singles, &mut memo);
    Ok(ClusterValue {
        value,
        terms_evaluated: terms,
    })
}

/// The elementary bound `|e^{-x} - 1| <= |x| e^{x^-}` on the extended reals
/// (`x = +inf` gives `1 <= +inf`).
pub fn basic_inequality_holds(x: crate::energy::Energy) -> bool {
    match x {
        crate::energy::Energy::Infinite => true,
        crate::energy::Energy::Finite(v) => {
            let lhs = (-v).exp_m1().abs();
            let rhs = v.abs() * (-v).max(0.0).exp();
            lhs <= rhs * (1.0 + 1e-15) + f64::MIN_POSITIVE
        }
    }
}
