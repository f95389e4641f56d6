//! Clique enumeration and clique edge covers.
//!
//! Three cover constructions are provided:
//!
//! * `degenerate`: one 2-clique per edge;
//! * `percolation`: all maximal cliques, then a minimum set cover of the edge
//!   set (exact branch and bound up to 64 maximal cliques, greedy beyond),
//!   with each chosen clique trimmed to the vertices spanned by the edges it
//!   alone contributes;
//! * `partition`: repeatedly remove the edges of a maximum clique of the
//!   residual graph.
//!
//! The first and last are clique edge partitions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SignedGraph;

/// Maximal-clique count up to which the percolation cover is solved exactly.
pub const EXACT_COVER_LIMIT: usize = 64;

/// Fixed-width bit set over vertex (or edge) indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64).max(1)],
        }
    }

    pub(crate) fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub(crate) fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub(crate) fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub(crate) fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn and(&self, other: &Self) -> Self {
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub(crate) fn and_not(&self, other: &Self) -> Self {
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub(crate) fn or(&self, other: &Self) -> Self {
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub(crate) fn and_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + b)
                }
            })
        })
    }
}

/// Unweighted adjacency as bit sets, optionally restricted to a subset of edges.
pub(crate) fn adjacency_bits(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<BitSet> {
    let mut adj = vec![BitSet::new(n); n];
    for (i, j) in edges {
        adj[i].insert(j);
        adj[j].insert(i);
    }
    adj
}

fn graph_adjacency(graph: &SignedGraph) -> Vec<BitSet> {
    adjacency_bits(graph.len(), graph.edge_indices().map(|(k, _)| k))
}

/// All maximal cliques (including isolated vertices as singletons), each
/// sorted, in lexicographic order.
pub fn maximal_cliques(graph: &SignedGraph) -> Vec<Vec<usize>> {
    maximal_cliques_of(&graph_adjacency(graph))
}

pub(crate) fn maximal_cliques_of(adj: &[BitSet]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut r = Vec::new();
    bron_kerbosch(adj, &mut r, BitSet::full(n), BitSet::new(n), &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    out
}

fn bron_kerbosch(adj: &[BitSet], r: &mut Vec<usize>, mut p: BitSet, mut x: BitSet, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    // Tomita pivot: the vertex of P ∪ X with the most neighbours in P.
    let pivot = p
        .or(&x)
        .iter()
        .max_by_key(|&u| (p.and_count(&adj[u]), std::cmp::Reverse(u)))
        .expect("P is non-empty");
    let candidates: Vec<usize> = p.and_not(&adj[pivot]).iter().collect();
    for v in candidates {
        r.push(v);
        bron_kerbosch(adj, r, p.and(&adj[v]), x.and(&adj[v]), out);
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}

/// A maximum clique, found by branch and bound with a greedy colouring bound.
/// Returns a sorted vertex list; empty for an empty graph.
pub fn maximum_clique(graph: &SignedGraph) -> Vec<usize> {
    maximum_clique_of(&graph_adjacency(graph))
}

pub(crate) fn maximum_clique_of(adj: &[BitSet]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..adj.len()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(adj[v].count()), v));
    let mut best = Vec::new();
    let mut current = Vec::new();
    expand(adj, &mut current, order, &mut best);
    best.sort_unstable();
    best
}

/// Greedy sequential colouring of `p`; returns vertices grouped by colour
/// class together with each vertex's 1-based colour.
fn colour_sort(adj: &[BitSet], p: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in p {
        match classes
            .iter_mut()
            .find(|class| class.iter().all(|&u| !adj[v].contains(u)))
        {
            Some(class) => class.push(v),
            None => classes.push(vec![v]),
        }
    }
    let mut order = Vec::with_capacity(p.len());
    let mut colours = Vec::with_capacity(p.len());
    for (k, class) in classes.into_iter().enumerate() {
        for v in class {
            order.push(v);
            colours.push(k + 1);
        }
    }
    (order, colours)
}

fn expand(adj: &[BitSet], current: &mut Vec<usize>, p: Vec<usize>, best: &mut Vec<usize>) {
    let (order, colours) = colour_sort(adj, &p);
    for idx in (0..order.len()).rev() {
        if current.len() + colours[idx] <= best.len() {
            return;
        }
        let v = order[idx];
        current.push(v);
        let next: Vec<usize> = order[..idx]
            .iter()
            .copied()
            .filter(|&w| adj[v].contains(w))
            .collect();
        if next.is_empty() {
            if current.len() > best.len() {
                *best = current.clone();
            }
        } else {
            expand(adj, current, next, best);
        }
        current.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMethod {
    Degenerate,
    Percolation,
    Partition,
}

impl CoverMethod {
    pub const ALL: [CoverMethod; 3] = [
        CoverMethod::Degenerate,
        CoverMethod::Percolation,
        CoverMethod::Partition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoverMethod::Degenerate => "degenerate",
            CoverMethod::Percolation => "percolation",
            CoverMethod::Partition => "partition",
        }
    }
}

impl fmt::Display for CoverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown cover method `{s}`")))
    }
}

/// A set of cliques whose edges cover the edge set of a graph. Cliques are
/// sorted vertex-index lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueEdgeCover {
    pub cliques: Vec<Vec<usize>>,
    pub method: CoverMethod,
}

impl CliqueEdgeCover {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn labels(&self, graph: &SignedGraph) -> Vec<Vec<String>> {
        self.cliques
            .iter()
            .map(|c| c.iter().map(|&v| graph.label(v).to_string()).collect())
            .collect()
    }

    /// Every clique is complete in `graph` and the clique edges are exactly `E(graph)`.
    pub fn is_valid_for(&self, graph: &SignedGraph) -> bool {
        let mut covered = std::collections::BTreeSet::new();
        for c in &self.cliques {
            if c.len() < 2 {
                return false;
            }
            for (a, &u) in c.iter().enumerate() {
                for &v in &c[a + 1..] {
                    if !graph.has_edge_idx(u, v) {
                        return false;
                    }
                    covered.insert((u.min(v), u.max(v)));
                }
            }
        }
        covered.len() == graph.edge_count()
    }

    /// No edge lies in two cliques.
    pub fn is_partition(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.cliques {
            for (a, &u) in c.iter().enumerate() {
                for &v in &c[a + 1..] {
                    if !seen.insert((u.min(v), u.max(v))) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

pub fn cover(graph: &SignedGraph, method: CoverMethod) -> CliqueEdgeCover {
    match method {
        CoverMethod::Degenerate => cover_degenerate(graph),
        CoverMethod::Percolation => cover_percolation(graph),
        CoverMethod::Partition => cover_partition(graph),
    }
}

pub fn cover_degenerate(graph: &SignedGraph) -> CliqueEdgeCover {
    CliqueEdgeCover {
        cliques: graph.edge_indices().map(|((i, j), _)| vec![i, j]).collect(),
        method: CoverMethod::Degenerate,
    }
}

pub fn cover_partition(graph: &SignedGraph) -> CliqueEdgeCover {
    let n = graph.len();
    let mut residual: std::collections::BTreeSet<(usize, usize)> =
        graph.edge_indices().map(|(k, _)| k).collect();
    let mut cliques = Vec::new();
    while !residual.is_empty() {
        let adj = adjacency_bits(n, residual.iter().copied());
        let clique = maximum_clique_of(&adj);
        debug_assert!(clique.len() >= 2);
        for (a, &u) in clique.iter().enumerate() {
            for &v in &clique[a + 1..] {
                residual.remove(&(u, v));
            }
        }
        cliques.push(clique);
    }
    cliques.sort();
    CliqueEdgeCover {
        cliques,
        method: CoverMethod::Partition,
    }
}

pub fn cover_percolation(graph: &SignedGraph) -> CliqueEdgeCover {
    let edges: Vec<(usize, usize)> = graph.edge_indices().map(|(k, _)| k).collect();
    let edge_id: std::collections::HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let maximal: Vec<Vec<usize>> = maximal_cliques(graph)
        .into_iter()
        .filter(|c| c.len() >= 2)
        .collect();
    let exact = maximal.len() <= EXACT_COVER_LIMIT;

    // Every edge lies in a maximal clique, so single edges only widen the
    // greedy pool; the exact search never needs them.
    let mut candidates: Vec<Vec<usize>> = maximal.clone();
    if !exact {
        candidates.extend(edges.iter().map(|&(i, j)| vec![i, j]));
    }
    let sets: Vec<BitSet> = candidates
        .iter()
        .map(|c| {
            let mut s = BitSet::new(edges.len());
            for (a, &u) in c.iter().enumerate() {
                for &v in &c[a + 1..] {
                    s.insert(edge_id[&(u.min(v), u.max(v))]);
                }
            }
            s
        })
        .collect();

    let chosen = if exact {
        exact_set_cover(&sets, edges.len())
    } else {
        greedy_set_cover(&sets, edges.len())
    };

    let mut picked: Vec<Vec<usize>> = chosen.into_iter().map(|k| candidates[k].clone()).collect();
    picked.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let cliques = trim_cover(&picked, &edges);
    CliqueEdgeCover {
        cliques,
        method: CoverMethod::Percolation,
    }
}

/// Shrinks each clique (in order) to the vertices spanned by the edges not
/// already covered by earlier cliques, dropping cliques that add nothing.
fn trim_cover(cliques: &[Vec<usize>], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut covered = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for c in cliques {
        let mut needed = std::collections::BTreeSet::new();
        for (a, &u) in c.iter().enumerate() {
            for &v in &c[a + 1..] {
                let e = (u.min(v), u.max(v));
                if !covered.contains(&e) {
                    needed.insert(u);
                    needed.insert(v);
                }
            }
        }
        if needed.is_empty() {
            continue;
        }
        let trimmed: Vec<usize> = needed.into_iter().collect();
        for (a, &u) in trimmed.iter().enumerate() {
            for &v in &trimmed[a + 1..] {
                covered.insert((u, v));
            }
        }
        out.push(trimmed);
    }
    debug_assert_eq!(covered.len(), edges.len());
    out.sort();
    out
}

fn greedy_set_cover(sets: &[BitSet], universe: usize) -> Vec<usize> {
    let mut uncovered = BitSet::full(universe);
    if universe == 0 {
        return Vec::new();
    }
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let (k, _) = sets
            .iter()
            .enumerate()
            .map(|(k, s)| (k, s.and_count(&uncovered)))
            .max_by_key(|&(k, gain)| (gain, std::cmp::Reverse(k)))
            .expect("candidate pool covers every element");
        chosen.push(k);
        uncovered = uncovered.and_not(&sets[k]);
    }
    chosen
}

/// Minimum set cover by branch and bound; `sets.len()` must not exceed 64.
fn exact_set_cover(sets: &[BitSet], universe: usize) -> Vec<usize> {
    assert!(sets.len() <= 64, "exact cover works on at most 64 sets");
    if universe == 0 {
        return Vec::new();
    }
    let elem_sets: Vec<u64> = (0..universe)
        .map(|e| (0..sets.len()).filter(|&k| sets[k].contains(e)).fold(0u64, |m, k| m | 1 << k))
        .collect();
    let mut search = CoverSearch {
        sets,
        elem_sets,
        best: greedy_set_cover(sets, universe),
        chosen: Vec::new(),
    };
    let all = if sets.len() == 64 { u64::MAX } else { (1u64 << sets.len()) - 1 };
    search.branch(BitSet::full(universe), all);
    search.best
}

struct CoverSearch<'a> {
    sets: &'a [BitSet],
    /// For each element, the sets containing it.
    elem_sets: Vec<u64>,
    best: Vec<usize>,
    chosen: Vec<usize>,
}

impl CoverSearch<'_> {
    fn branch(&mut self, uncovered: BitSet, available: u64) {
        if uncovered.is_empty() {
            if self.chosen.len() < self.best.len() {
                self.best = self.chosen.clone();
            }
            return;
        }
        let mut elems: Vec<(u32, usize)> = uncovered
            .iter()
            .map(|e| ((self.elem_sets[e] & available).count_ones(), e))
            .collect();
        elems.sort_unstable();
        if elems[0].0 == 0 {
            return;
        }
        // Elements with pairwise disjoint option sets each need their own set.
        let mut used = 0u64;
        let mut lower = 0;
        for &(_, e) in &elems {
            let opts = self.elem_sets[e] & available;
            if opts & used == 0 {
                used |= opts;
                lower += 1;
            }
        }
        if self.chosen.len() + lower >= self.best.len() {
            return;
        }
        let element = elems[0].1;
        let mut options: Vec<usize> = (0..self.sets.len())
            .filter(|&k| (self.elem_sets[element] & available) >> k & 1 == 1)
            .collect();
        options.sort_by_key(|&k| (std::cmp::Reverse(self.sets[k].and_count(&uncovered)), k));
        let mut avail = available;
        for k in options {
            // Later branches never reuse an option already explored here.
            avail &= !(1u64 << k);
            self.chosen.push(k);
            self.branch(uncovered.and_not(&self.sets[k]), avail);
            self.chosen.pop();
        }
    }
}
