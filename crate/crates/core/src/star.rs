//! Star forests and star forest decompositions of edge sets.
//!
//! Edges are `(u, v)` vertex-index pairs with `u < v`. A star forest is an
//! edge set in which every connected component has at most one vertex of
//! degree greater than one; that vertex is the component's root. For a
//! single-edge component the root is the smaller endpoint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random partitions sampled by the brute method before falling back to greedy.
pub const BRUTE_RETRY_CAP: usize = 200_000;

/// Largest edge-set component (in vertices) accepted by the brute method.
pub const BRUTE_COMPONENT_LIMIT: usize = 10;

pub type Edge = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SfdMethod {
    Degenerate,
    Greedy,
    Brute,
}

impl SfdMethod {
    pub const ALL: [SfdMethod; 3] = [SfdMethod::Degenerate, SfdMethod::Greedy, SfdMethod::Brute];

    pub fn as_str(self) -> &'static str {
        match self {
            SfdMethod::Degenerate => "degenerate",
            SfdMethod::Greedy => "greedy",
            SfdMethod::Brute => "brute",
        }
    }
}

impl fmt::Display for SfdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SfdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown star forest method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Star {
    pub root: usize,
    pub leaves: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarForest {
    pub edges: Vec<Edge>,
    /// Sorted by root.
    pub stars: Vec<Star>,
}

impl StarForest {
    /// Builds a forest from an edge set, or `None` if it is not a star forest.
    pub fn from_edges(edges: &[Edge]) -> Option<Self> {
        let mut edges: Vec<Edge> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        edges.sort_unstable();
        edges.dedup();
        let stars = stars_of(&edges)?;
        Some(Self { edges, stars })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarForestDecomposition {
    pub forests: Vec<StarForest>,
    pub method: SfdMethod,
    /// Set when the brute method exhausted its retry cap and used greedy instead.
    #[serde(default)]
    pub fell_back: bool,
}

impl StarForestDecomposition {
    pub fn len(&self) -> usize {
        self.forests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forests.is_empty()
    }

    /// Forests are disjoint star forests whose union is exactly `edges`.
    pub fn is_valid_for(&self, edges: &[Edge]) -> bool {
        let target: BTreeSet<Edge> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        let mut seen = BTreeSet::new();
        for f in &self.forests {
            if f.edges.is_empty() || !is_star_forest(&f.edges) || stars_of(&f.edges).as_ref() != Some(&f.stars) {
                return false;
            }
            for &e in &f.edges {
                if !seen.insert(e) {
                    return false;
                }
            }
        }
        seen == target
    }
}

fn neighbours(edges: &[Edge]) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().insert(v);
        adj.entry(v).or_default().insert(u);
    }
    adj
}

fn components(adj: &BTreeMap<usize, BTreeSet<usize>>) -> Vec<Vec<usize>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in &adj[&u] {
                if seen.insert(w) {
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Every component has at most one vertex of degree greater than one.
pub fn star_forest_by_degree(edges: &[Edge]) -> bool {
    let adj = neighbours(edges);
    components(&adj)
        .iter()
        .all(|comp| comp.iter().filter(|v| adj[v].len() > 1).count() <= 1)
}

/// The edge set contains neither a triangle nor a simple path with three edges.
pub fn star_forest_by_forbidden_subgraphs(edges: &[Edge]) -> bool {
    let adj = neighbours(edges);
    for &(b, c) in edges {
        for &a in &adj[&b] {
            if a == c {
                continue;
            }
            if adj[&c].contains(&a) {
                return false; // triangle a-b-c
            }
            if adj[&c].iter().any(|&d| d != b && d != a) {
                return false; // path a-b-c-d
            }
        }
    }
    true
}

pub fn is_star_forest(edges: &[Edge]) -> bool {
    let by_degree = star_forest_by_degree(edges);
    let by_subgraphs = star_forest_by_forbidden_subgraphs(edges);
    assert_eq!(by_degree, by_subgraphs, "star forest characterisations disagree on {edges:?}");
    by_degree
}

/// Stars of a star forest, sorted by root; `None` if `edges` is not one.
pub fn stars_of(edges: &[Edge]) -> Option<Vec<Star>> {
    if !is_star_forest(edges) {
        return None;
    }
    let adj = neighbours(edges);
    let mut stars: Vec<Star> = components(&adj)
        .into_iter()
        .map(|comp| {
            let root = comp
                .iter()
                .copied()
                .find(|v| adj[v].len() > 1)
                .unwrap_or(comp[0]);
            let leaves = comp.into_iter().filter(|&v| v != root).collect();
            Star { root, leaves }
        })
        .collect();
    stars.sort_by_key(|s| s.root);
    Some(stars)
}

fn normalise(edges: &[Edge]) -> Vec<Edge> {
    let mut out: Vec<Edge> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Decomposes `edges` with no constraint beyond each block being a star forest.
pub fn star_forest_decompose(edges: &[Edge], method: SfdMethod, seed: u64) -> Result<StarForestDecomposition> {
    star_forest_decompose_with(edges, method, seed, BRUTE_RETRY_CAP, |_| true)
}

/// Decomposes `edges`, additionally requiring `admissible` of every forest.
/// Single-star forests must always be admissible.
pub fn star_forest_decompose_with<F>(
    edges: &[Edge],
    method: SfdMethod,
    seed: u64,
    brute_cap: usize,
    admissible: F,
) -> Result<StarForestDecomposition>
where
    F: Fn(&StarForest) -> bool,
{
    let edges = normalise(edges);
    match method {
        SfdMethod::Degenerate => Ok(decompose_degenerate(&edges)),
        SfdMethod::Greedy => Ok(decompose_greedy(&edges, &admissible)),
        SfdMethod::Brute => decompose_brute(&edges, seed, brute_cap, &admissible),
    }
}

fn decompose_degenerate(edges: &[Edge]) -> StarForestDecomposition {
    StarForestDecomposition {
        forests: edges
            .iter()
            .map(|&e| StarForest::from_edges(&[e]).expect("single edge"))
            .collect(),
        method: SfdMethod::Degenerate,
        fell_back: false,
    }
}

fn decompose_greedy(edges: &[Edge], admissible: &dyn Fn(&StarForest) -> bool) -> StarForestDecomposition {
    let mut residual: BTreeSet<Edge> = edges.iter().copied().collect();
    let mut forests: Vec<StarForest> = Vec::new();
    while !residual.is_empty() {
        let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
        for &(u, v) in &residual {
            *degree.entry(u).or_default() += 1;
            *degree.entry(v).or_default() += 1;
        }
        // BTreeMap iteration is ascending, so max_by_key with Reverse(index) keeps the smallest index.
        let (&centre, _) = degree
            .iter()
            .max_by_key(|&(&v, &d)| (d, std::cmp::Reverse(v)))
            .expect("residual is non-empty");
        let star: Vec<Edge> = residual
            .iter()
            .copied()
            .filter(|&(u, v)| u == centre || v == centre)
            .collect();
        for e in &star {
            residual.remove(e);
        }

        let placed = forests.iter_mut().any(|forest| {
            let mut union = forest.edges.clone();
            union.extend_from_slice(&star);
            match StarForest::from_edges(&union) {
                Some(candidate) if admissible(&candidate) => {
                    *forest = candidate;
                    true
                }
                _ => false,
            }
        });
        if !placed {
            forests.push(StarForest::from_edges(&star).expect("a single star is a star forest"));
        }
    }
    StarForestDecomposition {
        forests,
        method: SfdMethod::Greedy,
        fell_back: false,
    }
}

/// Vertex count of the largest connected component spanned by `edges`.
pub fn largest_component(edges: &[Edge]) -> usize {
    components(&neighbours(edges)).iter().map(Vec::len).max().unwrap_or(0)
}

fn decompose_brute(
    edges: &[Edge],
    seed: u64,
    cap: usize,
    admissible: &dyn Fn(&StarForest) -> bool,
) -> Result<StarForestDecomposition> {
    if let Some(size) = Some(largest_component(edges)).filter(|&s| s > BRUTE_COMPONENT_LIMIT) {
        return Err(Error::Capacity {
            what: "brute-force star forest decomposition",
            size,
            limit: BRUTE_COMPONENT_LIMIT,
            hint: Some("use the greedy method for larger components"),
        });
    }
    if edges.is_empty() {
        return Ok(StarForestDecomposition {
            forests: Vec::new(),
            method: SfdMethod::Brute,
            fell_back: false,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = PartitionSampler::new(edges.len());
    for _ in 0..cap {
        let blocks = sampler.sample(&mut rng);
        let forests: Option<Vec<StarForest>> = blocks
            .iter()
            .map(|block| {
                let block_edges: Vec<Edge> = block.iter().map(|&k| edges[k]).collect();
                StarForest::from_edges(&block_edges).filter(|f| admissible(f))
            })
            .collect();
        if let Some(forests) = forests {
            return Ok(StarForestDecomposition {
                forests,
                method: SfdMethod::Brute,
                fell_back: false,
            });
        }
    }
    let mut fallback = decompose_greedy(edges, admissible);
    fallback.method = SfdMethod::Brute;
    fallback.fell_back = true;
    Ok(fallback)
}

/// Uniform random set partitions of `{0, .., m-1}` by Stam's urn method:
/// draw an urn count `K` with `P(K = k) ∝ k^m / k!`, throw every element
/// into a uniformly chosen urn, and keep the non-empty urns.
pub struct PartitionSampler {
    m: usize,
    /// Cumulative distribution of `K` over `1..=cdf.len()`.
    cdf: Vec<f64>,
}

impl PartitionSampler {
    pub fn new(m: usize) -> Self {
        // Terms k^m / k! are negligible well before k = 3m + 10.
        let kmax = 3 * m + 10;
        let mut log_w = Vec::with_capacity(kmax);
        let mut log_fact = 0.0;
        for k in 1..=kmax {
            log_fact += (k as f64).ln();
            log_w.push(m as f64 * (k as f64).ln() - log_fact);
        }
        let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut acc = 0.0;
        let cdf = w
            .iter()
            .map(|x| {
                acc += x / total;
                acc
            })
            .collect();
        Self { m, cdf }
    }

    /// Blocks in order of their smallest element; each block is sorted.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<Vec<usize>> {
        let u: f64 = rng.gen();
        let k = self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1) + 1;
        let mut urns: Vec<Vec<usize>> = vec![Vec::new(); k];
        for e in 0..self.m {
            urns[rng.gen_range(0..k)].push(e);
        }
        let mut blocks: Vec<Vec<usize>> = urns.into_iter().filter(|b| !b.is_empty()).collect();
        blocks.sort();
        blocks
    }
}
