//! Signed coherence graphs, the coherence objective, the L1 graph distance
//! and median consensus.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// An undirected graph on proposition labels with edge weights in `[-1, 1]`.
///
/// Vertices are kept in lexicographic order and addressed by their position
/// in that order; edges are keyed by `(i, j)` with `i < j`. A weight of zero
/// is the same as no edge and is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeMap<(usize, usize), f64>,
}

/// Interchange form: `{"vertices": [...], "edges": [[u, v, w], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String, f64)>,
}

impl SignedGraph {
    /// Creates an edgeless graph. Labels are sorted; duplicates are rejected.
    pub fn new<I, S>(vertices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        vertices.sort();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateVertex(w[0].clone()));
        }
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        Ok(Self {
            vertices,
            index,
            edges: BTreeMap::new(),
        })
    }

    pub fn from_edges<I, S>(vertices: I, edges: &[(&str, &str, f64)]) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Self::new(vertices)?;
        for &(u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    /// Adds an edge. A zero weight is accepted and leaves the pair absent.
    pub fn add_edge(&mut self, u: &str, v: &str, weight: f64) -> Result<()> {
        let i = self.require(u)?;
        let j = self.require(v)?;
        if i == j {
            return Err(Error::SelfLoop(u.to_string()));
        }
        if !weight.is_finite() || !(-1.0..=1.0).contains(&weight) {
            return Err(Error::WeightOutOfRange {
                u: u.to_string(),
                v: v.to_string(),
                weight,
            });
        }
        let key = (i.min(j), i.max(j));
        if self.edges.contains_key(&key) {
            return Err(Error::DuplicateEdge(u.to_string(), v.to_string()));
        }
        if weight != 0.0 {
            self.edges.insert(key, weight);
        }
        Ok(())
    }

    /// Sets the weight of a pair by index, replacing any previous value.
    pub(crate) fn set_weight_idx(&mut self, i: usize, j: usize, weight: f64) {
        debug_assert!(i != j && i < self.len() && j < self.len());
        let key = (i.min(j), i.max(j));
        if weight == 0.0 {
            self.edges.remove(&key);
        } else {
            self.edges.insert(key, weight);
        }
    }

    fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of unordered vertex pairs, `|V|·(|V|-1)/2`.
    pub fn pair_count(&self) -> usize {
        let n = self.len();
        n * n.saturating_sub(1) / 2
    }

    /// Edges as `((i, j), w)` with `i < j`, in lexicographic order.
    pub fn edge_indices(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.edges.iter().map(|(&k, &w)| (k, w))
    }

    /// Edges as `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        self.edges
            .iter()
            .map(|(&(i, j), &w)| (self.label(i), self.label(j), w))
    }

    pub fn weight_idx(&self, i: usize, j: usize) -> f64 {
        self.edges
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Weight of a pair; `0.0` for absent edges.
    pub fn weight(&self, u: &str, v: &str) -> Result<f64> {
        Ok(self.weight_idx(self.require(u)?, self.require(v)?))
    }

    pub fn has_edge_idx(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&(i.min(j), i.max(j)))
    }

    /// Per-vertex neighbour lists with weights.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.len()];
        for (&(i, j), &w) in &self.edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        adj
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.keys().filter(|&&(a, b)| a == i || b == i).count()
    }

    /// True when every weight is exactly `+1` or `-1`.
    pub fn is_signed(&self) -> bool {
        self.edges.values().all(|&w| w == 1.0 || w == -1.0)
    }

    /// Fails with [`Error::NotSigned`] on the first non-`±1` weight.
    pub fn ensure_signed(&self) -> Result<()> {
        match self.edges().find(|&(_, _, w)| w != 1.0 && w != -1.0) {
            Some((u, v, weight)) => Err(Error::NotSigned {
                u: u.to_string(),
                v: v.to_string(),
                weight,
            }),
            None => Ok(()),
        }
    }

    pub fn positive_edge_count(&self) -> usize {
        self.edges.values().filter(|&&w| w > 0.0).count()
    }

    pub fn negative_edge_count(&self) -> usize {
        self.edges.values().filter(|&&w| w < 0.0).count()
    }

    /// `|E| / C(|V|, 2)`; zero for graphs with fewer than two vertices.
    pub fn density(&self) -> f64 {
        match self.pair_count() {
            0 => 0.0,
            p => self.edge_count() as f64 / p as f64,
        }
    }

    /// Breadth-first connectivity check. Empty and single-vertex graphs are connected.
    pub fn is_connected(&self) -> bool {
        if self.len() <= 1 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.len()
    }

    pub fn ensure_same_vertices(&self, other: &SignedGraph) -> Result<()> {
        if self.vertices == other.vertices {
            Ok(())
        } else {
            Err(Error::VertexMismatch)
        }
    }

    /// Coherence of the bipartition given by `side` (indexed by vertex):
    /// minus the total weight of edges whose endpoints lie on different sides.
    pub fn coherence_of(&self, side: &[bool]) -> f64 {
        debug_assert_eq!(side.len(), self.len());
        -self
            .edges
            .iter()
            .filter(|(&(i, j), _)| side[i] != side[j])
            .map(|(_, &w)| w)
            .sum::<f64>()
    }

    /// Converts a set of labels into a side-indicator vector.
    pub fn membership<S: AsRef<str>>(&self, part: &[S]) -> Result<Vec<bool>> {
        let mut side = vec![false; self.len()];
        for label in part {
            side[self.require(label.as_ref())?] = true;
        }
        Ok(side)
    }

    /// The same graph with every weight negated.
    pub fn negated(&self) -> SignedGraph {
        let mut g = self.clone();
        for w in g.edges.values_mut() {
            *w = -*w;
        }
        g
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertices.clone(),
            edges: self
                .edges()
                .map(|(u, v, w)| (u.to_string(), v.to_string(), w))
                .collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let mut g = Self::new(json.vertices.iter().cloned())?;
        for (u, v, w) in &json.edges {
            g.add_edge(u, v, *w)?;
        }
        Ok(g)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("graph JSON is always serialisable")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

impl Serialize for SignedGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignedGraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = GraphJson::deserialize(deserializer)?;
        SignedGraph::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Coherence of `part`: `-Σ A_uv` over `u ∈ part`, `v ∉ part`.
pub fn coherence<S: AsRef<str>>(graph: &SignedGraph, part: &[S]) -> Result<f64> {
    Ok(graph.coherence_of(&graph.membership(part)?))
}

/// Entrywise L1 distance between weighted adjacency matrices, summed over
/// unordered pairs (absent edges count as 0). With `normalized`, divides by
/// the number of pairs.
pub fn l1_distance(g1: &SignedGraph, g2: &SignedGraph, normalized: bool) -> Result<f64> {
    g1.ensure_same_vertices(g2)?;
    // Only pairs present in either graph contribute.
    let mut total = 0.0;
    let mut a = g1.edges.iter().peekable();
    let mut b = g2.edges.iter().peekable();
    loop {
        match (a.peek(), b.peek()) {
            (Some((ka, wa)), Some((kb, wb))) => {
                if ka == kb {
                    total += (*wa - *wb).abs();
                    a.next();
                    b.next();
                } else if ka < kb {
                    total += wa.abs();
                    a.next();
                } else {
                    total += wb.abs();
                    b.next();
                }
            }
            (Some((_, wa)), None) => {
                total += wa.abs();
                a.next();
            }
            (None, Some((_, wb))) => {
                total += wb.abs();
                b.next();
            }
            (None, None) => break,
        }
    }
    if normalized {
        let pairs = g1.pair_count();
        Ok(if pairs == 0 { 0.0 } else { total / pairs as f64 })
    } else {
        Ok(total)
    }
}

/// Median of a slice; the midpoint of the two central values for even lengths.
pub(crate) fn median_of(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Per-pair median of the input weights (absent edges are 0).
pub fn median_consensus(graphs: &[SignedGraph]) -> Result<SignedGraph> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::invalid("median consensus of an empty list"))?;
    for g in &graphs[1..] {
        first.ensure_same_vertices(g)?;
    }
    let mut out = SignedGraph::new(first.vertices.iter().cloned())?;
    let n = first.len();
    let mut column = vec![0.0; graphs.len()];
    for i in 0..n {
        for j in i + 1..n {
            for (slot, g) in column.iter_mut().zip(graphs) {
                *slot = g.weight_idx(i, j);
            }
            out.set_weight_idx(i, j, median_of(&mut column));
        }
    }
    Ok(out)
}

/// Distances from the medians of random size-`n` subsets to the median of all graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub distances: Vec<f64>,
}

impl ConvergencePoint {
    pub fn median_distance(&self) -> f64 {
        median_of(&mut self.distances.clone())
    }
}

/// For each subsample size `n`, draws `trials` random `n`-subsets of `graphs`
/// and records the raw L1 distance between the subset median and the full median.
pub fn convergence_curve(
    graphs: &[SignedGraph],
    subsample_sizes: &[usize],
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<ConvergencePoint>> {
    use rand::seq::index::sample;

    if trials == 0 {
        return Err(Error::invalid("trials per size must be at least 1"));
    }
    let full = median_consensus(graphs)?;
    let total = graphs.len();
    let mut out = Vec::with_capacity(subsample_sizes.len());
    for &n in subsample_sizes {
        if n == 0 || n > total {
            return Err(Error::invalid(format!(
                "subsample size {n} must be between 1 and the number of graphs ({total})"
            )));
        }
        let distances = exec.map_range(0..trials as u64, |trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((n as u64) << 32) | trial);
            let subset: Vec<SignedGraph> = sample(&mut rng, total, n)
                .into_iter()
                .map(|k| graphs[k].clone())
                .collect();
            let m = median_consensus(&subset).expect("non-empty subset of matching graphs");
            l1_distance(&m, &full, false).expect("shared vertex set")
        });
        out.push(ConvergencePoint { n, distances });
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    pub(crate) fn triangle() -> SignedGraph {
        SignedGraph::from_edges(
            ["a", "b", "c"],
            &[("a", "b", 1.0), ("a", "c", -1.0), ("b", "c", -1.0)],
        )
        .unwrap()
    }

    fn random_graph(n: usize, rng: &mut impl Rng) -> SignedGraph {
        let labels: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut g = SignedGraph::new(labels).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                let w = [-1.0, 0.0, 1.0][rng.gen_range(0..3)];
                g.set_weight_idx(i, j, w);
            }
        }
        g
    }

    #[test]
    fn triangle_cut_values() {
        let g = triangle();
        assert_eq!(coherence(&g, &["a", "c"]).unwrap(), 0.0);
        assert_eq!(coherence(&g, &["a", "b"]).unwrap(), 2.0);
        assert_eq!(coherence::<&str>(&g, &[]).unwrap(), 0.0);
    }

    #[test]
    fn coherence_rejects_unknown_labels() {
        assert!(matches!(
            coherence(&triangle(), &["zz"]),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn construction_invariants() {
        let mut g = SignedGraph::new(["a", "b"]).unwrap();
        assert!(matches!(g.add_edge("a", "a", 1.0), Err(Error::SelfLoop(_))));
        assert!(matches!(g.add_edge("a", "x", 1.0), Err(Error::UnknownVertex(_))));
        assert!(matches!(
            g.add_edge("a", "b", 1.5),
            Err(Error::WeightOutOfRange { .. })
        ));
        g.add_edge("b", "a", 0.5).unwrap();
        assert!(matches!(g.add_edge("a", "b", 1.0), Err(Error::DuplicateEdge(..))));
        assert!(matches!(g.ensure_signed(), Err(Error::NotSigned { .. })));
        assert!(matches!(
            SignedGraph::new(["a", "a"]),
            Err(Error::DuplicateVertex(_))
        ));
    }

    #[test]
    fn json_is_canonical_and_round_trips() {
        let text = r#"{"vertices": ["c", "a", "b"], "edges": [["c", "b", -1], ["b", "a", 1], ["a", "c", -1]]}"#;
        let g = SignedGraph::from_json_str(text).unwrap();
        assert_eq!(g, triangle());
        let json = g.to_json();
        assert_eq!(json.vertices, ["a", "b", "c"]);
        assert_eq!(
            json.edges,
            vec![
                ("a".into(), "b".into(), 1.0),
                ("a".into(), "c".into(), -1.0),
                ("b".into(), "c".into(), -1.0)
            ]
        );
        let back: SignedGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn l1_examples() {
        let g = triangle();
        assert_eq!(l1_distance(&g, &g, false).unwrap(), 0.0);
        let mut flipped = SignedGraph::new(["a", "b", "c"]).unwrap();
        flipped.add_edge("a", "b", -1.0).unwrap();
        flipped.add_edge("a", "c", -1.0).unwrap();
        flipped.add_edge("b", "c", -1.0).unwrap();
        assert_eq!(l1_distance(&g, &flipped, false).unwrap(), 2.0);
        assert!((l1_distance(&g, &flipped, true).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let other = SignedGraph::new(["a", "b"]).unwrap();
        assert!(matches!(l1_distance(&g, &other, false), Err(Error::VertexMismatch)));
    }

    #[test]
    fn l1_matches_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_graph(6, &mut rng);
            let b = random_graph(6, &mut rng);
            let mut oracle = 0.0;
            for i in 0..6 {
                for j in i + 1..6 {
                    oracle += (a.weight_idx(i, j) - b.weight_idx(i, j)).abs();
                }
            }
            assert_eq!(l1_distance(&a, &b, false).unwrap(), oracle);
            assert_eq!(l1_distance(&a, &b, true).unwrap(), oracle / 15.0);
        }
    }

    #[test]
    fn median_examples() {
        let g = triangle();
        assert_eq!(median_consensus(&[g.clone(), g.clone(), g.clone()]).unwrap(), g);

        let mk = |w: f64| SignedGraph::from_edges(["x", "y"], &[("x", "y", w)]).unwrap();
        let m = median_consensus(&[mk(1.0), mk(1.0), mk(-1.0)]).unwrap();
        assert_eq!(m.weight("x", "y").unwrap(), 1.0);
        let m = median_consensus(&[mk(1.0), mk(-1.0)]).unwrap();
        assert_eq!(m.edge_count(), 0);
        let m = median_consensus(&[mk(1.0), mk(0.0)]).unwrap();
        assert_eq!(m.weight("x", "y").unwrap(), 0.5);

        assert!(median_consensus(&[]).is_err());
        assert!(median_consensus(&[g, mk(1.0)]).is_err());
    }

    #[test]
    fn median_matches_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let gs: Vec<_> = (0..5).map(|_| random_graph(5, &mut rng)).collect();
            let m = median_consensus(&gs).unwrap();
            for i in 0..5 {
                for j in i + 1..5 {
                    let mut col: Vec<f64> = gs.iter().map(|g| g.weight_idx(i, j)).collect();
                    col.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    assert_eq!(m.weight_idx(i, j), col[2]);
                }
            }
        }
    }

    #[test]
    fn median_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let gs: Vec<_> = (0..4).map(|_| random_graph(5, &mut rng)).collect();
        let m = median_consensus(&gs).unwrap();
        for k in 1..5 {
            assert_eq!(median_consensus(&vec![m.clone(); k]).unwrap(), m);
        }
    }

    #[test]
    fn median_minimises_total_l1_over_ternary_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for list_len in [3usize, 4] {
            let gs: Vec<_> = (0..list_len).map(|_| random_graph(4, &mut rng)).collect();
            let m = median_consensus(&gs).unwrap();
            let total = |c: &SignedGraph| -> f64 {
                gs.iter().map(|g| l1_distance(c, g, false).unwrap()).sum()
            };
            let best = total(&m);
            // 4 vertices: 6 pairs, 3^6 candidates.
            let mut candidate = random_graph(4, &mut rng);
            for code in 0..729u32 {
                let mut c = code;
                for i in 0..4 {
                    for j in i + 1..4 {
                        candidate.set_weight_idx(i, j, (c % 3) as f64 - 1.0);
                        c /= 3;
                    }
                }
                assert!(best <= total(&candidate) + 1e-12);
            }
        }
    }

    #[test]
    fn convergence_full_size_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let gs: Vec<_> = (0..6).map(|_| random_graph(5, &mut rng)).collect();
        let curve = convergence_curve(&gs, &[6], 5, 1, Exec::default()).unwrap();
        assert!(curve[0].distances.iter().all(|&d| d == 0.0));

        let same = vec![gs[0].clone(); 6];
        for p in convergence_curve(&same, &[1, 2, 3, 6], 4, 2, Exec::default()).unwrap() {
            assert!(p.distances.iter().all(|&d| d == 0.0));
        }
        assert!(convergence_curve(&gs, &[7], 1, 0, Exec::default()).is_err());
        assert!(convergence_curve(&gs, &[2], 0, 0, Exec::default()).is_err());
    }

    #[test]
    fn convergence_matches_exhaustive_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let gs: Vec<_> = (0..6).map(|_| random_graph(5, &mut rng)).collect();
        let full = median_consensus(&gs).unwrap();
        // All C(6, 3) = 20 subsets.
        let mut exhaustive = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                for c in b + 1..6 {
                    let m = median_consensus(&[gs[a].clone(), gs[b].clone(), gs[c].clone()]).unwrap();
                    exhaustive.push(l1_distance(&m, &full, false).unwrap());
                }
            }
        }
        let curve = convergence_curve(&gs, &[3], 2000, 3, Exec::default()).unwrap();
        let observed = &curve[0].distances;
        assert!(observed.iter().all(|d| exhaustive.contains(d)));
        for d in &exhaustive {
            assert!(observed.contains(d), "subset distance {d} never sampled");
        }
    }

    #[test]
    fn convergence_is_schedule_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let gs: Vec<_> = (0..8).map(|_| random_graph(5, &mut rng)).collect();
        let a = convergence_curve(&gs, &[2, 4], 30, 77, Exec::Sequential).unwrap();
        let b = convergence_curve(&gs, &[2, 4], 30, 77, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn connectivity_and_density() {
        let g = triangle();
        assert!(g.is_connected());
        assert_eq!(g.density(), 1.0);
        let g = SignedGraph::from_edges(["a", "b", "c"], &[("a", "b", 1.0)]).unwrap();
        assert!(!g.is_connected());
        assert!((g.density() - 1.0 / 3.0).abs() < 1e-15);
    }

    fn arb_graph(n: usize) -> impl Strategy<Value = SignedGraph> {
        proptest::collection::vec(prop_oneof![Just(-1.0), Just(0.0), Just(1.0), -1.0..=1.0f64], n * (n - 1) / 2)
            .prop_map(move |ws| {
                let labels: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
                let mut g = SignedGraph::new(labels).unwrap();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        g.set_weight_idx(i, j, ws[k]);
                        k += 1;
                    }
                }
                g
            })
    }

    proptest! {
        #[test]
        fn cut_symmetry(g in arb_graph(6), mask in 0u32..64) {
            let side: Vec<bool> = (0..6).map(|i| mask >> i & 1 == 1).collect();
            let flipped: Vec<bool> = side.iter().map(|s| !s).collect();
            prop_assert!((g.coherence_of(&side) - g.coherence_of(&flipped)).abs() < 1e-12);
        }

        #[test]
        fn l1_metric_axioms(a in arb_graph(5), b in arb_graph(5), c in arb_graph(5)) {
            let ab = l1_distance(&a, &b, false).unwrap();
            let ba = l1_distance(&b, &a, false).unwrap();
            let bc = l1_distance(&b, &c, false).unwrap();
            let ac = l1_distance(&a, &c, false).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert_eq!(ab == 0.0, a == b);
            prop_assert_eq!(l1_distance(&a, &a, false).unwrap(), 0.0);
        }

        #[test]
        fn l1_on_ternary_graphs_is_edit_distance(a in arb_graph(5), b in arb_graph(5)) {
            // insertion/deletion cost |w|, substitution cost |w1 - w2|
            let ternary = |g: &SignedGraph| {
                let mut t = g.clone();
                for ((i, j), w) in g.edge_indices().collect::<Vec<_>>() {
                    t.set_weight_idx(i, j, w.signum());
                }
                t
            };
            let (a, b) = (ternary(&a), ternary(&b));
            let mut cost = 0.0;
            for i in 0..5 {
                for j in i + 1..5 {
                    let (x, y) = (a.weight_idx(i, j), b.weight_idx(i, j));
                    cost += match (a.has_edge_idx(i, j), b.has_edge_idx(i, j)) {
                        (true, true) if x != y => 2.0,
                        (true, false) | (false, true) => 1.0,
                        _ => 0.0,
                    };
                }
            }
            prop_assert_eq!(l1_distance(&a, &b, false).unwrap(), cost);
        }
    }
}
