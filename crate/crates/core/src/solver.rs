//! Coherence maximisation and related computations.
//!
//! A cut is stored as the part containing the smallest vertex. Coherence of
//! a cut is minus the total weight of the edges it crosses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{chunk_count, chunks, Exec};
use crate::graph::SignedGraph;

/// Largest graph the exhaustive solver accepts.
pub const EXACT_LIMIT: usize = 26;
/// Largest graph the Gibbs enumeration accepts.
pub const GIBBS_LIMIT: usize = 20;
/// Coherence values closer than this are treated as tied.
pub const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    /// The part containing the smallest vertex, sorted.
    pub part: Vec<String>,
    pub coherence: f64,
    /// The part labelled as accepted, sorted.
    pub accepted: Vec<String>,
}

impl Cut {
    /// Builds a labelled cut from a side assignment (`true` = in `U`).
    pub fn from_side(graph: &SignedGraph, side: &[bool]) -> Self {
        let side = normalise(side);
        let coherence = graph.coherence_of(&side);
        let accepted_side = accepted_side(graph, &side);
        let labels = |want: bool, s: &[bool]| -> Vec<String> {
            (0..graph.len())
                .filter(|&i| s[i] == want)
                .map(|i| graph.label(i).to_string())
                .collect()
        };
        Cut {
            part: labels(true, &side),
            coherence,
            accepted: labels(accepted_side, &side),
        }
    }

    /// The complementary part.
    pub fn other_part(&self, graph: &SignedGraph) -> Vec<String> {
        graph
            .vertices()
            .iter()
            .filter(|v| !self.part.contains(v))
            .cloned()
            .collect()
    }
}

fn normalise(side: &[bool]) -> Vec<bool> {
    match side.first() {
        Some(false) => side.iter().map(|s| !s).collect(),
        _ => side.to_vec(),
    }
}

/// Sum of within-part weights over the number of vertex pairs in the part.
fn internal_coherence(graph: &SignedGraph, side: &[bool], which: bool) -> f64 {
    let k = side.iter().filter(|&&s| s == which).count();
    if k < 2 {
        return 0.0;
    }
    let sum: f64 = graph
        .edge_indices()
        .filter(|&((i, j), _)| side[i] == which && side[j] == which)
        .map(|(_, w)| w)
        .sum();
    sum / (k * (k - 1) / 2) as f64
}

/// Which side is accepted: the one with greater normalised internal
/// coherence, ties going to the side holding vertex 0.
fn accepted_side(graph: &SignedGraph, side: &[bool]) -> bool {
    let own = side.first().copied().unwrap_or(true);
    let a = internal_coherence(graph, side, own);
    let b = internal_coherence(graph, side, !own);
    if b > a + 1e-12 {
        !own
    } else {
        own
    }
}

/// Sets `accepted` on a cut from the normalised internal coherence of its parts.
pub fn label_parts(graph: &SignedGraph, cut: &Cut) -> Result<Cut> {
    let side = graph.membership(&cut.part)?;
    Ok(Cut::from_side(graph, &side))
}

fn check_exact_size(graph: &SignedGraph, limit: usize, what: &'static str) -> Result<()> {
    if graph.len() > limit {
        return Err(Error::Capacity {
            what,
            size: graph.len(),
            limit,
            hint: Some("use the greedy or anneal method"),
        });
    }
    Ok(())
}

/// `true` if sorted member list of `a` precedes that of `b` (both contain bit 0).
fn mask_lex_less(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let low = diff.trailing_zeros();
    let above = |m: u32| low < 31 && m >> (low + 1) != 0;
    if a >> low & 1 == 1 {
        above(b)
    } else {
        !above(a)
    }
}

fn better(candidate: (f64, u32), best: (f64, u32)) -> bool {
    candidate.0 > best.0 + TIE_EPS || (candidate.0 >= best.0 - TIE_EPS && mask_lex_less(candidate.1, best.1))
}

fn side_of_mask(n: usize, mask: u32) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

/// Exhaustive maximisation over all `2^(n-1)` cuts with vertex 0 pinned,
/// walked in Gray-code order so each step flips one vertex. Ties go to the
/// lexicographically smallest part.
pub fn max_cut_exact(graph: &SignedGraph, exec: Exec) -> Result<Cut> {
    check_exact_size(graph, EXACT_LIMIT, "exact max-cut")?;
    let n = graph.len();
    if n <= 1 {
        return Ok(Cut::from_side(graph, &vec![true; n]));
    }
    let adj = graph.adjacency();
    let states = 1u64 << (n - 1);
    let ranges = chunks(states, chunk_count(exec));
    let bests = exec.map(&ranges, |r| {
        let gray = |i: u64| (i ^ (i >> 1)) as u32;
        let mut mask = 1 | (gray(r.start) << 1);
        let mut coh = graph.coherence_of(&side_of_mask(n, mask));
        let mut best = (coh, mask);
        for i in r.start + 1..r.end {
            let v = i.trailing_zeros() as usize + 1;
            let in_v = mask >> v & 1;
            let delta: f64 = adj[v]
                .iter()
                .map(|&(u, w)| if (mask >> u & 1) != in_v { w } else { -w })
                .sum();
            coh += delta;
            mask ^= 1 << v;
            if better((coh, mask), best) {
                best = (coh, mask);
            }
        }
        best
    });
    let mut best = bests[0];
    for &b in &bests[1..] {
        if better(b, best) {
            best = b;
        }
    }
    Ok(Cut::from_side(graph, &side_of_mask(n, best.1)))
}

fn flip_gain(adj: &[Vec<(usize, f64)>], side: &[bool], v: usize) -> f64 {
    adj[v]
        .iter()
        .map(|&(u, w)| if side[u] != side[v] { w } else { -w })
        .sum()
}

/// Best of `restarts` runs of first-improvement local search from random
/// bipartitions. Restart `r` draws from stream `r` of the seeded generator.
pub fn max_cut_greedy(graph: &SignedGraph, seed: u64, restarts: usize, exec: Exec) -> Result<Cut> {
    if restarts == 0 {
        return Err(Error::invalid("greedy max-cut needs at least one restart"));
    }
    let n = graph.len();
    let adj = graph.adjacency();
    let runs: Vec<u64> = (0..restarts as u64).collect();
    let results = exec.map(&runs, |&r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r);
        let mut side: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        while let Some(v) = (0..n).find(|&v| flip_gain(&adj, &side, v) > TIE_EPS) {
            side[v] = !side[v];
        }
        normalise(&side)
    });
    Ok(best_of(graph, results))
}

fn best_of(graph: &SignedGraph, sides: Vec<Vec<bool>>) -> Cut {
    let mut best: Option<(f64, Vec<bool>)> = None;
    for s in sides {
        let coh = graph.coherence_of(&s);
        let replace = match &best {
            None => true,
            Some((bc, bs)) => coh > bc + TIE_EPS || (coh >= bc - TIE_EPS && lex_less_sides(&s, bs)),
        };
        if replace {
            best = Some((coh, s));
        }
    }
    let (_, side) = best.expect("at least one candidate");
    Cut::from_side(graph, &side)
}

fn lex_less_sides(a: &[bool], b: &[bool]) -> bool {
    let la: Vec<usize> = (0..a.len()).filter(|&i| a[i]).collect();
    let lb: Vec<usize> = (0..b.len()).filter(|&i| b[i]).collect();
    la < lb
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t0: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl AnnealSchedule {
    /// `t0 = max|w| * |V|`, `t_end = 1e-3`, `steps = 200 * |V|^2`.
    pub fn default_for(graph: &SignedGraph) -> Self {
        let max_w = graph.edge_indices().map(|(_, w)| w.abs()).fold(0.0, f64::max);
        let n = graph.len();
        Self {
            t0: (max_w * n as f64).max(1e-3),
            t_end: 1e-3,
            steps: (200 * n * n).max(1),
        }
    }

    pub fn temperature(&self, k: usize) -> f64 {
        if self.steps <= 1 || self.t0 == self.t_end || self.t0 <= 0.0 || self.t_end <= 0.0 {
            return if k + 1 >= self.steps { self.t_end } else { self.t0 };
        }
        let frac = k as f64 / (self.steps - 1) as f64;
        self.t0 * (self.t_end / self.t0).powf(frac)
    }
}

/// Single-vertex-flip Metropolis annealing with geometric cooling; returns
/// the best cut seen.
pub fn max_cut_anneal(graph: &SignedGraph, schedule: AnnealSchedule, seed: u64) -> Result<Cut> {
    if schedule.steps == 0 {
        return Err(Error::invalid("annealing needs at least one step"));
    }
    if !(schedule.t0 >= 0.0 && schedule.t_end >= 0.0) {
        return Err(Error::invalid("annealing temperatures must be non-negative"));
    }
    let n = graph.len();
    if n == 0 {
        return Ok(Cut::from_side(graph, &[]));
    }
    let adj = graph.adjacency();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut side: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut coh = graph.coherence_of(&side);
    let mut best = (coh, side.clone());
    for k in 0..schedule.steps {
        let t = schedule.temperature(k);
        let v = rng.gen_range(0..n);
        let delta = flip_gain(&adj, &side, v);
        let accept = delta >= 0.0 || (t > 0.0 && rng.gen::<f64>() < (delta / t).exp());
        if accept {
            side[v] = !side[v];
            coh += delta;
            if coh > best.0 + TIE_EPS {
                best = (coh, side.clone());
            }
        }
    }
    Ok(Cut::from_side(graph, &best.1))
}

/// Per-vertex probability of lying in the accepted part under the Gibbs
/// measure `exp(coherence / temperature)` over unordered bipartitions.
pub fn acceptance_probabilities(graph: &SignedGraph, temperature: f64, exec: Exec) -> Result<BTreeMap<String, f64>> {
    check_exact_size(graph, GIBBS_LIMIT, "Gibbs acceptance enumeration")?;
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::invalid(format!("temperature must be positive, got {temperature}")));
    }
    let n = graph.len();
    if n == 0 {
        return Ok(BTreeMap::new());
    }
    let states = 1u64 << (n - 1);
    let ranges = chunks(states, chunk_count(exec));
    let side_of = |s: u64| side_of_mask(n, 1 | ((s as u32) << 1));

    let top = exec
        .map(&ranges, |r| {
            r.clone()
                .map(|s| graph.coherence_of(&side_of(s)))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);

    let partials = exec.map(&ranges, |r| {
        let mut z = 0.0;
        let mut mass = vec![0.0; n];
        for s in r.clone() {
            let side = side_of(s);
            let w = ((graph.coherence_of(&side) - top) / temperature).exp();
            let acc = accepted_side(graph, &side);
            z += w;
            for (m, &sv) in mass.iter_mut().zip(&side) {
                if sv == acc {
                    *m += w;
                }
            }
        }
        (z, mass)
    });
    let mut z = 0.0;
    let mut mass = vec![0.0; n];
    for (pz, pm) in partials {
        z += pz;
        for (m, x) in mass.iter_mut().zip(pm) {
            *m += x;
        }
    }
    Ok(graph
        .vertices()
        .iter()
        .cloned()
        .zip(mass.into_iter().map(|m| m / z))
        .collect())
}

/// A graph as the linear system `Bx = c` over GF(2): one row per edge with
/// ones at both endpoint columns; `c` is 1 exactly for negative edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorSatInstance {
    pub incidence: Vec<Vec<u8>>,
    pub rhs: Vec<u8>,
    pub row_order: Vec<(String, String)>,
    pub column_order: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorSatCount {
    pub satisfied: usize,
    pub unsatisfied: usize,
}

/// Rows in lexicographic edge order.
pub fn to_xorsat(graph: &SignedGraph) -> Result<XorSatInstance> {
    let rows: Vec<(String, String)> = graph.edges().map(|(u, v, _)| (u.to_string(), v.to_string())).collect();
    let rows: Vec<(&str, &str)> = rows.iter().map(|(u, v)| (u.as_str(), v.as_str())).collect();
    to_xorsat_with_rows(graph, &rows)
}

/// Rows in the given order, which must list every edge exactly once.
pub fn to_xorsat_with_rows(graph: &SignedGraph, rows: &[(&str, &str)]) -> Result<XorSatInstance> {
    graph.ensure_signed()?;
    if rows.len() != graph.edge_count() {
        return Err(Error::invalid(format!(
            "row order lists {} edges, graph has {}",
            rows.len(),
            graph.edge_count()
        )));
    }
    let n = graph.len();
    let mut seen = std::collections::BTreeSet::new();
    let mut incidence = Vec::with_capacity(rows.len());
    let mut rhs = Vec::with_capacity(rows.len());
    for &(u, v) in rows {
        let i = graph.index_of(u).ok_or_else(|| Error::UnknownVertex(u.to_string()))?;
        let j = graph.index_of(v).ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
        let w = graph.weight_idx(i, j);
        if w == 0.0 || !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::invalid(format!("row ({u}, {v}) is not a distinct edge")));
        }
        let mut row = vec![0u8; n];
        row[i] = 1;
        row[j] = 1;
        incidence.push(row);
        rhs.push(u8::from(w < 0.0));
    }
    Ok(XorSatInstance {
        incidence,
        rhs,
        row_order: rows.iter().map(|&(u, v)| (u.to_string(), v.to_string())).collect(),
        column_order: graph.vertices().to_vec(),
    })
}

impl XorSatInstance {
    /// The incidence matrix as rows of `0`/`1` digits.
    pub fn matrix_text(&self) -> String {
        self.incidence
            .iter()
            .map(|r| r.iter().map(|b| char::from(b'0' + b)).collect::<String>() + "\n")
            .collect()
    }

    /// Plain-text export: a comment naming the columns, then one `u v rhs` line per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("c columns {}\n", self.column_order.join(" "));
        writeln!(s, "p xorsat {} {}", self.column_order.len(), self.rhs.len()).unwrap();
        for ((u, v), c) in self.row_order.iter().zip(&self.rhs) {
            writeln!(s, "{u} {v} {c}").unwrap();
        }
        s
    }

    /// Rebuilds the signed graph the instance encodes.
    pub fn to_graph(&self) -> Result<SignedGraph> {
        let mut g = SignedGraph::new(self.column_order.iter().cloned())?;
        for ((u, v), &c) in self.row_order.iter().zip(&self.rhs) {
            g.add_edge(u, v, if c == 1 { -1.0 } else { 1.0 })?;
        }
        Ok(g)
    }
}

pub fn xorsat_objective(instance: &XorSatInstance, assignment: &[bool]) -> Result<XorSatCount> {
    if assignment.len() != instance.column_order.len() {
        return Err(Error::invalid(format!(
            "assignment has {} entries, instance has {} columns",
            assignment.len(),
            instance.column_order.len()
        )));
    }
    let satisfied = instance
        .incidence
        .iter()
        .zip(&instance.rhs)
        .filter(|(row, &c)| {
            let parity = row
                .iter()
                .zip(assignment)
                .filter(|(&b, &x)| b == 1 && x)
                .count()
                % 2;
            parity == usize::from(c)
        })
        .count();
    Ok(XorSatCount {
        satisfied,
        unsatisfied: instance.rhs.len() - satisfied,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Exact,
    Greedy,
    Anneal,
}

impl std::str::FromStr for SolveMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolveMethod::Exact),
            "greedy" => Ok(SolveMethod::Greedy),
            "anneal" => Ok(SolveMethod::Anneal),
            _ => Err(Error::invalid(format!("unknown solve method `{s}`"))),
        }
    }
}

/// Default restart count for [`solve`] with the greedy method.
pub const GREEDY_RESTARTS: usize = 64;

pub fn solve(graph: &SignedGraph, method: SolveMethod, seed: u64, exec: Exec) -> Result<Cut> {
    match method {
        SolveMethod::Exact => max_cut_exact(graph, exec),
        SolveMethod::Greedy => max_cut_greedy(graph, seed, GREEDY_RESTARTS, exec),
        SolveMethod::Anneal => max_cut_anneal(graph, AnnealSchedule::default_for(graph), seed),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::Rng;
    use crate::cover::tests::{five_vertex, random_graph};
    use crate::graph::tests::triangle;
    use proptest::prelude::*;

    pub(crate) fn melian() -> SignedGraph {
        let text = include_str!("../tests/fixtures/melian.json");
        SignedGraph::from_json_str(text).unwrap()
    }

    /// Best coherence by plain enumeration of every side vector.
    fn brute_optimum(g: &SignedGraph) -> f64 {
        let n = g.len();
        (0u32..1 << n)
            .map(|m| g.coherence_of(&side_of_mask(n, m)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn weighted_random(n: usize, rng: &mut impl Rng) -> SignedGraph {
        let mut g = random_graph(n, 0.6, rng);
        let edges: Vec<(usize, usize)> = g.edge_indices().map(|(k, _)| k).collect();
        for (i, j) in edges {
            let w = (rng.gen_range(-10i32..=10) as f64) / 10.0;
            g.set_weight_idx(i, j, w);
        }
        g
    }

    #[test]
    fn triangle_exact() {
        let cut = max_cut_exact(&triangle(), Exec::Sequential).unwrap();
        assert_eq!(cut.part, vec!["a", "b"]);
        assert_eq!(cut.coherence, 2.0);
        assert_eq!(cut.accepted, vec!["a", "b"]);
    }

    #[test]
    fn single_positive_edge_stays_uncut() {
        let g = SignedGraph::from_edges(["a", "b"], &[("a", "b", 1.0)]).unwrap();
        let cut = max_cut_exact(&g, Exec::Sequential).unwrap();
        assert_eq!((cut.part.len(), cut.coherence), (2, 0.0));
    }

    #[test]
    fn melian_optimum() {
        let g = melian();
        let cut = max_cut_exact(&g, Exec::default()).unwrap();
        let mut expected = vec!["p1", "p2", "p3", "p4", "p6", "p7", "p9"];
        expected.sort();
        assert_eq!(cut.part, expected);
        assert_eq!(cut.other_part(&g), vec!["p10", "p11", "p12", "p5", "p8"]);
        assert!((cut.coherence - 1.4).abs() < 1e-9);
        // Second best is strictly worse, so the optimum is unique.
        let n = g.len();
        let runner_up = (0u32..1 << (n - 1))
            .map(|m| 1 | (m << 1))
            .filter(|&m| {
                let side = side_of_mask(n, m);
                g.membership(&cut.part).unwrap() != side
            })
            .map(|m| g.coherence_of(&side_of_mask(n, m)))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(runner_up < cut.coherence - 1e-6);
    }

    #[test]
    fn exact_matches_brute_force_and_tie_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..150 {
            let n = rng.gen_range(1..=9);
            let g = weighted_random(n, &mut rng);
            let best = brute_optimum(&g);
            let seq = max_cut_exact(&g, Exec::Sequential).unwrap();
            let par = max_cut_exact(&g, Exec::Parallel).unwrap();
            assert!((seq.coherence - best).abs() < 1e-9);
            assert_eq!(seq, par);
            // Smallest optimal member list among all pinned cuts.
            let mut optimal: Vec<Vec<String>> = (0u32..1 << n.saturating_sub(1))
                .map(|m| side_of_mask(n, 1 | (m << 1)))
                .filter(|s| (g.coherence_of(s) - best).abs() <= TIE_EPS)
                .map(|s| (0..n).filter(|&i| s[i]).map(|i| g.label(i).to_string()).collect())
                .collect();
            optimal.sort_by(|a, b| {
                let ia: Vec<usize> = a.iter().map(|x| g.index_of(x).unwrap()).collect();
                let ib: Vec<usize> = b.iter().map(|x| g.index_of(x).unwrap()).collect();
                ia.cmp(&ib)
            });
            assert_eq!(seq.part, optimal[0]);
        }
    }

    #[test]
    fn mask_order_matches_list_order() {
        for a in (1u32..256).step_by(2) {
            for b in (1u32..256).step_by(2) {
                let la: Vec<u32> = (0..8).filter(|i| a >> i & 1 == 1).collect();
                let lb: Vec<u32> = (0..8).filter(|i| b >> i & 1 == 1).collect();
                assert_eq!(mask_lex_less(a, b), la < lb, "{a:b} {b:b}");
            }
        }
    }

    #[test]
    fn exact_rejects_oversize() {
        let g = SignedGraph::new((0..27).map(|i| format!("v{i:02}"))).unwrap();
        let err = max_cut_exact(&g, Exec::Sequential).unwrap_err();
        assert!(matches!(err, Error::Capacity { limit: 26, .. }));
        assert!(err.to_string().contains("anneal"));
    }

    #[test]
    fn greedy_examples() {
        for seed in 0..20 {
            assert_eq!(max_cut_greedy(&triangle(), seed, 1, Exec::Sequential).unwrap().coherence, 2.0);
        }
        let empty = SignedGraph::new(["a", "b", "c"]).unwrap();
        assert_eq!(max_cut_greedy(&empty, 0, 3, Exec::Sequential).unwrap().coherence, 0.0);
        assert!(max_cut_greedy(&empty, 0, 0, Exec::Sequential).is_err());
    }

    #[test]
    fn heuristics_never_beat_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut equal = 0;
        for t in 0..100 {
            let g = weighted_random(rng.gen_range(2..=12), &mut rng);
            let exact = max_cut_exact(&g, Exec::default()).unwrap().coherence;
            let greedy = max_cut_greedy(&g, t, 8, Exec::Sequential).unwrap();
            let par = max_cut_greedy(&g, t, 8, Exec::Parallel).unwrap();
            assert_eq!(greedy, par);
            let anneal = max_cut_anneal(&g, AnnealSchedule::default_for(&g), t).unwrap().coherence;
            assert!(greedy.coherence <= exact + TIE_EPS && anneal <= exact + TIE_EPS);
            equal += usize::from((greedy.coherence - exact).abs() < TIE_EPS);
        }
        assert!(equal >= 50, "greedy matched exact on {equal}/100");
    }

    #[test]
    fn anneal_examples() {
        let g = triangle();
        assert_eq!(max_cut_anneal(&g, AnnealSchedule::default_for(&g), 0).unwrap().coherence, 2.0);
        let frozen = AnnealSchedule { t0: 0.0, t_end: 0.0, steps: 500 };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in 0..20 {
            let g = weighted_random(8, &mut rng);
            // At zero temperature the walk never goes downhill, so the final
            // cut is no worse than the start and is a local optimum with high probability.
            let cut = max_cut_anneal(&g, frozen, s).unwrap();
            assert!(cut.coherence <= brute_optimum(&g) + TIE_EPS);
        }
        assert!(max_cut_anneal(&g, AnnealSchedule { t0: 1.0, t_end: 0.1, steps: 0 }, 0).is_err());
    }

    #[test]
    fn schedule_is_geometric() {
        let s = AnnealSchedule { t0: 10.0, t_end: 0.1, steps: 3 };
        assert!((s.temperature(0) - 10.0).abs() < 1e-12);
        assert!((s.temperature(1) - 1.0).abs() < 1e-12);
        assert!((s.temperature(2) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn labelling_examples() {
        let g = triangle();
        let cut = Cut { part: vec!["a".into(), "b".into()], coherence: 2.0, accepted: vec![] };
        assert_eq!(label_parts(&g, &cut).unwrap().accepted, vec!["a", "b"]);

        let pair = SignedGraph::from_edges(["a", "b"], &[("a", "b", -1.0)]).unwrap();
        let cut = Cut { part: vec!["a".into()], coherence: 0.0, accepted: vec![] };
        assert_eq!(label_parts(&pair, &cut).unwrap().accepted, vec!["a"]);

        // {a} vs {b, c} with b-c negative: the singleton scores 0 > -1.
        let g = SignedGraph::from_edges(["a", "b", "c"], &[("b", "c", -1.0)]).unwrap();
        let cut = Cut { part: vec!["b".into(), "c".into()], coherence: 0.0, accepted: vec![] };
        let labelled = label_parts(&g, &cut).unwrap();
        assert_eq!(labelled.part, vec!["a"]);
        assert_eq!(labelled.accepted, vec!["a"]);
    }

    #[test]
    fn gibbs_limits() {
        let g = triangle();
        let cold = acceptance_probabilities(&g, 1e-3, Exec::Sequential).unwrap();
        assert_eq!((cold["a"], cold["b"], cold["c"]), (1.0, 1.0, 0.0));

        // Infinite temperature: unweighted average of the labelling over all 4 bipartitions.
        let hot = acceptance_probabilities(&g, 1e12, Exec::Sequential).unwrap();
        let mut avg = [0.0; 3];
        for m in 0u32..4 {
            let side = side_of_mask(3, 1 | (m << 1));
            let acc = accepted_side(&g, &side);
            for v in 0..3 {
                if side[v] == acc {
                    avg[v] += 0.25;
                }
            }
        }
        for (v, label) in ["a", "b", "c"].iter().enumerate() {
            assert!((hot[*label] - avg[v]).abs() < 1e-9);
        }

        assert!(acceptance_probabilities(&g, 0.0, Exec::Sequential).is_err());
        let big = SignedGraph::new((0..21).map(|i| format!("v{i:02}"))).unwrap();
        assert!(acceptance_probabilities(&big, 1.0, Exec::Sequential).is_err());
    }

    #[test]
    fn gibbs_symmetric_graph_is_uniform() {
        // Triangles with uniform signs are vertex transitive and never tie under the labelling.
        for w in [1.0, -1.0] {
            let g = SignedGraph::from_edges(["a", "b", "c"], &[("a", "b", w), ("a", "c", w), ("b", "c", w)]).unwrap();
            for t in [0.3, 1.0, 5.0] {
                let p = acceptance_probabilities(&g, t, Exec::Parallel).unwrap();
                assert!((p["a"] - p["b"]).abs() < 1e-12 && (p["b"] - p["c"]).abs() < 1e-12, "{p:?}");
            }
        }
        // A negative 4-cycle: the tie rule favours a's side, but b and d stay interchangeable.
        let g = SignedGraph::from_edges(
            ["a", "b", "c", "d"],
            &[("a", "b", -1.0), ("b", "c", -1.0), ("c", "d", -1.0), ("a", "d", -1.0)],
        )
        .unwrap();
        for t in [0.3, 1.0, 5.0] {
            let p = acceptance_probabilities(&g, t, Exec::Parallel).unwrap();
            let seq = acceptance_probabilities(&g, t, Exec::Sequential).unwrap();
            assert!((p["b"] - p["d"]).abs() < 1e-12);
            for (k, v) in &p {
                assert!((0.0..=1.0).contains(v));
                assert!((v - seq[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn five_vertex_incidence_matrix() {
        let g = five_vertex();
        let rows = [("a", "b"), ("b", "c"), ("b", "d"), ("b", "e"), ("c", "d"), ("d", "e"), ("e", "a")];
        let inst = to_xorsat_with_rows(&g, &rows).unwrap();
        assert_eq!(inst.matrix_text(), "11000\n01100\n01010\n01001\n00110\n00011\n10001\n");
        assert_eq!(inst.rhs, vec![1, 0, 1, 0, 0, 1, 0]);
        assert!(to_xorsat_with_rows(&g, &rows[..6]).is_err());
        let single = SignedGraph::from_edges(["a", "b"], &[("a", "b", 1.0)]).unwrap();
        let inst = to_xorsat(&single).unwrap();
        assert_eq!((inst.incidence.clone(), inst.rhs.clone()), (vec![vec![1, 1]], vec![0]));
        assert_eq!(inst.to_text(), "c columns a b\np xorsat 2 1\na b 0\n");
    }

    #[test]
    fn xorsat_examples() {
        let g = five_vertex();
        let inst = to_xorsat(&g).unwrap();
        let side = g.membership(&["a", "b"]).unwrap();
        let count = xorsat_objective(&inst, &side).unwrap();
        let coh = g.coherence_of(&side);
        assert_eq!(count.satisfied as f64, coh + g.positive_edge_count() as f64);
        let zeros = vec![false; 5];
        assert_eq!(xorsat_objective(&inst, &zeros).unwrap().unsatisfied, g.negative_edge_count());
        let flipped: Vec<bool> = side.iter().map(|s| !s).collect();
        assert_eq!(xorsat_objective(&inst, &flipped).unwrap(), count);
        assert!(xorsat_objective(&inst, &[true]).is_err());
    }

    #[test]
    fn xorsat_identity_and_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..60 {
            let n = rng.gen_range(2..=8);
            let g = random_graph(n, rng.gen_range(0.2..1.0), &mut rng);
            let inst = to_xorsat(&g).unwrap();
            assert_eq!(inst.to_graph().unwrap(), g);
            let mut best_coh = f64::NEG_INFINITY;
            let mut best_sat = 0;
            for m in 0u32..1 << (n - 1) {
                let side = side_of_mask(n, 1 | (m << 1));
                let coh = g.coherence_of(&side);
                let sat = xorsat_objective(&inst, &side).unwrap().satisfied;
                assert_eq!(coh, sat as f64 - g.positive_edge_count() as f64);
                best_coh = best_coh.max(coh);
                best_sat = best_sat.max(sat);
            }
            assert_eq!(best_coh, best_sat as f64 - g.positive_edge_count() as f64);
        }
    }

    #[test]
    fn cut_json_shape() {
        let cut = max_cut_exact(&triangle(), Exec::Sequential).unwrap();
        let v = serde_json::to_value(&cut).unwrap();
        assert_eq!(v, serde_json::json!({"part": ["a", "b"], "coherence": 2.0, "accepted": ["a", "b"]}));
    }

    proptest! {
        #[test]
        fn exact_is_relabelling_invariant(seed in any::<u64>(), n in 2usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = weighted_random(n, &mut rng);
            // Reverse the label order: vertex i becomes w{n-1-i}.
            let relabel = |i: usize| format!("w{}", n - 1 - i);
            let mut h = SignedGraph::new((0..n).map(relabel)).unwrap();
            for ((i, j), w) in g.edge_indices() {
                h.add_edge(&relabel(i), &relabel(j), w).unwrap();
            }
            let a = max_cut_exact(&g, Exec::Sequential).unwrap().coherence;
            let b = max_cut_exact(&h, Exec::Sequential).unwrap().coherence;
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
