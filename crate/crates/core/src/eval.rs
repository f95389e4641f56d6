//! Parsing, correcting and scoring reconstructed graphs.
//!
//! Responses are expected to contain a Python-style list of
//! `(name, name, weight)` triples. In benchmark mode the prompt asks for
//! weight 1 on inconsistent pairs and 0 on consistent ones, which is the
//! reverse of the signed convention used everywhere else; the conversion
//! happens here and nowhere else.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::{BenchmarkProblem, Sparsity};
use crate::graph::{l1_distance, SignedGraph};
use crate::model::Regime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Prompt weights: `>= 0.5` inconsistent (-1), otherwise consistent (+1).
    Benchmark,
    /// Ratings 0..=10 mapped to `(r - 5) / 5`, clamped to [-1, 1].
    Practical,
}

impl WeightMode {
    pub fn convert(self, w: f64) -> f64 {
        match self {
            WeightMode::Benchmark => {
                if w >= 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            WeightMode::Practical => ((w - 5.0) / 5.0).clamp(-1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEdge {
    pub u: String,
    pub v: String,
    pub w: f64,
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// A quoted string (single, double or typographic quotes) or a bare token
    /// ending at a top-level `,`, `)` or `]`.
    fn item(&mut self) -> Option<String> {
        self.skip_ws();
        let rest = std::str::from_utf8(&self.s[self.pos..]).ok()?;
        let first = rest.chars().next()?;
        let close = match first {
            '\'' | '"' | '`' => Some(first),
            '\u{2018}' => Some('\u{2019}'),
            '\u{201c}' => Some('\u{201d}'),
            _ => None,
        };
        if let Some(close) = close {
            let body = &rest[first.len_utf8()..];
            let end = body.find(close)?;
            self.pos += first.len_utf8() + end + close.len_utf8();
            return Some(body[..end].to_string());
        }
        let mut depth = 0i32;
        let mut end = rest.len();
        for (i, c) in rest.char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth > 0 => depth -= 1,
                ',' | ')' | ']' | '\n' if depth == 0 => {
                    end = i;
                    break;
                }
                _ => {}
            }
        }
        let token = rest[..end].trim();
        if token.is_empty() {
            return None;
        }
        self.pos += end;
        Some(token.to_string())
    }

    fn triple(&mut self) -> Option<(String, String, f64)> {
        let open = if self.eat(b'(') {
            b')'
        } else if self.eat(b'[') {
            b']'
        } else {
            return None;
        };
        let u = self.item()?;
        if !self.eat(b',') {
            return None;
        }
        let v = self.item()?;
        if !self.eat(b',') {
            return None;
        }
        let w: f64 = self.item()?.trim().parse().ok()?;
        if !w.is_finite() {
            return None;
        }
        self.eat(b',');
        self.eat(open).then_some((u, v, w))
    }

    fn list(&mut self) -> Option<Vec<(String, String, f64)>> {
        if !self.eat(b'[') {
            return None;
        }
        let mut out = Vec::new();
        if self.eat(b']') {
            return Some(out);
        }
        loop {
            out.push(self.triple()?);
            if self.eat(b']') {
                return Some(out);
            }
            if !self.eat(b',') {
                return None;
            }
            if self.eat(b']') {
                return Some(out);
            }
        }
    }
}

/// Extracts the first bracketed list of `(name, name, number)` triples and
/// converts weights per `mode`.
pub fn parse_edge_list(text: &str, mode: WeightMode) -> Result<Vec<RawEdge>> {
    for (i, _) in text.match_indices('[') {
        let mut c = Cursor { s: text.as_bytes(), pos: i };
        if let Some(triples) = c.list() {
            return Ok(triples
                .into_iter()
                .map(|(u, v, w)| RawEdge { u, v, w: mode.convert(w) })
                .collect());
        }
    }
    Err(Error::Parse("no list of (name, name, weight) triples found".into()))
}

/// Renders edges in the benchmark response format, mapping signed weights
/// back to prompt weights (-1 to 1, +1 to 0).
pub fn render_benchmark_edge_list(graph: &SignedGraph) -> String {
    let items: Vec<String> = graph
        .edges()
        .map(|(u, v, w)| format!("('{u}', '{v}', {})", if w < 0.0 { 1 } else { 0 }))
        .collect();
    format!("[{}]", items.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    RenamedNodes,
    CaseFixed,
    MissingVertices,
    Hallucinated,
    ParseFailed,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::RenamedNodes => "renamed_nodes",
            Flag::CaseFixed => "case_fixed",
            Flag::MissingVertices => "missing_vertices",
            Flag::Hallucinated => "hallucinated",
            Flag::ParseFailed => "parse_failed",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Removes `Proposition(x)` and `(x)` wrappers; returns whether any were removed.
fn strip_wrappers(name: &str) -> (String, bool) {
    let mut s = name.trim().to_string();
    let mut changed = false;
    loop {
        let lower = s.to_ascii_lowercase();
        let inner = if lower.starts_with("proposition(") && s.ends_with(')') {
            Some(s["proposition(".len()..s.len() - 1].trim().to_string())
        } else if s.starts_with('(') && s.ends_with(')') && s.len() >= 2 {
            Some(s[1..s.len() - 1].trim().to_string())
        } else {
            None
        };
        match inner {
            Some(i) if !i.is_empty() => {
                s = i;
                changed = true;
            }
            _ => return (s, changed),
        }
    }
}

/// Maps raw names onto `universe`, flagging every correction. Edges naming
/// an unknown vertex are dropped and flagged as hallucinated; self-loops are
/// dropped; for repeated pairs the first weight wins.
pub fn postprocess(raw: &[RawEdge], universe: &[String]) -> Result<(SignedGraph, BTreeSet<Flag>)> {
    let mut graph = SignedGraph::new(universe.iter().cloned())?;
    let mut flags = BTreeSet::new();
    let mut by_lower: BTreeMap<String, Vec<&String>> = BTreeMap::new();
    for v in universe {
        by_lower.entry(v.to_lowercase()).or_default().push(v);
    }
    let resolve = |name: &str, flags: &mut BTreeSet<Flag>| -> Option<String> {
        let (stripped, renamed) = strip_wrappers(name);
        if renamed {
            flags.insert(Flag::RenamedNodes);
        }
        if graph.index_of(&stripped).is_some() {
            return Some(stripped);
        }
        match by_lower.get(&stripped.to_lowercase()).map(Vec::as_slice) {
            Some([unique]) => {
                flags.insert(Flag::CaseFixed);
                Some((*unique).clone())
            }
            _ => {
                flags.insert(Flag::Hallucinated);
                None
            }
        }
    };
    let mut kept = Vec::new();
    let mut mentioned = BTreeSet::new();
    for e in raw {
        let u = resolve(&e.u, &mut flags);
        let v = resolve(&e.v, &mut flags);
        for name in u.iter().chain(v.iter()) {
            mentioned.insert(name.clone());
        }
        if let (Some(u), Some(v)) = (u, v) {
            kept.push((u, v, e.w));
        }
    }
    for (u, v, w) in kept {
        if u == v {
            continue;
        }
        let (i, j) = (graph.index_of(&u).unwrap(), graph.index_of(&v).unwrap());
        if !graph.has_edge_idx(i, j) {
            graph.set_weight_idx(i, j, w.clamp(-1.0, 1.0));
        }
    }
    if universe.iter().any(|v| !mentioned.contains(v)) {
        flags.insert(Flag::MissingVertices);
    }
    Ok((graph, flags))
}

/// Counts over unordered vertex pairs, indexed `[true][predicted]` with
/// labels -1, 0, +1 at positions 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion(pub [[u64; 3]; 3]);

fn label_index(w: f64) -> usize {
    if w > 0.0 {
        2
    } else if w < 0.0 {
        0
    } else {
        1
    }
}

impl Confusion {
    pub fn between(truth: &SignedGraph, predicted: &SignedGraph) -> Result<Self> {
        truth.ensure_same_vertices(predicted)?;
        let mut m = [[0u64; 3]; 3];
        let n = truth.len();
        for i in 0..n {
            for j in i + 1..n {
                m[label_index(truth.weight_idx(i, j))][label_index(predicted.weight_idx(i, j))] += 1;
            }
        }
        Ok(Self(m))
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|k| self.0[k][k]).sum()
    }

    /// Micro-averaged F1 from pooled per-class TP, FP and FN. With no pairs
    /// at all the score is 1.
    pub fn micro_f1(&self) -> f64 {
        let tp = self.trace();
        let fp: u64 = (0..3)
            .map(|c| (0..3).filter(|&t| t != c).map(|t| self.0[t][c]).sum::<u64>())
            .sum();
        let fn_: u64 = (0..3)
            .map(|c| (0..3).filter(|&p| p != c).map(|p| self.0[c][p]).sum::<u64>())
            .sum();
        if tp + fp + fn_ == 0 {
            return 1.0;
        }
        if tp == 0 {
            return 0.0;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / (tp + fn_) as f64;
        2.0 * precision * recall / (precision + recall)
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            1.0
        } else {
            self.trace() as f64 / total as f64
        }
    }
}

pub fn micro_f1(truth: &SignedGraph, predicted: &SignedGraph) -> Result<f64> {
    Ok(Confusion::between(truth, predicted)?.micro_f1())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub problem_id: String,
    pub model_id: String,
    pub regime: Regime,
    pub sparsity: Sparsity,
    pub confusion: Confusion,
    pub micro_f1: f64,
    pub l1_normalized: f64,
    pub flags: BTreeSet<Flag>,
    /// Hallucinated attempts are kept for inspection but left out of aggregates.
    pub excluded: bool,
}

/// Result of scoring one response against a truth graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub predicted: SignedGraph,
    pub confusion: Confusion,
    pub micro_f1: f64,
    pub l1_normalized: f64,
    pub flags: BTreeSet<Flag>,
}

/// Parses, corrects and scores one response. An unparsable response is
/// scored as an empty prediction with micro F1 fixed at 0.
pub fn score_text(truth: &SignedGraph, text: &str, mode: WeightMode) -> Result<Scored> {
    let (predicted, flags, parsed) = match parse_edge_list(text, mode) {
        Ok(raw) => {
            let (g, flags) = postprocess(&raw, truth.vertices())?;
            (g, flags, true)
        }
        Err(_) => {
            let g = SignedGraph::new(truth.vertices().iter().cloned())?;
            (g, BTreeSet::from([Flag::ParseFailed]), false)
        }
    };
    let confusion = Confusion::between(truth, &predicted)?;
    Ok(Scored {
        micro_f1: if parsed { confusion.micro_f1() } else { 0.0 },
        l1_normalized: l1_distance(truth, &predicted, true)?,
        predicted,
        confusion,
        flags,
    })
}

pub fn score_attempt(problem: &BenchmarkProblem, regime: Regime, response_text: &str, model_id: &str) -> Result<ReconstructionReport> {
    let s = score_text(&problem.graph, response_text, WeightMode::Benchmark)?;
    Ok(ReconstructionReport {
        problem_id: problem.id.clone(),
        model_id: model_id.to_string(),
        regime,
        sparsity: problem.meta.sparsity,
        confusion: s.confusion,
        micro_f1: s.micro_f1,
        l1_normalized: s.l1_normalized,
        excluded: s.flags.contains(&Flag::Hallucinated),
        flags: s.flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub sd: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(Self { mean, sd })
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ± {:.3}", self.mean, self.sd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model_id: String,
    pub sparsity: Sparsity,
    pub regime: Regime,
    pub n: usize,
    pub micro_f1: Stat,
    pub l1_normalized: Stat,
}

/// Mean and sample sd per (model, sparsity, regime); excluded reports are
/// skipped and cells without reports produce no row.
pub fn aggregate(reports: &[ReconstructionReport]) -> Vec<SummaryRow> {
    // (F1 values, L1 values) per cell.
    type Cell = (Vec<f64>, Vec<f64>);
    let mut cells: BTreeMap<(String, Sparsity, Regime), Cell> = BTreeMap::new();
    for r in reports.iter().filter(|r| !r.excluded) {
        let cell = cells.entry((r.model_id.clone(), r.sparsity, r.regime)).or_default();
        cell.0.push(r.micro_f1);
        cell.1.push(r.l1_normalized);
    }
    cells
        .into_iter()
        .map(|((model_id, sparsity, regime), (f1, l1))| SummaryRow {
            model_id,
            sparsity,
            regime,
            n: f1.len(),
            micro_f1: Stat::of(&f1).expect("non-empty cell"),
            l1_normalized: Stat::of(&l1).expect("non-empty cell"),
        })
        .collect()
}

fn flags_text(flags: &BTreeSet<Flag>) -> String {
    flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(";")
}

pub fn write_reports_csv<W: Write>(out: W, reports: &[ReconstructionReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["problem_id", "model_id", "regime", "sparsity", "micro_f1", "l1_normalized", "flags", "excluded"])?;
    for r in reports {
        w.write_record([
            r.problem_id.as_str(),
            r.model_id.as_str(),
            r.regime.as_str(),
            r.sparsity.as_str(),
            &r.micro_f1.to_string(),
            &r.l1_normalized.to_string(),
            &flags_text(&r.flags),
            if r.excluded { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per (model, sparsity) with a `mean ± sd` micro F1 column per regime.
pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["model", "sparsity"];
    header.extend(Regime::ALL.iter().map(|r| r.as_str()));
    w.write_record(&header)?;
    let mut table: BTreeMap<(String, Sparsity), BTreeMap<Regime, Stat>> = BTreeMap::new();
    for r in rows {
        table
            .entry((r.model_id.clone(), r.sparsity))
            .or_default()
            .insert(r.regime, r.micro_f1);
    }
    for ((model, sparsity), cells) in table {
        let mut record = vec![model, sparsity.to_string()];
        record.extend(
            Regime::ALL
                .iter()
                .map(|r| cells.get(r).map(Stat::to_string).unwrap_or_default()),
        );
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Every aggregate statistic, one row per cell.
pub fn write_summary_long_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "model", "sparsity", "regime", "n", "micro_f1_mean", "micro_f1_sd", "l1_mean", "l1_sd",
    ])?;
    for r in rows {
        w.write_record([
            r.model_id.clone(),
            r.sparsity.to_string(),
            r.regime.to_string(),
            r.n.to_string(),
            r.micro_f1.mean.to_string(),
            r.micro_f1.sd.to_string(),
            r.l1_normalized.mean.to_string(),
            r.l1_normalized.sd.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::tests::{five_vertex, random_graph};
    use crate::graph::tests::triangle;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn universe(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_prompt_exemplar() {
        let e = parse_edge_list("[('b','c',0), ('b','e',0)]", WeightMode::Benchmark).unwrap();
        assert_eq!(
            e,
            vec![
                RawEdge { u: "b".into(), v: "c".into(), w: 1.0 },
                RawEdge { u: "b".into(), v: "e".into(), w: 1.0 }
            ]
        );
        let e = parse_edge_list("[('a', 'b', 1)]", WeightMode::Benchmark).unwrap();
        assert_eq!(e[0].w, -1.0);
        assert!(parse_edge_list("[]", WeightMode::Benchmark).unwrap().is_empty());
    }

    #[test]
    fn tolerant_of_surroundings() {
        let text = "Sure! Here is the graph [as requested]:\n```python\n[(\"a\", \"b\", 1),\n ( 'b' , 'c' , 0 ), ]\n```\nDone.";
        let e = parse_edge_list(text, WeightMode::Benchmark).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!((e[1].u.as_str(), e[1].v.as_str(), e[1].w), ("b", "c", 1.0));
        let e = parse_edge_list("[(a, Proposition(b), 0)]", WeightMode::Benchmark).unwrap();
        assert_eq!(e[0].v, "Proposition(b)");
        let e = parse_edge_list("[['a', 'b', 0.0]]", WeightMode::Benchmark).unwrap();
        assert_eq!(e.len(), 1);
        assert!(parse_edge_list("I could not determine the graph.", WeightMode::Benchmark).is_err());
        assert!(parse_edge_list("[('a', 'b')]", WeightMode::Benchmark).is_err());
    }

    #[test]
    fn practical_ratings() {
        let e = parse_edge_list("[('p1','p2',10), ('p1','p3',0), ('p2','p3',5)]", WeightMode::Practical).unwrap();
        assert_eq!(e.iter().map(|x| x.w).collect::<Vec<_>>(), vec![1.0, -1.0, 0.0]);
        assert_eq!(WeightMode::Practical.convert(8.0), 0.6);
        assert_eq!(WeightMode::Practical.convert(12.0), 1.0);
    }

    #[test]
    fn postprocess_corrections() {
        let u = universe(&["a", "b", "c"]);
        let raw = |pairs: &[(&str, &str)]| -> Vec<RawEdge> {
            pairs.iter().map(|(x, y)| RawEdge { u: x.to_string(), v: y.to_string(), w: 1.0 }).collect()
        };

        let (g, flags) = postprocess(&raw(&[("Proposition(a)", "b"), ("b", "(c)")]), &u).unwrap();
        assert_eq!(flags, BTreeSet::from([Flag::RenamedNodes]));
        assert_eq!(g.edge_count(), 2);

        let (g, flags) = postprocess(&raw(&[("A", "b"), ("b", "c")]), &u).unwrap();
        assert_eq!(flags, BTreeSet::from([Flag::CaseFixed]));
        assert_eq!(g.weight("a", "b").unwrap(), 1.0);

        let (g, flags) = postprocess(&raw(&[("a", "z9"), ("b", "c")]), &u).unwrap();
        assert_eq!(flags, BTreeSet::from([Flag::Hallucinated]));
        assert_eq!(g.edge_count(), 1);

        let (g, flags) = postprocess(&raw(&[("a", "b")]), &u).unwrap();
        assert_eq!(flags, BTreeSet::from([Flag::MissingVertices]));
        assert_eq!(g.degree(2), 0);

        let (g, _) = postprocess(&raw(&[("a", "a"), ("a", "b"), ("b", "c")]), &u).unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn ambiguous_case_is_hallucination() {
        let u = universe(&["A", "a", "b"]);
        let raw = vec![RawEdge { u: "a".into(), v: "B".into(), w: 1.0 }, RawEdge { u: "ɑ".into(), v: "b".into(), w: 1.0 }];
        let (_, flags) = postprocess(&raw, &u).unwrap();
        assert!(flags.contains(&Flag::CaseFixed) && flags.contains(&Flag::Hallucinated));
    }

    #[test]
    fn postprocess_is_idempotent() {
        let u = universe(&["a", "b", "c", "d"]);
        let raw = vec![
            RawEdge { u: "Proposition(A)".into(), v: "b".into(), w: -1.0 },
            RawEdge { u: "c".into(), v: "x".into(), w: 1.0 },
            RawEdge { u: "b".into(), v: "c".into(), w: 1.0 },
        ];
        let (g, _) = postprocess(&raw, &u).unwrap();
        let again: Vec<RawEdge> = g.edges().map(|(x, y, w)| RawEdge { u: x.into(), v: y.into(), w }).collect();
        let (g2, _) = postprocess(&again, &u).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn f1_examples() {
        let t = five_vertex();
        assert_eq!(micro_f1(&t, &t).unwrap(), 1.0);
        let mut dropped = t.clone();
        dropped.set_weight_idx(0, 1, 0.0);
        assert!((micro_f1(&t, &dropped).unwrap() - 0.9).abs() < 1e-15);
        let empty = SignedGraph::new(["a", "b", "c"]).unwrap();
        assert_eq!(micro_f1(&triangle(), &empty).unwrap(), 0.0);
        assert!(micro_f1(&triangle(), &t).is_err());
        let single = SignedGraph::new(["a"]).unwrap();
        assert_eq!(micro_f1(&single, &single).unwrap(), 1.0);
    }

    #[test]
    fn f1_equals_accuracy_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let n = rng.gen_range(2..=12);
            let a = random_graph(n, rng.gen_range(0.0..1.0), &mut rng);
            let b = random_graph(n, rng.gen_range(0.0..1.0), &mut rng);
            // Independent count: pairs whose sign labels agree.
            let label = |w: f64| if w > 0.0 { 1 } else if w < 0.0 { -1 } else { 0 };
            let mut agree = 0;
            for i in 0..n {
                for j in i + 1..n {
                    agree += usize::from(label(a.weight_idx(i, j)) == label(b.weight_idx(i, j)));
                }
            }
            let acc = agree as f64 / (n * (n - 1) / 2) as f64;
            let c = Confusion::between(&a, &b).unwrap();
            assert_eq!(c.total() as usize, n * (n - 1) / 2);
            assert!((c.micro_f1() - acc).abs() < 1e-12);
            assert!((c.accuracy() - acc).abs() < 1e-12);
            assert_eq!(c.micro_f1() == 1.0, a == b);
        }
    }

    #[test]
    fn scoring_pipeline() {
        let truth = five_vertex();
        let perfect = render_benchmark_edge_list(&truth);
        let s = score_text(&truth, &perfect, WeightMode::Benchmark).unwrap();
        assert_eq!((s.micro_f1, s.l1_normalized), (1.0, 0.0));
        assert!(s.flags.is_empty());

        let s = score_text(&truth, "no idea", WeightMode::Benchmark).unwrap();
        assert_eq!(s.micro_f1, 0.0);
        assert_eq!(s.flags, BTreeSet::from([Flag::ParseFailed]));
        assert!((s.l1_normalized - 0.7).abs() < 1e-12);

        // Drop every edge at c: c becomes isolated in the prediction.
        let without_c: Vec<String> = truth
            .edges()
            .filter(|(u, v, _)| *u != "c" && *v != "c")
            .map(|(u, v, w)| format!("('{u}', '{v}', {})", if w < 0.0 { 1 } else { 0 }))
            .collect();
        let s = score_text(&truth, &format!("[{}]", without_c.join(", ")), WeightMode::Benchmark).unwrap();
        assert_eq!(s.flags, BTreeSet::from([Flag::MissingVertices]));
        assert!((s.micro_f1 - 0.8).abs() < 1e-12);
        assert_eq!(s.predicted.degree(2), 0);
    }

    #[test]
    fn aggregate_examples() {
        let report = |f1: f64, excluded: bool, regime: Regime| ReconstructionReport {
            problem_id: "p".into(),
            model_id: "m".into(),
            regime,
            sparsity: Sparsity::Sparse,
            confusion: Confusion::default(),
            micro_f1: f1,
            l1_normalized: 1.0 - f1,
            flags: BTreeSet::new(),
            excluded,
        };
        let rows = aggregate(&[report(0.7, false, Regime::Low)]);
        assert_eq!(rows[0].micro_f1, Stat { mean: 0.7, sd: 0.0 });

        let rows = aggregate(&[report(0.8, false, Regime::Base), report(1.0, false, Regime::Base), report(0.0, true, Regime::Base)]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n, 2);
        assert!((rows[0].micro_f1.mean - 0.9).abs() < 1e-12);
        assert!((rows[0].micro_f1.sd - 0.141).abs() < 1e-3);
        assert_eq!(rows[0].micro_f1.to_string(), "0.900 ± 0.141");
        assert!(aggregate(&[report(0.5, true, Regime::High)]).is_empty());

        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "model,sparsity,base,zero,low,medium,high\nm,sparse,0.900 ± 0.141,,,,\n"
        );
    }

    proptest! {
        #[test]
        fn rendered_lists_round_trip(seed in any::<u64>(), n in 2usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(n, 0.5, &mut rng);
            let raw = parse_edge_list(&render_benchmark_edge_list(&g), WeightMode::Benchmark).unwrap();
            let (back, flags) = postprocess(&raw, g.vertices()).unwrap();
            prop_assert_eq!(back, g.clone());
            prop_assert!(!flags.contains(&Flag::Hallucinated));
        }
    }
}
