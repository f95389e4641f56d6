//! Proposition sets that model a signed coherence graph.
//!
//! Each vertex gets a conjunction of clauses `q is P` / `q is !P` (or, with
//! uncertainty, `q is 0.425*P`). Two formulas are inconsistent when they give
//! the same variable the same property with opposite polarity, independent
//! when they share no variable, and consistent otherwise.
//!
//! Construction: take a clique edge cover; give clique `j` the variable `qj`;
//! split the clique's negative edges into star forests and give forest `k`
//! the property with index `k`. Roots assert the property and leaves negate
//! it. Clique members touched by no star assert one extra property so that
//! they still share `qj` with the rest of the clique. A forest may only hold
//! two stars if every root of one is joined to every leaf of the other by a
//! negative edge; otherwise a positive edge inside the clique would read as
//! inconsistent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cover::{self, CoverMethod};
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::hash::derive_seed;
use crate::star::{self, SfdMethod, StarForest};

/// Degrees at or above this value count as asserted.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Base,
    Zero,
    Low,
    Medium,
    High,
}

impl Regime {
    pub const ALL: [Regime; 5] = [Regime::Base, Regime::Zero, Regime::Low, Regime::Medium, Regime::High];
    pub const FUZZY: [Regime; 4] = [Regime::Zero, Regime::Low, Regime::Medium, Regime::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Base => "base",
            Regime::Zero => "zero",
            Regime::Low => "low",
            Regime::Medium => "medium",
            Regime::High => "high",
        }
    }

    /// Inclusive degree bands in thousandths: (asserted, negated).
    /// `None` for the base regime, which carries no degrees.
    pub fn bands(self) -> Option<((u16, u16), (u16, u16))> {
        match self {
            Regime::Base => None,
            Regime::Zero => Some(((1000, 1000), (0, 0))),
            Regime::Low => Some(((750, 1000), (0, 250))),
            Regime::Medium => Some(((625, 750), (250, 375))),
            Regime::High => Some(((500, 625), (375, 499))),
        }
    }

    /// Draws one degree for a clause of the given polarity.
    pub fn sample_degree(self, polarity: Polarity, rng: &mut impl Rng) -> Option<f64> {
        let (asserted, negated) = self.bands()?;
        let (lo, hi) = match polarity {
            Polarity::Asserted => asserted,
            Polarity::Negated => negated,
        };
        Some(f64::from(rng.gen_range(lo..=hi)) / 1000.0)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown regime `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Asserted,
    Negated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub variable: String,
    pub property: String,
    pub polarity: Polarity,
    /// Fuzzy membership degree; `None` in base mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<f64>,
}

impl Clause {
    pub fn new(variable: impl Into<String>, property: impl Into<String>, polarity: Polarity) -> Self {
        Self {
            variable: variable.into(),
            property: property.into(),
            polarity,
            degree: None,
        }
    }

    /// Polarity after thresholding the degree, if any.
    pub fn effective_polarity(&self) -> Polarity {
        match self.degree {
            Some(d) if d >= THRESHOLD => Polarity::Asserted,
            Some(_) => Polarity::Negated,
            None => self.polarity,
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.degree, self.polarity) {
            (Some(d), _) => write!(f, "{} is {}*{}", self.variable, format_degree(d), self.property),
            (None, Polarity::Asserted) => write!(f, "{} is {}", self.variable, self.property),
            (None, Polarity::Negated) => write!(f, "{} is !{}", self.variable, self.property),
        }
    }
}

/// Up to three decimals with trailing zeros trimmed: `0.7`, `0.655`, `1`, `0`.
pub fn format_degree(d: f64) -> String {
    let s = format!("{d:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn render_formula(clauses: &[Clause]) -> String {
    clauses
        .iter()
        .map(Clause::to_string)
        .collect::<Vec<_>>()
        .join(" AND ")
}

fn is_property(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_digit())
}

fn parse_clause(text: &str) -> Result<Clause> {
    let err = || Error::Parse(format!("malformed clause `{text}`"));
    let (variable, body) = text.trim().split_once(" is ").ok_or_else(err)?;
    let variable = variable.trim();
    let body = body.trim();
    if variable.is_empty() || variable.contains(char::is_whitespace) {
        return Err(err());
    }
    if let Some(property) = body.strip_prefix('!') {
        if !is_property(property) {
            return Err(err());
        }
        return Ok(Clause::new(variable, property, Polarity::Negated));
    }
    if let Some((degree, property)) = body.split_once('*') {
        let d: f64 = degree.trim().parse().map_err(|_| err())?;
        if !(0.0..=1.0).contains(&d) || !is_property(property.trim()) {
            return Err(err());
        }
        let polarity = if d >= THRESHOLD { Polarity::Asserted } else { Polarity::Negated };
        return Ok(Clause {
            variable: variable.to_string(),
            property: property.trim().to_string(),
            polarity,
            degree: Some(d),
        });
    }
    if !is_property(body) {
        return Err(err());
    }
    Ok(Clause::new(variable, body, Polarity::Asserted))
}

pub fn parse_formula(text: &str) -> Result<Vec<Clause>> {
    if text.trim().is_empty() {
        return Err(Error::Parse("empty formula".into()));
    }
    text.split(" AND ").map(parse_clause).collect()
}

/// Property name for a 0-based index: `P..Z`, then `A..O`, then the same
/// letters with a numeric suffix.
pub fn property_name(k: usize) -> String {
    const LETTERS: &[u8; 26] = b"PQRSTUVWXYZABCDEFGHIJKLMNO";
    let letter = LETTERS[k % 26] as char;
    if k < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", k / 26)
    }
}

fn property_index(name: &str) -> usize {
    const LETTERS: &str = "PQRSTUVWXYZABCDEFGHIJKLMNO";
    let mut chars = name.chars();
    let letter = chars.next().and_then(|c| LETTERS.find(c)).unwrap_or(usize::MAX / 2);
    let suffix: usize = chars.as_str().parse().unwrap_or(0);
    suffix * 26 + letter
}

/// Orders `q2` before `q10`.
fn natural_key(s: &str) -> (String, u64, String) {
    let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
    let (head, tail) = s.split_at(split);
    match tail.parse::<u64>() {
        Ok(n) => (head.to_string(), n, String::new()),
        Err(_) => (head.to_string(), u64::MAX, tail.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionSet {
    pub formulas: BTreeMap<String, Vec<Clause>>,
    pub rendered: BTreeMap<String, String>,
    pub variables: Vec<String>,
    pub properties: Vec<String>,
    pub regime: Regime,
}

impl PropositionSet {
    /// Builds a set from formulas, deriving the rendered text and the
    /// variable and property lists.
    pub fn from_formulas(formulas: BTreeMap<String, Vec<Clause>>, regime: Regime) -> Self {
        let mut variables: Vec<String> = formulas
            .values()
            .flatten()
            .map(|c| c.variable.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        variables.sort_by_key(|v| natural_key(v));
        let mut properties: Vec<String> = formulas
            .values()
            .flatten()
            .map(|c| c.property.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        properties.sort_by_key(|p| (property_index(p), p.clone()));
        let rendered = formulas
            .iter()
            .map(|(v, clauses)| (v.clone(), render_formula(clauses)))
            .collect();
        Self {
            formulas,
            rendered,
            variables,
            properties,
            regime,
        }
    }

    /// Parses rendered text back into a set.
    pub fn parse(rendered: &BTreeMap<String, String>, regime: Regime) -> Result<Self> {
        let formulas = rendered
            .iter()
            .map(|(v, text)| Ok((v.clone(), parse_formula(text)?)))
            .collect::<Result<_>>()?;
        Ok(Self::from_formulas(formulas, regime))
    }

    /// Structural checks: non-empty formulas, no repeated (variable, property)
    /// within a formula, degrees consistent with polarity and regime, and
    /// rendered text matching the formulas.
    pub fn validate(&self) -> Result<()> {
        for (v, clauses) in &self.formulas {
            if clauses.is_empty() {
                return Err(Error::invalid(format!("proposition `{v}` has an empty formula")));
            }
            let mut seen = BTreeSet::new();
            for c in clauses {
                if !seen.insert((&c.variable, &c.property)) {
                    return Err(Error::invalid(format!(
                        "proposition `{v}` mentions {} with {} twice",
                        c.variable, c.property
                    )));
                }
                match (self.regime, c.degree) {
                    (Regime::Base, None) => {}
                    (Regime::Base, Some(_)) | (_, None) => {
                        return Err(Error::invalid(format!(
                            "proposition `{v}`: degree presence does not match regime {}",
                            self.regime
                        )))
                    }
                    (_, Some(_)) if c.effective_polarity() != c.polarity => {
                        return Err(Error::invalid(format!("proposition `{v}`: degree crosses the threshold")))
                    }
                    _ => {}
                }
            }
            if self.rendered.get(v).map(String::as_str) != Some(render_formula(clauses).as_str()) {
                return Err(Error::invalid(format!("proposition `{v}`: rendered text out of date")));
            }
        }
        if self.rendered.len() != self.formulas.len() {
            return Err(Error::invalid("rendered text and formulas cover different vertices"));
        }
        Ok(())
    }
}

/// Consistency of two formulas: 0 if they share no variable, -1 if some
/// shared variable carries the same property with opposite polarity, +1
/// otherwise.
pub fn consistency_oracle(a: &[Clause], b: &[Clause]) -> i8 {
    let vars_a: BTreeSet<&str> = a.iter().map(|c| c.variable.as_str()).collect();
    if !b.iter().any(|c| vars_a.contains(c.variable.as_str())) {
        return 0;
    }
    let conflict = a.iter().any(|x| {
        b.iter().any(|y| {
            x.variable == y.variable && x.property == y.property && x.effective_polarity() != y.effective_polarity()
        })
    });
    if conflict {
        -1
    } else {
        1
    }
}

/// [`consistency_oracle`] on rendered formulas.
pub fn consistency_oracle_text(a: &str, b: &str) -> Result<i8> {
    Ok(consistency_oracle(&parse_formula(a)?, &parse_formula(b)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub u: String,
    pub v: String,
    pub expected: i8,
    pub got: i8,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}): expected {}, got {}", self.u, self.v, self.expected, self.got)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub mismatches: Vec<Mismatch>,
}

/// Checks every unordered vertex pair: the oracle must return the sign of
/// the edge weight, or 0 for a non-edge.
pub fn verify_model(graph: &SignedGraph, props: &PropositionSet) -> Result<VerifyReport> {
    if props.formulas.len() != graph.len() || !graph.vertices().iter().all(|v| props.formulas.contains_key(v)) {
        return Err(Error::VertexMismatch);
    }
    let formulas: Vec<&Vec<Clause>> = graph.vertices().iter().map(|v| &props.formulas[v]).collect();
    let mut mismatches = Vec::new();
    for i in 0..graph.len() {
        for j in i + 1..graph.len() {
            let w = graph.weight_idx(i, j);
            let expected = if w > 0.0 {
                1
            } else if w < 0.0 {
                -1
            } else {
                0
            };
            let got = consistency_oracle(formulas[i], formulas[j]);
            if got != expected {
                mismatches.push(Mismatch {
                    u: graph.label(i).to_string(),
                    v: graph.label(j).to_string(),
                    expected,
                    got,
                });
            }
        }
    }
    Ok(VerifyReport {
        ok: mismatches.is_empty(),
        mismatches,
    })
}

/// A forest may share a property among its stars only when each root is
/// negatively joined to every leaf of the other stars.
fn clique_admissible(graph: &SignedGraph, forest: &StarForest) -> bool {
    forest.stars.iter().enumerate().all(|(a, sa)| {
        forest.stars.iter().enumerate().all(|(b, sb)| {
            a == b || sb.leaves.iter().all(|&leaf| graph.weight_idx(sa.root, leaf) < 0.0)
        })
    })
}

/// Synthesises a base-mode proposition set that models `graph`.
pub fn model_coherence_graph(
    graph: &SignedGraph,
    cover_method: CoverMethod,
    sfd_method: SfdMethod,
    seed: u64,
) -> Result<PropositionSet> {
    graph.ensure_signed()?;
    let cover = cover::cover(graph, cover_method);
    let mut formulas: Vec<Vec<Clause>> = vec![Vec::new(); graph.len()];
    let mut variables = Vec::new();

    for (j, clique) in cover.cliques.iter().enumerate() {
        let variable = format!("q{}", j + 1);
        let negatives: Vec<(usize, usize)> = clique
            .iter()
            .enumerate()
            .flat_map(|(a, &u)| clique[a + 1..].iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| graph.weight_idx(u, v) < 0.0)
            .collect();
        // Brute cannot exhaust large components; those cliques use greedy,
        // as brute itself does when its retry cap runs out.
        let method = match sfd_method {
            SfdMethod::Brute if star::largest_component(&negatives) > star::BRUTE_COMPONENT_LIMIT => SfdMethod::Greedy,
            m => m,
        };
        let sfd = star::star_forest_decompose_with(
            &negatives,
            method,
            derive_seed(seed, j as u64),
            star::BRUTE_RETRY_CAP,
            |f| clique_admissible(graph, f),
        )?;

        let mut touched = BTreeSet::new();
        // Clauses per member, in forest order.
        let mut clique_clauses: BTreeMap<usize, Vec<Clause>> = BTreeMap::new();
        for (k, forest) in sfd.forests.iter().enumerate() {
            let property = property_name(k);
            for s in &forest.stars {
                touched.insert(s.root);
                clique_clauses
                    .entry(s.root)
                    .or_default()
                    .push(Clause::new(&variable, &property, Polarity::Asserted));
                for &leaf in &s.leaves {
                    touched.insert(leaf);
                    clique_clauses
                        .entry(leaf)
                        .or_default()
                        .push(Clause::new(&variable, &property, Polarity::Negated));
                }
            }
        }
        let extra = property_name(sfd.len().max(1));
        for &member in clique {
            if !touched.contains(&member) {
                clique_clauses
                    .entry(member)
                    .or_default()
                    .push(Clause::new(&variable, &extra, Polarity::Asserted));
            }
        }
        for (member, clauses) in clique_clauses {
            formulas[member].extend(clauses);
        }
        variables.push(variable);
    }

    for f in formulas.iter_mut().filter(|f| f.is_empty()) {
        let variable = format!("q{}", variables.len() + 1);
        f.push(Clause::new(&variable, property_name(0), Polarity::Asserted));
        variables.push(variable);
    }

    let map = graph
        .vertices()
        .iter()
        .cloned()
        .zip(formulas)
        .collect::<BTreeMap<_, _>>();
    let mut set = PropositionSet::from_formulas(map, Regime::Base);
    set.variables = variables;
    Ok(set)
}

/// Attaches fuzzy degrees drawn uniformly from the regime's bands.
pub fn inject_uncertainty(props: &PropositionSet, regime: Regime, seed: u64) -> Result<PropositionSet> {
    if props.regime != Regime::Base || props.formulas.values().flatten().any(|c| c.degree.is_some()) {
        return Err(Error::invalid("uncertainty can only be injected into a base-mode proposition set"));
    }
    if regime == Regime::Base {
        return Err(Error::invalid("target regime must be zero, low, medium or high"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = props.clone();
    for clauses in out.formulas.values_mut() {
        for c in clauses.iter_mut() {
            c.degree = regime.sample_degree(c.polarity, &mut rng);
        }
    }
    out.rendered = out
        .formulas
        .iter()
        .map(|(v, clauses)| (v.clone(), render_formula(clauses)))
        .collect();
    out.regime = regime;
    Ok(out)
}

pub fn render(props: &PropositionSet) -> BTreeMap<String, String> {
    props
        .formulas
        .iter()
        .map(|(v, clauses)| (v.clone(), render_formula(clauses)))
        .collect()
}
