//! Prompt templates.
//!
//! The benchmark template lists the variables, one `XOR` line and one
//! threshold line per property, and the rendered propositions as
//! `'Proposition(x): "..."'` entries of a Python-style list. The practical
//! template asks for 0-10 consistency ratings over labelled free text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use cohere_core::gen::BenchmarkProblem;
use cohere_core::model::Regime;

use crate::{LlmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    Benchmark,
    Practical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub text: String,
    pub problem_id: String,
    /// Regime name for benchmark prompts, `practical` otherwise.
    pub variant: String,
    pub template: Template,
}

const BENCHMARK_HEADER: &str = "\
For the input set of propositions, identify which propositions are logically consistent
(i.e., can coexist without contradiction). Construct a networkx graph where inconsistent edges
are weight 1 and consistent edges are weight 0. If two vertices do not
involve the same variables, do not create an edge between them.

Return solely the edge list with proposition names for vertices. i.e., return responses
in this format:
[('b', 'c', 0),
('b', 'e', 0),
('c', 'd', 0),
('c', 'e', 0)]
";

const PRACTICAL_HEADER: &str = "Imagine that you are a perfectly objective arbitrator with impeccable judgment and integrity. In response to a prompt of the form 'buildCoherence: ' below followed by a list of labeled propositions, please do the following: First, determine which pairs of propositions are substantively related. Second, for each related pair of propositions, determine their logical relationship, assuming that at least one is true, whether or not either actually is. I want you to ignore the truth, falsity or basis in fact of either claim. Third, based on your determination just above, numerically rate the relative consistency of the two propositions. Do not pay attention to or comment on the truth or basis in fact of either proposition independent of the other. Your rating of relative consistency should be on a scale from 0 to 10, with a value of 0 for a pair of propositions that are not at all consistent and a value of 10 for a pair of propositions that are totally consistent. I cannot emphasize enough that for your rating, I want you to ignore the truth or basis in fact of either proposition, since anything that is not consistent with reality cannot be true. If you determine that propositions are unrelated despite previously determining otherwise, omit that pair. To be clear, a pair of false but consistent claims should also be rated a 10. Meanwhile, a pair of propositions of which one is true and the other is false, should be rated a 0. Finally, construct a NetworkX graph where propositions are vertices and edges correspond to substantively related pairs of propositions, with weights given by the consistency ratings just above. Only return the edge list with proposition labels for vertices. i.e., return responses in this format (here 'p2', 'p3', 'p4', and 'p5' are labels): [('p2', 'p3', 0), ('p2', 'p5', 10), ('p3', 'p4', 9), ('p3', 'p5', 2)]. Order vertices (in edges) and edges (in the graph) lexicographically.";

fn python_list(items: &[String]) -> String {
    format!("[{}]", items.join(", "))
}

pub fn build_benchmark_prompt(problem: &BenchmarkProblem, regime: Regime) -> Result<PromptBundle> {
    let props = problem.variant(regime)?;
    let mut text = String::from(BENCHMARK_HEADER);
    text.push_str("\nVariables:\n");
    let vars: Vec<String> = props.variables.iter().map(|v| format!("'{v}'")).collect();
    text.push_str(&python_list(&vars));
    text.push_str("\n\nA given variable can have these properties:\n");
    for p in &props.properties {
        text.push_str(&format!("property {p}: {p} XOR !{p}\n"));
    }
    text.push_str("\nA given property is assigned in a fuzzy manner:\n");
    for (k, p) in props.properties.iter().enumerate() {
        text.push_str(&format!("property {}: !{p} := < 0.5{p}. {p} := ≥ 0.5{p}\n", k + 1));
    }
    text.push_str("\nInput:\n");
    let lines: Vec<String> = props
        .rendered
        .iter()
        .map(|(v, r)| format!("'Proposition({v}): \"{r}\"'"))
        .collect();
    text.push('[');
    text.push_str(&lines.join(",\n"));
    text.push_str("]\n");
    Ok(PromptBundle {
        text,
        problem_id: problem.id.clone(),
        variant: regime.to_string(),
        template: Template::Benchmark,
    })
}

/// Recovers the `Proposition(x): "..."` entries of a benchmark prompt.
pub fn extract_propositions(prompt: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let Some(input) = prompt.rfind("\nInput:\n") else {
        return out;
    };
    for line in prompt[input..].lines() {
        let line = line.trim().trim_start_matches('[').trim_end_matches(']').trim_end_matches(',');
        let Some(rest) = line.strip_prefix("'Proposition(") else {
            continue;
        };
        let Some((label, tail)) = rest.split_once("): \"") else {
            continue;
        };
        if let Some(body) = tail.strip_suffix("\"'") {
            out.insert(label.to_string(), body.to_string());
        }
    }
    out
}

/// Practical prompt over labelled free-text propositions.
pub fn build_practical_prompt(problem_id: &str, propositions: &[(String, String)]) -> Result<PromptBundle> {
    if propositions.len() < 2 {
        return Err(LlmError::Config(format!(
            "a practical prompt needs at least two propositions, got {}",
            propositions.len()
        )));
    }
    let mut text = String::from(PRACTICAL_HEADER);
    text.push_str("\n\nbuildCoherence:\n");
    for (label, body) in propositions {
        text.push_str(&format!("{label}: {body}\n"));
    }
    Ok(PromptBundle {
        text,
        problem_id: problem_id.to_string(),
        variant: "practical".to_string(),
        template: Template::Practical,
    })
}

/// Labels of a practical prompt, in order.
pub fn extract_practical_labels(prompt: &str) -> Vec<String> {
    let Some(start) = prompt.rfind("buildCoherence:\n") else {
        return Vec::new();
    };
    prompt[start + "buildCoherence:\n".len()..]
        .lines()
        .filter_map(|l| l.split_once(": ").map(|(label, _)| label.trim().to_string()))
        .collect()
}
