use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use cohere_core::eval::{aggregate, score_attempt, score_text, write_reports_csv, write_summary_csv, write_summary_long_csv, Flag, WeightMode};
use cohere_core::gen::{self, BenchmarkConfig, BenchmarkProblem, Sparsity, MANIFEST_FILE};
use cohere_core::hash::sha256_hex;
use cohere_core::model::{inject_uncertainty, model_coherence_graph, verify_model, PropositionSet, Regime};
use cohere_core::solver::{acceptance_probabilities, solve as solve_cut, to_xorsat};
use cohere_core::{convergence_curve, median_consensus, Exec, SignedGraph};
use cohere_llm::client::{Client, Job};
use cohere_llm::prompt::{extract_practical_labels, extract_propositions};
use cohere_llm::store::{now_ms, write_atomic, AttemptRecord, ResponseStore, RunManifest};
use cohere_llm::{build_benchmark_prompt, build_practical_prompt, EndpointConfig, LlmError, PromptBundle};

use crate::{ConsensusArgs, GenArgs, ModelArgs, PromptArgs, RunArgs, ScoreArgs, SolveArgs, VerifyArgs};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CmdResult = Result<(), Failure>;

const FAILED: u8 = 1;
const USAGE: u8 = 2;
const TRANSPORT: u8 = 3;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: USAGE, error: e.into() }
}

fn failed(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: FAILED, error: e.into() }
}

impl From<cohere_core::Error> for Failure {
    fn from(e: cohere_core::Error) -> Self {
        usage(e)
    }
}

impl From<LlmError> for Failure {
    fn from(e: LlmError) -> Self {
        let code = if matches!(e, LlmError::Transport { .. }) { TRANSPORT } else { USAGE };
        Failure { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        usage(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        usage(e)
    }
}

fn read_graph(path: &Path) -> Result<SignedGraph, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    SignedGraph::from_json_str(&text).map_err(|e| usage(anyhow!("{}: {e}", path.display())))
}

/// Writes to stdout, treating a closed pipe (e.g. `| head`) as success.
fn emit(text: &str) -> CmdResult {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(usage(e)),
        _ => Ok(()),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

pub fn gen(args: GenArgs, exec: Exec) -> CmdResult {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str::<BenchmarkConfig>(&text).map_err(|e| usage(anyhow!("{}: {e}", path.display())))?
        }
        None => BenchmarkConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;

    let out = &args.out;
    let occupied = out.is_dir() && fs::read_dir(out)?.next().is_some();
    if occupied {
        if !args.force {
            return Err(usage(anyhow!("{} is not empty; pass --force to replace the benchmark in it", out.display())));
        }
        // Only remove what an earlier run of this command wrote.
        let old = gen::read_manifest(out)
            .map_err(|e| usage(anyhow!("refusing to clear {}: no readable benchmark manifest ({e})", out.display())))?;
        for entry in &old.problems {
            let path = out.join(&entry.file);
            if path.exists() {
                fs::remove_file(path)?;
            }
        }
        fs::remove_file(out.join(MANIFEST_FILE))?;
    }

    let problems = gen::generate_benchmark(&config, exec)?;
    let manifest = gen::write_benchmark(out, &config, &problems)?;
    let median = |s| gen::median_density(&problems, s).map_or("-".to_string(), |d| format!("{d:.3}"));
    println!(
        "wrote {} problems to {} (median density: sparse {}, dense {})",
        manifest.problems.len(),
        out.display(),
        median(Sparsity::Sparse),
        median(Sparsity::Dense)
    );
    Ok(())
}

pub fn verify(args: VerifyArgs, exec: Exec) -> CmdResult {
    let dir = &args.bench;
    if !dir.join(MANIFEST_FILE).is_file() {
        return Err(usage(anyhow!("{} has no {MANIFEST_FILE}; not a benchmark directory", dir.display())));
    }
    let (manifest, problems) = gen::read_benchmark(dir)?;
    let mut problems_report: Vec<String> = manifest
        .stale_entries(dir)?
        .into_iter()
        .map(|id| format!("{id}: file does not match the manifest hash"))
        .collect();

    let per_problem = exec.map(&problems, |p: &BenchmarkProblem| -> Vec<String> {
        let mut issues = Vec::new();
        if let Err(e) = p.validate() {
            issues.push(format!("{}: {e}", p.id));
        }
        for regime in Regime::ALL {
            let Ok(variant) = p.variant(regime) else { continue };
            // Check what a reader of the prompt sees: the rendered text.
            let parsed = match PropositionSet::parse(&variant.rendered, regime) {
                Ok(s) => s,
                Err(e) => {
                    issues.push(format!("{} [{regime}]: {e}", p.id));
                    continue;
                }
            };
            match verify_model(&p.graph, &parsed) {
                Ok(r) => issues.extend(r.mismatches.iter().map(|m| format!("{} [{regime}]: {m}", p.id))),
                Err(e) => issues.push(format!("{} [{regime}]: {e}", p.id)),
            }
        }
        issues
    });
    problems_report.extend(per_problem.into_iter().flatten());

    let checked = problems.len() * Regime::ALL.len();
    if problems_report.is_empty() {
        println!("ok: {} problems, {checked} proposition sets verified", problems.len());
        Ok(())
    } else {
        for line in &problems_report {
            println!("{line}");
        }
        Err(failed(anyhow!("{} verification issue(s)", problems_report.len())))
    }
}

pub fn model(args: ModelArgs) -> CmdResult {
    let graph = read_graph(&args.graph)?;
    let base = model_coherence_graph(&graph, args.cover, args.sfd, args.seed)?;
    let props = if args.regime == Regime::Base { base } else { inject_uncertainty(&base, args.regime, args.seed)? };
    let report = verify_model(&graph, &props)?;
    if !report.ok {
        return Err(failed(anyhow!("model does not reproduce the graph: {:?}", report.mismatches)));
    }
    emit(&to_json(&props))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PracticalFile {
    id: String,
    propositions: Vec<LabeledProposition>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabeledProposition {
    label: String,
    text: String,
}

fn practical_bundle(path: &Path) -> Result<PromptBundle, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let file: PracticalFile = serde_json::from_str(&text).map_err(|e| usage(anyhow!("{}: {e}", path.display())))?;
    let labels: BTreeSet<&str> = file.propositions.iter().map(|p| p.label.as_str()).collect();
    if labels.len() != file.propositions.len() {
        return Err(usage(anyhow!("{}: proposition labels must be unique", path.display())));
    }
    let props: Vec<(String, String)> = file.propositions.into_iter().map(|p| (p.label, p.text)).collect();
    Ok(build_practical_prompt(&file.id, &props)?)
}

fn find_problem<'a>(problems: &'a [BenchmarkProblem], id: &str) -> Result<&'a BenchmarkProblem, Failure> {
    problems.iter().find(|p| p.id == id).ok_or_else(|| usage(anyhow!("no problem `{id}` in the benchmark")))
}

pub fn prompt(args: PromptArgs) -> CmdResult {
    let bundle = match (&args.practical, &args.bench, &args.problem) {
        (Some(path), _, _) => practical_bundle(path)?,
        (None, Some(dir), Some(id)) => {
            let (_, problems) = gen::read_benchmark(dir)?;
            build_benchmark_prompt(find_problem(&problems, id)?, args.regime)?
        }
        _ => return Err(usage(anyhow!("give a benchmark directory with --problem, or --practical FILE"))),
    };
    emit(&bundle.text)
}

fn sanitize_id(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect::<String>()
        .trim_start_matches('.')
        .to_string()
}

fn prompt_path(store: &ResponseStore, problem_id: &str, variant: &str) -> PathBuf {
    store.root().join(problem_id).join(format!("{variant}.prompt.txt"))
}

pub fn run(args: RunArgs) -> CmdResult {
    let config = EndpointConfig::load(&args.config)?;
    if args.attempts == 0 {
        return Err(usage(anyhow!("--attempts must be at least 1")));
    }

    let (bundles, benchmark_path, benchmark_hash) = match (&args.practical, &args.bench) {
        (Some(path), _) => {
            let bundle = practical_bundle(path)?;
            let hash = sha256_hex(fs::read(path)?);
            (vec![bundle], path.clone(), hash)
        }
        (None, Some(dir)) => {
            let (manifest, problems) = gen::read_benchmark(dir)?;
            let stale = manifest.stale_entries(dir)?;
            if !stale.is_empty() {
                return Err(failed(anyhow!("benchmark files changed since generation: {}", stale.join(", "))));
            }
            let regimes: Vec<Regime> = if args.regime.is_empty() {
                Regime::ALL.to_vec()
            } else {
                args.regime.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
            };
            let mut bundles = Vec::new();
            for p in &problems {
                for &r in &regimes {
                    bundles.push(build_benchmark_prompt(p, r)?);
                }
            }
            (bundles, dir.clone(), sha256_hex(fs::read(dir.join(MANIFEST_FILE))?))
        }
        (None, None) => return Err(usage(anyhow!("give a benchmark directory or --practical FILE"))),
    };

    if args.dry_run {
        let mut text = String::new();
        for b in &bundles {
            writeln!(text, "=== {} [{}] x{} ===", b.problem_id, b.variant, args.attempts).expect("write to string");
            text.push_str(&b.text);
            if !b.text.ends_with('\n') {
                text.push('\n');
            }
        }
        return emit(&text);
    }

    let run_id = sanitize_id(args.run_id.as_deref().unwrap_or(&config.model));
    let store = ResponseStore::new(&args.out, &run_id)?;
    if let Ok(existing) = store.read_manifest() {
        if existing.benchmark_hash != benchmark_hash && !args.force {
            return Err(usage(anyhow!(
                "run {run_id} was made against a different benchmark; choose another --run-id or pass --force"
            )));
        }
    }
    let variants: BTreeSet<String> = bundles.iter().map(|b| b.variant.clone()).collect();
    store.write_manifest(&RunManifest {
        run_id: run_id.clone(),
        benchmark_path,
        benchmark_hash,
        endpoint: (&config).into(),
        attempts: args.attempts,
        variants: variants.into_iter().collect(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    })?;

    let mut jobs = Vec::new();
    let mut skipped = 0;
    for b in &bundles {
        write_atomic(&prompt_path(&store, &b.problem_id, &b.variant), b.text.as_bytes())?;
        let hash = sha256_hex(&b.text);
        for attempt in 0..args.attempts {
            if store.is_complete(&b.problem_id, &b.variant, attempt, &hash) {
                skipped += 1;
            } else {
                jobs.push(Job { bundle: b.clone(), attempt });
            }
        }
    }
    if jobs.is_empty() {
        println!("run {run_id}: all {skipped} attempts already stored");
        return Ok(());
    }

    let client = Client::from_config(config.clone())?;
    let write_errors = Mutex::new(Vec::new());
    let results = client.complete_all(&jobs, |job, result| {
        let Ok(c) = result else { return };
        let record = AttemptRecord {
            problem_id: job.bundle.problem_id.clone(),
            variant: job.bundle.variant.clone(),
            attempt: job.attempt,
            model: config.model.clone(),
            prompt_hash: sha256_hex(&job.bundle.text),
            raw_text: c.text.clone(),
            latency_ms: c.latency_ms,
            timestamp: now_ms(),
            tries: c.tries,
        };
        if let Err(e) = store.write(&record) {
            write_errors.lock().expect("error list").push(e.to_string());
        }
    });

    let write_errors = write_errors.into_inner().expect("error list");
    if let Some(e) = write_errors.first() {
        return Err(usage(anyhow!("could not store {} response(s): {e}", write_errors.len())));
    }
    let failures: Vec<(&Job, &LlmError)> =
        jobs.iter().zip(&results).filter_map(|(j, r)| r.as_ref().err().map(|e| (j, e))).collect();
    println!(
        "run {run_id}: {} stored, {skipped} already present, {} failed",
        jobs.len() - failures.len(),
        failures.len()
    );
    if let Some((job, e)) = failures.first() {
        let code = if failures.iter().all(|(_, e)| matches!(e, LlmError::Transport { .. })) { TRANSPORT } else { USAGE };
        return Err(Failure {
            code,
            error: anyhow!(
                "{} request(s) failed; first: {} [{}] attempt {}: {e}",
                failures.len(),
                job.bundle.problem_id,
                job.bundle.variant,
                job.attempt
            ),
        });
    }
    Ok(())
}

pub fn score(args: ScoreArgs) -> CmdResult {
    let (_, problems) = gen::read_benchmark(&args.bench)?;
    let store = ResponseStore::open(&args.run)?;
    let manifest = store.read_manifest()?;
    let bench_hash = sha256_hex(fs::read(args.bench.join(MANIFEST_FILE))?);
    if manifest.benchmark_hash != bench_hash {
        return Err(failed(anyhow!(
            "run {} was made against a different benchmark than {}",
            manifest.run_id,
            args.bench.display()
        )));
    }
    let by_id: BTreeMap<&str, &BenchmarkProblem> = problems.iter().map(|p| (p.id.as_str(), p)).collect();

    let mut reports = Vec::new();
    for record in store.records()? {
        let problem = by_id
            .get(record.problem_id.as_str())
            .ok_or_else(|| failed(anyhow!("stored response for unknown problem `{}`", record.problem_id)))?;
        let regime: Regime = record
            .variant
            .parse()
            .map_err(|_| failed(anyhow!("stored response has non-benchmark variant `{}`", record.variant)))?;
        reports.push(score_attempt(problem, regime, &record.raw_text, &record.model)?);
    }
    if reports.is_empty() {
        return Err(failed(anyhow!("run {} has no stored responses", manifest.run_id)));
    }

    let out = args.out.unwrap_or_else(|| args.run.clone());
    fs::create_dir_all(&out)?;
    let rows = aggregate(&reports);
    let mut buf = Vec::new();
    write_reports_csv(&mut buf, &reports)?;
    write_atomic(&out.join("reports.csv"), &buf)?;
    buf.clear();
    write_summary_csv(&mut buf, &rows)?;
    write_atomic(&out.join("summary.csv"), &buf)?;
    buf.clear();
    write_summary_long_csv(&mut buf, &rows)?;
    write_atomic(&out.join("summary_long.csv"), &buf)?;

    let excluded = reports.iter().filter(|r| r.excluded).count();
    let parse_failed = reports.iter().filter(|r| r.flags.contains(&Flag::ParseFailed)).count();
    println!(
        "scored {} responses ({excluded} excluded as hallucinated, {parse_failed} unparsable) -> {}",
        reports.len(),
        out.display()
    );
    for row in &rows {
        println!(
            "{:<24} {:<6} {:<6} n={:<4} micro-F1 {}",
            row.model_id,
            row.sparsity.as_str(),
            row.regime.as_str(),
            row.n,
            row.micro_f1
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct ConsensusOutput<'a> {
    problem_id: &'a str,
    variant: &'a str,
    responses: usize,
    used: usize,
    graph: cohere_core::graph::GraphJson,
}

pub fn consensus(args: ConsensusArgs, exec: Exec) -> CmdResult {
    let store = ResponseStore::open(&args.run)?;
    let records: Vec<AttemptRecord> =
        store.records()?.into_iter().filter(|r| r.problem_id == args.problem).collect();
    if records.is_empty() {
        return Err(usage(anyhow!("no stored responses for problem `{}`", args.problem)));
    }
    let variants: BTreeSet<&str> = records.iter().map(|r| r.variant.as_str()).collect();
    let variant = match &args.variant {
        Some(v) if variants.contains(v.as_str()) => v.clone(),
        Some(v) => return Err(usage(anyhow!("no `{v}` responses; stored variants: {variants:?}"))),
        None if variants.len() == 1 => variants.iter().next().expect("one variant").to_string(),
        None => return Err(usage(anyhow!("several variants stored ({variants:?}); pick one with --variant"))),
    };

    let prompt_file = prompt_path(&store, &args.problem, &variant);
    let prompt = fs::read_to_string(&prompt_file).with_context(|| format!("cannot read {}", prompt_file.display()))?;
    let (universe, mode) = match extract_propositions(&prompt) {
        props if !props.is_empty() => (props.into_keys().collect::<Vec<_>>(), WeightMode::Benchmark),
        _ => (extract_practical_labels(&prompt), WeightMode::Practical),
    };
    let empty = SignedGraph::new(universe)?;

    let mut graphs = Vec::new();
    let mut dropped = 0;
    for r in records.iter().filter(|r| r.variant == variant) {
        let s = score_text(&empty, &r.raw_text, mode)?;
        if s.flags.contains(&Flag::ParseFailed) || s.flags.contains(&Flag::Hallucinated) {
            dropped += 1;
        } else {
            graphs.push(s.predicted);
        }
    }
    if graphs.is_empty() {
        return Err(failed(anyhow!("none of the {dropped} responses could be used")));
    }
    let total = graphs.len();
    let sizes: Vec<usize> = if args.sizes.is_empty() { (1..=total).collect() } else { args.sizes.clone() };
    if let Some(&n) = sizes.iter().find(|&&n| n == 0 || n > total) {
        return Err(usage(anyhow!("subsample size {n} must be between 1 and the {total} usable responses")));
    }
    let median = median_consensus(&graphs)?;
    let curve = convergence_curve(&graphs, &sizes, args.trials, args.seed, exec)?;

    let out = args.out.unwrap_or_else(|| store.root().join(&args.problem));
    write_atomic(
        &out.join(format!("consensus_{variant}.json")),
        to_json(&ConsensusOutput {
            problem_id: &args.problem,
            variant: &variant,
            responses: total + dropped,
            used: total,
            graph: median.to_json(),
        })
        .as_bytes(),
    )?;
    let mut csv = String::from("n,trial,l1_distance\n");
    for point in &curve {
        for (t, d) in point.distances.iter().enumerate() {
            writeln!(csv, "{},{t},{d}", point.n).expect("write to string");
        }
    }
    write_atomic(&out.join(format!("convergence_{variant}.csv")), csv.as_bytes())?;

    println!("consensus of {total} responses ({dropped} dropped) -> {}", out.display());
    for point in &curve {
        println!("n={:<4} median L1 to full consensus {:.3}", point.n, point.median_distance());
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput {
    method: String,
    coherence: f64,
    part: Vec<String>,
    other: Vec<String>,
    accepted: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    acceptance_probabilities: Option<BTreeMap<String, f64>>,
}

pub fn solve(args: SolveArgs, exec: Exec) -> CmdResult {
    let graph = read_graph(&args.graph)?;
    if args.xorsat {
        return emit(&to_xorsat(&graph)?.to_text());
    }
    let cut = solve_cut(&graph, args.method, args.seed, exec)?;
    let acceptance_probabilities = match args.temperature {
        Some(t) => Some(acceptance_probabilities(&graph, t, exec)?),
        None => None,
    };
    let other = cut.other_part(&graph);
    emit(&to_json(&SolveOutput {
        method: format!("{:?}", args.method).to_lowercase(),
        coherence: cut.coherence,
        part: cut.part,
        other,
        accepted: cut.accepted,
        acceptance_probabilities,
    }))
}
