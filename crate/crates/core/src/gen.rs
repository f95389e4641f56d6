//! Random connected signed graphs and the benchmark suite built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cover::{self, CoverMethod};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::{median_of, SignedGraph};
use crate::hash::{derive_seed, sha256_hex};
use crate::model::{inject_uncertainty, model_coherence_graph, verify_model, PropositionSet, Regime};
use crate::star::SfdMethod;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Vertex labels `a, b, c, ...` for up to 26 vertices, zero-padded `v00, v01, ...` beyond.
pub fn vertex_labels(n: usize) -> Vec<String> {
    if n <= 26 {
        (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    } else {
        let width = (n - 1).to_string().len();
        (0..n).map(|i| format!("v{i:0width$}")).collect()
    }
}

/// Samples an Erdős–Rényi graph `G(n, p)` and joins it to a minimum spanning
/// tree of the complete graph under uniform random weights, with sampled
/// edges discounted by one so the tree prefers them. The tree therefore adds
/// only the edges needed to connect the sampled components. Every edge gets
/// an independent uniform sign.
pub fn sample_er_connected(n: usize, p: f64, seed: u64) -> Result<SignedGraph> {
    if n < 2 {
        return Err(Error::invalid(format!("graph size must be at least 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability must lie in [0, 1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let sampled: Vec<bool> = pairs.iter().map(|_| rng.gen_bool(p)).collect();

    let mut weighted: Vec<(f64, usize)> = pairs
        .iter()
        .enumerate()
        .map(|(k, _)| (rng.gen::<f64>() - if sampled[k] { 1.0 } else { 0.0 }, k))
        .collect();
    weighted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut keep = sampled;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut joined = 0;
    for (_, k) in weighted {
        let (i, j) = pairs[k];
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            keep[k] = true;
            joined += 1;
            if joined == n - 1 {
                break;
            }
        }
    }

    let mut graph = SignedGraph::new(vertex_labels(n))?;
    for (k, &(i, j)) in pairs.iter().enumerate() {
        if keep[k] {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            graph.set_weight_idx(i, j, sign);
        }
    }
    debug_assert!(graph.is_connected());
    Ok(graph)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sparsity {
    Sparse,
    Dense,
}

impl Sparsity {
    pub const ALL: [Sparsity; 2] = [Sparsity::Sparse, Sparsity::Dense];

    pub fn as_str(self) -> &'static str {
        match self {
            Sparsity::Sparse => "sparse",
            Sparsity::Dense => "dense",
        }
    }
}

impl fmt::Display for Sparsity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sparsity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown sparsity `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub sizes: Vec<usize>,
    /// Problems per (size, sparsity); parallel to `sizes`.
    pub counts: Vec<usize>,
    pub sparse_target: f64,
    pub dense_target: f64,
    pub cover_method: CoverMethod,
    pub sfd_method: SfdMethod,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            sizes: (5..=23).step_by(2).collect(),
            counts: vec![4, 4, 4, 4, 4, 4, 4, 4, 3, 3],
            sparse_target: 0.15,
            dense_target: 0.75,
            cover_method: CoverMethod::Percolation,
            sfd_method: SfdMethod::Greedy,
            seed: 0,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() != self.counts.len() {
            return Err(Error::invalid(format!(
                "config lists {} sizes but {} counts",
                self.sizes.len(),
                self.counts.len()
            )));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return Err(Error::invalid(format!("graph size must be at least 2, got {n}")));
        }
        for (name, p) in [("sparse_target", self.sparse_target), ("dense_target", self.dense_target)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn target(&self, sparsity: Sparsity) -> f64 {
        match sparsity {
            Sparsity::Sparse => self.sparse_target,
            Sparsity::Dense => self.dense_target,
        }
    }

    pub fn problem_count(&self) -> usize {
        2 * self.counts.iter().sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub size: usize,
    pub sparsity: Sparsity,
    pub density_target: f64,
    pub achieved_density: f64,
    pub cover_method: CoverMethod,
    pub sfd_method: SfdMethod,
    pub seed: u64,
    /// Cliques of the cover used to build the propositions, as labels.
    pub cover: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkProblem {
    pub id: String,
    pub graph: SignedGraph,
    pub variants: BTreeMap<Regime, PropositionSet>,
    pub meta: ProblemMeta,
}

impl BenchmarkProblem {
    pub fn variant(&self, regime: Regime) -> Result<&PropositionSet> {
        self.variants
            .get(&regime)
            .ok_or_else(|| Error::invalid(format!("problem {} has no {regime} variant", self.id)))
    }

    /// Structural invariants: connected signed graph, consistent density, all
    /// five variants present and well formed. Model correctness is checked
    /// separately by [`verify_model`].
    pub fn validate(&self) -> Result<()> {
        self.graph.ensure_signed()?;
        if !self.graph.is_connected() {
            return Err(Error::invalid(format!("problem {}: graph is not connected", self.id)));
        }
        if (self.graph.density() - self.meta.achieved_density).abs() > 1e-12 {
            return Err(Error::invalid(format!("problem {}: recorded density is stale", self.id)));
        }
        for regime in Regime::ALL {
            let v = self.variant(regime)?;
            if v.regime != regime {
                return Err(Error::invalid(format!("problem {}: variant {regime} is labelled {}", self.id, v.regime)));
            }
            v.validate()?;
        }
        Ok(())
    }
}

struct Job {
    id: String,
    size: usize,
    sparsity: Sparsity,
    seed: u64,
}

fn jobs(config: &BenchmarkConfig) -> Vec<Job> {
    let mut out = Vec::new();
    let mut counter = 0u64;
    for sparsity in Sparsity::ALL {
        for (&size, &count) in config.sizes.iter().zip(&config.counts) {
            for k in 0..count {
                out.push(Job {
                    id: format!("{sparsity}-n{size:02}-{k}"),
                    size,
                    sparsity,
                    seed: derive_seed(config.seed, counter),
                });
                counter += 1;
            }
        }
    }
    out
}

pub fn generate_problem(
    id: &str,
    size: usize,
    sparsity: Sparsity,
    config: &BenchmarkConfig,
    seed: u64,
) -> Result<BenchmarkProblem> {
    let target = config.target(sparsity);
    let graph = sample_er_connected(size, target, derive_seed(seed, 0))?;
    let base = model_coherence_graph(&graph, config.cover_method, config.sfd_method, derive_seed(seed, 1))?;
    let mut variants = BTreeMap::new();
    for (i, regime) in Regime::FUZZY.into_iter().enumerate() {
        variants.insert(regime, inject_uncertainty(&base, regime, derive_seed(seed, 2 + i as u64))?);
    }
    variants.insert(Regime::Base, base);
    for (regime, v) in &variants {
        let report = verify_model(&graph, v)?;
        if !report.ok {
            return Err(Error::invalid(format!(
                "problem {id}: {regime} variant does not model its graph: {}",
                report.mismatches[0]
            )));
        }
    }
    let cover = cover::cover(&graph, config.cover_method).labels(&graph);
    Ok(BenchmarkProblem {
        id: id.to_string(),
        meta: ProblemMeta {
            size,
            sparsity,
            density_target: target,
            achieved_density: graph.density(),
            cover_method: config.cover_method,
            sfd_method: config.sfd_method,
            seed,
            cover,
        },
        graph,
        variants,
    })
}

/// Generates every problem of the configured suite, sparse rows first.
pub fn generate_benchmark(config: &BenchmarkConfig, exec: Exec) -> Result<Vec<BenchmarkProblem>> {
    config.validate()?;
    let jobs = jobs(config);
    exec.map(&jobs, |job| generate_problem(&job.id, job.size, job.sparsity, config, job.seed))
        .into_iter()
        .collect()
}

/// Median achieved density of the problems in one sparsity regime.
pub fn median_density(problems: &[BenchmarkProblem], sparsity: Sparsity) -> Option<f64> {
    let mut d: Vec<f64> = problems
        .iter()
        .filter(|p| p.meta.sparsity == sparsity)
        .map(|p| p.meta.achieved_density)
        .collect();
    (!d.is_empty()).then(|| median_of(&mut d))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub tool_version: String,
    pub config: BenchmarkConfig,
    pub problems: Vec<ManifestEntry>,
}

impl BenchmarkManifest {
    /// Ids whose file content no longer matches the recorded hash.
    pub fn stale_entries(&self, dir: &Path) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for e in &self.problems {
            let bytes = fs::read(dir.join(&e.file))?;
            if sha256_hex(&bytes) != e.sha256 {
                out.push(e.id.clone());
            }
        }
        Ok(out)
    }
}

pub fn problem_to_json(problem: &BenchmarkProblem) -> String {
    let mut s = serde_json::to_string_pretty(problem).expect("problem serialises");
    s.push('\n');
    s
}

/// Writes one JSON file per problem plus `manifest.json`.
pub fn write_benchmark(dir: &Path, config: &BenchmarkConfig, problems: &[BenchmarkProblem]) -> Result<BenchmarkManifest> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(problems.len());
    for p in problems {
        let file = format!("{}.json", p.id);
        let text = problem_to_json(p);
        fs::write(dir.join(&file), &text)?;
        entries.push(ManifestEntry {
            id: p.id.clone(),
            file,
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    let manifest = BenchmarkManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        problems: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<BenchmarkManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_problem(path: &Path) -> Result<BenchmarkProblem> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Loads the manifest and every problem it lists, in manifest order.
pub fn read_benchmark(dir: &Path) -> Result<(BenchmarkManifest, Vec<BenchmarkProblem>)> {
    let manifest = read_manifest(dir)?;
    let problems = manifest
        .problems
        .iter()
        .map(|e| read_problem(&dir.join(&e.file)))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, problems))
}
