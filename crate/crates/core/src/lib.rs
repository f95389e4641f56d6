//! Coherence-driven inference toolkit.
//!
//! The crate is organised around [`SignedGraph`], a signed coherence graph
//! whose vertices are proposition labels. Around it sit:
//!
//! * [`cover`] and [`star`]: clique edge covers and star forest decompositions;
//! * [`model`]: synthesis of proposition sets that model a signed graph,
//!   together with the synthetic consistency oracle used to check them;
//! * [`gen`]: random connected signed graphs and the benchmark suite;
//! * [`solver`]: coherence maximisation (exact, greedy, annealing), the
//!   2-XORSAT reformulation and Gibbs acceptance probabilities;
//! * [`eval`]: parsing, correcting and scoring reconstructed graphs.
//!
//! Data-parallel loops go through [`Exec`]; with the `parallel` feature
//! disabled every operation runs sequentially and produces identical output.

pub mod cover;
pub mod error;
pub mod eval;
pub mod exec;
pub mod gen;
pub mod graph;
pub mod hash;
pub mod model;
pub mod solver;
pub mod star;

pub use error::{Error, Result};
pub use exec::Exec;
pub use graph::{coherence, convergence_curve, l1_distance, median_consensus, SignedGraph};
