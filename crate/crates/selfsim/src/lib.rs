//! Self-similar graphs, approximated and verified.
//!
//! A *cell model* describes a finite cell graph as a clique decomposition:
//! an ordered boundary of `theta` vertices and `mu` ordered `K_theta` slots.
//! Iterated substitution of the model into its own slots yields the n-cell
//! approximations `G_n` of an infinite self-similar graph. This crate
//! builds those approximations with full level/cell bookkeeping and checks
//! the structural laws they must satisfy: reduction self-similarity, the
//! edge-boundary formula, the bounded-geometry equivalences and the degree
//! trichotomy, cell volumes and diameters, the cells lemma, and the growth
//! dimension `log mu / log nu` measured from exact ball volumes inside the
//! degree-exact region.
//!
//! The `selfsim` binary exposes the pipeline as subcommands (`validate`,
//! `generate`, `params`, `check`, `growth`, `dim`, `export`).

pub mod cli;
pub mod engine;
pub mod graph;
pub mod growth;
pub mod invariants;
pub mod io;
pub mod iso;
pub mod model;
pub mod report;

/// Hard cap on generated edge counts (`mu^n * theta * (theta - 1) / 2`).
pub const EDGE_CAP: u128 = 1 << 22;

/// Vertex cap for exact all-sources diameter computation.
pub const DIAMETER_CAP: usize = 200_000;

/// Default bound for the stabilizing-power search in origin detection.
pub const K_MAX_DEFAULT: usize = 6;

pub use engine::{generate, substitute, HierarchicalGraph, OriginInfo, OriginKind};
pub use graph::{FiniteGraph, GraphError};
pub use model::{builtin, model_parameters, validate, CellModel, Parameters};
pub use report::TheoremReport;
