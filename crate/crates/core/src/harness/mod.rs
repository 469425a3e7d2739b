//! Corpora, persistence and experiment orchestration.

pub mod corpus;
pub mod experiment;
pub mod io;

pub use corpus::{CorpusKind, CorpusSpec, Sample, SplitPair};
pub use experiment::{default_suite, run_cells, run_experiment, Bundle, ExperimentConfig};
