//! The round loop: load a dataset, index rounds, evaluate, report.
//!
//! A run walks the dataset's rounds in order. Each round indexes that round's
//! training texts into the graph, evaluates the round's test texts (growing
//! the graph online unless ablated), re-evaluates every earlier round's test
//! texts against the grown graph, and snapshots metrics and graph sizes. The
//! outputs are a machine-readable report, a human-readable table, one result
//! record per evaluation, and a graph file per round.

pub mod config;
pub mod metrics;
pub mod report;
pub mod run;
pub mod synth;

pub use config::{BackendChoice, EvalGraph, MockSection, RunConfig};
pub use metrics::Metrics;
pub use report::{RoundReport, RunReport, RunTimings};
pub use run::{execute_run, RunOutcome};
pub use synth::{SynthOutput, SynthSpec};

use crate::classify::ClassifyError;
use crate::corpus::CorpusError;
use crate::graph::GraphError;
use crate::llm::LlmError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error("i/o on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("backend kind is http but the [backend.http] section is missing")]
    MissingHttp,
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
