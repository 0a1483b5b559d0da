//! Core library for the `gorag` pipeline: dynamic few-shot text classification
//! over an online keyword/label graph.
//!
//! The pipeline runs in rounds. Each round introduces new labels and a handful
//! of training texts per label. Keywords extracted from those texts (and from
//! generated label descriptions, when label names are available) become nodes
//! of a weighted graph; edges tie keywords to labels with weights derived from
//! a corpus-level correlation score. At query time the keywords of an incoming
//! text select terminals in the graph, an approximate Steiner tree over those
//! terminals yields a small candidate label set, and an LLM picks the final
//! label from that set. Keywords the graph has not seen yet are indexed online
//! under the predicted label, so the graph keeps growing while it serves.
//!
//! Modules:
//! - [`corpus`]: datasets, round plans, k-shot sampling, tokenization, corpus stats
//! - [`llm`]: prompt templates, HTTP chat-completion backend, deterministic mock
//! - [`graph`]: the weighted keyword/label graph, edge weighting, persistence
//! - [`retrieval`]: keyword splitting, Steiner-tree candidate retrieval, exact oracle
//! - [`classify`]: prompt assembly, reply matching, per-text pipeline
//! - [`harness`]: round loop, metrics, reports, synthetic data generation

pub mod classify;
pub mod corpus;
pub mod graph;
pub mod harness;
pub mod llm;
pub mod retrieval;

pub use classify::{Ablation, ClassifyOutcome, MatchKind, OutcomeRecord};
pub use corpus::{CorpusStats, DatasetFormat, LabelDef, RoundPlan, RoundSpec, TextDoc};
pub use graph::{EdgeKind, EdgeRecord, NodeKind, WeightedGraph};
pub use harness::{RunConfig, RunReport};
pub use llm::{Gateway, LlmExchange};
pub use retrieval::{PathDomain, RetrievalOptions, SteinerResult, TerminalSet};
