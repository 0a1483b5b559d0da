//! Run reports: the canonical JSON document, a rendered text table, and the
//! timing sidecar.
//!
//! The canonical report contains no wall-clock data and no filesystem paths,
//! so two identical runs serialize to identical bytes. Timings go to a
//! separate sidecar document that makes no such promise.

use serde::{Deserialize, Serialize};

use super::config::EvalGraph;
use super::metrics::Metrics;
use crate::classify::Ablation;
use crate::llm::BackendKind;
use crate::retrieval::PathDomain;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One round's snapshot: label space, graph sizes before and after the
/// round's online evaluation pass, and metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: u32,
    pub labels_total: usize,
    pub labels_new: usize,
    pub train_texts: usize,
    pub test_texts: usize,
    /// Graph size right after this round's training texts were indexed and
    /// merged, before any query touched it.
    pub graph_nodes_indexed: usize,
    pub graph_edges_indexed: usize,
    /// Graph size at the end of the round, after the online evaluation pass.
    pub graph_nodes_end: usize,
    pub graph_edges_end: usize,
    pub cross_label_edges: usize,
    /// Metrics over this round's own test texts.
    pub metrics_current: Metrics,
    /// Metrics over every test text evaluated at this round, earlier rounds'
    /// texts included.
    pub metrics_cumulative: Metrics,
    /// Mean candidate-set size over this round's own test texts.
    pub mean_candidates: f64,
    /// How many of this round's own tests fell back to the full label set.
    pub full_fallback_count: usize,
    pub extraction_failures: usize,
}

/// The whole run. Everything needed to interpret the numbers travels with
/// them; paths and timings deliberately do not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    /// False when the run aborted partway; rounds then holds what finished.
    pub complete: bool,
    pub seed: u64,
    pub k_shot: usize,
    pub ablation: Ablation,
    pub paths: PathDomain,
    pub eval_graph: EvalGraph,
    pub backend: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_rule_version: Option<String>,
    pub template_version: String,
    pub rounds: Vec<RoundReport>,
    /// Final-round cumulative metrics; absent when no round finished.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overall: Option<Metrics>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serialize");
        out.push('\n');
        out
    }

    pub fn from_json(raw: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(raw)
    }

    /// Render the growth and evaluation tables, for terminals and logs.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "run: seed={} k_shot={} ablation={} paths={} eval_graph={} backend={} complete={}\n\n",
            self.seed,
            self.k_shot,
            token(&self.ablation),
            token(&self.paths),
            token(&self.eval_graph),
            token(&self.backend),
            self.complete,
        ));

        out.push_str("graph growth (idx = after training merge, end = after online pass)\n");
        out.push_str(&format!(
            "{:>5} {:>6} {:>4} {:>6} {:>5} {:>9} {:>9} {:>9} {:>9} {:>7}\n",
            "round",
            "labels",
            "new",
            "train",
            "test",
            "nodes idx",
            "nodes end",
            "edges idx",
            "edges end",
            "x-edges",
        ));
        for r in &self.rounds {
            out.push_str(&format!(
                "{:>5} {:>6} {:>4} {:>6} {:>5} {:>9} {:>9} {:>9} {:>9} {:>7}\n",
                r.round,
                r.labels_total,
                r.labels_new,
                r.train_texts,
                r.test_texts,
                r.graph_nodes_indexed,
                r.graph_nodes_end,
                r.graph_edges_indexed,
                r.graph_edges_end,
                r.cross_label_edges,
            ));
        }

        out.push_str("\nevaluation (cur = this round's tests, cum = all tests seen so far)\n");
        out.push_str(&format!(
            "{:>5} {:>9} {:>11} {:>9} {:>7} {:>9} {:>11} {:>11}\n",
            "round",
            "acc cur",
            "halluc cur",
            "mean|C|",
            "full-fb",
            "acc cum",
            "macro cum",
            "halluc cum",
        ));
        for r in &self.rounds {
            out.push_str(&format!(
                "{:>5} {:>9.4} {:>11.4} {:>9.2} {:>7} {:>9.4} {:>11.4} {:>11.4}\n",
                r.round,
                r.metrics_current.accuracy,
                r.metrics_current.hallucination_rate,
                r.mean_candidates,
                r.full_fallback_count,
                r.metrics_cumulative.accuracy,
                r.metrics_cumulative.macro_recall,
                r.metrics_cumulative.hallucination_rate,
            ));
        }

        if let Some(overall) = &self.overall {
            out.push_str(&format!(
                "\noverall: accuracy {:.4}, macro recall {:.4}, hallucination rate {:.4} over {} evaluations\n",
                overall.accuracy, overall.macro_recall, overall.hallucination_rate, overall.total,
            ));
        }
        out
    }
}

fn token<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value).expect("token serialize") {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }
}

/// Wall-clock sidecar; separate from the canonical report on purpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTimings {
    pub total_ms: u64,
    pub rounds: Vec<RoundTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTiming {
    pub round: u32,
    pub index_ms: u64,
    pub evaluate_ms: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            complete: true,
            seed: 42,
            k_shot: 4,
            ablation: Ablation::None,
            paths: PathDomain::Mst,
            eval_graph: EvalGraph::RoundEnd,
            backend: BackendKind::Mock,
            mock_rule_version: Some("1".into()),
            template_version: "1".into(),
            rounds: vec![RoundReport {
                round: 1,
                labels_total: 5,
                labels_new: 5,
                train_texts: 20,
                test_texts: 40,
                graph_nodes_indexed: 105,
                graph_edges_indexed: 200,
                graph_nodes_end: 165,
                graph_edges_end: 260,
                cross_label_edges: 0,
                metrics_current: Metrics {
                    total: 40,
                    correct: 40,
                    accuracy: 1.0,
                    macro_recall: 1.0,
                    hallucinations: 0,
                    hallucination_rate: 0.0,
                },
                metrics_cumulative: Metrics {
                    total: 40,
                    correct: 40,
                    accuracy: 1.0,
                    macro_recall: 1.0,
                    hallucinations: 0,
                    hallucination_rate: 0.0,
                },
                mean_candidates: 5.0,
                full_fallback_count: 40,
                extraction_failures: 0,
            }],
            overall: Some(Metrics {
                total: 40,
                correct: 40,
                accuracy: 1.0,
                macro_recall: 1.0,
                hallucinations: 0,
                hallucination_rate: 0.0,
            }),
        }
    }

    #[test]
    fn json_round_trip_is_stable() {
        let report = sample();
        let json = report.to_json();
        let back = RunReport::from_json(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn text_rendering_carries_the_headline_numbers() {
        let text = sample().render_text();
        assert!(text.contains("seed=42"));
        assert!(text.contains("ablation=none"));
        assert!(text.contains("eval_graph=round_end"));
        assert!(text.contains("overall: accuracy 1.0000"));
        // One row per round in each table.
        assert_eq!(text.matches("\n    1 ").count(), 2, "rendered:\n{text}");
    }

    #[test]
    fn report_json_excludes_wall_clock_fields() {
        let json = sample().to_json();
        assert!(!json.contains("_ms"));
        assert!(!json.contains("timing"));
    }
}
