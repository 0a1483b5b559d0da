//! Evaluation metrics over classification outcomes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classify::OutcomeRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Mean per-class recall over gold classes with at least one evaluated
    /// text.
    pub macro_recall: f64,
    pub hallucinations: usize,
    pub hallucination_rate: f64,
}

impl Metrics {
    pub fn empty() -> Self {
        Metrics {
            total: 0,
            correct: 0,
            accuracy: 0.0,
            macro_recall: 0.0,
            hallucinations: 0,
            hallucination_rate: 0.0,
        }
    }
}

pub fn compute_metrics<'a>(records: impl IntoIterator<Item = &'a OutcomeRecord>) -> Metrics {
    let mut total = 0usize;
    let mut correct = 0usize;
    let mut hallucinations = 0usize;
    // Per gold class: (evaluated, correct).
    let mut per_class: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for rec in records {
        total += 1;
        let ok = rec.correct();
        correct += usize::from(ok);
        hallucinations += usize::from(rec.hallucination);
        if let Some(gold) = &rec.gold_label {
            let entry = per_class.entry(gold).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += usize::from(ok);
        }
    }
    if total == 0 {
        return Metrics::empty();
    }
    let macro_recall = if per_class.is_empty() {
        0.0
    } else {
        per_class
            .values()
            .map(|(n, c)| *c as f64 / *n as f64)
            .sum::<f64>()
            / per_class.len() as f64
    };
    Metrics {
        total,
        correct,
        accuracy: correct as f64 / total as f64,
        macro_recall,
        hallucinations,
        hallucination_rate: hallucinations as f64 / total as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{CandidateSource, MatchKind};
    use crate::retrieval::TerminalSet;

    fn rec(gold: &str, predicted: Option<&str>) -> OutcomeRecord {
        OutcomeRecord {
            text_id: format!("t-{gold}-{}", predicted.unwrap_or("none")),
            text_round: 1,
            eval_round: 1,
            gold_label: Some(gold.to_string()),
            predicted: predicted.map(String::from),
            match_kind: if predicted.is_some() {
                MatchKind::Id
            } else {
                MatchKind::NoMatch
            },
            hallucination: predicted.is_none(),
            keywords: vec![],
            terminals: TerminalSet::default(),
            candidates: vec![],
            candidate_source: CandidateSource::FullLabelSet,
            tree_cost: None,
            raw_reply: String::new(),
            online: None,
        }
    }

    #[test]
    fn accuracy_and_macro_recall_on_a_small_confusion() {
        // Class a: 2 of 2 correct. Class b: 1 of 2 correct (one wrong).
        let records = vec![
            rec("a", Some("a")),
            rec("a", Some("a")),
            rec("b", Some("b")),
            rec("b", Some("a")),
        ];
        let m = compute_metrics(&records);
        assert_eq!(m.total, 4);
        assert_eq!(m.correct, 3);
        assert!((m.accuracy - 0.75).abs() < 1e-12);
        assert!((m.macro_recall - 0.75).abs() < 1e-12);
        assert_eq!(m.hallucinations, 0);
    }

    #[test]
    fn macro_recall_weighs_rare_classes_up() {
        // Class a: 3 of 3. Class b: 0 of 1. Accuracy 0.75, macro 0.5.
        let records = vec![
            rec("a", Some("a")),
            rec("a", Some("a")),
            rec("a", Some("a")),
            rec("b", Some("a")),
        ];
        let m = compute_metrics(&records);
        assert!((m.accuracy - 0.75).abs() < 1e-12);
        assert!((m.macro_recall - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hallucinations_count_missing_predictions() {
        let records = vec![rec("a", Some("a")), rec("a", None)];
        let m = compute_metrics(&records);
        assert_eq!(m.hallucinations, 1);
        assert!((m.hallucination_rate - 0.5).abs() < 1e-12);
        assert!((m.accuracy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_records_means_zeroed_metrics() {
        let m = compute_metrics(&[]);
        assert_eq!(m, Metrics::empty());
    }
}
