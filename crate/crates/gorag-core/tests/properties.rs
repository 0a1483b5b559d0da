//! Property tests over the text, parsing, graph, and retrieval invariants
//! that the rest of the pipeline silently depends on.

use proptest::prelude::*;

use gorag_core::classify::{normalize_reply, parse_and_match, PromptCandidate};
use gorag_core::corpus::{normalize_keyword, tokenize};
use gorag_core::graph::LABEL_PSEUDO_TEXT_PREFIX;
use gorag_core::llm::parse_keyword_reply;
use gorag_core::retrieval::synthgraph::{random_small_graph, random_terminals};
use gorag_core::retrieval::steiner_candidates;
use gorag_core::{LabelDef, RetrievalOptions, WeightedGraph};

proptest! {
    /// Normalization is a fixpoint: applying it twice changes nothing, and
    /// every token the tokenizer emits is already in normal form.
    #[test]
    fn keyword_normalization_is_idempotent(input in "\\PC{0,60}") {
        let once = normalize_keyword(&input);
        prop_assert_eq!(normalize_keyword(&once), once.clone());
        for token in tokenize(&input) {
            prop_assert_eq!(normalize_keyword(&token), token.clone());
        }
    }

    /// Keyword reply parsing accepts anything, returns normalized phrases,
    /// and never returns an empty string entry.
    #[test]
    fn keyword_reply_parsing_is_total_and_normalized(input in "\\PC{0,120}") {
        for kw in parse_keyword_reply(&input) {
            prop_assert!(!kw.is_empty());
            prop_assert_eq!(normalize_keyword(&kw), kw.clone());
        }
    }

    /// Reply normalization strips outer quoting and whitespace completely.
    #[test]
    fn reply_normalization_leaves_clean_output(input in "\\PC{0,80}") {
        let norm = normalize_reply(&input);
        prop_assert_eq!(norm.trim(), norm.as_str());
        prop_assert_eq!(norm.to_lowercase(), norm.clone());
        if norm.len() >= 2 {
            for quote in ['"', '\''] {
                prop_assert!(!(norm.starts_with(quote) && norm.ends_with(quote)));
            }
        }
    }

    /// Reply matching accepts arbitrary replies and only ever predicts a
    /// label drawn from the offered pools.
    #[test]
    fn reply_matching_only_predicts_offered_labels(
        reply in "\\PC{0,60}",
        ids in proptest::collection::vec("[a-z]{1,8}", 0..5),
    ) {
        let pool: Vec<PromptCandidate> = ids
            .iter()
            .map(|id| PromptCandidate { id: id.clone(), name: None, keywords: vec![] })
            .collect();
        let (predicted, _) = parse_and_match(&reply, &pool, &pool);
        if let Some(label) = predicted {
            prop_assert!(ids.contains(&label));
        }
    }

    /// A stored edge weight always re-derives from its frozen scores and
    /// stays inside [0, 1] no matter what score sequence built it.
    #[test]
    fn edge_weight_tracks_mean_of_frozen_scores(
        scores in proptest::collection::vec(0.0_f64..=1.0, 1..12),
    ) {
        let mut graph = WeightedGraph::empty_round(1);
        let label = LabelDef { id: "y".into(), name: None, round_introduced: 1 };
        graph.add_label(&label, vec![]);
        for (i, cs) in scores.iter().enumerate() {
            graph.record_occurrence("kw", "y", &format!("t{i}"), *cs).unwrap();
        }
        let edge = graph.edge("kw", "y").expect("edge exists");
        let mean: f64 = scores.iter().map(|cs| 1.0 - cs).sum::<f64>() / scores.len() as f64;
        prop_assert!((edge.weight - mean).abs() < 1e-12);
        prop_assert!((edge.weight - edge.derived_weight()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&edge.weight));
    }

    /// Retrieval is deterministic and structurally sound: repeated queries
    /// agree exactly, the tree touches every existing terminal, its cost is
    /// the sum of its edges, and its edge count betrays no cycle.
    #[test]
    fn retrieval_is_deterministic_and_returns_a_tree(seed in 0u64..400) {
        let graph = random_small_graph(seed, 14);
        let terminals = random_terminals(&graph, seed ^ 0x5eed, 5);
        let options = RetrievalOptions::default();
        let first = steiner_candidates(&graph, &terminals, &options).unwrap();
        let second = steiner_candidates(&graph, &terminals, &options).unwrap();
        prop_assert_eq!(&first, &second);

        for terminal in &terminals.exist {
            prop_assert!(first.tree_nodes.contains(terminal));
        }
        let mut recomputed = 0.0_f64;
        for (a, b) in &first.tree_edges {
            let edge = graph.edge(a, b).expect("tree edge missing from graph");
            recomputed += edge.weight;
        }
        prop_assert!((recomputed - first.total_cost).abs() < 1e-9);
        if !first.tree_nodes.is_empty() {
            prop_assert_eq!(first.tree_edges.len(), first.tree_nodes.len() - 1);
        }
    }

    /// Label pseudo-text ids never collide with ordinary text ids produced
    /// from the id-safe character set.
    #[test]
    fn label_pseudo_text_ids_stay_disjoint(id in "[a-z0-9_-]{1,20}") {
        let pseudo = format!("{LABEL_PSEUDO_TEXT_PREFIX}{id}");
        prop_assert!(pseudo.starts_with(LABEL_PSEUDO_TEXT_PREFIX));
        prop_assert!(!id.starts_with(LABEL_PSEUDO_TEXT_PREFIX));
    }
}
