//! Synthetic dataset generator with controllable label noise.
//!
//! Every label owns two two-token marker phrases and three single-token
//! satellite markers. Training texts carry both phrases between common
//! filler words; test texts carry both phrases plus all three satellites.
//! Phrases and satellites are all registered as extraction markers, and the
//! fillers are common enough that extraction returns markers only.
//!
//! Satellites never occur in training texts, so they enter the graph only
//! when test texts are indexed online. That split is what gives the
//! generator its teeth: with label noise, a test text's marker slots may be
//! swapped for another label's phrase, and then the gold label stays
//! reachable only through satellites the graph learned online.
//!
//! All randomness comes from one seeded generator; the same spec always
//! produces the same dataset, byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{MockSection, RunConfig};
use crate::corpus::DatasetRecord;

const FILLERS: [&str; 6] = ["the", "report", "notes", "steady", "ongoing", "activity"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub labels: usize,
    pub rounds: usize,
    pub train_per_label: usize,
    pub test_per_round: usize,
    /// Probability that a test text's marker slot is swapped for another
    /// label's phrase. Slots corrupt independently; satellites never do.
    pub noise: f64,
    /// Give labels display names built from their satellite tokens.
    pub named_labels: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            labels: 8,
            rounds: 2,
            train_per_label: 4,
            test_per_round: 16,
            noise: 0.0,
            named_labels: false,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub records: Vec<DatasetRecord>,
    /// Marker table for the mock backend: `(phrase, label id)` pairs.
    pub markers: Vec<(String, String)>,
}

impl SynthOutput {
    pub fn mock_section(&self) -> MockSection {
        MockSection {
            markers: self.markers.clone(),
            ..MockSection::default()
        }
    }

    /// A ready-to-run config for this dataset.
    pub fn to_run_config(&self, dataset: impl Into<std::path::PathBuf>) -> RunConfig {
        let mut config = RunConfig::for_dataset(dataset);
        config.mock = self.mock_section();
        config
    }
}

fn label_id(i: usize) -> String {
    format!("label{i:02}")
}

fn phrase_a(i: usize) -> String {
    format!("mk{i:02}a0 mk{i:02}a1")
}

fn phrase_b(i: usize) -> String {
    format!("mk{i:02}b0 mk{i:02}b1")
}

fn satellites(i: usize) -> [String; 3] {
    [
        format!("st{i:02}s0"),
        format!("st{i:02}s1"),
        format!("st{i:02}s2"),
    ]
}

/// Round of label `i` when `labels` spread over `rounds`, earlier rounds
/// taking the remainder. Rounds are 1-based.
fn round_of_label(i: usize, labels: usize, rounds: usize) -> u32 {
    let base = labels / rounds;
    let rem = labels % rounds;
    let mut index = i;
    for r in 0..rounds {
        let count = base + usize::from(r < rem);
        if index < count {
            return (r + 1) as u32;
        }
        index -= count;
    }
    rounds as u32
}

fn fillers(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=2);
    (0..n)
        .map(|_| FILLERS[rng.gen_range(0..FILLERS.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// Pick a corruption donor: any label of the pool except `own`.
fn donor(rng: &mut ChaCha8Rng, pool: &[usize], own: usize) -> usize {
    debug_assert!(pool.len() > 1);
    loop {
        let pick = pool[rng.gen_range(0..pool.len())];
        if pick != own {
            return pick;
        }
    }
}

pub fn generate(spec: &SynthSpec) -> SynthOutput {
    assert!(spec.rounds >= 1, "need at least one round");
    assert!(
        spec.labels >= spec.rounds.max(2),
        "need at least one label per round and two overall"
    );
    assert!((0.0..=1.0).contains(&spec.noise), "noise is a probability");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut markers = Vec::with_capacity(spec.labels * 5);
    for i in 0..spec.labels {
        markers.push((phrase_a(i), label_id(i)));
        markers.push((phrase_b(i), label_id(i)));
        for s in satellites(i) {
            markers.push((s, label_id(i)));
        }
    }

    let label_name = |i: usize| -> Option<String> {
        spec.named_labels.then(|| format!("topic {}", satellites(i).join(" ")))
    };

    let mut records = Vec::new();
    for i in 0..spec.labels {
        let round = round_of_label(i, spec.labels, spec.rounds);
        for t in 0..spec.train_per_label {
            let body = format!(
                "{} {} {} {} {}",
                fillers(&mut rng),
                phrase_a(i),
                fillers(&mut rng),
                phrase_b(i),
                fillers(&mut rng),
            );
            records.push(DatasetRecord {
                id: format!("tr-{}-{t:02}", label_id(i)),
                text: body,
                label: label_id(i),
                round,
                split: Some("train".to_string()),
                label_name: label_name(i),
            });
        }
    }

    for r in 1..=spec.rounds {
        let pool: Vec<usize> = (0..spec.labels)
            .filter(|&i| round_of_label(i, spec.labels, spec.rounds) <= r as u32)
            .collect();
        for j in 0..spec.test_per_round {
            let gold = pool[j % pool.len()];
            let slot_a = if pool.len() > 1 && rng.gen_bool(spec.noise) {
                phrase_a(donor(&mut rng, &pool, gold))
            } else {
                phrase_a(gold)
            };
            let slot_b = if pool.len() > 1 && rng.gen_bool(spec.noise) {
                phrase_b(donor(&mut rng, &pool, gold))
            } else {
                phrase_b(gold)
            };
            let [s0, s1, s2] = satellites(gold);
            let body = format!(
                "{} {slot_a} {} {s0} {s1} {slot_b} {} {s2}",
                fillers(&mut rng),
                fillers(&mut rng),
                fillers(&mut rng),
            );
            records.push(DatasetRecord {
                id: format!("te-r{r}-{j:03}"),
                text: body,
                label: label_id(gold),
                round: r as u32,
                split: Some("test".to_string()),
                label_name: label_name(gold),
            });
        }
    }

    SynthOutput { records, markers }
}
