//! Datasets, round plans, k-shot sampling, and tokenization.
//!
//! A dataset is a JSONL file with one record per text: `{id, text, label,
//! round}` plus two optional fields, `split` (`"train"` or `"test"`, default
//! `"train"`) and `label_name` (a human-readable name for the record's label,
//! used for description generation and zero-shot runs). Labels are disjoint
//! across rounds: every label belongs to exactly one round, the round where it
//! first appears.

mod stats;

pub use stats::CorpusStats;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("failed to read dataset {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("dataset contains no rounds")]
    NoRounds,
    #[error("duplicate text id {0}")]
    DuplicateTextId(String),
    #[error("label {label} appears in rounds {first} and {second}; labels belong to one round")]
    LabelInTwoRounds {
        label: String,
        first: u32,
        second: u32,
    },
    #[error("rounds must be numbered 1..=R without gaps; saw {0:?}")]
    NonContiguousRounds(Vec<u32>),
    #[error("test text {text} has label {label}, which no training text introduces")]
    TestLabelNeverTrained { text: String, label: String },
    #[error("test text {text} sits in round {round} but its label {label} only arrives in round {introduced}")]
    TestBeforeLabel {
        text: String,
        round: u32,
        label: String,
        introduced: u32,
    },
    #[error("label {label} has {have} candidate training texts, need {need}")]
    NotEnoughTrain {
        label: String,
        have: usize,
        need: usize,
    },
    #[error("k must be at least 1")]
    ZeroShotSample,
    #[error("conflicting names for label {label}: {first:?} vs {second:?}")]
    ConflictingLabelName {
        label: String,
        first: String,
        second: String,
    },
    #[error("text {0} already ingested")]
    DuplicateIngest(String),
    #[error("label counts {counts:?} sum to {sum} but the dataset has {labels} labels")]
    BadLabelCounts {
        counts: Vec<usize>,
        sum: usize,
        labels: usize,
    },
}

/// Lowercased Unicode word segmentation. Punctuation-only segments are
/// dropped, so `"TF-IDF score"` tokenizes to `["tf", "idf", "score"]`.
/// Word segments are re-split on whitespace because a combining mark after a
/// space merges into one segment with it; tokens never contain whitespace.
pub fn tokenize(body: &str) -> Vec<String> {
    body.unicode_words()
        .flat_map(str::split_whitespace)
        .map(str::to_lowercase)
        .collect()
}

/// Canonical form of a keyword: its tokens re-joined with single spaces.
/// Multi-word keywords stay multi-word; casing and punctuation are gone.
pub fn normalize_keyword(phrase: &str) -> String {
    tokenize(phrase).join(" ")
}

/// Number of contiguous occurrences of `phrase` (split on spaces) in `tokens`.
pub fn contiguous_count(tokens: &[String], phrase: &str) -> usize {
    let needle: Vec<&str> = phrase.split(' ').filter(|p| !p.is_empty()).collect();
    if needle.is_empty() || needle.len() > tokens.len() {
        return 0;
    }
    tokens
        .windows(needle.len())
        .filter(|w| w.iter().zip(&needle).all(|(t, n)| t == n))
        .count()
}

/// One text with its derived token sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextDoc {
    pub id: String,
    pub body: String,
    pub gold_label: Option<String>,
    tokens: Vec<String>,
}

impl TextDoc {
    pub fn new(id: impl Into<String>, body: impl Into<String>, gold_label: Option<String>) -> Self {
        let body = body.into();
        let tokens = tokenize(&body);
        TextDoc {
            id: id.into(),
            body,
            gold_label,
            tokens,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelDef {
    pub id: String,
    pub name: Option<String>,
    pub round_introduced: u32,
}

/// Dataset formats understood by [`load_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    Jsonl,
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetFormat::Jsonl => write!(f, "jsonl"),
        }
    }
}

/// One round of the plan: the labels it introduces, a per-label pool of
/// candidate training texts, and the round's query texts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSpec {
    pub round: u32,
    /// Labels first seen in this round, in file order.
    pub new_labels: Vec<String>,
    /// Candidate training texts per new label, in file order. `sample_k_shot`
    /// truncates each pool to exactly k.
    pub train: BTreeMap<String, Vec<TextDoc>>,
    /// Query texts evaluated when this round is reached, in file order.
    pub test: Vec<TextDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundPlan {
    pub rounds: Vec<RoundSpec>,
    pub labels: BTreeMap<String, LabelDef>,
}

impl RoundPlan {
    /// Label ids visible at round `r` (all labels introduced in rounds 1..=r),
    /// sorted lexicographically.
    pub fn cumulative_labels(&self, r: u32) -> Vec<String> {
        let mut out: Vec<String> = self
            .labels
            .values()
            .filter(|l| l.round_introduced <= r)
            .map(|l| l.id.clone())
            .collect();
        out.sort();
        out
    }

    pub fn num_rounds(&self) -> u32 {
        self.rounds.len() as u32
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    label: String,
    round: u32,
    #[serde(default)]
    split: Option<String>,
    #[serde(default)]
    label_name: Option<String>,
}

/// Serialized form of one dataset record, used by the split tool and the
/// synthetic generator when writing JSONL files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub text: String,
    pub label: String,
    pub round: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_name: Option<String>,
}

fn merge_label_name(def: &mut LabelDef, name: Option<&String>) -> Result<(), CorpusError> {
    if let Some(name) = name {
        match &def.name {
            None => def.name = Some(name.clone()),
            Some(existing) if existing != name => {
                return Err(CorpusError::ConflictingLabelName {
                    label: def.id.clone(),
                    first: existing.clone(),
                    second: name.clone(),
                });
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// Parse a JSONL dataset into a round plan. Records with `split: "test"`
/// become query texts; everything else joins the training pool of its label.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<RoundPlan, CorpusError> {
    let DatasetFormat::Jsonl = format;
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: display.clone(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    let mut train_recs: Vec<RawRecord> = Vec::new();
    let mut test_recs: Vec<RawRecord> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: display.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                path: display.clone(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        if rec.round == 0 {
            return Err(CorpusError::Parse {
                path: display.clone(),
                line: idx + 1,
                message: "round numbers start at 1".into(),
            });
        }
        let is_test = match rec.split.as_deref() {
            None | Some("train") => false,
            Some("test") => true,
            Some(other) => {
                return Err(CorpusError::Parse {
                    path: display.clone(),
                    line: idx + 1,
                    message: format!("unknown split {other:?}, expected \"train\" or \"test\""),
                })
            }
        };
        if !seen_ids.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateTextId(rec.id));
        }
        if is_test {
            test_recs.push(rec);
        } else {
            train_recs.push(rec);
        }
    }

    // Training records define each label's introduction round; a test record's
    // round is the round it is evaluated in, so older labels legitimately
    // recur in later test rounds.
    let mut labels: BTreeMap<String, LabelDef> = BTreeMap::new();
    let mut label_order: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for rec in &train_recs {
        match labels.get_mut(&rec.label) {
            None => {
                labels.insert(
                    rec.label.clone(),
                    LabelDef {
                        id: rec.label.clone(),
                        name: rec.label_name.clone(),
                        round_introduced: rec.round,
                    },
                );
                label_order.entry(rec.round).or_default().push(rec.label.clone());
            }
            Some(def) => {
                if def.round_introduced != rec.round {
                    return Err(CorpusError::LabelInTwoRounds {
                        label: rec.label.clone(),
                        first: def.round_introduced.min(rec.round),
                        second: def.round_introduced.max(rec.round),
                    });
                }
                merge_label_name(def, rec.label_name.as_ref())?;
            }
        }
    }
    for rec in &test_recs {
        let def = labels
            .get_mut(&rec.label)
            .ok_or_else(|| CorpusError::TestLabelNeverTrained {
                text: rec.id.clone(),
                label: rec.label.clone(),
            })?;
        if def.round_introduced > rec.round {
            return Err(CorpusError::TestBeforeLabel {
                text: rec.id.clone(),
                round: rec.round,
                label: rec.label.clone(),
                introduced: def.round_introduced,
            });
        }
        merge_label_name(def, rec.label_name.as_ref())?;
    }

    let mut per_round: BTreeMap<u32, RoundSpec> = BTreeMap::new();
    for (recs, is_test) in [(train_recs, false), (test_recs, true)] {
        for rec in recs {
            let spec = per_round.entry(rec.round).or_insert_with(|| RoundSpec {
                round: rec.round,
                new_labels: Vec::new(),
                train: BTreeMap::new(),
                test: Vec::new(),
            });
            let doc = TextDoc::new(rec.id, rec.text, Some(rec.label.clone()));
            if is_test {
                spec.test.push(doc);
            } else {
                spec.train.entry(rec.label.clone()).or_default().push(doc);
            }
        }
    }

    if per_round.is_empty() {
        return Err(CorpusError::NoRounds);
    }
    let round_numbers: Vec<u32> = per_round.keys().copied().collect();
    let contiguous = round_numbers
        .iter()
        .enumerate()
        .all(|(i, r)| *r == i as u32 + 1);
    if !contiguous {
        return Err(CorpusError::NonContiguousRounds(round_numbers));
    }

    let mut rounds = Vec::new();
    for (round, mut spec) in per_round {
        spec.new_labels = label_order.remove(&round).unwrap_or_default();
        rounds.push(spec);
    }
    Ok(RoundPlan { rounds, labels })
}

/// Read a JSONL file as a flat record list, without building a round plan.
/// Blank lines are skipped; `round` defaults to 1 when absent so files that
/// have not been split into rounds yet still load.
pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>, CorpusError> {
    let display = path.display().to_string();
    let raw = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: display.clone(),
        source,
    })?;
    let mut out = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        #[derive(Deserialize)]
        struct FlatRecord {
            id: String,
            text: String,
            label: String,
            #[serde(default)]
            round: Option<u32>,
            #[serde(default)]
            split: Option<String>,
            #[serde(default)]
            label_name: Option<String>,
        }
        let rec: FlatRecord =
            serde_json::from_str(line).map_err(|e| CorpusError::Parse {
                path: display.clone(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        out.push(DatasetRecord {
            id: rec.id,
            text: rec.text,
            label: rec.label,
            round: rec.round.unwrap_or(1),
            split: rec.split,
            label_name: rec.label_name,
        });
    }
    Ok(out)
}

/// Write records as line-delimited JSON, one record per line, in order.
pub fn write_dataset(records: &[DatasetRecord], path: &Path) -> Result<(), CorpusError> {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(rec).expect("record serialize"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Truncate every per-label training pool to exactly `k` texts via seeded
/// uniform sampling without replacement. Selected texts keep pool order.
/// The same `(plan, k, seed)` always yields the same plan.
pub fn sample_k_shot(plan: &RoundPlan, k: usize, seed: u64) -> Result<RoundPlan, CorpusError> {
    if k == 0 {
        return Err(CorpusError::ZeroShotSample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = plan.clone();
    for spec in &mut out.rounds {
        // BTreeMap iteration gives a stable label order regardless of file order.
        for (label, pool) in spec.train.iter_mut() {
            if pool.len() < k {
                return Err(CorpusError::NotEnoughTrain {
                    label: label.clone(),
                    have: pool.len(),
                    need: k,
                });
            }
            if pool.len() > k {
                let mut picked: Vec<usize> = index_sample(&mut rng, pool.len(), k).into_vec();
                picked.sort_unstable();
                *pool = picked.into_iter().map(|i| pool[i].clone()).collect();
            }
        }
    }
    Ok(out)
}

/// Assign labels of a flat (round-free) record list to rounds and optionally
/// carve a fixed train/test split per label. Label-to-round assignment
/// shuffles the distinct labels (first-seen order) with the seed and deals
/// them out per `per_round_counts`; when counts are absent, labels spread as
/// evenly as possible with earlier rounds taking the remainder.
pub fn split_into_rounds(
    records: &[DatasetRecord],
    num_rounds: u32,
    per_round_counts: Option<&[usize]>,
    train_per_label: Option<usize>,
    seed: u64,
) -> Result<Vec<DatasetRecord>, CorpusError> {
    if num_rounds == 0 {
        return Err(CorpusError::NoRounds);
    }
    let mut label_first_seen: Vec<String> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for rec in records {
        if seen.insert(rec.label.clone()) {
            label_first_seen.push(rec.label.clone());
        }
    }
    if label_first_seen.is_empty() {
        return Err(CorpusError::NoRounds);
    }

    let counts: Vec<usize> = match per_round_counts {
        Some(c) => {
            let sum: usize = c.iter().sum();
            if c.len() != num_rounds as usize || sum != label_first_seen.len() {
                return Err(CorpusError::BadLabelCounts {
                    counts: c.to_vec(),
                    sum,
                    labels: label_first_seen.len(),
                });
            }
            c.to_vec()
        }
        None => {
            let n = label_first_seen.len();
            let r = num_rounds as usize;
            (0..r).map(|i| n / r + usize::from(i < n % r)).collect()
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = label_first_seen;
    use rand::seq::SliceRandom;
    shuffled.shuffle(&mut rng);

    let mut label_round: BTreeMap<String, u32> = BTreeMap::new();
    let mut cursor = 0usize;
    for (i, count) in counts.iter().enumerate() {
        for label in &shuffled[cursor..cursor + count] {
            label_round.insert(label.clone(), i as u32 + 1);
        }
        cursor += count;
    }

    let mut out: Vec<DatasetRecord> = records
        .iter()
        .map(|rec| {
            let mut rec = rec.clone();
            rec.round = label_round[&rec.label];
            rec
        })
        .collect();

    if let Some(m) = train_per_label {
        let mut per_label: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, rec) in out.iter().enumerate() {
            per_label.entry(rec.label.clone()).or_default().push(i);
        }
        for (label, indices) in per_label {
            if indices.len() < m {
                return Err(CorpusError::NotEnoughTrain {
                    label,
                    have: indices.len(),
                    need: m,
                });
            }
            let mut picked: Vec<usize> = index_sample(&mut rng, indices.len(), m).into_vec();
            picked.sort_unstable();
            let picked: BTreeSet<usize> = picked.into_iter().map(|i| indices[i]).collect();
            for &i in &indices {
                out[i].split = Some(if picked.contains(&i) { "train" } else { "test" }.into());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_jsonl(lines: &[serde_json::Value]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f.flush().unwrap();
        f
    }

    #[test]
    fn tokenize_lowercases_and_drops_punctuation() {
        assert_eq!(tokenize("Machine Learning, ML!"), vec!["machine", "learning", "ml"]);
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("TF-IDF score"), vec!["tf", "idf", "score"]);
    }

    #[test]
    fn tokenize_is_stable_on_its_own_output() {
        let tokens = tokenize("Quantum Error-Correction of qubits!");
        let rejoined = tokens.join(" ");
        assert_eq!(tokenize(&rejoined), tokens);
    }

    #[test]
    fn normalize_keyword_canonicalizes() {
        assert_eq!(normalize_keyword("  Quantum  Error Correction "), "quantum error correction");
        assert_eq!(normalize_keyword("ML!"), "ml");
    }

    #[test]
    fn contiguous_count_finds_phrases() {
        let tokens = tokenize("a b c a b a");
        assert_eq!(contiguous_count(&tokens, "a b"), 2);
        assert_eq!(contiguous_count(&tokens, "a"), 3);
        assert_eq!(contiguous_count(&tokens, "c a b"), 1);
        assert_eq!(contiguous_count(&tokens, "b c a b a z"), 0);
    }

    fn record(id: &str, label: &str, round: u32, split: &str) -> serde_json::Value {
        serde_json::json!({
            "id": id, "text": format!("text about {label}"), "label": label,
            "round": round, "split": split
        })
    }

    #[test]
    fn load_dataset_builds_round_plan() {
        // Shape of a four-round dataset: 32/53/30/18 labels per round.
        let per_round = [32usize, 53, 30, 18];
        let mut lines = Vec::new();
        for (r, count) in per_round.iter().enumerate() {
            for l in 0..*count {
                let label = format!("label-r{}-{:02}", r + 1, l);
                lines.push(record(&format!("t-{}-{}", r + 1, l), &label, r as u32 + 1, "train"));
                lines.push(record(&format!("q-{}-{}", r + 1, l), &label, r as u32 + 1, "test"));
            }
        }
        let f = write_jsonl(&lines);
        let plan = load_dataset(f.path(), DatasetFormat::Jsonl).unwrap();
        assert_eq!(plan.num_rounds(), 4);
        assert_eq!(plan.cumulative_labels(4).len(), 133);
        assert_eq!(plan.rounds[1].new_labels.len(), 53);
        assert_eq!(plan.rounds[3].test.len(), 18);
    }

    #[test]
    fn load_dataset_rejects_empty_file() {
        let f = write_jsonl(&[]);
        match load_dataset(f.path(), DatasetFormat::Jsonl) {
            Err(CorpusError::NoRounds) => {}
            other => panic!("expected NoRounds, got {other:?}"),
        }
    }

    #[test]
    fn load_dataset_accepts_single_label_single_text() {
        let f = write_jsonl(&[record("t1", "only", 1, "train")]);
        let plan = load_dataset(f.path(), DatasetFormat::Jsonl).unwrap();
        assert_eq!(plan.num_rounds(), 1);
        assert_eq!(plan.cumulative_labels(1), vec!["only"]);
    }

    #[test]
    fn load_dataset_rejects_label_in_two_rounds() {
        let f = write_jsonl(&[record("t1", "dup", 1, "train"), record("t2", "dup", 2, "train")]);
        match load_dataset(f.path(), DatasetFormat::Jsonl) {
            Err(CorpusError::LabelInTwoRounds { label, first, second }) => {
                assert_eq!(label, "dup");
                assert_eq!((first, second), (1, 2));
            }
            other => panic!("expected LabelInTwoRounds, got {other:?}"),
        }
    }

    #[test]
    fn load_dataset_rejects_duplicate_ids_and_bad_split() {
        let f = write_jsonl(&[record("t1", "a", 1, "train"), record("t1", "a", 1, "train")]);
        assert!(matches!(
            load_dataset(f.path(), DatasetFormat::Jsonl),
            Err(CorpusError::DuplicateTextId(_))
        ));
        let f = write_jsonl(&[record("t1", "a", 1, "dev")]);
        assert!(matches!(
            load_dataset(f.path(), DatasetFormat::Jsonl),
            Err(CorpusError::Parse { .. })
        ));
    }

    #[test]
    fn load_dataset_rejects_round_gaps() {
        let f = write_jsonl(&[record("t1", "a", 1, "train"), record("t2", "b", 3, "train")]);
        assert!(matches!(
            load_dataset(f.path(), DatasetFormat::Jsonl),
            Err(CorpusError::NonContiguousRounds(_))
        ));
    }

    fn pool_plan(pool: usize) -> RoundPlan {
        let mut lines = Vec::new();
        for i in 0..pool {
            lines.push(record(&format!("t{i}"), "a", 1, "train"));
        }
        let f = write_jsonl(&lines);
        load_dataset(f.path(), DatasetFormat::Jsonl).unwrap()
    }

    #[test]
    fn sample_k_shot_picks_exactly_k_deterministically() {
        let plan = pool_plan(12);
        let a = sample_k_shot(&plan, 5, 99).unwrap();
        let b = sample_k_shot(&plan, 5, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rounds[0].train["a"].len(), 5);
        let c = sample_k_shot(&plan, 5, 100).unwrap();
        assert_eq!(c.rounds[0].train["a"].len(), 5);
        // Selected ids preserve pool order.
        let ids: Vec<&str> = a.rounds[0].train["a"].iter().map(|d| d.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort_by_key(|id| id[1..].parse::<usize>().unwrap());
        assert_eq!(ids, sorted);
    }

    #[test]
    fn sample_k_shot_errors_name_the_label() {
        let plan = pool_plan(3);
        match sample_k_shot(&plan, 5, 1) {
            Err(CorpusError::NotEnoughTrain { label, have, need }) => {
                assert_eq!(label, "a");
                assert_eq!((have, need), (3, 5));
            }
            other => panic!("expected NotEnoughTrain, got {other:?}"),
        }
        assert!(matches!(sample_k_shot(&plan, 0, 1), Err(CorpusError::ZeroShotSample)));
    }

    fn flat_records(labels: usize, texts_per_label: usize) -> Vec<DatasetRecord> {
        let mut out = Vec::new();
        for l in 0..labels {
            for t in 0..texts_per_label {
                out.push(DatasetRecord {
                    id: format!("t-{l}-{t}"),
                    text: format!("body {l} {t}"),
                    label: format!("label-{l:02}"),
                    round: 0,
                    split: None,
                    label_name: None,
                });
            }
        }
        out
    }

    #[test]
    fn split_into_rounds_respects_counts_and_seed() {
        let records = flat_records(10, 4);
        let out = split_into_rounds(&records, 3, Some(&[4, 3, 3]), Some(2), 7).unwrap();
        let again = split_into_rounds(&records, 3, Some(&[4, 3, 3]), Some(2), 7).unwrap();
        assert_eq!(out, again);

        let mut labels_per_round: BTreeMap<u32, BTreeSet<&str>> = BTreeMap::new();
        for rec in &out {
            labels_per_round.entry(rec.round).or_default().insert(&rec.label);
        }
        assert_eq!(labels_per_round[&1].len(), 4);
        assert_eq!(labels_per_round[&2].len(), 3);
        assert_eq!(labels_per_round[&3].len(), 3);

        for l in 0..10 {
            let label = format!("label-{l:02}");
            let train = out
                .iter()
                .filter(|r| r.label == label && r.split.as_deref() == Some("train"))
                .count();
            assert_eq!(train, 2, "label {label} should have 2 train records");
        }
    }

    #[test]
    fn split_into_rounds_rejects_bad_counts() {
        let records = flat_records(10, 2);
        assert!(matches!(
            split_into_rounds(&records, 2, Some(&[4, 4]), None, 7),
            Err(CorpusError::BadLabelCounts { .. })
        ));
    }
}
