//! Run configuration, loaded from TOML.
//!
//! One file describes a whole run: the dataset, sampling, retrieval flavor,
//! ablation, evaluation policy, and the backend. The mock backend's marker
//! table lives in the config too, so a run is reproducible from the config
//! and the dataset alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::classify::Ablation;
use crate::corpus::{DatasetFormat, TextDoc};
use crate::llm::{Gateway, HttpConfig, MockConfig};
use crate::retrieval::PathDomain;

/// Which graph old test texts are re-evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EvalGraph {
    /// Current-round tests grow the graph online; earlier rounds' tests are
    /// then re-evaluated read-only against the grown graph.
    #[default]
    RoundEnd,
    /// Every evaluation, re-evaluations included, grows the live graph.
    Current,
}

impl std::str::FromStr for EvalGraph {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "round_end" | "round-end" => Ok(EvalGraph::RoundEnd),
            "current" => Ok(EvalGraph::Current),
            other => Err(format!(
                "unknown eval graph {other:?}, expected round-end or current"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    #[serde(default)]
    pub kind: BackendChoice,
    #[serde(default)]
    pub http: Option<HttpConfig>,
}

/// Mock backend knobs. `markers` is a list of `[phrase, label-id]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MockSection {
    #[serde(default)]
    pub df_threshold: Option<f64>,
    /// Force every n-th classification reply off the label space; 0 or
    /// absent means never.
    #[serde(default)]
    pub hallucinate_every: Option<u64>,
    #[serde(default)]
    pub markers: Vec<(String, String)>,
}

impl MockSection {
    pub fn to_mock_config(&self) -> MockConfig {
        let mut config = MockConfig::default();
        if let Some(t) = self.df_threshold {
            config.df_threshold = t;
        }
        config.hallucinate_every = match self.hallucinate_every {
            Some(0) | None => None,
            Some(n) => Some(n),
        };
        config.marker_labels = self
            .markers
            .iter()
            .cloned()
            .collect::<BTreeMap<String, String>>();
        config
    }
}

fn default_k_shot() -> usize {
    4
}

fn default_seed() -> u64 {
    42
}

fn default_workers() -> usize {
    1
}

fn default_format() -> DatasetFormat {
    DatasetFormat::Jsonl
}

fn default_paths() -> PathDomain {
    PathDomain::Mst
}

fn default_ablation() -> Ablation {
    Ablation::None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    #[serde(default = "default_format")]
    pub format: DatasetFormat,
    #[serde(default = "default_k_shot")]
    pub k_shot: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub paths: PathDomain,
    #[serde(default = "default_ablation")]
    pub ablation: Ablation,
    #[serde(default)]
    pub eval_graph: EvalGraph,
    /// Parallel workers for the keyword-extraction phase. Results commit in
    /// text order, so any value yields the same run.
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Write every prompt/reply exchange to `llm-audit.jsonl` in `out_dir`.
    #[serde(default)]
    pub audit_log: bool,
    #[serde(default)]
    pub backend: BackendSection,
    #[serde(default)]
    pub mock: MockSection,
}

impl RunConfig {
    /// A config pointing at a dataset, everything else default.
    pub fn for_dataset(dataset: impl Into<PathBuf>) -> Self {
        RunConfig {
            dataset: dataset.into(),
            format: default_format(),
            k_shot: default_k_shot(),
            seed: default_seed(),
            paths: default_paths(),
            ablation: default_ablation(),
            eval_graph: EvalGraph::default(),
            workers: default_workers(),
            out_dir: None,
            audit_log: false,
            backend: BackendSection::default(),
            mock: MockSection::default(),
        }
    }

    pub fn load(path: &Path) -> Result<RunConfig, HarnessError> {
        let raw = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut config: RunConfig =
            toml::from_str(&raw).map_err(|e| HarnessError::Config {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        // Relative paths in the file resolve against the file's directory.
        if config.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                config.dataset = dir.join(&config.dataset);
            }
        }
        if let Some(out_dir) = &config.out_dir {
            if out_dir.is_relative() {
                if let Some(dir) = path.parent() {
                    config.out_dir = Some(dir.join(out_dir));
                }
            }
        }
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        let raw = toml::to_string_pretty(self).map_err(|e| HarnessError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        std::fs::write(path, raw).map_err(|e| HarnessError::io(path, e))
    }

    /// Build the gateway this config describes. The mock backend gets the
    /// full dataset as its document-frequency fixture.
    pub fn build_gateway(&self, fixture: &[TextDoc]) -> Result<Gateway, HarnessError> {
        let gateway = match self.backend.kind {
            BackendChoice::Mock => Gateway::mock(self.mock.to_mock_config(), fixture),
            BackendChoice::Http => {
                let http = self.backend.http.clone().ok_or(HarnessError::MissingHttp)?;
                Gateway::http(http)?
            }
        };
        match (&self.out_dir, self.audit_log) {
            (Some(dir), true) => {
                let path = dir.join("llm-audit.jsonl");
                Ok(gateway.with_audit_log(&path)?)
            }
            _ => Ok(gateway),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toml_fills_defaults() {
        let config: RunConfig = toml::from_str("dataset = \"data.jsonl\"").unwrap();
        assert_eq!(config.k_shot, 4);
        assert_eq!(config.seed, 42);
        assert_eq!(config.paths, PathDomain::Mst);
        assert_eq!(config.ablation, Ablation::None);
        assert_eq!(config.eval_graph, EvalGraph::RoundEnd);
        assert_eq!(config.workers, 1);
        assert_eq!(config.backend.kind, BackendChoice::Mock);
        assert!(config.mock.markers.is_empty());
    }

    #[test]
    fn full_toml_round_trips() {
        let text = r#"
dataset = "synth/dataset.jsonl"
k_shot = 2
seed = 7
paths = "graph"
ablation = "offline"
eval_graph = "current"
workers = 4

[backend]
kind = "mock"

[mock]
df_threshold = 0.25
hallucinate_every = 10
markers = [["derby", "sports"], ["bond yields", "markets"]]
"#;
        let config: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(config.k_shot, 2);
        assert_eq!(config.paths, PathDomain::Graph);
        assert_eq!(config.ablation, Ablation::Offline);
        assert_eq!(config.eval_graph, EvalGraph::Current);
        let mock = config.mock.to_mock_config();
        assert_eq!(mock.df_threshold, 0.25);
        assert_eq!(mock.hallucinate_every, Some(10));
        assert_eq!(mock.marker_labels.get("derby").unwrap(), "sports");

        let dumped = toml::to_string_pretty(&config).unwrap();
        let reparsed: RunConfig = toml::from_str(&dumped).unwrap();
        assert_eq!(reparsed.mock.markers, config.mock.markers);
    }

    #[test]
    fn unknown_keys_are_rejected_loudly() {
        let err = toml::from_str::<RunConfig>("dataset = \"d\"\ntypo_key = 1").unwrap_err();
        assert!(err.to_string().contains("typo_key"));
    }

    #[test]
    fn zero_hallucinate_every_means_never() {
        let section = MockSection {
            hallucinate_every: Some(0),
            ..MockSection::default()
        };
        assert_eq!(section.to_mock_config().hallucinate_every, None);
    }

    #[test]
    fn http_kind_without_section_fails_gateway_build() {
        let mut config = RunConfig::for_dataset("d.jsonl");
        config.backend.kind = BackendChoice::Http;
        assert!(matches!(
            config.build_gateway(&[]),
            Err(HarnessError::MissingHttp)
        ));
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "dataset = \"data/x.jsonl\"\nout_dir = \"out\"").unwrap();
        let config = RunConfig::load(&path).unwrap();
        assert_eq!(config.dataset, dir.path().join("data/x.jsonl"));
        assert_eq!(config.out_dir.unwrap(), dir.path().join("out"));
    }
}
