//! LLM gateway: templating, backends, reply parsing, and audit logging.
//!
//! All model traffic flows through [`Gateway`], which renders the prompt,
//! dispatches to the configured backend (HTTP chat-completion or the
//! deterministic mock), parses the reply, and optionally appends one JSONL
//! record per exchange to an audit log. Extraction failures degrade: a reply
//! that parses to nothing yields an empty keyword list with a warning, only
//! transport-level failures surface as errors.

mod http;
mod mock;
mod parsing;
mod templates;

pub use http::{request_body, ChatMessage, HttpBackend, HttpConfig, SYSTEM_PREAMBLE};
pub use mock::{MockBackend, MockConfig, HALLUCINATION_SENTINEL, MOCK_RULE_VERSION};
pub use parsing::parse_keyword_reply;
pub use templates::{
    fill, PromptTemplate, TemplateId, Templates, EXTRACT_INSTRUCTION, TEMPLATE_VERSION,
};

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{LabelDef, TextDoc};

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unusable reply: {0}")]
    BadReply(String),
    #[error("audit log: {0}")]
    Audit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Http,
    Mock,
}

/// One logged model exchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmExchange {
    pub template_id: TemplateId,
    pub filled_prompt: String,
    pub raw_reply: String,
    pub backend: BackendKind,
    pub latency_ms: u64,
}

/// Structured classify call: the rendered prompt plus the slots it was
/// rendered from, so the mock can apply its scoring rule without parsing
/// prompt text.
#[derive(Debug)]
pub struct ClassifyRequest<'a> {
    pub prompt: &'a str,
    pub query_keywords: &'a [String],
    pub candidates: &'a [String],
    pub label_keywords: &'a BTreeMap<String, Vec<String>>,
}

#[derive(Debug)]
enum Backend {
    Http(HttpBackend),
    Mock(MockBackend),
}

/// Keywords generated for one label from its description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelGen {
    pub description: String,
    pub keywords: Vec<String>,
}

#[derive(Debug)]
pub struct Gateway {
    backend: Backend,
    templates: Templates,
    audit: Option<Mutex<BufWriter<File>>>,
}

impl Gateway {
    pub fn mock(config: MockConfig, fixture: &[TextDoc]) -> Self {
        Gateway {
            backend: Backend::Mock(MockBackend::new(config, fixture)),
            templates: Templates::default(),
            audit: None,
        }
    }

    pub fn http(config: HttpConfig) -> Result<Self, LlmError> {
        Ok(Gateway {
            backend: Backend::Http(HttpBackend::new(config)?),
            templates: Templates::default(),
            audit: None,
        })
    }

    pub fn with_audit_log(mut self, path: &Path) -> Result<Self, LlmError> {
        let file = File::create(path).map_err(|e| LlmError::Audit(e.to_string()))?;
        self.audit = Some(Mutex::new(BufWriter::new(file)));
        Ok(self)
    }

    pub fn kind(&self) -> BackendKind {
        match &self.backend {
            Backend::Http(_) => BackendKind::Http,
            Backend::Mock(_) => BackendKind::Mock,
        }
    }

    pub fn templates(&self) -> &Templates {
        &self.templates
    }

    /// Safe concurrency bound for the extraction phase.
    pub fn concurrency(&self) -> usize {
        match &self.backend {
            Backend::Http(b) => b.config().concurrency.max(1),
            Backend::Mock(_) => 1,
        }
    }

    fn log(&self, template_id: TemplateId, prompt: &str, reply: &str, started: Instant) {
        let Some(audit) = &self.audit else { return };
        let exchange = LlmExchange {
            template_id,
            filled_prompt: prompt.to_string(),
            raw_reply: reply.to_string(),
            backend: self.kind(),
            latency_ms: started.elapsed().as_millis() as u64,
        };
        let line = serde_json::to_string(&exchange).expect("exchange serializes");
        let mut w = audit.lock().expect("audit lock");
        if let Err(e) = writeln!(w, "{line}") {
            log::warn!("audit log write failed: {e}");
        }
        let _ = w.flush();
    }

    /// Extract keywords from a text. Unparseable replies degrade to an empty
    /// list; transport failures are errors.
    pub fn extract_keywords(&self, text: &str) -> Result<Vec<String>, LlmError> {
        debug_assert!(!text.trim().is_empty(), "extraction on empty text");
        let prompt = fill(&self.templates.extract.template, &[("text", text)]);
        let started = Instant::now();
        let reply = match &self.backend {
            Backend::Mock(b) => b.extract(text),
            Backend::Http(b) => b.complete(&prompt)?,
        };
        self.log(TemplateId::Extract, &prompt, &reply, started);
        let keywords = parse_keyword_reply(&reply);
        if keywords.is_empty() && !reply.trim().is_empty() {
            log::warn!("extraction reply parsed to no keywords: {reply:?}");
        }
        Ok(keywords)
    }

    /// Generate a description for a named label and extract its keywords.
    /// Labels without names yield `None`.
    pub fn generate_label_keywords(
        &self,
        label: &LabelDef,
    ) -> Result<Option<LabelGen>, LlmError> {
        let Some(name) = &label.name else {
            return Ok(None);
        };
        let prompt = fill(
            &self.templates.gen_label_description.template,
            &[("label_name", name)],
        );
        let started = Instant::now();
        let (description, keywords) = match &self.backend {
            Backend::Mock(b) => {
                let description = b.generate_description(name);
                let keywords = b.label_keywords(name);
                (description, keywords)
            }
            Backend::Http(b) => {
                let description = b.complete(&prompt)?;
                let keywords = self.extract_keywords(&description)?;
                (description, keywords)
            }
        };
        self.log(TemplateId::GenLabelDescription, &prompt, &description, started);
        Ok(Some(LabelGen {
            description,
            keywords,
        }))
    }

    /// Run the classify prompt; the raw reply comes back verbatim.
    pub fn classify(&self, request: &ClassifyRequest<'_>) -> Result<String, LlmError> {
        let started = Instant::now();
        let reply = match &self.backend {
            Backend::Mock(b) => b.classify(request),
            Backend::Http(b) => b.complete(request.prompt)?,
        };
        self.log(TemplateId::Classify, request.prompt, &reply, started);
        Ok(reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Vec<TextDoc> {
        vec![
            TextDoc::new("f1", "alpha beta common", None),
            TextDoc::new("f2", "gamma delta common", None),
            TextDoc::new("f3", "epsilon zeta common", None),
        ]
    }

    #[test]
    fn mock_gateway_extracts_and_normalizes() {
        // Threshold 0.5 over the 3-text fixture: df 1 is rare, df 3 is not.
        let config = MockConfig {
            df_threshold: 0.5,
            ..MockConfig::default()
        };
        let g = Gateway::mock(config, &fixture());
        let kws = g.extract_keywords("Alpha And Beta!").unwrap();
        assert_eq!(kws, vec!["alpha", "and", "beta"]);
        // Same input, same output.
        assert_eq!(g.extract_keywords("Alpha And Beta!").unwrap(), kws);
    }

    #[test]
    fn generate_label_keywords_uses_name_tokens() {
        let g = Gateway::mock(MockConfig::default(), &fixture());
        let label = LabelDef {
            id: "ml".into(),
            name: Some("Machine Learning".into()),
            round_introduced: 1,
        };
        let gen = g.generate_label_keywords(&label).unwrap().unwrap();
        assert_eq!(gen.description, "Machine Learning");
        assert_eq!(gen.keywords, vec!["machine", "learning"]);

        let unnamed = LabelDef {
            id: "x".into(),
            name: None,
            round_introduced: 1,
        };
        assert!(g.generate_label_keywords(&unnamed).unwrap().is_none());
    }

    #[test]
    fn audit_log_records_exchanges() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.jsonl");
        let g = Gateway::mock(MockConfig::default(), &fixture())
            .with_audit_log(&path)
            .unwrap();
        g.extract_keywords("alpha beta").unwrap();
        let candidates = vec!["a".to_string()];
        let keywords: Vec<String> = Vec::new();
        let glosses = BTreeMap::new();
        g.classify(&ClassifyRequest {
            prompt: "pick one",
            query_keywords: &keywords,
            candidates: &candidates,
            label_keywords: &glosses,
        })
        .unwrap();
        drop(g);

        let raw = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<LlmExchange> = raw
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].template_id, TemplateId::Extract);
        assert!(lines[0].filled_prompt.contains(EXTRACT_INSTRUCTION));
        assert_eq!(lines[1].template_id, TemplateId::Classify);
        assert_eq!(lines[1].raw_reply, "a");
    }
}
