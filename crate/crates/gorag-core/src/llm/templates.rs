//! Prompt templates, version-pinned.
//!
//! Template texts are part of the library's deterministic surface: byte
//! changes here change prompts, mock behavior stays keyed to slots only.
//! `TEMPLATE_VERSION` bumps whenever any template text changes.

use serde::{Deserialize, Serialize};

pub const TEMPLATE_VERSION: &str = "1";

/// Core instruction of the keyword-extraction prompt. Kept verbatim in the
/// extraction template; tests assert containment.
pub const EXTRACT_INSTRUCTION: &str =
    "Please extract some keywords from the following passage";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Extract,
    GenLabelDescription,
    Classify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub template: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Templates {
    pub extract: PromptTemplate,
    pub gen_label_description: PromptTemplate,
    pub classify: PromptTemplate,
}

impl Default for Templates {
    fn default() -> Self {
        Templates {
            extract: PromptTemplate {
                id: TemplateId::Extract,
                template: format!(
                    "{EXTRACT_INSTRUCTION}. Reply with a comma-separated list of keywords and nothing else.\n\nPassage:\n{{text}}\n"
                ),
            },
            gen_label_description: PromptTemplate {
                id: TemplateId::GenLabelDescription,
                template: "Write one or two sentences describing what a document of the category \"{label_name}\" is about. Reply with the description only.\n".into(),
            },
            classify: PromptTemplate {
                id: TemplateId::Classify,
                template: "Classify into exactly one of the candidate labels.\n\n{text_section}Keywords: {keywords}\n\nCandidate labels:\n{candidates}\n{label_keywords_section}Reply with the chosen label exactly as written above, and nothing else.\n".into(),
            },
        }
    }
}

/// Fill `{slot}` markers in a template. Unknown markers stay verbatim, which
/// keeps filling total; tests pin the rendered bytes.
pub fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in slots {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extract_template_contains_instruction_verbatim() {
        let t = Templates::default();
        assert!(t.extract.template.contains(EXTRACT_INSTRUCTION));
    }

    #[test]
    fn fill_replaces_all_slots() {
        let out = fill("a {x} b {y} {x}", &[("x", "1"), ("y", "2")]);
        assert_eq!(out, "a 1 b 2 1");
    }

    #[test]
    fn classify_template_has_all_slots() {
        let t = Templates::default().classify.template;
        for slot in ["{text_section}", "{keywords}", "{candidates}", "{label_keywords_section}"] {
            assert!(t.contains(slot), "missing {slot}");
        }
    }
}
