//! Keyword-list reply parsing.
//!
//! Model replies to the extraction prompt arrive as free text. The parser
//! accepts comma, semicolon, or newline separated lists, strips common list
//! markers, normalizes every item through the corpus tokenizer, and
//! deduplicates while preserving first-occurrence order. Anything that
//! normalizes to nothing is dropped, so a garbage reply degrades to an empty
//! list instead of an error.

use crate::corpus::normalize_keyword;

pub fn parse_keyword_reply(reply: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for (i, raw) in reply.split(['\n', ',', ';']).enumerate() {
        let mut item = raw.trim();
        if i == 0 {
            let lower = item.to_lowercase();
            if let Some(rest) = lower.strip_prefix("keywords:") {
                item = &item[item.len() - rest.len()..];
            }
        }
        let item = strip_list_marker(item);
        let normalized = normalize_keyword(item);
        if !normalized.is_empty() && !out.contains(&normalized) {
            out.push(normalized);
        }
    }
    out
}

fn strip_list_marker(item: &str) -> &str {
    let item = item.trim();
    for marker in ["- ", "* ", "• "] {
        if let Some(rest) = item.strip_prefix(marker) {
            return rest.trim();
        }
    }
    // Numbered markers: "1. foo", "12) foo".
    let digits = item.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &item[digits..];
        for sep in [". ", ") "] {
            if let Some(r) = rest.strip_prefix(sep) {
                return r.trim();
            }
        }
    }
    item
}
