//! Augmentation prompt templates, kept byte-for-byte in `data/prompts`.

use std::collections::BTreeMap;

use crate::hashing::sha256_hex;

pub const LOCAL_PROMPT: &str = include_str!("../../data/prompts/local.txt");
pub const GLOBAL_PROMPT: &str = include_str!("../../data/prompts/global.txt");
pub const DOCUMENT_PROMPT: &str = include_str!("../../data/prompts/document.txt");

/// Replaces `{name}` placeholders in one left-to-right pass, so braces in
/// substituted text are never re-expanded.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    'scan: while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        for (name, value) in values {
            if let Some(after) = tail.strip_prefix('{').and_then(|t| t.strip_prefix(name)).and_then(|t| t.strip_prefix('}')) {
                out.push_str(value);
                rest = after;
                continue 'scan;
            }
        }
        out.push('{');
        rest = &tail[1..];
    }
    out.push_str(rest);
    out
}

pub fn local_prompt(sentence: &str) -> String {
    fill(LOCAL_PROMPT, &[("text_to_augment", sentence)])
}

pub fn global_prompt(full_context: &str, target_document: &str) -> String {
    fill(GLOBAL_PROMPT, &[("full_context", full_context), ("target_document", target_document)])
}

/// The document template has no placeholder; the document follows it.
pub fn document_prompt(document: &str) -> String {
    format!("{DOCUMENT_PROMPT}{document}")
}

/// SHA-256 of each template, for manifests.
pub fn template_hashes() -> BTreeMap<String, String> {
    [("document", DOCUMENT_PROMPT), ("global", GLOBAL_PROMPT), ("local", LOCAL_PROMPT)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), sha256_hex(v.as_bytes())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_prompt_ends_with_quoted_statement() {
        let p = local_prompt("trillips are taller than zax.");
        assert!(p.starts_with("Please generate possible novel statements and rephrasings"));
        assert!(p.ends_with("\nStatement: \"trillips are taller than zax.\""));
        assert!(p.contains("\nInferences: trillips have greater height than zax. zax are shorter than trillips."));
    }

    #[test]
    fn global_prompt_places_context_before_target() {
        let p = global_prompt("DOC ONE\n\nDOC TWO", "TARGET {full_context}");
        let (one, two, target) = (p.find("DOC ONE").unwrap(), p.find("DOC TWO").unwrap(), p.find("TARGET").unwrap());
        assert!(one < two && two < target);
        assert!(p.ends_with("TARGET {full_context}\n"));
    }

    #[test]
    fn fill_leaves_unknown_braces() {
        assert_eq!(fill("a {b} {c}", &[("b", "x")]), "a x {c}");
    }
}
