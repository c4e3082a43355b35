use serde::{Deserialize, Serialize};

use super::{Concept, Fact, KgError, KnowledgeBase};

pub const KB_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Header { schema_version: u32, lexicon_seed: u64 },
    Concept(Concept),
    Fact(Fact),
}

/// One JSON record per line: a header, then concepts, then facts.
pub fn write_kb_jsonl(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    let mut push = |r: &Record| {
        out.push_str(&serde_json::to_string(r).expect("records always serialize"));
        out.push('\n');
    };
    push(&Record::Header { schema_version: KB_SCHEMA_VERSION, lexicon_seed: kb.lexicon_seed });
    for c in &kb.concepts {
        push(&Record::Concept(c.clone()));
    }
    for f in &kb.facts {
        push(&Record::Fact(f.clone()));
    }
    out
}

pub fn read_kb_jsonl(text: &str) -> Result<KnowledgeBase, KgError> {
    let mut kb = KnowledgeBase::default();
    let mut saw_header = false;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let line_no = i + 1;
        let record: Record =
            serde_json::from_str(line).map_err(|e| KgError::Parse { line: line_no, message: e.to_string() })?;
        match record {
            Record::Header { schema_version, lexicon_seed } => {
                if saw_header {
                    return Err(KgError::Parse { line: line_no, message: "duplicate header".into() });
                }
                if schema_version != KB_SCHEMA_VERSION {
                    return Err(KgError::Parse {
                        line: line_no,
                        message: format!("unsupported schema version {schema_version}"),
                    });
                }
                saw_header = true;
                kb.lexicon_seed = lexicon_seed;
            }
            _ if !saw_header => {
                return Err(KgError::Parse { line: line_no, message: "header record must come first".into() })
            }
            Record::Concept(c) => kb.concepts.push(c),
            Record::Fact(f) => kb.facts.push(f),
        }
    }
    if !saw_header {
        return Err(KgError::Parse { line: 0, message: "missing header record".into() });
    }
    kb.validate()?;
    Ok(kb)
}

#[cfg(test)]
mod tests {
    use super::super::{ConceptId, Predicate, Property, Quantifier};
    use super::*;

    fn sample() -> KnowledgeBase {
        KnowledgeBase::from_parts(
            vec![
                Concept { id: ConceptId(0), surface: "abmes".into(), parent: None },
                Concept { id: ConceptId(1), surface: "gruds".into(), parent: Some(ConceptId(0)) },
            ],
            vec![Fact::HasProperty {
                subject: ConceptId(0),
                property: Property { predicate: Predicate::Be, term: "rony".into() },
                quantifier: Quantifier::All,
            }],
            17,
        )
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let kb = sample();
        let text = write_kb_jsonl(&kb);
        assert!(text.starts_with(r#"{"record":"header","schema_version":1,"lexicon_seed":17}"#));
        assert_eq!(read_kb_jsonl(&text).unwrap(), kb);
    }

    #[test]
    fn header_required() {
        let text = write_kb_jsonl(&sample());
        let body: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_kb_jsonl(&body), Err(KgError::Parse { line: 1, .. })));
    }

    #[test]
    fn bad_json_reports_line() {
        let mut text = write_kb_jsonl(&sample());
        let bad = text.lines().count() + 1;
        text.push_str("{not json}\n");
        assert!(matches!(read_kb_jsonl(&text), Err(KgError::Parse { line, .. }) if line == bad));
    }
}
