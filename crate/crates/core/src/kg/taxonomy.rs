//! The bundled real-world taxonomy and its nonsense renaming.

use std::collections::BTreeMap;

use super::{Comparator, Concept, ConceptId, Fact, KgError, KnowledgeBase, Predicate, Property, Quantifier, Verb};
use crate::lexicon::{build_lexicon, Lexicon, PhonemeInventory};

pub const TAXONOMY: &str = include_str!("../../data/taxonomy.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonConcept {
    pub name: String,
    pub parent: Option<String>,
    /// `(predicate, term, negated)`
    pub properties: Vec<(Predicate, String, bool)>,
}

/// The taxonomy in real-world terms, before renaming.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Skeleton {
    pub concepts: Vec<SkeletonConcept>,
    /// `(subject, active, passive, object)`
    pub relations: Vec<(String, String, String, String)>,
    /// `(subject, dimension, object)`
    pub comparatives: Vec<(String, String, String)>,
}

fn parse_predicate(s: &str) -> Option<Predicate> {
    match s {
        "be" => Some(Predicate::Be),
        "have" => Some(Predicate::Have),
        "can" => Some(Predicate::Can),
        _ => None,
    }
}

impl Skeleton {
    pub fn parse(text: &str) -> Result<Self, KgError> {
        let mut sk = Skeleton::default();
        let mut section = "";
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| KgError::Parse { line: i + 1, message };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = match name {
                    "concepts" | "relations" | "comparatives" => name,
                    other => return Err(err(format!("unknown section `{other}`"))),
                };
                continue;
            }
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 `|`-separated fields, found {}", fields.len())));
            }
            match section {
                "concepts" => {
                    let mut properties = Vec::new();
                    for p in fields[2].split(';').map(str::trim).filter(|p| !p.is_empty()) {
                        let (negated, p) = match p.strip_prefix('!') {
                            Some(rest) => (true, rest),
                            None => (false, p),
                        };
                        let (pred, term) = p.split_once(':').ok_or_else(|| err(format!("bad property `{p}`")))?;
                        let pred = parse_predicate(pred).ok_or_else(|| err(format!("bad predicate `{pred}`")))?;
                        properties.push((pred, term.to_string(), negated));
                    }
                    sk.concepts.push(SkeletonConcept {
                        name: fields[0].to_string(),
                        parent: (fields[1] != "-").then(|| fields[1].to_string()),
                        properties,
                    });
                }
                "relations" => {
                    let (active, passive) =
                        fields[1].split_once('/').ok_or_else(|| err("expected active/passive".into()))?;
                    sk.relations.push((fields[0].into(), active.into(), passive.into(), fields[2].into()));
                }
                "comparatives" => sk.comparatives.push((fields[0].into(), fields[1].into(), fields[2].into())),
                _ => return Err(err("record outside of a section".into())),
            }
        }
        Ok(sk)
    }

    /// Every real-world term, keyed by role so that no nonsense word is
    /// shared between a noun, a property, a verb form or a dimension.
    pub fn lexicon_terms(&self) -> Vec<String> {
        let mut terms = Vec::new();
        let mut push = |t: String| {
            if !terms.contains(&t) {
                terms.push(t);
            }
        };
        for c in &self.concepts {
            push(format!("noun:{}", c.name));
        }
        for c in &self.concepts {
            for (_, term, _) in &c.properties {
                push(format!("prop:{term}"));
            }
        }
        for (_, active, passive, _) in &self.relations {
            push(format!("verb:{active}"));
            push(format!("verbpass:{passive}"));
        }
        for (_, dim, _) in &self.comparatives {
            push(format!("dim:{dim}"));
        }
        terms
    }

    /// Builds the knowledge base with every term replaced through `lexicon`.
    pub fn build(&self, lexicon: &Lexicon) -> Result<KnowledgeBase, KgError> {
        let word = |key: String| {
            lexicon.get(&key).map(str::to_string).ok_or_else(|| KgError::Invalid(format!("lexicon lacks `{key}`")))
        };
        let ids: BTreeMap<&str, ConceptId> =
            self.concepts.iter().enumerate().map(|(i, c)| (c.name.as_str(), ConceptId(i as u32))).collect();
        let id = |name: &str| ids.get(name).copied().ok_or_else(|| KgError::Invalid(format!("unknown concept `{name}`")));

        let mut concepts = Vec::new();
        let mut facts = Vec::new();
        for (i, c) in self.concepts.iter().enumerate() {
            let parent = c.parent.as_deref().map(id).transpose()?;
            concepts.push(Concept { id: ConceptId(i as u32), surface: word(format!("noun:{}", c.name))?, parent });
            for (predicate, term, negated) in &c.properties {
                facts.push(Fact::HasProperty {
                    subject: ConceptId(i as u32),
                    property: Property { predicate: *predicate, term: word(format!("prop:{term}"))? },
                    quantifier: if *negated { Quantifier::No } else { Quantifier::All },
                });
            }
        }
        for (s, active, passive, o) in &self.relations {
            facts.push(Fact::Relation {
                subject: id(s)?,
                verb: Verb { active: word(format!("verb:{active}"))?, passive: word(format!("verbpass:{passive}"))? },
                object: id(o)?,
            });
        }
        for (s, dim, o) in &self.comparatives {
            facts.push(Fact::Comparative {
                subject: id(s)?,
                comparator: Comparator::periphrastic(&word(format!("dim:{dim}"))?),
                object: id(o)?,
            });
        }
        let kb = KnowledgeBase::from_parts(concepts, facts, lexicon.seed)?;
        kb.closure()?;
        Ok(kb)
    }
}

/// The 110-concept semantic benchmark KB, renamed with a lexicon drawn from
/// `lexicon_seed`. Returns the lexicon too so the renaming can be audited.
pub fn semantic_kb(lexicon_seed: u64) -> Result<(KnowledgeBase, Lexicon), KgError> {
    let sk = Skeleton::parse(TAXONOMY)?;
    let lexicon = build_lexicon(&sk.lexicon_terms(), &PhonemeInventory::default(), lexicon_seed)
        .map_err(|e| KgError::Invalid(e.to_string()))?;
    let kb = sk.build(&lexicon)?;
    Ok((kb, lexicon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_taxonomy_has_110_concepts_with_1_to_6_properties() {
        let (kb, _) = semantic_kb(0).unwrap();
        assert_eq!(kb.concepts.len(), 110);
        for c in &kb.concepts {
            let n = kb.own_property_count(c.id);
            assert!((1..=6).contains(&n), "{} has {n} properties", c.surface);
        }
    }

    #[test]
    fn forest_depth_is_bounded() {
        let (kb, _) = semantic_kb(0).unwrap();
        assert!(kb.concepts.iter().all(|c| kb.ancestors(c.id).len() <= 4));
        assert_eq!(kb.concepts.iter().filter(|c| c.parent.is_none()).count(), 2);
    }

    #[test]
    fn renaming_is_deterministic_and_seed_dependent() {
        assert_eq!(semantic_kb(3).unwrap(), semantic_kb(3).unwrap());
        assert_ne!(semantic_kb(3).unwrap().0, semantic_kb(4).unwrap().0);
    }

    #[test]
    fn no_surface_word_is_english() {
        let (kb, lex) = semantic_kb(1).unwrap();
        let english = crate::lexicon::english_wordlist();
        assert!(kb.concepts.iter().all(|c| !english.contains(c.surface.as_str())));
        assert!(lex.len() > kb.concepts.len());
    }

    #[test]
    fn unknown_section_is_rejected() {
        assert!(matches!(Skeleton::parse("[mystery]\n"), Err(KgError::Parse { line: 1, .. })));
    }
}
