//! Semantic hierarchy, ground truth and statement rendering.

mod closure;
mod entail;
mod io;
pub mod taxonomy;
mod template;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use closure::{category_holdout_tests, inheritance_closure, Closure};
pub use entail::{as_categorical, entails, ModelChecker, Semantics, Term};
pub use io::{read_kb_jsonl, write_kb_jsonl, KB_SCHEMA_VERSION};
pub use template::{render_fact, PatternRewriter};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum KgError {
    #[error("closure is contradictory: `{subject}` both has and lacks `{property}`")]
    ContradictionDetected { subject: String, property: String },
    #[error("no reverse phrasing registered for {0}")]
    NoReverseForm(String),
    #[error("concept `{0}` has no parent")]
    NoParent(String),
    #[error("invalid knowledge base: {0}")]
    Invalid(String),
    #[error("knowledge base parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub u32);

impl ConceptId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: ConceptId,
    pub surface: String,
    pub parent: Option<ConceptId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    All,
    Some,
    No,
}

impl Quantifier {
    pub const ALL: [Quantifier; 3] = [Quantifier::All, Quantifier::Some, Quantifier::No];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Be,
    Have,
    Can,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Property {
    pub predicate: Predicate,
    pub term: String,
}

/// A transitive verb with its passive participle stored separately, since
/// nonsense words are never inflected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Verb {
    pub active: String,
    pub passive: String,
}

/// Forward and inverse comparative phrases, e.g. `more dangerous` /
/// `less dangerous` or `brighter` / `darker`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Comparator {
    pub more: String,
    pub less: String,
}

impl Comparator {
    pub fn new(more: impl Into<String>, less: impl Into<String>) -> Self {
        Self { more: more.into(), less: less.into() }
    }

    /// `more <dimension>` / `less <dimension>`.
    pub fn periphrastic(dimension: &str) -> Self {
        Self::new(format!("more {dimension}"), format!("less {dimension}"))
    }

    /// The dimension word of a periphrastic comparator.
    pub fn dimension(&self) -> Option<&str> {
        self.more.strip_prefix("more ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fact {
    Isa { subject: ConceptId, object: ConceptId },
    HasProperty { subject: ConceptId, property: Property, quantifier: Quantifier },
    Relation { subject: ConceptId, verb: Verb, object: ConceptId },
    Comparative { subject: ConceptId, comparator: Comparator, object: ConceptId },
    /// Quantified statement between two plain terms, as used by syllogisms.
    Categorical { quantifier: Quantifier, subject: ConceptId, object: ConceptId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactKind {
    Isa,
    Property,
    Relation,
    Comparative,
    Categorical,
}

impl fmt::Display for FactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FactKind::Isa => "isa",
            FactKind::Property => "property",
            FactKind::Relation => "relation",
            FactKind::Comparative => "comparative",
            FactKind::Categorical => "categorical",
        })
    }
}

impl Fact {
    pub fn kind(&self) -> FactKind {
        match self {
            Fact::Isa { .. } => FactKind::Isa,
            Fact::HasProperty { .. } => FactKind::Property,
            Fact::Relation { .. } => FactKind::Relation,
            Fact::Comparative { .. } => FactKind::Comparative,
            Fact::Categorical { .. } => FactKind::Categorical,
        }
    }

    pub fn subject(&self) -> ConceptId {
        match self {
            Fact::Isa { subject, .. }
            | Fact::HasProperty { subject, .. }
            | Fact::Relation { subject, .. }
            | Fact::Comparative { subject, .. }
            | Fact::Categorical { subject, .. } => *subject,
        }
    }

    /// The second concept a fact mentions, if any.
    pub fn object_concept(&self) -> Option<ConceptId> {
        match self {
            Fact::Isa { object, .. }
            | Fact::Relation { object, .. }
            | Fact::Comparative { object, .. }
            | Fact::Categorical { object, .. } => Some(*object),
            Fact::HasProperty { .. } => None,
        }
    }

    pub fn mentions(&self, id: ConceptId) -> bool {
        self.subject() == id || self.object_concept() == Some(id)
    }

    /// Whether the fact passes down `isa` links to subcategories.
    pub fn is_inheritable(&self) -> bool {
        match self {
            Fact::HasProperty { quantifier, .. } => *quantifier != Quantifier::Some,
            Fact::Relation { .. } | Fact::Comparative { .. } => true,
            Fact::Isa { .. } | Fact::Categorical { .. } => false,
        }
    }

    pub fn with_subject(&self, subject: ConceptId) -> Fact {
        let mut fact = self.clone();
        match &mut fact {
            Fact::Isa { subject: s, .. }
            | Fact::HasProperty { subject: s, .. }
            | Fact::Relation { subject: s, .. }
            | Fact::Comparative { subject: s, .. }
            | Fact::Categorical { subject: s, .. } => *s = subject,
        }
        fact
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

/// Which row of the template table renders a statement. Training text only
/// ever uses `Canonical`; `Alternate` produces same-direction rephrasings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Phrasing {
    #[default]
    Canonical,
    Alternate,
}

/// Resolves concept ids to surface words.
pub trait Names {
    fn name(&self, id: ConceptId) -> &str;
}

impl Names for [String] {
    fn name(&self, id: ConceptId) -> &str {
        &self[id.index()]
    }
}

impl Names for Vec<String> {
    fn name(&self, id: ConceptId) -> &str {
        &self[id.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Statement {
    pub fact: Fact,
    pub direction: Direction,
    #[serde(default)]
    pub phrasing: Phrasing,
}

impl Statement {
    pub fn forward(fact: Fact) -> Self {
        Self { fact, direction: Direction::Forward, phrasing: Phrasing::Canonical }
    }

    pub fn new(fact: Fact, direction: Direction, phrasing: Phrasing) -> Self {
        Self { fact, direction, phrasing }
    }

    /// Same fact, entities in the opposite order. Every fact kind has a
    /// registered inverse phrasing, so this never fails for statements
    /// built by this crate; [`Statement::try_reverse`] is the checked form.
    pub fn reverse(&self) -> Statement {
        self.try_reverse().expect("every fact kind has a reverse template")
    }

    pub fn try_reverse(&self) -> Result<Statement, KgError> {
        if !template::has_reverse(&self.fact) {
            return Err(KgError::NoReverseForm(self.fact.kind().to_string()));
        }
        Ok(Statement { direction: self.direction.flip(), ..self.clone() })
    }

    pub fn render(&self, names: &(impl Names + ?Sized)) -> String {
        render_fact(&self.fact, self.direction, self.phrasing, names)
    }
}

/// Categories, facts, and the template table that renders them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    pub concepts: Vec<Concept>,
    pub facts: Vec<Fact>,
    /// Seed of the lexicon that produced the surface words.
    pub lexicon_seed: u64,
}

impl Names for KnowledgeBase {
    fn name(&self, id: ConceptId) -> &str {
        &self.concepts[id.index()].surface
    }
}

impl KnowledgeBase {
    /// Builds a KB whose `isa` facts are derived from the parent links.
    pub fn from_parts(concepts: Vec<Concept>, mut other_facts: Vec<Fact>, lexicon_seed: u64) -> Result<Self, KgError> {
        let mut facts: Vec<Fact> = concepts
            .iter()
            .filter_map(|c| c.parent.map(|p| Fact::Isa { subject: c.id, object: p }))
            .collect();
        facts.append(&mut other_facts);
        let kb = Self { concepts, facts, lexicon_seed };
        kb.validate()?;
        Ok(kb)
    }

    pub fn concept(&self, id: ConceptId) -> &Concept {
        &self.concepts[id.index()]
    }

    pub fn find(&self, surface: &str) -> Option<ConceptId> {
        self.concepts.iter().find(|c| c.surface == surface).map(|c| c.id)
    }

    pub fn children(&self, id: ConceptId) -> impl Iterator<Item = ConceptId> + '_ {
        self.concepts.iter().filter(move |c| c.parent == Some(id)).map(|c| c.id)
    }

    pub fn is_leaf(&self, id: ConceptId) -> bool {
        self.children(id).next().is_none()
    }

    /// Parent chain, nearest first.
    pub fn ancestors(&self, id: ConceptId) -> Vec<ConceptId> {
        let mut out = Vec::new();
        let mut cur = self.concept(id).parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.concept(p).parent;
        }
        out
    }

    pub fn own_facts(&self, id: ConceptId) -> impl Iterator<Item = &Fact> + '_ {
        self.facts.iter().filter(move |f| f.subject() == id)
    }

    pub fn own_property_count(&self, id: ConceptId) -> usize {
        self.own_facts(id).filter(|f| f.kind() == FactKind::Property).count()
    }

    pub fn closure(&self) -> Result<Closure, KgError> {
        Ok(Closure::from_facts(inheritance_closure(self)?))
    }

    /// Checks ids, acyclic parent links and agreement between parent
    /// links and `isa` facts.
    pub fn validate(&self) -> Result<(), KgError> {
        let n = self.concepts.len();
        for (i, c) in self.concepts.iter().enumerate() {
            if c.id.index() != i {
                return Err(KgError::Invalid(format!("concept `{}` has id {} at position {i}", c.surface, c.id.0)));
            }
            if c.parent.is_some_and(|p| p.index() >= n) {
                return Err(KgError::Invalid(format!("concept `{}` has unknown parent", c.surface)));
            }
        }
        for c in &self.concepts {
            let mut seen = BTreeSet::from([c.id]);
            let mut cur = c.parent;
            while let Some(p) = cur {
                if !seen.insert(p) {
                    return Err(KgError::Invalid(format!("parent cycle through `{}`", c.surface)));
                }
                cur = self.concepts[p.index()].parent;
            }
        }
        let surfaces: BTreeSet<_> = self.concepts.iter().map(|c| c.surface.as_str()).collect();
        if surfaces.len() != n {
            return Err(KgError::Invalid("duplicate concept surface".into()));
        }
        let parent_edges: BTreeMap<ConceptId, ConceptId> =
            self.concepts.iter().filter_map(|c| c.parent.map(|p| (c.id, p))).collect();
        let mut isa_edges = BTreeMap::new();
        for f in &self.facts {
            if f.subject().index() >= n || f.object_concept().is_some_and(|o| o.index() >= n) {
                return Err(KgError::Invalid(format!("fact refers to unknown concept: {f:?}")));
            }
            if let Fact::Isa { subject, object } = f {
                isa_edges.insert(*subject, *object);
            }
        }
        if isa_edges != parent_edges {
            return Err(KgError::Invalid("isa facts disagree with parent links".into()));
        }
        Ok(())
    }

    /// Forward/reverse pattern pairs for every verb and comparator in the
    /// KB plus the fixed templates, for use by template-aware mocks.
    pub fn rewriter(&self) -> PatternRewriter {
        PatternRewriter::for_facts(&self.facts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        ["gruds", "abmes", "telk", "femp", "glon"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn isa_reverses_to_include() {
        let s = Statement::forward(Fact::Isa { subject: ConceptId(0), object: ConceptId(1) });
        assert_eq!(s.render(&names()), "gruds are a type of abmes");
        assert_eq!(s.reverse().render(&names()), "abmes include gruds");
    }

    #[test]
    fn comparative_reverses_with_inverse_phrase() {
        let s = Statement::forward(Fact::Comparative {
            subject: ConceptId(3),
            comparator: Comparator::periphrastic("dangerous"),
            object: ConceptId(4),
        });
        assert_eq!(s.render(&names()), "femp are more dangerous than glon");
        assert_eq!(s.reverse().render(&names()), "glon are less dangerous than femp");
    }

    #[test]
    fn reverse_is_an_involution() {
        let facts = [
            Fact::Isa { subject: ConceptId(0), object: ConceptId(1) },
            Fact::HasProperty {
                subject: ConceptId(0),
                property: Property { predicate: Predicate::Be, term: "rony".into() },
                quantifier: Quantifier::No,
            },
            Fact::Relation {
                subject: ConceptId(0),
                verb: Verb { active: "blick".into(), passive: "blicked".into() },
                object: ConceptId(2),
            },
            Fact::Categorical { quantifier: Quantifier::Some, subject: ConceptId(3), object: ConceptId(4) },
        ];
        for fact in facts {
            for phrasing in [Phrasing::Canonical, Phrasing::Alternate] {
                let s = Statement::new(fact.clone(), Direction::Forward, phrasing);
                assert_eq!(s.reverse().reverse(), s);
                assert_ne!(s.reverse().render(&names()), s.render(&names()));
            }
        }
    }

    #[test]
    fn validate_rejects_cycles() {
        let concepts = vec![
            Concept { id: ConceptId(0), surface: "a".into(), parent: Some(ConceptId(1)) },
            Concept { id: ConceptId(1), surface: "b".into(), parent: Some(ConceptId(0)) },
        ];
        assert!(matches!(KnowledgeBase::from_parts(concepts, vec![], 0), Err(KgError::Invalid(_))));
    }
}
