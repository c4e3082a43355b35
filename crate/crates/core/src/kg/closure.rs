use std::collections::{BTreeMap, BTreeSet};

use super::{ConceptId, Direction, Fact, KgError, KnowledgeBase, Names, Phrasing, Quantifier, Statement};

/// Deductive closure of a knowledge base, as a sorted fact set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Closure {
    facts: BTreeSet<Fact>,
}

impl Closure {
    pub fn from_facts(facts: impl IntoIterator<Item = Fact>) -> Self {
        Self { facts: facts.into_iter().collect() }
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    /// Whether the statement's fact holds; direction and phrasing do not
    /// change truth.
    pub fn holds(&self, statement: &Statement) -> bool {
        self.contains(&statement.fact)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn about(&self, subject: ConceptId) -> impl Iterator<Item = &Fact> + '_ {
        self.facts.iter().filter(move |f| f.subject() == subject)
    }
}

/// Every fact derivable by `isa` transitivity and downward inheritance of
/// universal and negative properties, relations and comparatives.
/// Returned sorted; always a superset of `kb.facts`.
pub fn inheritance_closure(kb: &KnowledgeBase) -> Result<Vec<Fact>, KgError> {
    closure_of(&kb.facts, kb)
}

pub(super) fn closure_of(facts: &[Fact], names: &impl Names) -> Result<Vec<Fact>, KgError> {
    let mut supers: BTreeMap<ConceptId, Vec<ConceptId>> = BTreeMap::new();
    let mut inheritable: BTreeMap<ConceptId, Vec<&Fact>> = BTreeMap::new();
    let mut subjects = BTreeSet::new();
    for f in facts {
        subjects.insert(f.subject());
        match f {
            Fact::Isa { subject, object } => {
                supers.entry(*subject).or_default().push(*object);
                subjects.insert(*object);
            }
            f if f.is_inheritable() => inheritable.entry(f.subject()).or_default().push(f),
            _ => {}
        }
    }

    let mut out: BTreeSet<Fact> = facts.iter().cloned().collect();
    let mut memo: BTreeMap<ConceptId, BTreeSet<ConceptId>> = BTreeMap::new();
    for &s in &subjects {
        let ancestors = ancestors_of(s, &supers, &mut memo, &mut BTreeSet::new())?;
        for &a in &ancestors {
            out.insert(Fact::Isa { subject: s, object: a });
            for f in inheritable.get(&a).into_iter().flatten() {
                out.insert(f.with_subject(s));
            }
        }
    }

    check_consistency(&out, names)?;
    Ok(out.into_iter().collect())
}

fn ancestors_of(
    id: ConceptId,
    supers: &BTreeMap<ConceptId, Vec<ConceptId>>,
    memo: &mut BTreeMap<ConceptId, BTreeSet<ConceptId>>,
    visiting: &mut BTreeSet<ConceptId>,
) -> Result<BTreeSet<ConceptId>, KgError> {
    if let Some(done) = memo.get(&id) {
        return Ok(done.clone());
    }
    if !visiting.insert(id) {
        return Err(KgError::Invalid(format!("isa cycle through concept {}", id.0)));
    }
    let mut acc = BTreeSet::new();
    for &p in supers.get(&id).map(Vec::as_slice).unwrap_or(&[]) {
        if p == id {
            continue;
        }
        acc.insert(p);
        acc.extend(ancestors_of(p, supers, memo, visiting)?);
    }
    visiting.remove(&id);
    acc.remove(&id);
    memo.insert(id, acc.clone());
    Ok(acc)
}

fn check_consistency(facts: &BTreeSet<Fact>, names: &impl Names) -> Result<(), KgError> {
    for f in facts {
        if let Fact::HasProperty { subject, property, quantifier: Quantifier::All } = f {
            let negated = Fact::HasProperty {
                subject: *subject,
                property: property.clone(),
                quantifier: Quantifier::No,
            };
            if facts.contains(&negated) {
                return Err(KgError::ContradictionDetected {
                    subject: names.name(*subject).to_string(),
                    property: property.term.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Test statements for a category whose only training fact is its parent
/// link: every closure fact about `target` that follows from that link and
/// the rest of the KB. The parent link itself is tested as a rephrasing.
pub fn category_holdout_tests(kb: &KnowledgeBase, target: ConceptId) -> Result<Vec<Statement>, KgError> {
    let parent = kb
        .concept(target)
        .parent
        .ok_or_else(|| KgError::NoParent(kb.concept(target).surface.clone()))?;
    let parent_link = Fact::Isa { subject: target, object: parent };
    let visible: Vec<Fact> = kb
        .facts
        .iter()
        .filter(|f| !f.mentions(target) || **f == parent_link)
        .cloned()
        .collect();
    let closure = closure_of(&visible, kb)?;
    Ok(closure
        .into_iter()
        .filter(|f| f.subject() == target)
        .map(|f| {
            let phrasing = if f == parent_link { Phrasing::Alternate } else { Phrasing::Canonical };
            Statement::new(f, Direction::Forward, phrasing)
        })
        .collect())
}
