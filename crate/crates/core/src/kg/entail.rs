//! Finite-model entailment for quantified statements.
//!
//! With only `all`, `some` and `no`, a model is determined up to
//! isomorphism by which Venn regions of the terms are occupied. The checker
//! enumerates every set of occupied regions that fits in a universe of at
//! most `max_universe` elements and looks for a model of the premises that
//! falsifies the candidate.

use std::collections::BTreeMap;

use super::{Fact, KgError, Property, Quantifier, Statement};

/// A term that a quantified statement ranges over.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Concept(super::ConceptId),
    Property(Property),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Semantics {
    /// Terms may denote the empty set; `all` carries no existential import.
    #[default]
    EmptyTermsAllowed,
    /// Every term denotes a non-empty set.
    ExistentialImport,
}

/// Reads a fact as a quantified statement between two terms. Relations and
/// comparatives have no such reading.
pub fn as_categorical(fact: &Fact) -> Option<(Quantifier, Term, Term)> {
    match fact {
        Fact::Categorical { quantifier, subject, object } => {
            Some((*quantifier, Term::Concept(*subject), Term::Concept(*object)))
        }
        Fact::Isa { subject, object } => Some((Quantifier::All, Term::Concept(*subject), Term::Concept(*object))),
        Fact::HasProperty { subject, property, quantifier } => {
            Some((*quantifier, Term::Concept(*subject), Term::Property(property.clone())))
        }
        Fact::Relation { .. } | Fact::Comparative { .. } => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelChecker {
    max_universe: usize,
    semantics: Semantics,
}

/// Default universe bound.
pub const DEFAULT_MAX_UNIVERSE: usize = 4;
const MAX_TERMS: usize = 10;

impl Default for ModelChecker {
    fn default() -> Self {
        Self { max_universe: DEFAULT_MAX_UNIVERSE, semantics: Semantics::default() }
    }
}

impl ModelChecker {
    pub fn new(max_universe: usize, semantics: Semantics) -> Result<Self, KgError> {
        if max_universe < 3 {
            return Err(KgError::Invalid(format!("max_universe must be at least 3, got {max_universe}")));
        }
        Ok(Self { max_universe, semantics })
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn entails(&self, premises: &[Statement], candidate: &Statement) -> bool {
        let Some(goal) = as_categorical(&candidate.fact) else {
            return premises.iter().any(|p| p.fact == candidate.fact);
        };
        let given: Vec<_> = premises.iter().filter_map(|p| as_categorical(&p.fact)).collect();

        let mut index: BTreeMap<Term, usize> = BTreeMap::new();
        let mut encode = |t: &Term| {
            let next = index.len();
            *index.entry(t.clone()).or_insert(next)
        };
        let encoded: Vec<(Quantifier, usize, usize)> =
            given.iter().map(|(q, a, b)| (*q, encode(a), encode(b))).collect();
        let goal = (goal.0, encode(&goal.1), encode(&goal.2));
        let n_terms = index.len();
        assert!(n_terms <= MAX_TERMS, "entailment over {n_terms} terms is not supported");

        let regions: Vec<u32> = (0..(1u32 << n_terms)).collect();
        let all_terms = (1u32 << n_terms) - 1;
        let mut occupied = Vec::with_capacity(self.max_universe);
        !find_countermodel(&regions, 0, self.max_universe, &mut occupied, &|model: &[u32]| {
            if self.semantics == Semantics::ExistentialImport {
                let present = model.iter().fold(0, |acc, r| acc | r);
                if present != all_terms {
                    return false;
                }
            }
            encoded.iter().all(|s| holds(*s, model)) && !holds(goal, model)
        })
    }
}

/// Entailment under the default semantics (empty terms allowed).
///
/// Panics if `max_universe < 3`.
pub fn entails(premises: &[Statement], candidate: &Statement, max_universe: usize) -> bool {
    ModelChecker::new(max_universe, Semantics::default())
        .expect("max_universe must be at least 3")
        .entails(premises, candidate)
}

fn holds((q, a, b): (Quantifier, usize, usize), model: &[u32]) -> bool {
    let (a, b) = (1u32 << a, 1u32 << b);
    match q {
        Quantifier::All => model.iter().all(|r| r & a == 0 || r & b != 0),
        Quantifier::Some => model.iter().any(|r| r & a != 0 && r & b != 0),
        Quantifier::No => !model.iter().any(|r| r & a != 0 && r & b != 0),
    }
}

fn find_countermodel(
    regions: &[u32],
    start: usize,
    budget: usize,
    chosen: &mut Vec<u32>,
    is_counter: &dyn Fn(&[u32]) -> bool,
) -> bool {
    if is_counter(chosen) {
        return true;
    }
    if budget == 0 {
        return false;
    }
    for i in start..regions.len() {
        chosen.push(regions[i]);
        let found = find_countermodel(regions, i + 1, budget - 1, chosen, is_counter);
        chosen.pop();
        if found {
            return true;
        }
    }
    false
}
