//! The semantic structure benchmark: templated articles about a nonsense
//! taxonomy, tested on rephrasings, reversals, derived facts and category
//! holdouts.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{contains_phrase, DatasetBundle, DatasetError, Document, TestItem};
use crate::kg::{
    category_holdout_tests, inheritance_closure, write_kb_jsonl, Closure, ConceptId, Direction, Fact, KnowledgeBase,
    Names, Phrasing, Statement,
};
use crate::rng::Rng;

pub const QUESTION: &str = "Based on what you know, which statement is true?";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticConfig {
    pub n_docs: usize,
    pub n_holdouts: usize,
    pub qa_fraction: f64,
    pub n_distractors: usize,
}

impl Default for SemanticConfig {
    fn default() -> Self {
        Self { n_docs: 2200, n_holdouts: 10, qa_fraction: 0.1, n_distractors: 3 }
    }
}

/// A test item with its statements kept, for auditing against the KB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredItem {
    pub split: String,
    pub correct: Statement,
    /// In presentation order; `candidates[correct_index] == correct`.
    pub candidates: Vec<Statement>,
    pub correct_index: usize,
}

#[derive(Debug, Clone)]
pub struct SemanticCorpus {
    pub bundle: DatasetBundle,
    pub items: Vec<StructuredItem>,
    pub holdouts: Vec<ConceptId>,
    /// Facts rendered in the training corpus.
    pub train_facts: Vec<Fact>,
    /// Items dropped for lack of distractors.
    pub skipped: usize,
}

/// The object slot of a fact, together with what must match for another
/// fact to count as the same relation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Concept(ConceptId),
    Term(String),
}

fn relation_key(fact: &Fact) -> (String, Slot) {
    match fact {
        Fact::Isa { object, .. } => ("isa".into(), Slot::Concept(*object)),
        Fact::HasProperty { property, .. } => {
            (format!("property:{:?}", property.predicate), Slot::Term(property.term.clone()))
        }
        Fact::Relation { verb, object, .. } => (format!("relation:{}", verb.active), Slot::Concept(*object)),
        Fact::Comparative { comparator, object, .. } => {
            (format!("comparative:{}", comparator.more), Slot::Concept(*object))
        }
        Fact::Categorical { quantifier, object, .. } => (format!("categorical:{quantifier:?}"), Slot::Concept(*object)),
    }
}

fn with_slot(fact: &Fact, slot: &Slot) -> Option<Fact> {
    let mut f = fact.clone();
    match (&mut f, slot) {
        (Fact::HasProperty { property, .. }, Slot::Term(t)) => property.term = t.clone(),
        (
            Fact::Isa { object, .. }
            | Fact::Relation { object, .. }
            | Fact::Comparative { object, .. }
            | Fact::Categorical { object, .. },
            Slot::Concept(c),
        ) => *object = *c,
        _ => return None,
    }
    Some(f)
}

/// Hard-distractor source: substitutes for a statement's object come from
/// facts of the same relation in `witnesses`, and a substitute is kept only
/// if the resulting fact is not in `truth`.
pub struct DistractorPool<'a> {
    by_relation: BTreeMap<String, BTreeSet<Slot>>,
    truth: &'a Closure,
}

impl<'a> DistractorPool<'a> {
    pub fn new(witnesses: &Closure, truth: &'a Closure) -> Self {
        let mut by_relation: BTreeMap<String, BTreeSet<Slot>> = BTreeMap::new();
        for f in witnesses.iter() {
            let (key, slot) = relation_key(f);
            by_relation.entry(key).or_default().insert(slot);
        }
        Self { by_relation, truth }
    }

    /// Every admissible distractor for `correct`, in a fixed order.
    pub fn eligible(&self, correct: &Statement) -> Vec<Statement> {
        let (key, own) = relation_key(&correct.fact);
        let subject = correct.fact.subject();
        self.by_relation
            .get(&key)
            .into_iter()
            .flatten()
            .filter(|slot| **slot != own && **slot != Slot::Concept(subject))
            .filter_map(|slot| with_slot(&correct.fact, slot))
            .filter(|f| !self.truth.contains(f))
            .map(|f| Statement::new(f, correct.direction, correct.phrasing))
            .collect()
    }

    pub fn select(&self, correct: &Statement, k: usize, rng: &mut Rng) -> Result<Vec<Statement>, DatasetError> {
        let eligible = self.eligible(correct);
        if eligible.len() < k {
            return Err(DatasetError::InsufficientDistractors {
                statement: format!("{:?}", correct.fact),
                found: eligible.len(),
                needed: k,
            });
        }
        let picked = index::sample(rng, eligible.len(), k);
        Ok(picked.into_iter().map(|i| eligible[i].clone()).collect())
    }
}

/// `k` distractors for `correct`, with the KB's closure as both witness set
/// and ground truth.
pub fn select_distractors(
    correct: &Statement,
    kb: &KnowledgeBase,
    k: usize,
    seed: u64,
) -> Result<Vec<Statement>, DatasetError> {
    let closure = kb.closure()?;
    let pool = DistractorPool::new(&closure, &closure);
    pool.select(correct, k, &mut crate::rng::stream(seed, "distractors"))
}

/// Leaf categories that take part in no relation or comparison, sampled
/// deterministically.
pub fn default_holdouts(kb: &KnowledgeBase, n: usize, seed: u64) -> Vec<ConceptId> {
    let involved: HashSet<ConceptId> = kb
        .facts
        .iter()
        .filter(|f| matches!(f, Fact::Relation { .. } | Fact::Comparative { .. }))
        .flat_map(|f| [Some(f.subject()), f.object_concept()])
        .flatten()
        .collect();
    let eligible: Vec<ConceptId> = kb
        .concepts
        .iter()
        .filter(|c| c.parent.is_some() && kb.is_leaf(c.id) && !involved.contains(&c.id))
        .map(|c| c.id)
        .collect();
    let mut rng = crate::rng::stream(seed, "holdouts");
    let mut chosen: Vec<ConceptId> = eligible.choose_multiple(&mut rng, n.min(eligible.len())).copied().collect();
    chosen.sort();
    chosen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Style {
    Encyclopedic,
    List,
    Qa,
    Interview,
    FieldGuide,
    Trivia,
}

const PROSE_STYLES: [Style; 5] = [Style::Encyclopedic, Style::List, Style::Interview, Style::FieldGuide, Style::Trivia];

impl Style {
    fn tag(self) -> &'static str {
        match self {
            Style::Encyclopedic => "encyclopedic",
            Style::List => "list",
            Style::Qa => "qa",
            Style::Interview => "interview",
            Style::FieldGuide => "field_guide",
            Style::Trivia => "trivia",
        }
    }

    /// Fixed framing sentences and sentences per fact.
    fn shape(self) -> (usize, usize) {
        match self {
            Style::Encyclopedic | Style::List | Style::FieldGuide => (1, 1),
            Style::Qa => (0, 2),
            Style::Interview => (1, 2),
            Style::Trivia => (2, 1),
        }
    }

    /// Range of fact counts keeping the document within 4..=20 sentences.
    fn fact_range(self) -> (usize, usize) {
        let (framing, per_fact) = self.shape();
        ((4 - framing.min(4)).div_ceil(per_fact), (20 - framing) / per_fact)
    }

    fn render(self, focus: &str, facts: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Style::Encyclopedic => out.push(format!("This article is about {focus}.")),
            Style::List => out.push(format!("Here are some facts about {focus}.")),
            Style::FieldGuide => out.push(format!("Field guide entry for {focus}.")),
            Style::Interview => out.push(format!("The following is an interview about {focus}.")),
            Style::Trivia => out.push("Trivia time!".into()),
            Style::Qa => {}
        }
        for f in facts {
            match self {
                Style::Qa => {
                    out.push(format!("Question: What do you know about {focus}?"));
                    out.push(format!("Answer: {f}."));
                }
                Style::Interview => {
                    out.push("Interviewer: What else can you tell me?".into());
                    out.push(format!("Expert: {f}."));
                }
                _ => out.push(format!("{f}.")),
            }
        }
        if self == Style::Trivia {
            out.push(format!("Now you know more about {focus}."));
        }
        out
    }
}

fn render(fact: &Fact, kb: &KnowledgeBase) -> String {
    Statement::forward(fact.clone()).render(kb)
}

pub fn gen_semantic_corpus(
    kb: &KnowledgeBase,
    config: &SemanticConfig,
    holdouts: &[ConceptId],
    seed: u64,
) -> Result<SemanticCorpus, DatasetError> {
    if !(0.0..=1.0).contains(&config.qa_fraction) {
        return Err(DatasetError::Config("qa_fraction must be within [0, 1]".into()));
    }
    for &h in holdouts {
        if h.index() >= kb.concepts.len() || kb.concept(h).parent.is_none() || !kb.is_leaf(h) {
            return Err(DatasetError::Config(format!("holdout {} must be a leaf with a parent", h.0)));
        }
    }
    let is_holdout = |c: ConceptId| holdouts.contains(&c);
    let full_closure = kb.closure()?;

    // training facts: everything except facts about holdouts, whose parent
    // link alone survives
    let train_idx: Vec<usize> = (0..kb.facts.len())
        .filter(|&i| {
            let f = &kb.facts[i];
            match holdouts.iter().find(|&&h| f.mentions(h)) {
                None => true,
                Some(&h) => *f == Fact::Isa { subject: h, object: kb.concept(h).parent.expect("checked") },
            }
        })
        .collect();
    let train_facts: Vec<Fact> = train_idx.iter().map(|&i| kb.facts[i].clone()).collect();
    let train_kb = KnowledgeBase { concepts: kb.concepts.clone(), facts: train_facts.clone(), lexicon_seed: kb.lexicon_seed };
    let train_closure = Closure::from_facts(inheritance_closure(&train_kb)?);

    let mut rng = crate::rng::stream(seed, "semantic");
    let docs = build_documents(kb, &train_idx, holdouts, config, &mut rng)?;

    // coverage: every training fact is rendered somewhere
    let corpus: String = docs.iter().map(|d| d.text() + "\n").collect();
    for &i in &train_idx {
        let sentence = render(&kb.facts[i], kb);
        if !contains_phrase(&corpus, &sentence) {
            return Err(DatasetError::CoverageViolation(sentence));
        }
    }

    // test statements per split
    let train_set: BTreeSet<&Fact> = train_facts.iter().collect();
    let about_holdout = |f: &Fact| is_holdout(f.subject());
    let mut splits: Vec<(&str, Vec<Statement>)> = vec![
        (
            "train",
            train_facts
                .iter()
                .filter(|f| !about_holdout(f))
                .map(|f| Statement::new(f.clone(), Direction::Forward, Phrasing::Alternate))
                .collect(),
        ),
        (
            "reversals",
            train_facts
                .iter()
                .filter(|f| !about_holdout(f))
                .map(|f| Statement::new(f.clone(), Direction::Reverse, Phrasing::Canonical))
                .collect(),
        ),
        (
            "syllogisms",
            train_closure
                .iter()
                .filter(|f| !train_set.contains(f) && !about_holdout(f))
                .map(|f| Statement::forward(f.clone()))
                .collect(),
        ),
    ];
    let mut holdout_statements = Vec::new();
    for &h in holdouts {
        holdout_statements.extend(category_holdout_tests(kb, h)?);
    }
    splits.push(("holdouts", holdout_statements));

    let pool = DistractorPool::new(&train_closure, &full_closure);
    let mut items = Vec::new();
    let mut tests: BTreeMap<String, Vec<TestItem>> = BTreeMap::new();
    let mut skipped = 0;
    for (split, statements) in splits {
        let mut split_items = Vec::new();
        for correct in statements {
            let distractors = match pool.select(&correct, config.n_distractors, &mut rng) {
                Ok(d) => d,
                Err(DatasetError::InsufficientDistractors { .. }) => {
                    log::debug!("{split}: skipping `{}`, too few distractors", correct.render(kb));
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let at = rng.gen_range(0..=distractors.len());
            let mut candidates = distractors;
            candidates.insert(at, correct.clone());
            split_items.push(TestItem {
                question: QUESTION.to_string(),
                candidates: candidates.iter().map(|s| s.render(kb)).collect(),
                correct_index: at,
                subset_label: format!("{split}-{}", correct.fact.kind()),
            });
            items.push(StructuredItem { split: split.to_string(), correct, candidates, correct_index: at });
        }
        tests.insert(split.to_string(), split_items);
    }

    let holdout_names: Vec<&str> = holdouts.iter().map(|&h| kb.name(h)).collect();
    let config_value = serde_json::json!({ "corpus": config, "holdouts": holdout_names });
    let mut bundle = DatasetBundle::new("semantic", seed, config_value);
    bundle.train = docs;
    bundle.tests = tests;
    bundle.extras.insert("kb.jsonl".into(), write_kb_jsonl(kb));
    Ok(SemanticCorpus { bundle, items, holdouts: holdouts.to_vec(), train_facts, skipped })
}

fn build_documents(
    kb: &KnowledgeBase,
    train_idx: &[usize],
    holdouts: &[ConceptId],
    config: &SemanticConfig,
    rng: &mut Rng,
) -> Result<Vec<Document>, DatasetError> {
    let focus_pool: Vec<ConceptId> = kb.concepts.iter().map(|c| c.id).filter(|c| !holdouts.contains(c)).collect();
    if focus_pool.is_empty() || train_idx.is_empty() {
        return Err(DatasetError::Config("nothing to write about".into()));
    }
    let mentions = |c: ConceptId| -> Vec<usize> {
        train_idx.iter().copied().filter(|&i| kb.facts[i].mentions(c)).collect()
    };

    let mut focus: Vec<ConceptId> = (0..config.n_docs).map(|i| focus_pool[i % focus_pool.len()]).collect();
    focus.shuffle(rng);
    let n_qa = (config.n_docs as f64 * config.qa_fraction).round() as usize;
    let qa: HashSet<usize> = index::sample(rng, config.n_docs, n_qa.min(config.n_docs)).into_iter().collect();

    let mut usage: BTreeMap<usize, usize> = train_idx.iter().map(|&i| (i, 0)).collect();
    let mut docs = Vec::with_capacity(config.n_docs);
    for (d, &c) in focus.iter().enumerate() {
        let style = if qa.contains(&d) { Style::Qa } else { *PROSE_STYLES.choose(rng).expect("non-empty") };
        let (min_m, max_m) = style.fact_range();

        let mut pool = mentions(c);
        let mut related: Vec<ConceptId> = kb.ancestors(c);
        related.extend(kb.children(c));
        for r in related {
            if pool.len() >= min_m {
                break;
            }
            for i in mentions(r) {
                if !pool.contains(&i) {
                    pool.push(i);
                }
            }
        }
        if pool.len() < min_m {
            let mut rest: Vec<usize> = train_idx.iter().copied().filter(|i| !pool.contains(i)).collect();
            rest.sort_by_key(|i| usage[i]);
            pool.extend(rest.into_iter().take(min_m - pool.len()));
        }

        let m = rng.gen_range(min_m..=max_m.min(pool.len()).max(min_m));
        // least used first, random among equals
        let mut keyed: Vec<(usize, u64, usize)> = pool.iter().map(|&i| (usage[&i], rng.gen::<u64>(), i)).collect();
        keyed.sort();
        let mut chosen: Vec<usize> = keyed.into_iter().take(m).map(|(_, _, i)| i).collect();
        chosen.shuffle(rng);
        for i in &chosen {
            *usage.get_mut(i).expect("training fact") += 1;
        }

        let sentences = style.render(kb.name(c), &chosen.iter().map(|&i| render(&kb.facts[i], kb)).collect::<Vec<_>>());
        let mut doc = Document::new(format!("doc-{d:04}"), sentences, style.tag());
        doc.source_facts = chosen;
        docs.push(doc);
    }
    Ok(docs)
}
