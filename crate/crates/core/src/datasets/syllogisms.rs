//! Simple syllogisms: two premises over three terms, tested on the six
//! quantified statements relating the two end terms.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{DatasetBundle, DatasetError, Document, TestItem};
use crate::kg::{ConceptId, Fact, ModelChecker, Quantifier, Statement};
use crate::lexicon::{build_lexicon, PhonemeInventory};

const MIDDLE: ConceptId = ConceptId(0);
const SUBJECT: ConceptId = ConceptId(1);
const PREDICATE: ConceptId = ConceptId(2);

/// One generated syllogism in structured form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyllogismItem {
    /// Surface words for the middle, subject and predicate terms.
    pub names: Vec<String>,
    pub premises: Vec<Statement>,
    /// All six candidates in presentation order.
    pub candidates: Vec<Statement>,
    pub correct_index: usize,
    pub figure: u8,
}

fn categorical(quantifier: Quantifier, subject: ConceptId, object: ConceptId) -> Statement {
    Statement::forward(Fact::Categorical { quantifier, subject, object })
}

/// The six conclusions over the end terms: each quantifier in both
/// directions.
pub fn conclusion_forms() -> Vec<Statement> {
    Quantifier::ALL
        .iter()
        .flat_map(|&q| [categorical(q, SUBJECT, PREDICATE), categorical(q, PREDICATE, SUBJECT)])
        .collect()
}

fn premises_for(figure: u8, q1: Quantifier, q2: Quantifier) -> [Statement; 2] {
    let (major, minor) = match figure {
        1 => ((MIDDLE, PREDICATE), (SUBJECT, MIDDLE)),
        2 => ((PREDICATE, MIDDLE), (SUBJECT, MIDDLE)),
        3 => ((MIDDLE, PREDICATE), (MIDDLE, SUBJECT)),
        _ => ((PREDICATE, MIDDLE), (MIDDLE, SUBJECT)),
    };
    [categorical(q1, major.0, major.1), categorical(q2, minor.0, minor.1)]
}

/// Samples premise pairs until one entails exactly one of the six
/// conclusions; gives up after a bounded number of draws per item.
pub fn gen_syllogism_items(
    n_items: usize,
    checker: ModelChecker,
    seed: u64,
) -> Result<Vec<SyllogismItem>, DatasetError> {
    let terms: Vec<String> = (0..3 * n_items).map(|i| format!("term:{i}")).collect();
    let lexicon = build_lexicon(&terms, &PhonemeInventory::default(), seed)?;
    let mut rng = crate::rng::stream(seed, "syllogisms");
    let forms = conclusion_forms();
    let mut items = Vec::with_capacity(n_items);
    const MAX_DRAWS: usize = 1000;
    for i in 0..n_items {
        let mut found = None;
        for _ in 0..MAX_DRAWS {
            let figure = rng.gen_range(1..=4u8);
            let q1 = *Quantifier::ALL.choose(&mut rng).expect("non-empty");
            let q2 = *Quantifier::ALL.choose(&mut rng).expect("non-empty");
            let premises = premises_for(figure, q1, q2);
            let entailed: Vec<usize> = (0..forms.len()).filter(|&k| checker.entails(&premises, &forms[k])).collect();
            if let [only] = entailed[..] {
                found = Some((figure, premises, only));
                break;
            }
        }
        let (figure, mut premises, correct) = found.ok_or_else(|| {
            DatasetError::GeneratorExhausted(format!("no premise pair with a unique conclusion after {MAX_DRAWS} draws"))
        })?;
        premises.shuffle(&mut rng);
        let mut order: Vec<usize> = (0..forms.len()).collect();
        order.shuffle(&mut rng);
        let candidates: Vec<Statement> = order.iter().map(|&k| forms[k].clone()).collect();
        let correct_index = order.iter().position(|&k| k == correct).expect("permutation");
        let names = (0..3).map(|k| lexicon.word(&terms[3 * i + k]).to_string()).collect();
        items.push(SyllogismItem { names, premises: premises.to_vec(), candidates, correct_index, figure });
    }
    Ok(items)
}

fn sentence(s: &Statement, names: &[String]) -> String {
    format!("{}.", s.render(names))
}

fn mood(premises: &[Statement]) -> String {
    premises
        .iter()
        .map(|p| match &p.fact {
            Fact::Categorical { quantifier: Quantifier::All, .. } => 'a',
            Fact::Categorical { quantifier: Quantifier::Some, .. } => 'i',
            _ => 'e',
        })
        .collect()
}

pub fn gen_simple_syllogisms(n_items: usize, seed: u64) -> Result<DatasetBundle, DatasetError> {
    let items = gen_syllogism_items(n_items, ModelChecker::default(), seed)?;
    let mut rng = crate::rng::stream(seed, "syllogism-questions");
    let mut bundle = DatasetBundle::new("simple-syllogisms", seed, serde_json::json!({ "n_items": n_items }));
    let mut tests = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let mut listed = item.names.clone();
        listed.sort();
        let mut sentences = vec![format!(
            "The relationships between {}, {} and {} are:",
            listed[0], listed[1], listed[2]
        )];
        sentences.extend(item.premises.iter().map(|p| sentence(p, &item.names)));
        bundle.train.push(Document::new(format!("train-{i:03}"), sentences, "syllogism"));

        let mut ends = [item.names[SUBJECT.index()].clone(), item.names[PREDICATE.index()].clone()];
        ends.shuffle(&mut rng);
        tests.push(TestItem {
            question: format!("The relationships between {} and {} are:", ends[0], ends[1]),
            candidates: item.candidates.iter().map(|c| sentence(c, &item.names)).collect(),
            correct_index: item.correct_index,
            subset_label: format!("syllogism-{}-figure{}", mood(&item.premises), item.figure),
        });
    }
    bundle.tests.insert("syllogisms".into(), tests);
    bundle.extras.insert("syllogisms.jsonl".into(), super::bundle_jsonl(&items));
    Ok(bundle)
}
