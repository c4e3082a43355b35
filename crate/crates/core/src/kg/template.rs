use std::collections::{BTreeMap, BTreeSet};

use super::{
    Comparator, ConceptId, Direction, Fact, Names, Phrasing, Predicate, Property, Quantifier, Verb,
};
use crate::lm_client::Rewriter;

fn predicate_word(p: Predicate) -> &'static str {
    match p {
        Predicate::Be => "are",
        Predicate::Have => "have",
        Predicate::Can => "can",
    }
}

fn negated_predicate(p: Predicate) -> &'static str {
    match p {
        Predicate::Be => "are not",
        Predicate::Have => "do not have",
        Predicate::Can => "cannot",
    }
}

pub(super) fn has_reverse(fact: &Fact) -> bool {
    match fact {
        Fact::Relation { verb, .. } => !verb.passive.is_empty(),
        Fact::Comparative { comparator, .. } => !comparator.less.is_empty(),
        _ => true,
    }
}

/// Renders a fact through the template table. No trailing punctuation.
pub fn render_fact(fact: &Fact, direction: Direction, phrasing: Phrasing, names: &(impl Names + ?Sized)) -> String {
    use Direction::*;
    use Phrasing::*;
    let n = |id: ConceptId| names.name(id);
    match fact {
        Fact::Isa { subject, object } => {
            let (a, b) = (n(*subject), n(*object));
            match (direction, phrasing) {
                (Forward, Canonical) => format!("{a} are a type of {b}"),
                (Reverse, Canonical) => format!("{b} include {a}"),
                (Forward, Alternate) => format!("{a} are a kind of {b}"),
                (Reverse, Alternate) => format!("{b} encompass {a}"),
            }
        }
        Fact::HasProperty { subject, property, quantifier } => {
            let a = n(*subject);
            let p = &property.term;
            let pred = predicate_word(property.predicate);
            let things = format!("things that {pred} {p}");
            match (quantifier, direction, phrasing) {
                (Quantifier::All, Forward, Canonical) => format!("{a} {pred} {p}"),
                (Quantifier::All, Reverse, Canonical) => format!("Things that {pred} {p} include {a}"),
                (Quantifier::All, Forward, Alternate) => format!("All {a} {pred} {p}"),
                (Quantifier::All, Reverse, Alternate) => format!("Things that {pred} {p} include all {a}"),
                (Quantifier::No, Forward, Canonical) => {
                    format!("{a} {} {p}", negated_predicate(property.predicate))
                }
                (Quantifier::No, Reverse, Canonical) => format!("Things that {pred} {p} do not include {a}"),
                (Quantifier::No, Forward, Alternate) => format!("No {a} {pred} {p}"),
                (Quantifier::No, Reverse, Alternate) => format!("Things that {pred} {p} include no {a}"),
                (Quantifier::Some, Forward, Canonical) => format!("Some {a} {pred} {p}"),
                (Quantifier::Some, Reverse, Canonical) => format!("Some {things} are {a}"),
                (Quantifier::Some, Forward, Alternate) => format!("At least some {a} {pred} {p}"),
                (Quantifier::Some, Reverse, Alternate) => format!("At least some {things} are {a}"),
            }
        }
        Fact::Relation { subject, verb, object } => {
            let (a, b) = (n(*subject), n(*object));
            let Verb { active, passive } = verb;
            match (direction, phrasing) {
                (Forward, Canonical) => format!("{a} {active} {b}"),
                (Reverse, Canonical) => format!("{b} are {passive} by {a}"),
                (Forward, Alternate) => format!("All {a} {active} {b}"),
                (Reverse, Alternate) => format!("{b} are {passive} by all {a}"),
            }
        }
        Fact::Comparative { subject, comparator, object } => {
            let (a, b) = (n(*subject), n(*object));
            let Comparator { more, less } = comparator;
            match (direction, phrasing) {
                (Forward, Canonical) => format!("{a} are {more} than {b}"),
                (Reverse, Canonical) => format!("{b} are {less} than {a}"),
                (Forward, Alternate) => format!("{a} are {more} than {b} are"),
                (Reverse, Alternate) => format!("{b} are {less} than {a} are"),
            }
        }
        Fact::Categorical { quantifier, subject, object } => {
            let (a, b) = (n(*subject), n(*object));
            match (quantifier, direction, phrasing) {
                (Quantifier::All, Forward, Canonical) => format!("All {a} are {b}"),
                (Quantifier::All, Reverse, Canonical) => format!("{b} include all {a}"),
                (Quantifier::All, Forward, Alternate) => format!("All of the {a} are {b}"),
                (Quantifier::All, Reverse, Alternate) => format!("{b} include all of the {a}"),
                (Quantifier::Some, Forward, Canonical) => format!("Some {a} are {b}"),
                (Quantifier::Some, Reverse, Canonical) => format!("Some {b} are {a}"),
                (Quantifier::Some, Forward, Alternate) => format!("Some of the {a} are {b}"),
                (Quantifier::Some, Reverse, Alternate) => format!("Some of the {b} are {a}"),
                (Quantifier::No, Forward, Canonical) => format!("No {a} are {b}"),
                (Quantifier::No, Reverse, Canonical) => format!("No {b} are {a}"),
                (Quantifier::No, Forward, Alternate) => format!("None of the {a} are {b}"),
                (Quantifier::No, Reverse, Alternate) => format!("None of the {b} are {a}"),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Slot(String),
}

fn tokenize_pattern(pattern: &str) -> Vec<Token> {
    pattern
        .split_whitespace()
        .map(|w| match w.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            Some(name) => Token::Slot(name.to_string()),
            None => Token::Word(w.to_string()),
        })
        .collect()
}

/// Rewrites a sentence into its other-direction rendering by matching it
/// against forward/reverse pattern pairs. Slots (`{A}`, `{B}`, `{p}`)
/// capture exactly one word.
#[derive(Debug, Clone, Default)]
pub struct PatternRewriter {
    pairs: Vec<(Vec<Token>, Vec<Token>)>,
}

impl PatternRewriter {
    pub fn new<S: AsRef<str>>(pairs: impl IntoIterator<Item = (S, S)>) -> Self {
        Self {
            pairs: pairs
                .into_iter()
                .map(|(a, b)| (tokenize_pattern(a.as_ref()), tokenize_pattern(b.as_ref())))
                .collect(),
        }
    }

    /// Pattern pairs for the generic templates plus every verb and
    /// comparator appearing in `facts`.
    pub fn for_facts(facts: &[Fact]) -> Self {
        let slots: Vec<String> = vec!["{A}".into(), "{B}".into()];
        let (a, b) = (ConceptId(0), ConceptId(1));
        let mut templates: BTreeSet<Fact> = BTreeSet::new();
        templates.insert(Fact::Isa { subject: a, object: b });
        for q in Quantifier::ALL {
            templates.insert(Fact::Categorical { quantifier: q, subject: a, object: b });
            for predicate in [Predicate::Be, Predicate::Have, Predicate::Can] {
                templates.insert(Fact::HasProperty {
                    subject: a,
                    property: Property { predicate, term: "{p}".into() },
                    quantifier: q,
                });
            }
        }
        for f in facts {
            match f {
                Fact::Relation { verb, .. } => {
                    templates.insert(Fact::Relation { subject: a, verb: verb.clone(), object: b });
                }
                Fact::Comparative { comparator, .. } => {
                    templates.insert(Fact::Comparative { subject: a, comparator: comparator.clone(), object: b });
                }
                _ => {}
            }
        }
        let mut pairs = Vec::new();
        for t in templates.iter().filter(|t| has_reverse(t)) {
            for phrasing in [Phrasing::Canonical, Phrasing::Alternate] {
                pairs.push((
                    render_fact(t, Direction::Forward, phrasing, &slots),
                    render_fact(t, Direction::Reverse, phrasing, &slots),
                ));
            }
        }
        Self::new(pairs)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// All other-direction renderings of `sentence` (trailing `.` ignored).
    pub fn rewrite(&self, sentence: &str) -> Vec<String> {
        let trimmed = sentence.trim().trim_end_matches('.');
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        let mut out = Vec::new();
        for (x, y) in &self.pairs {
            for (from, to) in [(x, y), (y, x)] {
                if let Some(bound) = bind(from, &words) {
                    if let Some(s) = fill(to, &bound) {
                        if !out.contains(&s) {
                            out.push(s);
                        }
                    }
                }
            }
        }
        out
    }
}

impl Rewriter for PatternRewriter {
    fn rewrites(&self, sentence: &str) -> Vec<String> {
        self.rewrite(sentence)
    }
}

fn bind<'a>(pattern: &'a [Token], words: &[&'a str]) -> Option<BTreeMap<&'a str, &'a str>> {
    if pattern.len() != words.len() {
        return None;
    }
    let mut bound = BTreeMap::new();
    for (tok, word) in pattern.iter().zip(words) {
        match tok {
            Token::Word(w) if w.eq_ignore_ascii_case(word) => {}
            Token::Word(_) => return None,
            Token::Slot(name) => match bound.insert(name.as_str(), *word) {
                Some(prev) if prev != *word => return None,
                _ => {}
            },
        }
    }
    Some(bound)
}

fn fill(pattern: &[Token], bound: &BTreeMap<&str, &str>) -> Option<String> {
    let words: Option<Vec<&str>> = pattern
        .iter()
        .map(|t| match t {
            Token::Word(w) => Some(w.as_str()),
            Token::Slot(name) => bound.get(name.as_str()).copied(),
        })
        .collect();
    words.map(|w| w.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rewriter_reverses_both_ways() {
        let rw = PatternRewriter::new([("{A} are more dangerous than {B}", "{B} are less dangerous than {A}")]);
        assert_eq!(rw.rewrite("femp are more dangerous than glon."), vec!["glon are less dangerous than femp"]);
        assert_eq!(rw.rewrite("glon are less dangerous than femp"), vec!["femp are more dangerous than glon"]);
        assert!(rw.rewrite("glon are more dangerous").is_empty());
    }

    #[test]
    fn generic_rewriter_handles_isa_and_properties() {
        let rw = PatternRewriter::for_facts(&[]);
        assert!(rw.rewrite("gruds are a type of abmes").contains(&"abmes include gruds".to_string()));
        assert!(rw.rewrite("gruds are rony").contains(&"Things that are rony include gruds".to_string()));
    }

    #[test]
    fn missing_passive_has_no_reverse() {
        let f = Fact::Relation {
            subject: ConceptId(0),
            verb: Verb { active: "blick".into(), passive: String::new() },
            object: ConceptId(1),
        };
        assert!(!has_reverse(&f));
    }
}
