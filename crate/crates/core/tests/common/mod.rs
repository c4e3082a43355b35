//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code it is used to check.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synthbench::kg::{Comparator, Concept, ConceptId, Fact, KnowledgeBase, Predicate, Property, Quantifier, Statement, Verb};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- closure

fn inheritable(f: &Fact) -> bool {
    match f {
        Fact::HasProperty { quantifier, .. } => matches!(quantifier, Quantifier::All | Quantifier::No),
        Fact::Relation { .. } | Fact::Comparative { .. } => true,
        _ => false,
    }
}

fn resubject(f: &Fact, s: ConceptId) -> Fact {
    match f.clone() {
        Fact::HasProperty { property, quantifier, .. } => Fact::HasProperty { subject: s, property, quantifier },
        Fact::Relation { verb, object, .. } => Fact::Relation { subject: s, verb, object },
        Fact::Comparative { comparator, object, .. } => Fact::Comparative { subject: s, comparator, object },
        other => other,
    }
}

/// Repeats the two rules over the whole set until nothing new appears.
/// `Err` names the first subject that ends up with both `all` and `no`
/// for one property.
pub fn naive_closure(facts: &[Fact]) -> Result<BTreeSet<Fact>, String> {
    let mut set: BTreeSet<Fact> = facts.iter().cloned().collect();
    loop {
        let mut by_subject: BTreeMap<ConceptId, Vec<Fact>> = BTreeMap::new();
        for f in &set {
            let s = match f {
                Fact::Isa { subject, .. }
                | Fact::HasProperty { subject, .. }
                | Fact::Relation { subject, .. }
                | Fact::Comparative { subject, .. }
                | Fact::Categorical { subject, .. } => *subject,
            };
            by_subject.entry(s).or_default().push(f.clone());
        }
        let mut new = Vec::new();
        for f in &set {
            let Fact::Isa { subject: a, object: b } = f else { continue };
            for g in by_subject.get(b).into_iter().flatten() {
                match g {
                    Fact::Isa { object: c, .. } if c != a => new.push(Fact::Isa { subject: *a, object: *c }),
                    g if inheritable(g) => new.push(resubject(g, *a)),
                    _ => {}
                }
            }
        }
        let before = set.len();
        set.extend(new);
        if set.len() == before {
            break;
        }
    }
    for f in &set {
        if let Fact::HasProperty { subject, property, quantifier: Quantifier::All } = f {
            let neg = Fact::HasProperty { subject: *subject, property: property.clone(), quantifier: Quantifier::No };
            if set.contains(&neg) {
                return Err(format!("contradiction on {} / {}", subject.0, property.term));
            }
        }
    }
    Ok(set)
}

const TERMS: [&str; 6] = ["wings", "fur", "scales", "red", "fly", "swim"];
const VERBS: [(&str, &str); 3] = [("eat", "eaten"), ("chase", "chased"), ("carry", "carried")];
const COMPARATORS: [(&str, &str); 2] = [("bigger", "smaller"), ("more dangerous", "less dangerous")];

/// A forest of up to 20 concepts with random properties, relations and
/// comparisons. Contradictions are possible and intended.
pub fn random_kb(seed: u64) -> KnowledgeBase {
    let mut r = rng(seed);
    let n = r.gen_range(1..=20usize);
    let concepts: Vec<Concept> = (0..n)
        .map(|i| Concept {
            id: ConceptId(i as u32),
            surface: format!("c{i}"),
            parent: (i > 0 && r.gen_bool(0.8)).then(|| ConceptId(r.gen_range(0..i) as u32)),
        })
        .collect();
    let mut facts = Vec::new();
    for _ in 0..r.gen_range(0..=3 * n) {
        let subject = ConceptId(r.gen_range(0..n) as u32);
        let object = ConceptId(r.gen_range(0..n) as u32);
        let fact = match r.gen_range(0..3) {
            0 => Fact::HasProperty {
                subject,
                property: Property {
                    predicate: *[Predicate::Be, Predicate::Have, Predicate::Can].choose(&mut r).unwrap(),
                    term: TERMS.choose(&mut r).unwrap().to_string(),
                },
                quantifier: *[Quantifier::All, Quantifier::Some, Quantifier::No].choose(&mut r).unwrap(),
            },
            1 => {
                let (active, passive) = *VERBS.choose(&mut r).unwrap();
                Fact::Relation { subject, verb: Verb { active: active.into(), passive: passive.into() }, object }
            }
            _ => {
                let (more, less) = *COMPARATORS.choose(&mut r).unwrap();
                Fact::Comparative { subject, comparator: Comparator::new(more, less), object }
            }
        };
        facts.push(fact);
    }
    KnowledgeBase::from_parts(concepts, facts, seed).expect("forest KBs are valid")
}

// ------------------------------------------------------------ entailment

fn categorical(s: &Statement) -> (Quantifier, ConceptId, ConceptId) {
    match &s.fact {
        Fact::Categorical { quantifier, subject, object } => (*quantifier, *subject, *object),
        other => panic!("not categorical: {other:?}"),
    }
}

/// Tries every model with 1..=`max_universe` elements where each term is
/// an arbitrary subset (empty allowed), and reports whether the candidate
/// holds in all models of the premises.
pub fn model_entails(premises: &[Statement], candidate: &Statement, max_universe: usize) -> bool {
    let all: Vec<(Quantifier, ConceptId, ConceptId)> =
        premises.iter().chain(std::iter::once(candidate)).map(categorical).collect();
    let mut terms: Vec<ConceptId> = all.iter().flat_map(|&(_, a, b)| [a, b]).collect();
    terms.sort();
    terms.dedup();
    let bit = |c: ConceptId| 1u32 << terms.iter().position(|&t| t == c).unwrap();
    let k = terms.len() as u32;

    let holds = |(q, a, b): (Quantifier, ConceptId, ConceptId), universe: &[u32]| {
        let (ma, mb) = (bit(a), bit(b));
        match q {
            Quantifier::All => universe.iter().all(|&e| e & ma == 0 || e & mb != 0),
            Quantifier::Some => universe.iter().any(|&e| e & ma != 0 && e & mb != 0),
            Quantifier::No => !universe.iter().any(|&e| e & ma != 0 && e & mb != 0),
        }
    };

    for size in 1..=max_universe {
        let per = 1u64 << k;
        let total = per.pow(size as u32);
        for code in 0..total {
            let mut c = code;
            let universe: Vec<u32> = (0..size)
                .map(|_| {
                    let e = (c % per) as u32;
                    c /= per;
                    e
                })
                .collect();
            let premises_hold = all[..all.len() - 1].iter().all(|&p| holds(p, &universe));
            if premises_hold && !holds(all[all.len() - 1], &universe) {
                return false;
            }
        }
    }
    true
}

// ------------------------------------------------------------ derivatoid

/// A primitive held as plain data and rendered by string templates.
#[derive(Debug, Clone)]
pub enum Prim {
    Exp(u64),
    Poly(Vec<(u64, u64)>),
    Log(u64),
    Trig(&'static str),
}

impl Prim {
    pub fn text(&self, arg: &str) -> String {
        match self {
            Prim::Exp(b) => format!("({b}**{arg})"),
            Prim::Poly(ts) => {
                let parts: Vec<String> = ts.iter().map(|(c, e)| format!("{c} * {arg}**{e}")).collect();
                format!("({})", parts.join(" + "))
            }
            Prim::Log(b) => format!("(log({arg}, {b}))"),
            Prim::Trig(t) => format!("({t}({arg}))"),
        }
    }

    pub fn d_text(&self, arg: &str) -> String {
        match self {
            Prim::Exp(b) => format!("({arg}**{b})"),
            Prim::Poly(ts) => {
                let parts: Vec<String> = ts.iter().map(|(c, e)| format!("{} * {arg}**{}", c + e, e + 2)).collect();
                format!("({})", parts.join(" + "))
            }
            Prim::Log(b) => format!("(log{b}log{b}({arg}))"),
            Prim::Trig(t) => {
                let d = match *t {
                    "sin" => "meep",
                    "cos" => "morp",
                    "tan" => "moop",
                    other => panic!("{other}"),
                };
                format!("({d}({arg}))")
            }
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Prim::Exp(_) => "exp",
            Prim::Poly(_) => "poly",
            Prim::Log(_) => "log",
            Prim::Trig(_) => "trig",
        }
    }
}

pub fn random_prim(r: &mut impl Rng) -> Prim {
    match r.gen_range(0..4) {
        0 => Prim::Exp(r.gen_range(2..=99)),
        1 => {
            let mut exps: Vec<u64> = (2..=99).collect();
            exps.shuffle(r);
            let mut chosen: Vec<u64> = exps[..r.gen_range(1..=3)].to_vec();
            chosen.sort_by(|a, b| b.cmp(a));
            Prim::Poly(chosen.into_iter().map(|e| (r.gen_range(2..=99), e)).collect())
        }
        2 => Prim::Log(r.gen_range(2..=99)),
        _ => Prim::Trig(["sin", "cos", "tan"][r.gen_range(0..3)]),
    }
}

/// Input text and expected output for `u op v`, straight from the rule
/// table.
pub fn naive_derivatoid(op: &str, u: &Prim, v: &Prim) -> (String, String) {
    let x = "x";
    match op {
        "add" => (format!("{} + {}", u.text(x), v.text(x)), format!("{} - {}", u.d_text(x), v.d_text(x))),
        "mul" => (
            format!("{} * {}", u.text(x), v.text(x)),
            format!("{} * {} + {} * {}", v.text(x), u.text(x), u.d_text(x), v.d_text(x)),
        ),
        "compose" => (
            u.text(&v.text(x)),
            format!("{} * {} * {}", u.d_text(x), v.d_text(x), v.d_text(&u.text(x))),
        ),
        other => panic!("{other}"),
    }
}

// ------------------------------------------------------------------ rouge

/// LCS length by checking every subsequence of the shorter side.
pub fn brute_lcs(a: &[u8], b: &[u8]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let n = mask.count_ones() as usize;
        if n <= best {
            continue;
        }
        let sub: Vec<u8> = (0..short.len()).filter(|i| mask & (1 << i) != 0).map(|i| short[i]).collect();
        let mut it = long.iter();
        if sub.iter().all(|c| it.any(|d| d == c)) {
            best = n;
        }
    }
    best
}

pub fn brute_rouge(cand: &[u8], reference: &[u8]) -> f64 {
    if cand.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let l = brute_lcs(cand, reference) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let (p, r) = (l / cand.len() as f64, l / reference.len() as f64);
    2.0 * p * r / (p + r)
}

// ------------------------------------------------------------ distractors

/// What another fact must share to count as the same relation, and the
/// slot that a distractor substitutes.
fn relation_and_slot(f: &Fact) -> (String, String) {
    match f {
        Fact::Isa { object, .. } => ("isa".into(), format!("c{}", object.0)),
        Fact::HasProperty { property, quantifier, .. } => {
            (format!("{:?}/{:?}", property.predicate, quantifier), format!("t:{}", property.term))
        }
        Fact::Relation { verb, object, .. } => (format!("verb:{}", verb.active), format!("c{}", object.0)),
        Fact::Comparative { comparator, object, .. } => (format!("cmp:{}", comparator.more), format!("c{}", object.0)),
        Fact::Categorical { quantifier, object, .. } => (format!("cat:{quantifier:?}"), format!("c{}", object.0)),
    }
}

/// A distractor must be false, and its substituted object must appear in
/// the same slot of some true fact of the same relation. Properties only
/// need a matching predicate.
pub fn check_distractor(d: &Fact, truth: &BTreeSet<Fact>) -> Result<(), String> {
    if truth.contains(d) {
        return Err(format!("distractor is true: {d:?}"));
    }
    let (rel, slot) = relation_and_slot(d);
    let rel_prefix = rel.split('/').next().unwrap().to_string();
    let witnessed = truth.iter().any(|g| {
        let (grel, gslot) = relation_and_slot(g);
        gslot == slot && grel.split('/').next().unwrap() == rel_prefix && std::mem::discriminant(g) == std::mem::discriminant(d)
    });
    if !witnessed {
        return Err(format!("substituted term has no true same-relation fact: {d:?}"));
    }
    Ok(())
}
