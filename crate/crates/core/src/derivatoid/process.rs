use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{derivatoid, parse, render, Combinator, DerivatoidError, Expr, Family, PolyTerm, TrigFn};
use crate::rng::Rng;

/// Family-independent statements about mathematics, used as a control
/// reflection.
pub const RANDOM_MATH: [&str; 20] = [
    "Mathematics is the study of numbers, shapes and patterns.",
    "Every even number greater than two is conjectured to be a sum of two primes.",
    "The angles of a triangle add up to a straight angle.",
    "There are infinitely many prime numbers.",
    "Zero is neither positive nor negative.",
    "A circle is the set of points at a fixed distance from a center.",
    "Multiplication distributes over addition.",
    "The square root of two is irrational.",
    "Algebra uses letters to stand for unknown quantities.",
    "A proof shows that a statement follows from its assumptions.",
    "The number pi relates a circle's circumference to its diameter.",
    "Parallel lines in a plane never meet.",
    "Every natural number has a successor.",
    "A function assigns each input exactly one output.",
    "Addition of whole numbers is commutative.",
    "Geometry studies the properties of space.",
    "A matrix is a rectangular array of numbers.",
    "The empty set is a subset of every set.",
    "Probability measures how likely an event is.",
    "A polygon with four sides is called a quadrilateral.",
];

/// Stand-in names for the families; fixed so every occurrence of a
/// family maps to the same word.
const NONSENSE_FAMILY: [(Family, &str); 4] = [
    (Family::Exponential, "Blick"),
    (Family::Polynomial, "Glon"),
    (Family::Logarithmic, "Dax"),
    (Family::Trigonometric, "Wug"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionMode {
    BeforeAnswer,
    AfterAnswer,
    NonsenseMapped,
    RandomMath,
}

impl std::str::FromStr for ReflectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "before_answer" => Ok(ReflectionMode::BeforeAnswer),
            "after_answer" => Ok(ReflectionMode::AfterAnswer),
            "nonsense_mapped" => Ok(ReflectionMode::NonsenseMapped),
            "random_math" => Ok(ReflectionMode::RandomMath),
            _ => Err(format!("unknown reflection mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionPosition {
    #[default]
    None,
    BeforeAnswer,
    AfterAnswer,
}

/// The reflection sentence for a single combinator over two primitives.
pub fn reflect(e: &Expr, mode: ReflectionMode, seed: u64) -> Result<String, DerivatoidError> {
    let (combinator, a, b) = e.shape().ok_or(DerivatoidError::UnsupportedShape)?;
    let name = |f: Family| match mode {
        ReflectionMode::NonsenseMapped => {
            NONSENSE_FAMILY.iter().find(|(g, _)| *g == f).map(|(_, w)| *w).expect("every family mapped")
        }
        _ => f.title(),
    };
    Ok(match mode {
        ReflectionMode::RandomMath => {
            let mut rng = crate::rng::stream(seed, "random-math");
            format!("Reflection: {}", RANDOM_MATH.choose(&mut rng).expect("non-empty"))
        }
        _ => format!(
            "Reflection: This looks like a {} function {} a {} function.",
            name(a),
            combinator.phrase(),
            name(b)
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessExample {
    pub input: String,
    pub output: String,
    pub combo: [Family; 2],
    #[serde(default)]
    pub reflection: Option<String>,
    #[serde(default)]
    pub reflection_position: ReflectionPosition,
}

impl ProcessExample {
    fn new(e: &Expr) -> Self {
        let (_, a, b) = e.shape().expect("generated expressions have a single combinator");
        Self {
            input: render(e),
            output: render(&derivatoid(e)),
            combo: [a, b],
            reflection: None,
            reflection_position: ReflectionPosition::None,
        }
    }

    /// `(combinator, families)` with the families unordered.
    pub fn triple(&self) -> Result<(Combinator, [Family; 2]), DerivatoidError> {
        let (c, a, b) = parse(&self.input)?.shape().ok_or(DerivatoidError::UnsupportedShape)?;
        Ok((c, if a <= b { [a, b] } else { [b, a] }))
    }
}

/// The full target text: the answer, with the reflection placed before or
/// after it when present.
pub fn response(ex: &ProcessExample) -> String {
    let answer = format!("Answer: {}.", ex.output);
    match (&ex.reflection, ex.reflection_position) {
        (Some(r), ReflectionPosition::BeforeAnswer) => format!("{r}\n{answer}"),
        (Some(r), ReflectionPosition::AfterAnswer) => format!("{answer} {r}"),
        _ => answer,
    }
}

/// k demonstrations then the query, separated by blank lines; the query
/// has no answer.
pub fn icl_prompt(shots: &[ProcessExample], query: &str) -> String {
    let mut blocks: Vec<String> =
        shots.iter().map(|ex| format!("Input: {}\nOutput: {}", ex.input, response(ex))).collect();
    blocks.push(format!("Input: {query}\nOutput:"));
    blocks.join("\n\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_combos: Vec<[Family; 2]>,
    pub test_combos: Vec<[Family; 2]>,
    pub combinator: Combinator,
    pub k: usize,
    pub n_test: usize,
    /// Inclusive range for bases, coefficients and exponents.
    pub param_range: (u64, u64),
    /// Applied to training examples only.
    pub reflection: Option<ReflectionMode>,
}

impl Default for SplitSpec {
    fn default() -> Self {
        use Family::*;
        Self {
            train_combos: vec![[Exponential, Polynomial], [Logarithmic, Trigonometric]],
            test_combos: vec![[Exponential, Logarithmic]],
            combinator: Combinator::Mul,
            k: 8,
            n_test: 100,
            param_range: (2, 99),
            reflection: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessSplit {
    pub train: Vec<ProcessExample>,
    pub test: Vec<ProcessExample>,
}

pub fn gen_primitive(family: Family, range: (u64, u64), rng: &mut Rng) -> Expr {
    let (lo, hi) = range;
    match family {
        Family::Exponential => Expr::Exponential(rng.gen_range(lo..=hi)),
        Family::Logarithmic => Expr::Logarithm(rng.gen_range(lo..=hi)),
        Family::Trigonometric => Expr::Trig(*[TrigFn::Sin, TrigFn::Cos, TrigFn::Tan].choose(rng).expect("non-empty")),
        Family::Polynomial => {
            let span = (hi - lo + 1) as usize;
            let n = rng.gen_range(1..=3usize).min(span);
            let mut exps: Vec<u64> = index::sample(rng, span, n).into_iter().map(|i| lo + i as u64).collect();
            exps.sort_unstable_by(|a, b| b.cmp(a));
            Expr::Polynomial(exps.into_iter().map(|exp| PolyTerm { coeff: rng.gen_range(lo..=hi), exp }).collect())
        }
    }
}

/// A single combinator over primitives of the two families, operands in
/// random order.
pub fn gen_expression(combo: [Family; 2], combinator: Combinator, range: (u64, u64), rng: &mut Rng) -> Expr {
    let mut families = combo;
    if rng.gen_bool(0.5) {
        families.swap(0, 1);
    }
    let u = gen_primitive(families[0], range, rng);
    let v = gen_primitive(families[1], range, rng);
    combinator.combine(u, v)
}

fn unordered(c: [Family; 2]) -> [Family; 2] {
    if c[0] <= c[1] {
        c
    } else {
        [c[1], c[0]]
    }
}

/// `(combinator, families)` triples present in `examples`.
pub fn combo_triples(examples: &[ProcessExample]) -> Result<BTreeSet<(Combinator, [Family; 2])>, DerivatoidError> {
    examples.iter().map(ProcessExample::triple).collect()
}

/// k training examples from `train_combos` and `n_test` held-out examples
/// from `test_combos`. Family pairs are unordered and must not overlap.
pub fn gen_process_split(spec: &SplitSpec, seed: u64) -> Result<ProcessSplit, DerivatoidError> {
    let train_set: BTreeSet<[Family; 2]> = spec.train_combos.iter().copied().map(unordered).collect();
    let test_set: BTreeSet<[Family; 2]> = spec.test_combos.iter().copied().map(unordered).collect();
    if let Some(c) = train_set.intersection(&test_set).next() {
        return Err(DerivatoidError::InvalidSplit(format!("{}×{} is in both train and test", c[0], c[1])));
    }
    if spec.k == 0 {
        return Err(DerivatoidError::InvalidSplit("k must be at least 1".into()));
    }
    if train_set.is_empty() {
        return Err(DerivatoidError::InvalidSplit("no training combinations".into()));
    }
    let (lo, hi) = spec.param_range;
    if lo < 1 || lo > hi {
        return Err(DerivatoidError::InvalidSplit(format!("bad parameter range {lo}..={hi}")));
    }

    let draw = |combos: &[[Family; 2]], label: &str, i: usize| {
        let mut rng = crate::rng::stream(seed, &format!("derivatoid-{label}-{i}"));
        let combo = *combos.choose(&mut rng).expect("checked non-empty");
        ProcessExample::new(&gen_expression(combo, spec.combinator, spec.param_range, &mut rng))
    };
    let train_combos: Vec<[Family; 2]> = train_set.into_iter().collect();
    let test_combos: Vec<[Family; 2]> = test_set.into_iter().collect();
    let mut train: Vec<ProcessExample> = (0..spec.k).map(|i| draw(&train_combos, "train", i)).collect();
    let test: Vec<ProcessExample> =
        if test_combos.is_empty() { Vec::new() } else { (0..spec.n_test).map(|i| draw(&test_combos, "test", i)).collect() };

    if let Some(mode) = spec.reflection {
        for (i, ex) in train.iter_mut().enumerate() {
            let e = parse(&ex.input)?;
            ex.reflection = Some(reflect(&e, mode, crate::hashing::stable_u64(format!("{seed}-{i}").as_bytes()))?);
            ex.reflection_position = match mode {
                ReflectionMode::AfterAnswer => ReflectionPosition::AfterAnswer,
                _ => ReflectionPosition::BeforeAnswer,
            };
        }
    }
    Ok(ProcessSplit { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Family::*;

    #[test]
    fn paper_reflection_wording() {
        let e = parse("(35**x) * (sin(x))").unwrap();
        assert_eq!(
            reflect(&e, ReflectionMode::BeforeAnswer, 0).unwrap(),
            "Reflection: This looks like a Exponential function multiplied by a Trigonometric function."
        );
        let mut ex = ProcessExample::new(&e);
        ex.reflection = Some(reflect(&e, ReflectionMode::BeforeAnswer, 0).unwrap());
        ex.reflection_position = ReflectionPosition::BeforeAnswer;
        assert_eq!(
            response(&ex),
            "Reflection: This looks like a Exponential function multiplied by a Trigonometric function.\n\
             Answer: (sin(x)) * (35**x) + (x**35) * (meep(x))."
        );
        ex.reflection_position = ReflectionPosition::AfterAnswer;
        assert!(response(&ex).starts_with("Answer: (sin(x)) * (35**x) + (x**35) * (meep(x)). Reflection: "));
    }

    #[test]
    fn bare_primitives_are_rejected() {
        assert_eq!(reflect(&Expr::Exponential(3), ReflectionMode::BeforeAnswer, 0), Err(DerivatoidError::UnsupportedShape));
    }

    #[test]
    fn nonsense_mapping_is_consistent() {
        let a = reflect(&parse("(2**x) * (sin(x))").unwrap(), ReflectionMode::NonsenseMapped, 1).unwrap();
        let b = reflect(&parse("(log(x, 5)) + (7**x)").unwrap(), ReflectionMode::NonsenseMapped, 9).unwrap();
        assert!(a.contains("a Blick function multiplied by a Wug function"));
        assert!(b.contains("a Dax function added to a Blick function"));
    }

    #[test]
    fn random_math_ignores_the_expression() {
        let exprs = ["(2**x) * (sin(x))", "(log(x, 5)) * (3 * x**4)", "(tan(x)) + (9**x)"];
        for seed in 0..50 {
            let outs: BTreeSet<String> = exprs
                .iter()
                .map(|s| reflect(&parse(s).unwrap(), ReflectionMode::RandomMath, seed).unwrap())
                .collect();
            assert_eq!(outs.len(), 1);
        }
    }

    #[test]
    fn random_math_is_independent_of_family_labels() {
        // 2x2 contingency: family group vs first half of the pool
        let mut rng = crate::rng::stream(3, "chi");
        let mut table = [[0f64; 2]; 2];
        for i in 0..400u64 {
            let combo = if i % 2 == 0 { [Exponential, Trigonometric] } else { [Logarithmic, Polynomial] };
            let e = gen_expression(combo, Combinator::Mul, (2, 99), &mut rng);
            let r = reflect(&e, ReflectionMode::RandomMath, i).unwrap();
            let pos = RANDOM_MATH.iter().position(|s| r.ends_with(s)).unwrap();
            table[(i % 2) as usize][usize::from(pos < RANDOM_MATH.len() / 2)] += 1.0;
        }
        let n: f64 = table.iter().flatten().sum();
        let mut chi2 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let expected = table[r].iter().sum::<f64>() * (table[0][c] + table[1][c]) / n;
                chi2 += (table[r][c] - expected).powi(2) / expected;
            }
        }
        // 1 degree of freedom, p = 0.001
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn split_respects_combinations() {
        let split = gen_process_split(&SplitSpec::default(), 4).unwrap();
        assert_eq!(split.train.len(), 8);
        assert_eq!(split.test.len(), 100);
        let train = combo_triples(&split.train).unwrap();
        let test = combo_triples(&split.test).unwrap();
        assert!(train.is_disjoint(&test));
        assert!(test.iter().all(|(_, f)| *f == [Exponential, Logarithmic]));
        for ex in split.train.iter().chain(&split.test) {
            assert_eq!(ex.output, render(&derivatoid(&parse(&ex.input).unwrap())));
        }
    }

    #[test]
    fn empty_test_combos_give_empty_test() {
        let spec = SplitSpec { test_combos: vec![], ..Default::default() };
        assert!(gen_process_split(&spec, 0).unwrap().test.is_empty());
    }

    #[test]
    fn overlapping_combos_are_rejected() {
        let spec = SplitSpec { test_combos: vec![[Polynomial, Exponential]], ..Default::default() };
        assert!(matches!(gen_process_split(&spec, 0), Err(DerivatoidError::InvalidSplit(_))));
    }

    #[test]
    fn icl_prompt_ends_with_open_query() {
        let split = gen_process_split(&SplitSpec { k: 2, n_test: 1, ..Default::default() }, 1).unwrap();
        let p = icl_prompt(&split.train, &split.test[0].input);
        assert_eq!(p.matches("\n\n").count(), 2);
        assert!(p.ends_with(&format!("Input: {}\nOutput:", split.test[0].input)));
    }

    #[test]
    fn jsonl_field_names() {
        let ex = ProcessExample::new(&parse("(2**x) * (sin(x))").unwrap());
        let v: serde_json::Value = serde_json::to_value(&ex).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, vec!["combo", "input", "output", "reflection", "reflection_position"]);
        assert_eq!(v["combo"], serde_json::json!(["exponential", "trigonometric"]));
        assert_eq!(v["reflection_position"], "none");
    }
}
