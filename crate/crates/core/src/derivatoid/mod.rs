//! Derivatoids: a derivative-like rewrite of small math-like expressions
//! over `x`, with a parser, renderer and k-shot dataset generation.
//!
//! Primitive rules: `b**x -> x**b`, `c * x**e -> (c+e) * x**(e+2)` per term,
//! `log(x, b) -> logblogb(x)`, `sin/cos/tan -> meep/morp/moop`.
//! Combinators: `u + v -> du - dv`, `u * v -> v * u + du * dv`,
//! `u(v) -> du * dv * dv(u)`.

mod parse;
mod process;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use parse::{normalize, parse, ParseError};
pub use process::{
    combo_triples, gen_expression, gen_primitive, gen_process_split, icl_prompt, reflect, response, ProcessExample,
    ProcessSplit, ReflectionMode, ReflectionPosition, SplitSpec, RANDOM_MATH,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum DerivatoidError {
    #[error("reflections need a single combinator over two primitives")]
    UnsupportedShape,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigFn {
    Sin,
    Cos,
    Tan,
    Meep,
    Morp,
    Moop,
}

impl TrigFn {
    pub const ALL: [TrigFn; 6] = [TrigFn::Sin, TrigFn::Cos, TrigFn::Tan, TrigFn::Meep, TrigFn::Morp, TrigFn::Moop];

    pub fn name(self) -> &'static str {
        match self {
            TrigFn::Sin => "sin",
            TrigFn::Cos => "cos",
            TrigFn::Tan => "tan",
            TrigFn::Meep => "meep",
            TrigFn::Morp => "morp",
            TrigFn::Moop => "moop",
        }
    }

    pub fn from_name(name: &str) -> Option<TrigFn> {
        TrigFn::ALL.into_iter().find(|t| t.name() == name)
    }

    /// sin/cos/tan map to meep/morp/moop; the nonsense names are fixed.
    pub fn derivatoid(self) -> TrigFn {
        match self {
            TrigFn::Sin => TrigFn::Meep,
            TrigFn::Cos => TrigFn::Morp,
            TrigFn::Tan => TrigFn::Moop,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coeff: u64,
    pub exp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    /// `b**x`
    Exponential(u64),
    /// `x**b`, the derivatoid of an exponential.
    Power(u64),
    Polynomial(Vec<PolyTerm>),
    /// `log(x, b)`
    Logarithm(u64),
    /// `logblogb(x)`, the derivatoid of a logarithm.
    DoubledLog(u64),
    Trig(TrigFn),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `outer(inner)`
    Compose(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exponential,
    Polynomial,
    Logarithmic,
    Trigonometric,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Exponential, Family::Polynomial, Family::Logarithmic, Family::Trigonometric];

    /// Capitalized display name used in reflections.
    pub fn title(self) -> &'static str {
        match self {
            Family::Exponential => "Exponential",
            Family::Polynomial => "Polynomial",
            Family::Logarithmic => "Logarithmic",
            Family::Trigonometric => "Trigonometric",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Family::Exponential => "exp",
            Family::Polynomial => "poly",
            Family::Logarithmic => "log",
            Family::Trigonometric => "trig",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.short() == s || f.title().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown family `{s}` (expected exp, poly, log or trig)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combinator {
    Add,
    Mul,
    Compose,
}

impl Combinator {
    pub fn combine(self, u: Expr, v: Expr) -> Expr {
        match self {
            Combinator::Add => Expr::Add(Box::new(u), Box::new(v)),
            Combinator::Mul => Expr::Mul(Box::new(u), Box::new(v)),
            Combinator::Compose => substitute(&u, &v),
        }
    }

    fn phrase(self) -> &'static str {
        match self {
            Combinator::Add => "added to",
            Combinator::Mul => "multiplied by",
            Combinator::Compose => "composed with",
        }
    }
}

impl FromStr for Combinator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "add" | "addition" => Ok(Combinator::Add),
            "mul" | "multiplication" => Ok(Combinator::Mul),
            "compose" | "composition" => Ok(Combinator::Compose),
            _ => Err(format!("unknown combinator `{s}` (expected add, mul or compose)")),
        }
    }
}

impl Expr {
    pub fn is_primitive(&self) -> bool {
        !matches!(self, Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..) | Expr::Compose(..))
    }

    /// Family of an input primitive; derived leaves report the family they
    /// came from.
    pub fn family(&self) -> Option<Family> {
        match self {
            Expr::Exponential(_) | Expr::Power(_) => Some(Family::Exponential),
            Expr::Polynomial(_) => Some(Family::Polynomial),
            Expr::Logarithm(_) | Expr::DoubledLog(_) => Some(Family::Logarithmic),
            Expr::Trig(_) => Some(Family::Trigonometric),
            _ => None,
        }
    }

    /// `(combinator, first family, second family)` for a single
    /// combinator over two primitives. For compositions the outer function
    /// comes first.
    pub fn shape(&self) -> Option<(Combinator, Family, Family)> {
        let (c, u, v) = match self {
            Expr::Add(u, v) => (Combinator::Add, u, v),
            Expr::Mul(u, v) => (Combinator::Mul, u, v),
            Expr::Compose(u, v) => (Combinator::Compose, u, v),
            _ => return None,
        };
        Some((c, u.family()?, v.family()?))
    }

    /// Number of combinator nodes on the deepest path.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Compose(a, b) => 1 + a.depth().max(b.depth()),
            _ => 0,
        }
    }
}

/// `outer` with `inner` in place of `x`. Substitution is pushed through
/// sums and products so compositions always have a primitive outside.
pub fn substitute(outer: &Expr, inner: &Expr) -> Expr {
    let sub = |e: &Expr| Box::new(substitute(e, inner));
    match outer {
        Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
        Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
        Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
        Expr::Compose(o, i) => Expr::Compose(o.clone(), sub(i)),
        leaf => Expr::Compose(Box::new(leaf.clone()), Box::new(inner.clone())),
    }
}

/// Applies the rewrite tables. Total: derived leaves (`x**b`, doubled logs,
/// meep/morp/moop) map to themselves and subtraction follows addition.
pub fn derivatoid(e: &Expr) -> Expr {
    let d = |x: &Expr| Box::new(derivatoid(x));
    match e {
        Expr::Exponential(b) => Expr::Power(*b),
        Expr::Power(b) => Expr::Power(*b),
        Expr::Polynomial(terms) => {
            Expr::Polynomial(terms.iter().map(|t| PolyTerm { coeff: t.coeff + t.exp, exp: t.exp + 2 }).collect())
        }
        Expr::Logarithm(b) | Expr::DoubledLog(b) => Expr::DoubledLog(*b),
        Expr::Trig(t) => Expr::Trig(t.derivatoid()),
        Expr::Add(u, v) | Expr::Sub(u, v) => Expr::Sub(d(u), d(v)),
        Expr::Mul(u, v) => Expr::Add(
            Box::new(Expr::Mul(v.clone(), u.clone())),
            Box::new(Expr::Mul(d(u), d(v))),
        ),
        Expr::Compose(u, v) => {
            let (du, dv) = (derivatoid(u), derivatoid(v));
            let dv_of_u = substitute(&dv, u);
            Expr::Mul(Box::new(Expr::Mul(Box::new(du), Box::new(dv))), Box::new(dv_of_u))
        }
    }
}

/// Canonical text: primitives in parentheses, single spaces around binary
/// operators, `**` for powers.
pub fn render(e: &Expr) -> String {
    render_with(e, "x")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

fn is_sum(e: &Expr) -> bool {
    matches!(e, Expr::Add(..) | Expr::Sub(..))
}

fn render_with(e: &Expr, arg: &str) -> String {
    match e {
        Expr::Exponential(b) => format!("({b}**{arg})"),
        Expr::Power(b) => format!("({arg}**{b})"),
        Expr::Polynomial(terms) => {
            let body: Vec<String> = terms.iter().map(|t| format!("{} * {arg}**{}", t.coeff, t.exp)).collect();
            format!("({})", body.join(" + "))
        }
        Expr::Logarithm(b) => format!("(log({arg}, {b}))"),
        Expr::DoubledLog(b) => format!("(log{b}log{b}({arg}))"),
        Expr::Trig(t) => format!("({}({arg}))", t.name()),
        Expr::Compose(outer, inner) => {
            let inner_text = render_with(inner, arg);
            if inner.is_primitive() || matches!(**inner, Expr::Compose(..)) {
                render_with(outer, &inner_text)
            } else {
                render_with(outer, &format!("({inner_text})"))
            }
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let op = if matches!(e, Expr::Add(..)) { "+" } else { "-" };
            let right = render_with(b, arg);
            let right = if is_sum(b) { format!("({right})") } else { right };
            format!("{} {op} {right}", render_with(a, arg))
        }
        Expr::Mul(a, b) => {
            let wrap = |x: &Expr, needs: bool| {
                let s = render_with(x, arg);
                if needs { format!("({s})") } else { s }
            };
            format!("{} * {}", wrap(a, is_sum(a)), wrap(b, is_sum(b) || matches!(**b, Expr::Mul(..))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn worked_example() {
        let e = parse("(log(x, 39)) * (64**x)").unwrap();
        assert_eq!(render(&derivatoid(&e)), "(64**x) * (log(x, 39)) + (log39log39(x)) * (x**64)");
    }

    #[test]
    fn reflection_example_answer() {
        let e = Expr::Mul(b(Expr::Exponential(35)), b(Expr::Trig(TrigFn::Sin)));
        assert_eq!(render(&e), "(35**x) * (sin(x))");
        assert_eq!(render(&derivatoid(&e)), "(sin(x)) * (35**x) + (x**35) * (meep(x))");
    }

    #[test]
    fn primitive_rules() {
        assert_eq!(render(&Expr::Exponential(64)), "(64**x)");
        assert_eq!(render(&Expr::Logarithm(39)), "(log(x, 39))");
        assert_eq!(derivatoid(&Expr::Trig(TrigFn::Sin)), Expr::Trig(TrigFn::Meep));
        assert_eq!(derivatoid(&Expr::Trig(TrigFn::Cos)), Expr::Trig(TrigFn::Morp));
        assert_eq!(derivatoid(&Expr::Trig(TrigFn::Tan)), Expr::Trig(TrigFn::Moop));
        assert_eq!(
            derivatoid(&Expr::Polynomial(vec![PolyTerm { coeff: 3, exp: 2 }])),
            Expr::Polynomial(vec![PolyTerm { coeff: 5, exp: 4 }])
        );
    }

    #[test]
    fn addition_subtracts_derivatoids() {
        let e = Expr::Add(b(Expr::Exponential(64)), b(Expr::Trig(TrigFn::Sin)));
        assert_eq!(render(&derivatoid(&e)), "(x**64) - (meep(x))");
    }

    #[test]
    fn composition_substitutes_u_into_dv() {
        // u(v) with u = 2**x, v = sin: du * dv * dv(u)
        let e = substitute(&Expr::Exponential(2), &Expr::Trig(TrigFn::Sin));
        assert_eq!(render(&e), "(2**(sin(x)))");
        assert_eq!(render(&derivatoid(&e)), "(x**2) * (meep(x)) * (meep((2**x)))");
    }

    #[test]
    fn precedence_parentheses_are_explicit() {
        let sum = Expr::Add(b(Expr::Exponential(2)), b(Expr::Logarithm(3)));
        let e = Expr::Mul(b(sum.clone()), b(Expr::Trig(TrigFn::Cos)));
        assert_eq!(render(&e), "((2**x) + (log(x, 3))) * (cos(x))");
        let e = Expr::Sub(b(Expr::Power(2)), b(sum));
        assert_eq!(render(&e), "(x**2) - ((2**x) + (log(x, 3)))");
    }

    #[test]
    fn shape_names_both_families() {
        let e = parse("(35**x) * (sin(x))").unwrap();
        assert_eq!(e.shape(), Some((Combinator::Mul, Family::Exponential, Family::Trigonometric)));
        assert_eq!(Expr::Exponential(2).shape(), None);
    }
}
