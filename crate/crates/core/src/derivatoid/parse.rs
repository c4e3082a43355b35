use std::fmt;

use super::{substitute, Expr, PolyTerm, TrigFn};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// Byte offset of the offending token.
    pub position: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: expected {}, found {}", self.position, self.expected.join(" or "), self.found)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    StarStar,
    Num(u64),
    Ident(String),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::StarStar => f.write_str("`**`"),
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' if bytes.get(i + 1) == Some(&b'*') => {
                i += 1;
                Tok::StarStar
            }
            b'*' => Tok::Star,
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..=i].parse().map_err(|_| ParseError {
                    position: start,
                    expected: vec!["a number that fits in 64 bits".into()],
                    found: text[start..=i].to_string(),
                })?;
                Tok::Num(n)
            }
            c if c.is_ascii_alphabetic() => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_alphanumeric() {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                let found = text[start..].chars().next().map(|c| format!("`{c}`")).unwrap_or_default();
                return Err(ParseError { position: start, expected: vec!["an expression token".into()], found });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

/// Canonical spacing: one space around `+`, `-` and `*`, one after `,`,
/// none elsewhere. Text that does not lex is returned trimmed.
pub fn normalize(text: &str) -> String {
    let Ok(tokens) = lex(text) else { return text.trim().to_string() };
    let mut out = String::new();
    for (tok, _) in tokens {
        match tok {
            Tok::LParen => out.push('('),
            Tok::RParen => out.push(')'),
            Tok::Comma => out.push_str(", "),
            Tok::Plus => out.push_str(" + "),
            Tok::Minus => out.push_str(" - "),
            Tok::Star => out.push_str(" * "),
            Tok::StarStar => out.push_str("**"),
            Tok::Num(n) => out.push_str(&n.to_string()),
            Tok::Ident(s) => out.push_str(&s),
            Tok::End => {}
        }
    }
    out
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    at: usize,
}

fn doubled_log(name: &str) -> Option<u64> {
    let rest = name.strip_prefix("log")?;
    let split = rest.find("log")?;
    let (a, b) = (&rest[..split], &rest[split + 3..]);
    if a.is_empty() || a != b || !a.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    a.parse().ok()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.at + 1).min(self.tokens.len() - 1)].0
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (tok, position) = &self.tokens[self.at];
        ParseError { position: *position, expected: expected.iter().map(|s| s.to_string()).collect(), found: tok.to_string() }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.at += 1;
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn number(&mut self) -> Result<u64, ParseError> {
        match *self.peek() {
            Tok::Num(n) => {
                self.at += 1;
                Ok(n)
            }
            _ => Err(self.error(&["number"])),
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.term()?;
        loop {
            let op = self.peek().clone();
            if op != Tok::Plus && op != Tok::Minus {
                return Ok(left);
            }
            self.at += 1;
            let right = self.term()?;
            left = if op == Tok::Plus {
                Expr::Add(Box::new(left), Box::new(right))
            } else {
                Expr::Sub(Box::new(left), Box::new(right))
            };
        }
    }

    // term := atom ('*' atom)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.atom()?;
        while *self.peek() == Tok::Star {
            self.at += 1;
            let right = self.atom()?;
            left = Expr::Mul(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    // atom := '(' body ')'
    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let e = self.body()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    /// `x` or a parenthesized expression; `None` stands for `x`.
    fn arg(&mut self) -> Result<Option<Expr>, ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == "x" => {
                self.at += 1;
                Ok(None)
            }
            Tok::LParen => self.atom().map(Some),
            _ => Err(self.error(&["`x`", "`(`"])),
        }
    }

    fn apply(leaf: Expr, arg: Option<Expr>) -> Expr {
        match arg {
            None => leaf,
            Some(inner) => substitute(&leaf, &inner),
        }
    }

    fn body(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => match self.peek2() {
                Tok::StarStar => {
                    self.at += 2;
                    let arg = self.arg()?;
                    Ok(Self::apply(Expr::Exponential(n), arg))
                }
                Tok::Star => self.polynomial(),
                _ => {
                    self.at += 1;
                    Err(self.error(&["`**`", "`*`"]))
                }
            },
            Tok::Ident(name) if name == "x" => {
                self.at += 1;
                self.expect(Tok::StarStar, "`**`")?;
                Ok(Expr::Power(self.number()?))
            }
            Tok::Ident(name) if name == "log" => {
                self.at += 1;
                self.expect(Tok::LParen, "`(`")?;
                let arg = self.arg()?;
                self.expect(Tok::Comma, "`,`")?;
                let base = self.number()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Self::apply(Expr::Logarithm(base), arg))
            }
            Tok::Ident(name) => {
                let leaf = if let Some(t) = TrigFn::from_name(&name) {
                    Expr::Trig(t)
                } else if let Some(base) = doubled_log(&name) {
                    Expr::DoubledLog(base)
                } else {
                    return Err(self.error(&["`x`", "`log`", "a trig function", "a doubled log", "number", "`(`"]));
                };
                self.at += 1;
                self.expect(Tok::LParen, "`(`")?;
                let arg = self.arg()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Self::apply(leaf, arg))
            }
            Tok::LParen => {
                // either a power of a composed argument or a group
                let inner = self.expr()?;
                if *self.peek() == Tok::StarStar {
                    self.at += 1;
                    let b = self.number()?;
                    Ok(substitute(&Expr::Power(b), &inner))
                } else {
                    Ok(inner)
                }
            }
            _ => Err(self.error(&["number", "`x`", "`log`", "a trig function", "a doubled log", "`(`"])),
        }
    }

    // polynomial := NUM '*' arg '**' NUM ('+' NUM '*' arg '**' NUM)*
    fn polynomial(&mut self) -> Result<Expr, ParseError> {
        let mut terms = Vec::new();
        let mut shared: Option<Option<Expr>> = None;
        loop {
            let coeff = self.number()?;
            self.expect(Tok::Star, "`*`")?;
            let pos = self.at;
            let arg = self.arg()?;
            match &shared {
                None => shared = Some(arg),
                Some(prev) if *prev == arg => {}
                Some(_) => {
                    self.at = pos;
                    return Err(self.error(&["the same argument in every polynomial term"]));
                }
            }
            self.expect(Tok::StarStar, "`**`")?;
            let exp = self.number()?;
            terms.push(PolyTerm { coeff, exp });
            if *self.peek() == Tok::Plus && matches!(self.peek2(), Tok::Num(_)) {
                self.at += 1;
            } else {
                break;
            }
        }
        Ok(Self::apply(Expr::Polynomial(terms), shared.flatten()))
    }
}

/// Parses the rendered grammar: parenthesized primitives joined by `+`, `-`
/// and `*`, with composition written as an argument in place of `x`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { tokens: lex(text)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["`+`", "`-`", "`*`", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::super::render;
    use super::*;

    #[test]
    fn exponential_fixture() {
        assert_eq!(parse("(64**x)").unwrap(), Expr::Exponential(64));
    }

    #[test]
    fn sum_with_polynomial_matches_hand_built_tree() {
        let expected = Expr::Add(
            Box::new(Expr::Trig(TrigFn::Sin)),
            Box::new(Expr::Polynomial(vec![PolyTerm { coeff: 3, exp: 2 }, PolyTerm { coeff: 5, exp: 1 }])),
        );
        assert_eq!(parse("(sin(x)) + (3 * x**2 + 5 * x**1)").unwrap(), expected);
    }

    #[test]
    fn whitespace_is_normalized() {
        let messy = "( log( x ,39 ) )*(64 ** x)";
        assert_eq!(normalize(messy), "(log(x, 39)) * (64**x)");
        assert_eq!(render(&parse(messy).unwrap()), normalize(messy));
    }

    #[test]
    fn derived_forms_parse() {
        let s = "(64**x) * (log(x, 39)) + (log39log39(x)) * (x**64)";
        assert_eq!(render(&parse(s).unwrap()), s);
        let s = "(x**2) * (meep(x)) * (meep((2**x)))";
        assert_eq!(render(&parse(s).unwrap()), s);
        let s = "((sin(x))**7) - (3 * (cos(x))**4)";
        assert_eq!(render(&parse(s).unwrap()), s);
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        let err = parse("(64**x) * ").unwrap_err();
        assert_eq!(err.position, 10);
        assert_eq!(err.expected, vec!["`(`"]);
        let err = parse("(foo(x))").unwrap_err();
        assert_eq!(err.position, 1);
        assert!(err.expected.contains(&"a trig function".to_string()));
        assert!(parse("(log39log38(x))").is_err());
        assert!(parse("(3 * x**2 + 4 * (sin(x))**1)").is_err());
    }
}
