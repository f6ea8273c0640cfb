//! Text form of series: `3/2 x1^2 x2 - x2`, with `1/(1 - x1)` expanded to
//! the requested truncation.
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := factor (['*'] factor | '/' factor)*
//! factor  := primary ['^' nat]
//! primary := rational | var | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;
use crate::series::{MultiIndex, TruncatedSeries};

type S = TruncatedSeries<Rational>;

/// Default variable names `x1, …, xd`.
pub fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexed {
    tok: Tok,
    line: usize,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str, names: &[String]) -> Result<(Vec<Lexed>, (usize, usize))> {
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut column) = (1, 1);
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l, col) = (line, column);
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' | '·' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Lexed { tok, line: l, column: col });
            i += 1;
            column += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            column += i - start;
            let n: BigInt = digits.parse().expect("ascii digits");
            out.push(Lexed { tok: Tok::Num(n), line: l, column: col });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            column += i - start;
            let idx = names
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| err(l, col, format!("unknown variable `{name}`")))?;
            out.push(Lexed { tok: Tok::Var(idx), line: l, column: col });
            continue;
        }
        return Err(err(l, col, format!("unexpected character `{c}`")));
    }
    Ok((out, (line, column)))
}

struct Parser<'a> {
    toks: &'a [Lexed],
    pos: usize,
    end: (usize, usize),
    dim: usize,
    trunc: u32,
}

/// Intermediate value: plain numbers stay rational so that `3/2` is a coefficient.
enum Value {
    Num(Rational),
    Series(S),
}

impl Value {
    fn into_series(self, dim: usize, trunc: u32) -> S {
        match self {
            Value::Num(q) => S::constant(dim, trunc, q),
            Value::Series(s) => s,
        }
    }
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.end, |t| (t.line, t.column))
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(err(l, c, message))
    }

    fn expr(&mut self) -> Result<S> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Plus) => self.pos += 1,
            Some(Tok::Minus) => {
                negate = true;
                self.pos += 1;
            }
            _ => {}
        }
        let first = self.term()?;
        let mut acc = if negate { -&first } else { first };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_) | Tok::Var(_) | Tok::LParen))
    }

    fn term(&mut self) -> Result<S> {
        if !self.starts_factor() {
            return self.fail("expected a number, a variable or `(`");
        }
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    if !self.starts_factor() {
                        return self.fail("expected a factor after `*`");
                    }
                    let f = self.factor()?;
                    acc = self.mul(acc, f);
                }
                Some(Tok::Slash) => {
                    let (l, c) = self.here();
                    self.pos += 1;
                    if !self.starts_factor() {
                        return self.fail("expected a denominator after `/`");
                    }
                    let den = self.factor()?;
                    acc = self.div(acc, den, l, c)?;
                }
                _ if self.starts_factor() => {
                    let f = self.factor()?;
                    acc = self.mul(acc, f);
                }
                _ => return Ok(acc.into_series(self.dim, self.trunc)),
            }
        }
    }

    fn mul(&self, a: Value, b: Value) -> Value {
        match (a, b) {
            (Value::Num(x), Value::Num(y)) => Value::Num(x * y),
            (Value::Num(x), Value::Series(s)) | (Value::Series(s), Value::Num(x)) => {
                Value::Series(s.scale(&x))
            }
            (Value::Series(s), Value::Series(t)) => Value::Series(&s * &t),
        }
    }

    fn div(&self, a: Value, b: Value, line: usize, column: usize) -> Result<Value> {
        match b {
            Value::Num(y) if y.is_zero() => Err(err(line, column, "division by zero")),
            Value::Num(y) => Ok(match a {
                Value::Num(x) => Value::Num(x / y),
                Value::Series(s) => Value::Series(s.scale(&(Rational::one() / y))),
            }),
            Value::Series(t) => {
                let inv = t
                    .inverse()
                    .map_err(|_| err(line, column, "denominator vanishes at the origin"))?;
                Ok(Value::Series(&a.into_series(self.dim, self.trunc) * &inv))
            }
        }
    }

    fn factor(&mut self) -> Result<Value> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let exp = match self.peek() {
            Some(Tok::Num(n)) => {
                let n = u32::try_from(n.clone()).or_else(|_| self.fail("exponent too large"))?;
                self.pos += 1;
                n
            }
            _ => return self.fail("expected a natural exponent after `^`"),
        };
        Ok(match base {
            Value::Num(q) => Value::Num(num_traits::pow::pow(q, exp as usize)),
            Value::Series(s) => Value::Series(s.pow(exp)),
        })
    }

    fn primary(&mut self) -> Result<Value> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Value::Num(Rational::from_integer(n)))
            }
            Some(Tok::Var(j)) => {
                self.pos += 1;
                Ok(Value::Series(S::variable(self.dim, self.trunc, j)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.fail("expected `)`");
                }
                self.pos += 1;
                Ok(Value::Series(inner))
            }
            _ => self.fail("expected a number, a variable or `(`"),
        }
    }
}

/// Parse `text` in the variables `names`, truncated at `trunc`.
pub fn parse_series(text: &str, names: &[String], trunc: u32) -> Result<S> {
    let (toks, end) = lex(text, names)?;
    if toks.is_empty() {
        return Err(err(1, 1, "empty expression"));
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end,
        dim: names.len(),
        trunc,
    };
    let s = p.expr()?;
    if p.pos < toks.len() {
        return p.fail("unexpected token");
    }
    Ok(s)
}

fn monomial_text(k: &MultiIndex, names: &[String]) -> String {
    k.as_slice()
        .iter()
        .zip(names)
        .filter(|(e, _)| **e > 0)
        .map(|(e, n)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Print `f` so that [`parse_series`] reads it back exactly.
pub fn print_series(f: &S, names: &[String]) -> String {
    let mut out = String::new();
    for (k, c) in f.terms() {
        let negative = c.is_negative();
        let abs = c.abs();
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let mono = monomial_text(k, names);
        if mono.is_empty() {
            out.push_str(&abs.to_string());
        } else if abs.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{abs} {mono}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn names(d: usize) -> Vec<String> {
        default_names(d)
    }

    #[test]
    fn two_terms() {
        let s = parse_series("3/2 x1^2 x2 - x2", &names(2), 5).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.coeff_of(&[2, 1]), rat(3, 2));
        assert_eq!(s.coeff_of(&[0, 1]), rat(-1, 1));
    }

    #[test]
    fn geometric_shorthand() {
        let s = parse_series("1/(1-x1)", &names(1), 4).unwrap();
        assert_eq!(s.len(), 5);
        assert!((0..=4).all(|n| s.coeff_of(&[n]) == rat(1, 1)));
    }

    #[test]
    fn vanishing_denominator() {
        match parse_series("1/(x1)", &names(1), 4) {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!((line, column), (1, 2));
                assert!(message.contains("vanishes"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positioned_errors() {
        match parse_series("x1 +\n  y", &names(1), 3) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_series("x1 +", &names(1), 3), Err(Error::Parse { .. })));
        assert!(matches!(parse_series("(x1", &names(1), 3), Err(Error::Parse { .. })));
        assert!(matches!(parse_series("", &names(1), 3), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip_examples() {
        let n = names(2);
        for text in ["0", "-1/3", "x1 - 7/5 x1 x2^3 + 2", "-x2^4"] {
            let s = parse_series(text, &n, 6).unwrap();
            assert_eq!(parse_series(&print_series(&s, &n), &n, 6).unwrap(), s);
        }
        assert_eq!(print_series(&parse_series("x2 + 2 x1", &n, 3).unwrap(), &n), "2 x1 + x2");
    }
}
