//! Text form of polynomials and tensors.
//!
//! Grammar (explicit `*`, no juxtaposition):
//!
//! ```text
//! tensor := tterm (('+' | '-') tterm)*        tterm := ['-'] product '(x)' product
//! expr   := ['-'] term (('+' | '-') term)*    term  := factor ('*' factor)*
//! factor := atom ['^' int]
//! atom   := int ['/' int] | 'z^k@M' | '(' scalar '@' M ')' | '(' expr ')' | name
//! ```
//!
//! A parenthesized group containing `@` is a scalar. `(x)` is always the
//! tensor separator, so a lone generator in parentheses cannot be written.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::algebra::{poly_gen, poly_mul, poly_one, poly_scalar, tensor_of, GeneratorTable, GradedPoly, TensorSquarePoly, Word};
use crate::cyclotomic::CycScalar;
use crate::error::{Error, Result};

fn render_word(table: &GeneratorTable, w: &Word) -> String {
    if w.is_empty() {
        return "1".into();
    }
    let mut parts = Vec::new();
    let letters = w.letters();
    let mut i = 0;
    while i < letters.len() {
        let mut j = i;
        while j < letters.len() && letters[j] == letters[i] {
            j += 1;
        }
        let name = table.name(letters[i]);
        if j - i == 1 {
            parts.push(name.to_string());
        } else {
            parts.push(format!("{name}^{}", j - i));
        }
        i = j;
    }
    parts.join("*")
}

/// Coefficient and body as `(negative, text)`; the body carries the coefficient.
fn render_term(c: &CycScalar, body: &str, body_is_unit: bool) -> (bool, String) {
    if let Some(q) = c.as_rational() {
        let neg = q.is_negative();
        let a = q.abs();
        let text = if a.is_one() {
            body.to_string()
        } else if body_is_unit {
            a.to_string()
        } else {
            format!("{a}*{body}")
        };
        (neg, text)
    } else if body_is_unit {
        (false, format!("({c})"))
    } else {
        (false, format!("({c})*{body}"))
    }
}

fn join_terms(terms: impl Iterator<Item = (bool, String)>) -> String {
    let mut out = String::new();
    for (k, (neg, text)) in terms.enumerate() {
        match (k, neg) {
            (0, false) => out.push_str(&text),
            (0, true) => {
                out.push('-');
                out.push_str(&text);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&text);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&text);
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Terms in increasing word order; the zero polynomial renders as `0`.
pub fn render_poly(table: &GeneratorTable, p: &GradedPoly) -> String {
    join_terms(p.iter().map(|(w, c)| render_term(c, &render_word(table, w), w.is_empty())))
}

/// Terms by decreasing left word, then increasing right word: `x(x)1 + 1(x)x`.
pub fn render_tensor(table: &GeneratorTable, t: &TensorSquarePoly) -> String {
    let mut terms: Vec<_> = t.iter().collect();
    terms.sort_by(|((u1, v1), _), ((u2, v2), _)| u2.cmp(u1).then_with(|| v1.cmp(v2)));
    join_terms(terms.into_iter().map(|((u, v), c)| {
        let body = format!("{}(x){}", render_word(table, u), render_word(table, v));
        render_term(c, &body, false)
    }))
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Scalar(CycScalar),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Tensor,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[s..i].iter().collect();
            out.push((col, Tok::Int(digits.parse().expect("digits"))));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[s..i].iter().collect();
            // `z^k@M` is a root of unity, otherwise `z` is an ordinary name
            if name == "z" {
                if let Some((len, scalar)) = scan_root(&chars[i..]) {
                    out.push((col, Tok::Scalar(scalar)));
                    i += len;
                    continue;
                }
            }
            out.push((col, Tok::Name(name)));
            continue;
        }
        if c == '(' {
            if chars[i..].starts_with(&['(', 'x', ')']) {
                out.push((col, Tok::Tensor));
                i += 3;
                continue;
            }
            if let Some(close) = matching_paren(&chars, i) {
                let inner: String = chars[i + 1..close].iter().collect();
                if inner.contains('@') {
                    if let Ok(scalar) = inner.parse::<CycScalar>() {
                        out.push((col, Tok::Scalar(scalar)));
                        i = close + 1;
                        continue;
                    }
                }
            }
            out.push((col, Tok::LParen));
            i += 1;
            continue;
        }
        let tok = match c {
            ')' => Tok::RParen,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            _ => return Err(Error::parse(col, format!("unexpected character `{c}`"))),
        };
        out.push((col, tok));
        i += 1;
    }
    Ok(out)
}

fn matching_paren(chars: &[char], open: usize) -> Option<usize> {
    let mut depth = 0;
    for (k, &c) in chars.iter().enumerate().skip(open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(k);
                }
            }
            _ => {}
        }
    }
    None
}

/// After a `z`: `^k @ M` (whitespace allowed around `@`).
fn scan_root(rest: &[char]) -> Option<(usize, CycScalar)> {
    let mut i = 0;
    let mut exp = 1i64;
    if rest.first() == Some(&'^') {
        i += 1;
        let s = i;
        while i < rest.len() && rest[i].is_ascii_digit() {
            i += 1;
        }
        exp = rest[s..i].iter().collect::<String>().parse().ok()?;
    }
    while i < rest.len() && rest[i] == ' ' {
        i += 1;
    }
    if rest.get(i) != Some(&'@') {
        return None;
    }
    i += 1;
    while i < rest.len() && rest[i] == ' ' {
        i += 1;
    }
    let s = i;
    while i < rest.len() && rest[i].is_ascii_digit() {
        i += 1;
    }
    let level: u32 = rest[s..i].iter().collect::<String>().parse().ok()?;
    if level == 0 {
        return None;
    }
    Some((i, CycScalar::root_of_unity(level, exp)))
}

struct Parser<'a> {
    table: &'a GeneratorTable,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn new(table: &'a GeneratorTable, text: &str) -> Result<Self> {
        Ok(Parser { table, toks: lex(text)?, pos: 0, end_col: text.chars().count() + 1 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(c, _)| *c).unwrap_or(self.end_col)
    }

    fn err(&self, msg: &str) -> Error {
        Error::parse(self.col(), msg)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect_end(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.err("unexpected trailing input")),
        }
    }

    fn expr(&mut self) -> Result<GradedPoly> {
        let mut acc = GradedPoly::zero();
        let mut sign = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                -1
            }
            Some(Tok::Plus) => {
                self.bump();
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc.add_scaled(&t, &CycScalar::from_int(sign));
            match self.peek() {
                Some(Tok::Plus) => sign = 1,
                Some(Tok::Minus) => sign = -1,
                _ => return Ok(acc),
            }
            self.bump();
        }
    }

    fn term(&mut self) -> Result<GradedPoly> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            let f = self.factor()?;
            acc = poly_mul(&acc, &f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<GradedPoly> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let k = match self.bump() {
                Some(Tok::Int(k)) => k,
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected an exponent"));
                }
            };
            let k: usize = k.try_into().map_err(|_| self.err("exponent too large"))?;
            let mut acc = poly_one();
            for _ in 0..k {
                acc = poly_mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<GradedPoly> {
        let col = self.col();
        match self.bump() {
            Some(Tok::Int(n)) => {
                if let Some(Tok::Slash) = self.peek() {
                    self.bump();
                    let d = match self.bump() {
                        Some(Tok::Int(d)) if d != BigInt::from(0) => d,
                        _ => return Err(Error::parse(col, "bad rational")),
                    };
                    return Ok(poly_scalar(CycScalar::from_rational(BigRational::new(n, d))));
                }
                Ok(poly_scalar(CycScalar::from_rational(BigRational::from_integer(n))))
            }
            Some(Tok::Scalar(s)) => Ok(poly_scalar(s)),
            Some(Tok::Name(name)) => {
                let i = self.table.index_of(&name).map_err(|_| {
                    Error::parse(col, format!("unknown generator `{name}`"))
                })?;
                Ok(poly_gen(i))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(e),
                    _ => {
                        self.pos -= 1;
                        Err(self.err("expected `)`"))
                    }
                }
            }
            _ => Err(Error::parse(col, "expected a term")),
        }
    }

    fn tensor(&mut self) -> Result<TensorSquarePoly> {
        let mut acc = TensorSquarePoly::zero();
        let mut sign = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                -1
            }
            _ => 1,
        };
        loop {
            let left = self.term()?;
            match self.bump() {
                Some(Tok::Tensor) => {}
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected `(x)`"));
                }
            }
            let right = self.term()?;
            acc.add_scaled(&tensor_of(&left, &right), &CycScalar::from_int(sign));
            match self.peek() {
                Some(Tok::Plus) => sign = 1,
                Some(Tok::Minus) => sign = -1,
                _ => return Ok(acc),
            }
            self.bump();
        }
    }
}

pub fn parse_poly(table: &GeneratorTable, text: &str) -> Result<GradedPoly> {
    let mut p = Parser::new(table, text)?;
    if p.peek().is_none() {
        return Err(p.err("empty expression"));
    }
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

pub fn parse_tensor(table: &GeneratorTable, text: &str) -> Result<TensorSquarePoly> {
    let mut p = Parser::new(table, text)?;
    if matches!(p.toks.as_slice(), [(_, Tok::Int(n))] if *n == BigInt::from(0)) {
        return Ok(TensorSquarePoly::zero());
    }
    let e = p.tensor()?;
    p.expect_end()?;
    Ok(e)
}
