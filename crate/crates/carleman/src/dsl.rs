//! Text format for polynomial systems.
//!
//! ```text
//! # Van der Pol
//! param omega = 1
//! param r = 0.6
//! x1' = x2
//! x2' = -omega^2*x1 + r*(1 - x1^2)*x2
//! ```
//!
//! Expressions use `+ - * /`, parentheses and `^` with a positive integer
//! exponent. `^` binds tighter than unary minus, so `-x1^2` is `-(x1^2)`.
//! Division is only allowed by constants. State variables are `x1 .. xn`,
//! where `n` is the largest index that appears; every one of them needs
//! exactly one equation. Newlines end statements except inside parentheses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use carleman_core::model::compile;
use carleman_core::{Monomial, PolyOde};
use thiserror::Error;

/// Largest exponent accepted after `^`.
const MAX_EXPONENT: u64 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown identifier `{name}` at {line}:{column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("equation for x{variable} (line {line}) has a nonzero constant term; the vector field must vanish at 0")]
    ConstantTerm { variable: usize, line: usize },
    #[error("no equation for x{variable}")]
    MissingEquation { variable: usize },
    #[error("second equation for x{variable} at line {line}")]
    DuplicateEquation { variable: usize, line: usize },
    #[error("parameter `{name}` redefined at line {line}")]
    DuplicateParameter { name: String, line: usize },
    #[error("no equations")]
    Empty,
}

/// Parsed system: expanded monomials per equation plus the parameter values used.
#[derive(Debug, Clone, PartialEq)]
pub struct DslSystem {
    pub n: usize,
    pub rhs: Vec<Vec<Monomial>>,
    pub params: Vec<(String, f64)>,
}

impl DslSystem {
    pub fn compile(&self) -> carleman_core::Result<PolyOde> {
        compile(&self.rhs, self.n)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Var(usize),
    Prime,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> DslError {
    DslError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    for (line_idx, raw) in text.lines().enumerate() {
        let line = line_idx + 1;
        let code = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = code.chars().collect();
        let mut pos = 0;
        while pos < chars.len() {
            let c = chars[pos];
            let column = pos + 1;
            if c.is_whitespace() {
                pos += 1;
                continue;
            }
            let single = match c {
                '\'' => Some(Tok::Prime),
                '=' => Some(Tok::Eq),
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' => Some(Tok::Star),
                '/' => Some(Tok::Slash),
                '^' => Some(Tok::Caret),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ';' => Some(Tok::Newline),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Token { tok, line, column });
                pos += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = pos;
                while pos < chars.len() && (chars[pos].is_ascii_digit() || chars[pos] == '.') {
                    pos += 1;
                }
                if pos < chars.len() && matches!(chars[pos], 'e' | 'E') {
                    let mut look = pos + 1;
                    if look < chars.len() && matches!(chars[look], '+' | '-') {
                        look += 1;
                    }
                    if look < chars.len() && chars[look].is_ascii_digit() {
                        pos = look;
                        while pos < chars.len() && chars[pos].is_ascii_digit() {
                            pos += 1;
                        }
                    }
                }
                let literal: String = chars[start..pos].iter().collect();
                let value: f64 = literal
                    .parse()
                    .map_err(|_| syntax(line, column, format!("malformed number `{literal}`")))?;
                out.push(Token {
                    tok: Tok::Num(value),
                    line,
                    column,
                });
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = pos;
                while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_')
                {
                    pos += 1;
                }
                let word: String = chars[start..pos].iter().collect();
                out.push(Token {
                    tok: classify_word(&word, line, column)?,
                    line,
                    column,
                });
            } else {
                return Err(syntax(line, column, format!("unexpected character `{c}`")));
            }
        }
        out.push(Token {
            tok: Tok::Newline,
            line,
            column: chars.len() + 1,
        });
    }
    let line = out.last().map_or(1, |t| t.line);
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: 1,
    });
    Ok(out)
}

fn classify_word(word: &str, line: usize, column: usize) -> Result<Tok, DslError> {
    let Some(digits) = word.strip_prefix('x') else {
        return Ok(Tok::Ident(word.to_string()));
    };
    if digits.is_empty() || !digits.chars().all(|d| d.is_ascii_digit()) {
        return Ok(Tok::Ident(word.to_string()));
    }
    match digits.parse::<usize>() {
        Ok(0) | Err(_) => Err(syntax(
            line,
            column,
            format!("invalid state variable `{word}`; indices start at x1"),
        )),
        Ok(index) => Ok(Tok::Var(index)),
    }
}

/// Sparse polynomial: exponent vector (variable index -> power) to coefficient.
#[derive(Debug, Clone, Default, PartialEq)]
struct Poly(BTreeMap<Vec<u32>, f64>);

impl Poly {
    fn constant(c: f64) -> Self {
        let mut p = Poly::default();
        if c != 0.0 {
            p.0.insert(Vec::new(), c);
        }
        p
    }

    fn var(index: usize) -> Self {
        let mut exps = vec![0; index];
        exps[index - 1] = 1;
        let mut p = Poly::default();
        p.0.insert(exps, 1.0);
        p
    }

    /// Value of a polynomial without variables.
    fn as_constant(&self) -> Option<f64> {
        match self.0.len() {
            0 => Some(0.0),
            1 => self.0.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        let entry = self.0.entry(exps).or_insert(0.0);
        *entry += c;
    }

    fn add(mut self, other: Poly, sign: f64) -> Poly {
        for (e, c) in other.0 {
            self.add_term(e, sign * c);
        }
        self
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &other.0 {
                let len = ea.len().max(eb.len());
                let exps: Vec<u32> = (0..len)
                    .map(|i| ea.get(i).copied().unwrap_or(0) + eb.get(i).copied().unwrap_or(0))
                    .collect();
                out.add_term(trim(exps), ca * cb);
            }
        }
        out
    }

    fn scale(mut self, s: f64) -> Poly {
        self.0.values_mut().for_each(|c| *c *= s);
        self
    }

    fn pow(&self, e: u64) -> Poly {
        let mut acc = Poly::constant(1.0);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

fn trim(mut exps: Vec<u32>) -> Vec<u32> {
    while exps.last() == Some(&0) {
        exps.pop();
    }
    exps
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    params: BTreeMap<String, f64>,
    depth: usize,
    max_var: usize,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> &Token {
        // Newlines inside parentheses are plain whitespace.
        while self.depth > 0 && self.tokens[self.pos].tok == Tok::Newline {
            self.pos += 1;
        }
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.peek().clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, DslError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(syntax(
                t.line,
                t.column,
                format!("expected {what}, found {}", describe(&t.tok)),
            ))
        }
    }

    fn expr(&mut self) -> Result<Poly, DslError> {
        let mut acc = self.term()?;
        loop {
            let sign = match self.peek().tok {
                Tok::Plus => 1.0,
                Tok::Minus => -1.0,
                _ => return Ok(acc),
            };
            self.next();
            let rhs = self.term()?;
            acc = acc.add(rhs, sign);
        }
    }

    fn term(&mut self) -> Result<Poly, DslError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    let rhs = self.unary()?;
                    acc = acc.mul(&rhs);
                }
                Tok::Slash => {
                    let at = self.next();
                    let rhs = self.unary()?;
                    match rhs.as_constant() {
                        Some(c) if c != 0.0 => acc = acc.scale(1.0 / c),
                        Some(_) => return Err(syntax(at.line, at.column, "division by zero")),
                        None => {
                            return Err(syntax(
                                at.line,
                                at.column,
                                "division is only allowed by constants",
                            ))
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, DslError> {
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                Ok(self.unary()?.scale(-1.0))
            }
            Tok::Plus => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, DslError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let t = self.next();
        match t.tok {
            Tok::Num(v) if v.fract() == 0.0 && v >= 1.0 && v <= MAX_EXPONENT as f64 => {
                Ok(base.pow(v as u64))
            }
            _ => Err(syntax(
                t.line,
                t.column,
                format!("exponent must be an integer in 1..={MAX_EXPONENT}"),
            )),
        }
    }

    fn atom(&mut self) -> Result<Poly, DslError> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(Poly::constant(v)),
            Tok::Var(i) => {
                self.max_var = self.max_var.max(i);
                Ok(Poly::var(i))
            }
            Tok::Ident(name) => match self.params.get(&name) {
                Some(&v) => Ok(Poly::constant(v)),
                None => Err(DslError::UnknownIdentifier {
                    name,
                    line: t.line,
                    column: t.column,
                }),
            },
            Tok::LParen => {
                self.depth += 1;
                let inner = self.expr();
                let close = self.peek().clone();
                self.depth -= 1;
                let inner = inner?;
                if close.tok != Tok::RParen {
                    return Err(syntax(
                        close.line,
                        close.column,
                        format!("expected `)`, found {}", describe(&close.tok)),
                    ));
                }
                self.pos += 1;
                Ok(inner)
            }
            other => Err(syntax(
                t.line,
                t.column,
                format!(
                    "expected a number, variable or `(`, found {}",
                    describe(&other)
                ),
            )),
        }
    }

    fn end_of_statement(&mut self) -> Result<(), DslError> {
        let t = self.next();
        match t.tok {
            Tok::Newline | Tok::Eof => Ok(()),
            other => Err(syntax(
                t.line,
                t.column,
                format!("expected end of line, found {}", describe(&other)),
            )),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Var(i) => format!("`x{i}`"),
        Tok::Prime => "`'`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Newline => "end of line".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a system, expanding every right-hand side into monomials.
pub fn parse(text: &str) -> Result<DslSystem, DslError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        params: BTreeMap::new(),
        depth: 0,
        max_var: 0,
    };
    let mut param_order = Vec::new();
    let mut equations: BTreeMap<usize, (Poly, usize)> = BTreeMap::new();

    loop {
        let t = p.next();
        match t.tok {
            Tok::Eof => break,
            Tok::Newline => continue,
            Tok::Ident(ref kw) if kw == "param" => {
                let name_tok = p.next();
                let Tok::Ident(name) = name_tok.tok else {
                    return Err(syntax(
                        name_tok.line,
                        name_tok.column,
                        "expected a parameter name",
                    ));
                };
                if name == "param" {
                    return Err(syntax(
                        name_tok.line,
                        name_tok.column,
                        "`param` is reserved",
                    ));
                }
                p.expect(Tok::Eq, "`=`")?;
                let at = p.peek().clone();
                let vars_before = p.max_var;
                let value = p.expr()?;
                let value = match value.as_constant() {
                    Some(v) if p.max_var == vars_before => v,
                    _ => {
                        return Err(syntax(
                            at.line,
                            at.column,
                            "parameter values must be constant",
                        ))
                    }
                };
                p.end_of_statement()?;
                if p.params.insert(name.clone(), value).is_some() {
                    return Err(DslError::DuplicateParameter { name, line: t.line });
                }
                param_order.push(name);
            }
            Tok::Var(i) => {
                p.max_var = p.max_var.max(i);
                p.expect(Tok::Prime, "`'` after the state variable")?;
                p.expect(Tok::Eq, "`=`")?;
                let rhs = p.expr()?;
                p.end_of_statement()?;
                if equations.insert(i, (rhs, t.line)).is_some() {
                    return Err(DslError::DuplicateEquation {
                        variable: i,
                        line: t.line,
                    });
                }
            }
            other => {
                return Err(syntax(
                    t.line,
                    t.column,
                    format!(
                        "expected `param` or an equation `xi' = ...`, found {}",
                        describe(&other)
                    ),
                ))
            }
        }
    }

    let n = p.max_var;
    if n == 0 {
        return Err(DslError::Empty);
    }
    let mut rhs = Vec::with_capacity(n);
    for variable in 1..=n {
        let (poly, line) = equations
            .remove(&variable)
            .ok_or(DslError::MissingEquation { variable })?;
        let mut terms = Vec::new();
        for (exps, coeff) in poly.0 {
            if coeff == 0.0 {
                continue;
            }
            if exps.is_empty() {
                return Err(DslError::ConstantTerm { variable, line });
            }
            let mut full = exps;
            full.resize(n, 0);
            terms.push(Monomial::new(coeff, full));
        }
        terms.sort_by(|a, b| {
            a.degree()
                .cmp(&b.degree())
                .then_with(|| b.exponents.cmp(&a.exponents))
        });
        rhs.push(terms);
    }
    let params = param_order
        .into_iter()
        .map(|name| (name.clone(), p.params[&name]))
        .collect();
    Ok(DslSystem { n, rhs, params })
}

/// Writes monomial lists back as DSL text that [`parse`] maps to the same
/// monomials. Coefficients use the shortest round-trip representation.
pub fn to_dsl(rhs: &[Vec<Monomial>]) -> String {
    let mut out = String::new();
    for (r, terms) in rhs.iter().enumerate() {
        let _ = write!(out, "x{}' =", r + 1);
        if terms.is_empty() {
            out.push_str(" 0");
        }
        for (idx, term) in terms.iter().enumerate() {
            let negative = term.coeff.is_sign_negative();
            let magnitude = term.coeff.abs();
            match (idx, negative) {
                (0, true) => out.push_str(" -"),
                (0, false) => out.push(' '),
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let factors: Vec<String> = term
                .exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        format!("x{}", v + 1)
                    } else {
                        format!("x{}^{e}", v + 1)
                    }
                })
                .collect();
            if magnitude != 1.0 || factors.is_empty() {
                let _ = write!(out, "{magnitude}");
                if !factors.is_empty() {
                    out.push('*');
                }
            }
            out.push_str(&factors.join("*"));
        }
        out.push('\n');
    }
    out
}
