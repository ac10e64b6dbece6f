//! Multivariate polynomials over the joint strategy vector `x1..xn`.
//!
//! Used for utilities (degree at most [`MAX_DEGREE`]) and for affine bound and
//! direction maps. Terms are kept in a canonical sorted form so that equality
//! and serialization are structural.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{check_dim, Error, Result};

pub const MAX_DEGREE: u32 = 4;

/// Sum of `coef * prod x_k^e_k`. Keys are exponent vectors of length `nvars`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable `x_{k+1}` (zero-based `k`).
    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, 1.0);
        p
    }

    /// `c0 + sum_k coeffs[k] x_{k+1}`.
    pub fn affine(constant: f64, coeffs: &[f64]) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, constant);
        for (k, c) in coeffs.iter().enumerate() {
            p = p.add(&Self::var(n, k).scale(*c));
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_affine(&self) -> bool {
        self.degree() <= 1
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    /// Constant term.
    pub fn constant_term(&self) -> f64 {
        self.terms.get(&vec![0; self.nvars]).copied().unwrap_or(0.0)
    }

    /// Coefficient of `x_{k+1}` in the linear part.
    pub fn linear_coeff(&self, k: usize) -> f64 {
        let mut e = vec![0; self.nvars];
        e[k] = 1;
        self.terms.get(&e).copied().unwrap_or(0.0)
    }

    pub fn depends_on(&self, k: usize) -> bool {
        self.terms.keys().any(|e| e[k] > 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (k, v)| acc * v.powi(*k as i32))
            })
            .sum()
    }

    pub fn checked_eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.nvars, x.len())?;
        Ok(self.eval(x))
    }

    /// Partial derivative in `x_{k+1}`.
    pub fn derivative(&self, k: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut d = e.clone();
                d[k] -= 1;
                p.add_term(d, c * e[k] as f64);
            }
        }
        p
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nvars).map(|k| self.derivative(k).eval(x)).collect()
    }

    /// Coefficients `a_0, a_1, ...` with `self = sum_j a_j * x_{k+1}^j`; each
    /// `a_j` is free of `x_{k+1}`.
    pub fn coefficients_in(&self, k: usize) -> Vec<Self> {
        let top = self.terms.keys().map(|e| e[k]).max().unwrap_or(0) as usize;
        let mut out = vec![Self::zero(self.nvars); top + 1];
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let j = rest[k] as usize;
            rest[k] = 0;
            out[j].add_term(rest, *c);
        }
        out
    }

    /// Substitutes `x_{k+1} := value`.
    pub fn substitute(&self, k: usize, value: f64) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let j = rest[k];
            rest[k] = 0;
            p.add_term(rest, c * value.powi(j as i32));
        }
        p
    }

    /// Range enclosure over the box `lower <= x <= upper` by interval
    /// arithmetic on each monomial. Exact for affine polynomials.
    pub fn interval(&self, lower: &[f64], upper: &[f64]) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (e, c) in &self.terms {
            let mut mlo = 1.0_f64;
            let mut mhi = 1.0_f64;
            for (k, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                let (a, b) = pow_interval(lower[k], upper[k], p);
                let cands = [mlo * a, mlo * b, mhi * a, mhi * b];
                mlo = cands.iter().copied().fold(f64::INFINITY, f64::min);
                mhi = cands.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            }
            if *c >= 0.0 {
                lo += c * mlo;
                hi += c * mhi;
            } else {
                lo += c * mhi;
                hi += c * mlo;
            }
        }
        (lo, hi)
    }

    pub fn parse(text: &str, nvars: usize) -> Result<Self> {
        Self::parse_at(text, nvars, 1, 1)
    }

    /// Parses with error positions offset to `(line, column)` of the source.
    pub fn parse_at(text: &str, nvars: usize, line: usize, column: usize) -> Result<Self> {
        let tokens = lex(text).map_err(|(col, message)| Error::Parse {
            line,
            column: column + col,
            message,
        })?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            nvars,
            end: text.chars().count(),
        };
        let p = parser.expr();
        let p = p.and_then(|p| match parser.peek() {
            None => Ok(p),
            Some((col, t)) => Err((*col, format!("unexpected {t}"))),
        });
        p.map_err(|(col, message)| Error::Parse {
            line,
            column: column + col,
            message,
        })
    }
}

fn pow_interval(a: f64, b: f64, p: u32) -> (f64, f64) {
    let (pa, pb) = (a.powi(p as i32), b.powi(p as i32));
    if p.is_multiple_of(2) && a < 0.0 && b > 0.0 {
        (0.0, pa.max(pb))
    } else {
        (pa.min(pb), pa.max(pb))
    }
}

impl fmt::Display for Polynomial {
    /// Re-parsable text: `{:?}` float formatting round-trips exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest degree first reads naturally.
        let mut terms: Vec<(&Vec<u32>, &f64)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let neg = *c < 0.0;
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0)
                .map(|(k, p)| {
                    if *p == 1 {
                        format!("x{}", k + 1)
                    } else {
                        format!("x{}^{}", k + 1, p)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag:?}")?;
            } else if mag == 1.0 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag:?}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Var(usize),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Var(k) => write!(f, "variable x{}", k + 1),
            Token::Op(c) => write!(f, "'{c}'"),
        }
    }
}

type Spanned = (usize, Token);
type PResult<T> = std::result::Result<T, (usize, String)>;

fn lex(text: &str) -> PResult<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| (start, format!("malformed number '{s}'")))?;
            out.push((start, Token::Num(v)));
        } else if c == 'x' {
            let start = i;
            i += 1;
            let ds = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[ds..i].iter().collect();
            match s.parse::<usize>() {
                Ok(k) if k >= 1 => out.push((start, Token::Var(k - 1))),
                _ => return Err((start, "expected variable index after 'x'".into())),
            }
        } else {
            return Err((i, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    nvars: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn col(&self) -> usize {
        self.peek().map(|t| t.0).unwrap_or(self.end)
    }

    fn eat(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some((_, Token::Op(c))) if *c == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn guard(&self, p: Polynomial, col: usize) -> PResult<Polynomial> {
        if p.degree() > MAX_DEGREE {
            Err((col, format!("polynomial degree exceeds {MAX_DEGREE}")))
        } else {
            Ok(p)
        }
    }

    fn expr(&mut self) -> PResult<Polynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            let col = self.col();
            if self.eat('*') {
                let rhs = self.unary()?;
                acc = self.guard(acc.mul(&rhs), col)?;
            } else if self.eat('/') {
                let d = self.unary()?;
                if !d.is_constant() || d.constant_term() == 0.0 {
                    return Err((col, "division only by a nonzero constant".into()));
                }
                acc = acc.scale(1.0 / d.constant_term());
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> PResult<Polynomial> {
        if self.eat('-') {
            Ok(self.unary()?.scale(-1.0))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> PResult<Polynomial> {
        let base = self.atom()?;
        let col = self.col();
        if !self.eat('^') {
            return Ok(base);
        }
        match self.peek().cloned() {
            Some((c, Token::Num(v))) => {
                self.pos += 1;
                if v.fract() != 0.0 || !(0.0..=MAX_DEGREE as f64).contains(&v) {
                    return Err((c, format!("exponent must be an integer in 0..={MAX_DEGREE}")));
                }
                let mut p = Polynomial::constant(self.nvars, 1.0);
                for _ in 0..v as u32 {
                    p = self.guard(p.mul(&base), col)?;
                }
                Ok(p)
            }
            _ => Err((self.col(), "expected integer exponent".into())),
        }
    }

    fn atom(&mut self) -> PResult<Polynomial> {
        let col = self.col();
        match self.peek().cloned() {
            Some((_, Token::Num(v))) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.nvars, v))
            }
            Some((_, Token::Var(k))) => {
                self.pos += 1;
                if k >= self.nvars {
                    return Err((
                        col,
                        format!("variable x{} outside declared dimension {}", k + 1, self.nvars),
                    ));
                }
                Ok(Polynomial::var(self.nvars, k))
            }
            Some((_, Token::Op('('))) => {
                self.pos += 1;
                let p = self.expr()?;
                if !self.eat(')') {
                    return Err((self.col(), "expected ')'".into()));
                }
                Ok(p)
            }
            Some((_, t)) => Err((col, format!("unexpected {t}"))),
            None => Err((col, "unexpected end of expression".into())),
        }
    }
}

/// Vector of affine polynomials `x -> R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    rows: Vec<Polynomial>,
}

impl AffineMap {
    pub fn new(rows: Vec<Polynomial>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| !r.is_affine()) {
            return Err(Error::Input(format!("expression '{r}' is not affine")));
        }
        if let Some(n) = rows.first().map(Polynomial::nvars) {
            for r in &rows {
                check_dim(n, r.nvars())?;
            }
        }
        Ok(Self { rows })
    }

    pub fn constant(nvars: usize, values: &[f64]) -> Self {
        Self {
            rows: values.iter().map(|v| Polynomial::constant(nvars, *v)).collect(),
        }
    }

    pub fn rows(&self) -> &[Polynomial] {
        &self.rows
    }

    pub fn out_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.eval(x)).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.rows.iter().all(Polynomial::is_constant)
    }

    /// Componentwise range over the box `lower <= x <= upper`.
    pub fn interval(&self, lower: &[f64], upper: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.rows.iter().map(|r| r.interval(lower, upper)).unzip()
    }
}
