//! Text formats for pure states.
//!
//! Two readers are provided. The ket language evaluates expressions such as
//! `(|00> + |11>)/sqrt(2)` or `1/2*(|000000>+|000111>+|110000>+|110111>)`:
//!
//! ```text
//! state   := ['dims:' int+ ';'] sum
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | atom
//! atom    := number | 'i' | 'sqrt' '(' sum ')' | ket | '(' sum ')'
//! ket     := '|' digit+ '>'
//! ```
//!
//! `*` scales when one side is a scalar and is the tensor product when both
//! sides are states, so `|0>*|1>` and `|01>` denote the same state. Each ket
//! digit addresses one party; a party's dimension is its largest digit plus
//! one (at least 2) unless a `dims:` header fixes it.
//!
//! The amplitude table has a `dims: d_1 ... d_n` header followed by one
//! `i_1 ... i_n re im` row per nonzero amplitude; `#` starts a comment.
//!
//! Both readers normalize the result. The `*_raw` variants return the
//! amplitudes as written.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, ParseError, Result};
use crate::state::{normalize, normalize_with_norm, Limits, PureState, SystemShape};

pub const DEFAULT_SERIALIZE_THRESHOLD: f64 = 1e-12;

const MAX_DEPTH: usize = 256;

/// Amplitudes exactly as evaluated, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawState {
    pub shape: SystemShape,
    pub amplitudes: Vec<Complex64>,
}

impl RawState {
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Normalized state and the norm it was divided by.
    pub fn normalize(self) -> Result<(PureState, f64)> {
        normalize_with_norm(self.shape, self.amplitudes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

/// Ket-expression syntax tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Imaginary,
    Ket(Vec<u8>),
    Sqrt(Box<Node>),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub expr: Expr,
    pub pos: Pos,
}

/// A parsed ket expression with its optional `dims:` header.
#[derive(Debug, Clone, PartialEq)]
pub struct KetProgram {
    pub dims: Option<Vec<usize>>,
    pub body: Node,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Ket(Vec<u8>),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Colon,
    Semi,
    Eof,
}

fn syntax(pos: Pos, expected: &[&str]) -> Error {
    ParseError::Syntax {
        line: pos.line,
        column: pos.column,
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
    .into()
}

fn invalid(pos: Pos, message: impl Into<String>) -> Error {
    ParseError::Invalid {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
    .into()
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            '|' => {
                let mut j = i + 1;
                let mut digits = Vec::new();
                while j < chars.len() && chars[j].is_ascii_digit() {
                    digits.push(chars[j] as u8 - b'0');
                    j += 1;
                }
                let here = Pos {
                    line,
                    column: col + (j - i),
                };
                if j >= chars.len() || chars[j] != '>' {
                    return Err(if digits.is_empty() {
                        syntax(here, &["digit"])
                    } else {
                        syntax(here, &["digit", "'>'"])
                    });
                }
                if digits.is_empty() {
                    return Err(syntax(here, &["digit"]));
                }
                i = j;
                Tok::Ket(digits)
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let v: f64 = s.parse().map_err(|_| syntax(pos, &["number"]))?;
                i = j - 1;
                Tok::Num(v)
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                i = j - 1;
                Tok::Ident(s)
            }
            _ => {
                return Err(syntax(
                    pos,
                    &["number", "ket", "'i'", "'sqrt'", "'('", "operator"],
                ))
            }
        };
        i += 1;
        col += i - start;
        toks.push((tok, pos));
    }
    toks.push((Tok::Eof, Pos { line, column: col }));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    depth: usize,
}

const ATOM_START: &[&str] = &["number", "ket", "'i'", "'sqrt'", "'('", "'-'"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, expected: &[&str]) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.pos(), expected))
        }
    }

    fn program(&mut self) -> Result<KetProgram> {
        let dims = if matches!(self.peek(), Tok::Ident(s) if s == "dims") {
            self.bump();
            self.expect(Tok::Colon, &["':'"])?;
            let mut dims = Vec::new();
            while let Tok::Num(v) = *self.peek() {
                let pos = self.pos();
                if v.fract() != 0.0 || !(2.0..=1e9).contains(&v) {
                    return Err(invalid(pos, "dimensions must be integers of at least 2"));
                }
                dims.push(v as usize);
                self.bump();
            }
            if dims.is_empty() {
                return Err(syntax(self.pos(), &["integer"]));
            }
            self.expect(Tok::Semi, &["integer", "';'"])?;
            Some(dims)
        } else {
            None
        };
        let body = self.sum()?;
        if *self.peek() != Tok::Eof {
            return Err(syntax(
                self.pos(),
                &["'+'", "'-'", "'*'", "'/'", "end of input"],
            ));
        }
        Ok(KetProgram { dims, body })
    }

    fn sum(&mut self) -> Result<Node> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(invalid(self.pos(), "expression nested too deeply"));
        }
        let mut left = self.product()?;
        loop {
            let op = self.peek().clone();
            if op != Tok::Plus && op != Tok::Minus {
                break;
            }
            let (_, pos) = self.bump();
            let right = self.product()?;
            let (l, r) = (Box::new(left), Box::new(right));
            left = Node {
                expr: if op == Tok::Plus {
                    Expr::Add(l, r)
                } else {
                    Expr::Sub(l, r)
                },
                pos,
            };
        }
        self.depth -= 1;
        Ok(left)
    }

    fn product(&mut self) -> Result<Node> {
        let mut left = self.unary()?;
        loop {
            let op = self.peek().clone();
            if op != Tok::Star && op != Tok::Slash {
                break;
            }
            let (_, pos) = self.bump();
            let right = self.unary()?;
            let (l, r) = (Box::new(left), Box::new(right));
            left = Node {
                expr: if op == Tok::Star {
                    Expr::Mul(l, r)
                } else {
                    Expr::Div(l, r)
                },
                pos,
            };
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Tok::Minus | Tok::Plus => {
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return Err(invalid(self.pos(), "expression nested too deeply"));
                }
                let (tok, pos) = self.bump();
                let inner = self.unary()?;
                self.depth -= 1;
                Ok(if tok == Tok::Minus {
                    Node {
                        expr: Expr::Neg(Box::new(inner)),
                        pos,
                    }
                } else {
                    inner
                })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Node> {
        let pos = self.pos();
        let expr = match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Expr::Number(v)
            }
            Tok::Ket(d) => {
                self.bump();
                Expr::Ket(d)
            }
            Tok::Ident(s) if s == "i" => {
                self.bump();
                Expr::Imaginary
            }
            Tok::Ident(s) if s == "sqrt" => {
                self.bump();
                self.expect(Tok::LParen, &["'('"])?;
                let inner = self.sum()?;
                self.expect(Tok::RParen, &["')'", "operator"])?;
                Expr::Sqrt(Box::new(inner))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect(Tok::RParen, &["')'", "operator"])?;
                return Ok(inner);
            }
            _ => return Err(syntax(pos, ATOM_START)),
        };
        Ok(Node { expr, pos })
    }
}

/// Parses a ket expression into its syntax tree without evaluating it.
pub fn parse_ket_program(text: &str) -> Result<KetProgram> {
    let toks = lex(text)?;
    Parser {
        toks,
        at: 0,
        depth: 0,
    }
    .program()
}

#[derive(Debug, Clone)]
enum Value {
    Scalar(Complex64),
    State {
        arity: usize,
        terms: BTreeMap<Vec<u8>, Complex64>,
    },
}

struct Evaluator {
    limits: Limits,
}

impl Evaluator {
    fn max_arity(&self) -> usize {
        // every party has dimension at least 2
        (usize::BITS - 1 - self.limits.max_dim.max(1).leading_zeros()) as usize
    }

    fn check_arity(&self, arity: usize) -> Result<()> {
        if arity > self.max_arity() {
            return Err(Error::SizeLimit {
                what: "party count",
                actual: arity,
                limit: self.max_arity(),
            });
        }
        Ok(())
    }

    fn eval(&self, node: &Node) -> Result<Value> {
        use Value::*;
        let pos = node.pos;
        Ok(match &node.expr {
            Expr::Number(v) => Scalar(Complex64::new(*v, 0.0)),
            Expr::Imaginary => Scalar(Complex64::new(0.0, 1.0)),
            Expr::Ket(d) => {
                self.check_arity(d.len())?;
                let mut terms = BTreeMap::new();
                terms.insert(d.clone(), Complex64::new(1.0, 0.0));
                State {
                    arity: d.len(),
                    terms,
                }
            }
            Expr::Sqrt(inner) => match self.eval(inner)? {
                Scalar(z) => Scalar(z.sqrt()),
                State { .. } => return Err(invalid(inner.pos, "sqrt of a state")),
            },
            Expr::Neg(inner) => scale(self.eval(inner)?, Complex64::new(-1.0, 0.0)),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let sign = if matches!(node.expr, Expr::Add(..)) {
                    1.0
                } else {
                    -1.0
                };
                match (self.eval(a)?, self.eval(b)?) {
                    (Scalar(x), Scalar(y)) => Scalar(x + y * sign),
                    (
                        State {
                            arity: la,
                            terms: mut ta,
                        },
                        State {
                            arity: lb,
                            terms: tb,
                        },
                    ) => {
                        if la != lb {
                            return Err(ParseError::ArityMismatch {
                                line: pos.line,
                                column: pos.column,
                                left: la,
                                right: lb,
                            }
                            .into());
                        }
                        for (k, v) in tb {
                            *ta.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v * sign;
                        }
                        State {
                            arity: la,
                            terms: ta,
                        }
                    }
                    _ => return Err(invalid(pos, "cannot add a scalar and a state")),
                }
            }
            Expr::Mul(a, b) => match (self.eval(a)?, self.eval(b)?) {
                (Scalar(x), Scalar(y)) => Scalar(x * y),
                (Scalar(x), s @ State { .. }) | (s @ State { .. }, Scalar(x)) => scale(s, x),
                (
                    State {
                        arity: la,
                        terms: ta,
                    },
                    State {
                        arity: lb,
                        terms: tb,
                    },
                ) => {
                    self.check_arity(la + lb)?;
                    let count = ta.len().saturating_mul(tb.len());
                    if count > self.limits.max_dim {
                        return Err(Error::SizeLimit {
                            what: "number of ket terms",
                            actual: count,
                            limit: self.limits.max_dim,
                        });
                    }
                    let mut terms = BTreeMap::new();
                    for (ka, va) in &ta {
                        for (kb, vb) in &tb {
                            let mut k = ka.clone();
                            k.extend_from_slice(kb);
                            terms.insert(k, va * vb);
                        }
                    }
                    State {
                        arity: la + lb,
                        terms,
                    }
                }
            },
            Expr::Div(a, b) => {
                let divisor = match self.eval(b)? {
                    Scalar(z) => z,
                    State { .. } => return Err(invalid(b.pos, "cannot divide by a state")),
                };
                if divisor == Complex64::new(0.0, 0.0) {
                    return Err(invalid(b.pos, "division by zero"));
                }
                scale(self.eval(a)?, divisor.inv())
            }
        })
    }
}

fn scale(v: Value, by: Complex64) -> Value {
    match v {
        Value::Scalar(z) => Value::Scalar(z * by),
        Value::State { arity, mut terms } => {
            for t in terms.values_mut() {
                *t *= by;
            }
            Value::State { arity, terms }
        }
    }
}

/// Positions of the first ket with each digit string, for error reporting.
fn ket_positions(node: &Node, out: &mut HashMap<Vec<u8>, Pos>) {
    match &node.expr {
        Expr::Ket(d) => {
            out.entry(d.clone()).or_insert(node.pos);
        }
        Expr::Sqrt(a) | Expr::Neg(a) => ket_positions(a, out),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            ket_positions(a, out);
            ket_positions(b, out);
        }
        Expr::Number(_) | Expr::Imaginary => {}
    }
}

/// Evaluates a ket expression without normalizing it.
pub fn parse_ket_expression_raw(text: &str, limits: Limits) -> Result<RawState> {
    let program = parse_ket_program(text)?;
    let value = Evaluator { limits }.eval(&program.body)?;
    let (arity, terms) = match value {
        Value::State { arity, terms } => (arity, terms),
        Value::Scalar(_) => {
            return Err(invalid(program.body.pos, "expression contains no ket"));
        }
    };
    let dims = match program.dims {
        Some(dims) => {
            if dims.len() != arity {
                return Err(ParseError::ArityMismatch {
                    line: 1,
                    column: 1,
                    left: dims.len(),
                    right: arity,
                }
                .into());
            }
            for key in terms.keys() {
                if let Some(k) = (0..arity).find(|&k| key[k] as usize >= dims[k]) {
                    let mut positions = HashMap::new();
                    ket_positions(&program.body, &mut positions);
                    let pos = positions[key];
                    return Err(invalid(
                        pos,
                        format!(
                            "digit {} exceeds dimension {} of party A{}",
                            key[k],
                            dims[k],
                            k + 1
                        ),
                    ));
                }
            }
            dims
        }
        None => (0..arity)
            .map(|k| {
                terms
                    .keys()
                    .map(|t| t[k] as usize + 1)
                    .max()
                    .unwrap_or(2)
                    .max(2)
            })
            .collect(),
    };
    let shape = SystemShape::with_limits(dims, limits)?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); shape.dim()];
    for (key, amp) in terms {
        let idx = key
            .iter()
            .zip(shape.dims())
            .fold(0, |acc, (&digit, &d)| acc * d + digit as usize);
        amplitudes[idx] += amp;
    }
    Ok(RawState { shape, amplitudes })
}

/// Evaluates and normalizes a ket expression.
pub fn parse_ket_expression(text: &str) -> Result<PureState> {
    parse_ket_expression_raw(text, Limits::default())?
        .normalize()
        .map(|(s, _)| s)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Whitespace-separated words with their 1-based starting columns.
fn split_with_columns(row: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (col, (i, ch)) in row.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((col + 1, i)),
            (true, Some((c, s))) => {
                out.push((c, &row[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((c, s)) = start {
        out.push((c, &row[s..]));
    }
    out
}

/// Reads an amplitude table without normalizing it.
pub fn parse_amplitude_table_raw(text: &str, limits: Limits) -> Result<RawState> {
    let mut lines = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l.trim_end_matches('\r'))))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_line, header) = lines.next().ok_or_else(|| ParseError::BadHeader {
        line: 1,
        message: "missing 'dims:' header".into(),
    })?;
    let bad_header = |message: &str| -> Error {
        ParseError::BadHeader {
            line: header_line,
            message: message.into(),
        }
        .into()
    };
    let rest = header
        .trim_start()
        .strip_prefix("dims:")
        .ok_or_else(|| bad_header("expected 'dims: d_1 d_2 ...'"))?;
    let dims = rest
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| bad_header("dimensions must be positive integers"))?;
    if dims.is_empty() {
        return Err(bad_header("no dimensions given"));
    }
    if dims.iter().any(|&d| d < 2) {
        return Err(bad_header("every dimension must be at least 2"));
    }
    let shape = SystemShape::with_limits(dims, limits)?;
    let n = shape.parties();

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); shape.dim()];
    let mut first_seen: HashMap<usize, usize> = HashMap::new();
    for (line, row) in lines {
        let tokens = split_with_columns(row);
        let syntax_at = |column: usize, what: &str| -> Error {
            ParseError::Syntax {
                line,
                column,
                expected: vec![what.into()],
            }
            .into()
        };
        if tokens.len() != n + 2 {
            let column = tokens.get(n + 2).map_or(row.chars().count() + 1, |t| t.0);
            return Err(syntax_at(
                column,
                &format!("{n} indices followed by real and imaginary parts"),
            ));
        }
        let mut idx = 0;
        for (k, &(column, tok)) in tokens[..n].iter().enumerate() {
            let digit: usize = tok.parse().map_err(|_| syntax_at(column, "index"))?;
            let d = shape.dims()[k];
            if digit >= d {
                return Err(ParseError::IndexOutOfRange {
                    line,
                    party: k + 1,
                    index: digit,
                    dim: d,
                }
                .into());
            }
            idx = idx * d + digit;
        }
        let (re_col, re) = tokens[n];
        let (im_col, im) = tokens[n + 1];
        let re: f64 = re.parse().map_err(|_| syntax_at(re_col, "real part"))?;
        let im: f64 = im
            .parse()
            .map_err(|_| syntax_at(im_col, "imaginary part"))?;
        match first_seen.entry(idx) {
            Entry::Occupied(e) => {
                return Err(ParseError::DuplicateEntry {
                    line,
                    first: *e.get(),
                }
                .into())
            }
            Entry::Vacant(e) => {
                e.insert(line);
            }
        }
        amplitudes[idx] = Complex64::new(re, im);
    }
    Ok(RawState { shape, amplitudes })
}

/// Reads and normalizes an amplitude table.
pub fn parse_amplitude_table(text: &str) -> Result<PureState> {
    let raw = parse_amplitude_table_raw(text, Limits::default())?;
    normalize(raw.shape, raw.amplitudes)
}

/// Writes `state` as an amplitude table, skipping amplitudes of modulus
/// below `threshold`. Values are printed with round-trip precision.
pub fn serialize_state(state: &PureState, threshold: f64) -> String {
    let mut out = String::from("dims:");
    for d in state.dims() {
        let _ = write!(out, " {d}");
    }
    out.push('\n');
    let dims = state.dims();
    let mut digits = vec![0usize; dims.len()];
    for a in state.amplitudes() {
        if a.norm() >= threshold {
            for d in &digits {
                let _ = write!(out, "{d} ");
            }
            let _ = writeln!(out, "{:?} {:?}", a.re, a.im);
        }
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(s: &PureState, expected: &[Complex64]) {
        assert_eq!(s.amplitudes().len(), expected.len());
        for (i, (a, b)) in s.amplitudes().iter().zip(expected).enumerate() {
            assert!((a - b).norm() < 1e-12, "index {i}: {a} vs {b}");
        }
    }

    #[test]
    fn epr_expression() {
        let s = parse_ket_expression("(|00> + |11>)/sqrt(2)").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_amps(&s, &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    }

    #[test]
    fn six_qubit_expression() {
        let s = parse_ket_expression("1/2*(|000000>+|000111>+|110000>+|110111>)").unwrap();
        assert_eq!(s.dims(), &[2; 6]);
        for (i, a) in s.amplitudes().iter().enumerate() {
            let expected = if [0b000000, 0b000111, 0b110000, 0b110111].contains(&i) {
                0.5
            } else {
                0.0
            };
            assert!((a.re - expected).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn singlet() {
        let s = parse_ket_expression("(|01> - |10>)/sqrt(2)").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_amps(&s, &[c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn arity_mismatch() {
        let err = parse_ket_expression("|00> + |1>").unwrap_err();
        assert!(matches!(
            err,
            Error::Parse(ParseError::ArityMismatch {
                line: 1,
                column: 6,
                left: 2,
                right: 1
            })
        ));
    }

    #[test]
    fn zero_sum_is_zero_state() {
        assert_eq!(
            parse_ket_expression("|01> - |01>").unwrap_err(),
            Error::ZeroState
        );
    }

    #[test]
    fn tensor_star_equals_joined_ket() {
        let a = parse_ket_expression("|0>*|1>").unwrap();
        let b = parse_ket_expression("|01>").unwrap();
        assert_eq!(a, b);
        let a = parse_ket_expression("(|0>+|1>)*(|0>-|1>)").unwrap();
        let b = parse_ket_expression("|00>-|01>+|10>-|11>").unwrap();
        assert_amps(&a, b.amplitudes());
    }

    #[test]
    fn complex_and_qudit_scalars() {
        let s = parse_ket_expression("|0> + i*|2>").unwrap();
        assert_eq!(s.dims(), &[3]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_amps(&s, &[c(h, 0.0), c(0.0, 0.0), c(0.0, h)]);

        let s = parse_ket_expression("sqrt(1/3)*|0> + sqrt(2/3)*|1>").unwrap();
        assert!((s.amplitudes()[1].re - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);

        let s = parse_ket_expression("-(1+i)*|1> + 0.5e1*|0>").unwrap();
        let raw = parse_ket_expression_raw("-(1+i)*|1> + 0.5e1*|0>", Limits::default()).unwrap();
        assert_eq!(raw.amplitudes, vec![c(5.0, 0.0), c(-1.0, -1.0)]);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dims_header() {
        let s = parse_ket_expression("dims: 3 2; |01> + |10>").unwrap();
        assert_eq!(s.dims(), &[3, 2]);
        assert!(matches!(
            parse_ket_expression("dims: 2 2; |02>"),
            Err(Error::Parse(ParseError::Invalid { column: 12, .. }))
        ));
        assert!(matches!(
            parse_ket_expression("dims: 2 2 2; |01>"),
            Err(Error::Parse(ParseError::ArityMismatch { .. }))
        ));
    }

    #[test]
    fn syntax_errors_are_positioned() {
        match parse_ket_expression("(|00> +\n  |11>").unwrap_err() {
            Error::Parse(ParseError::Syntax {
                line,
                column,
                expected,
            }) => {
                assert_eq!((line, column), (2, 7));
                assert!(expected.contains(&"')'".to_string()));
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            parse_ket_expression("|0a>"),
            Err(Error::Parse(ParseError::Syntax { column: 3, .. }))
        ));
        assert!(matches!(
            parse_ket_expression("2 |0>"),
            Err(Error::Parse(ParseError::Syntax { column: 3, .. }))
        ));
        assert!(matches!(
            parse_ket_expression(""),
            Err(Error::Parse(ParseError::Syntax { .. }))
        ));
    }

    #[test]
    fn type_errors() {
        for text in ["1/2", "|0>/|1>", "sqrt(|0>)", "|0> + 1", "|0>/0"] {
            assert!(
                matches!(
                    parse_ket_expression(text),
                    Err(Error::Parse(ParseError::Invalid { .. }))
                ),
                "{text}"
            );
        }
    }

    #[test]
    fn size_limits_hold() {
        let long = format!("|{}>", "0".repeat(40));
        assert!(matches!(
            parse_ket_expression(&long),
            Err(Error::SizeLimit { .. })
        ));
        let small = Limits {
            max_dim: 1 << 10,
            max_parties: 20,
        };
        let many = ["(|0>+|1>)"; 11].join("*");
        assert!(matches!(
            parse_ket_expression_raw(&many, small),
            Err(Error::SizeLimit { .. })
        ));
        assert!(parse_ket_expression_raw(&["(|0>+|1>)"; 10].join("*"), small).is_ok());
        let deep = format!("{}|0>{}", "(".repeat(1000), ")".repeat(1000));
        assert!(parse_ket_expression(&deep).is_err());
    }

    #[test]
    fn table_epr() {
        let s = parse_amplitude_table("dims: 2 2\n0 0 0.70710678 0\n1 1 0.70710678 0").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_amps(&s, &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    }

    #[test]
    fn table_comments_and_crlf() {
        let text = "# GHZ\r\ndims: 2 2 2   # three qubits\r\n\r\n0 0 0 1 0\r\n1 1 1 1 0 # tail\r\n";
        let s = parse_amplitude_table(text).unwrap();
        assert_eq!(s.dims(), &[2, 2, 2]);
        assert!((s.amplitudes()[7].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn table_errors() {
        assert!(matches!(
            parse_amplitude_table("dims: 2 2\n2 0 1 0"),
            Err(Error::Parse(ParseError::IndexOutOfRange {
                line: 2,
                party: 1,
                index: 2,
                dim: 2
            }))
        ));
        assert!(matches!(
            parse_amplitude_table("dims: 2 2\n0 0 1 0\n0 0 1 0"),
            Err(Error::Parse(ParseError::DuplicateEntry {
                line: 3,
                first: 2
            }))
        ));
        assert!(matches!(
            parse_amplitude_table("0 0 1 0"),
            Err(Error::Parse(ParseError::BadHeader { line: 1, .. }))
        ));
        assert!(matches!(
            parse_amplitude_table("dims: 2 x"),
            Err(Error::Parse(ParseError::BadHeader { .. }))
        ));
        assert!(matches!(
            parse_amplitude_table("dims: 2 2\n0 0 1"),
            Err(Error::Parse(ParseError::Syntax { line: 2, .. }))
        ));
        assert!(matches!(
            parse_amplitude_table("dims: 2 2\n0 0 abc 0"),
            Err(Error::Parse(ParseError::Syntax {
                line: 2,
                column: 5,
                ..
            }))
        ));
        assert_eq!(
            parse_amplitude_table("dims: 2 2\n0 0 0 0").unwrap_err(),
            Error::ZeroState
        );
        assert_eq!(
            parse_amplitude_table("dims: 2 2\n").unwrap_err(),
            Error::ZeroState
        );
    }

    #[test]
    fn serialize_epr_and_threshold() {
        let epr = PureState::cat(2).unwrap();
        let text = serialize_state(&epr, DEFAULT_SERIALIZE_THRESHOLD);
        assert_eq!(
            text,
            "dims: 2 2\n0 0 0.7071067811865475 0.0\n1 1 0.7071067811865475 0.0\n"
        );
        let all = serialize_state(&epr, 0.0);
        assert_eq!(all.lines().count(), 5);
        let back = parse_amplitude_table(&text).unwrap();
        assert_amps(&back, epr.amplitudes());
    }
}
