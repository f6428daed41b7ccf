//! LTL formulas over atomic propositions, their concrete syntax, and the
//! propositions themselves.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! formula  := or ( "->" formula )?
//! or       := and ( "||" and )*
//! and      := binary ( "&&" binary )*
//! binary   := unary ( ("U" | "R") binary )?
//! unary    := ("!" | "X" | "F" | "G") unary | primary
//! primary  := "true" | "false" | comparison | name | "(" formula ")"
//! ```
//!
//! A comparison is `side cmp side` where each side is arithmetic over state
//! variables, numbers, `pi` and `abs(...)`; it must normalize to
//! `sum c_i x_i cmp k` or `abs(sum c_i x_i + b) cmp k`. An inline comparison
//! becomes an atom whose name is its canonical text.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abstraction::IntervalBox;
use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Clone, Debug, PartialEq)]
pub enum Ltl {
    True,
    False,
    Atom(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Finally(Box<Ltl>),
    Globally(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Release(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn atom(name: &str) -> Ltl {
        Ltl::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Ltl {
        Ltl::Not(Box::new(self))
    }

    pub fn and(self, r: Ltl) -> Ltl {
        Ltl::And(Box::new(self), Box::new(r))
    }

    pub fn or(self, r: Ltl) -> Ltl {
        Ltl::Or(Box::new(self), Box::new(r))
    }

    pub fn implies(self, r: Ltl) -> Ltl {
        Ltl::Implies(Box::new(self), Box::new(r))
    }

    pub fn next(self) -> Ltl {
        Ltl::Next(Box::new(self))
    }

    pub fn finally(self) -> Ltl {
        Ltl::Finally(Box::new(self))
    }

    pub fn globally(self) -> Ltl {
        Ltl::Globally(Box::new(self))
    }

    pub fn until(self, r: Ltl) -> Ltl {
        Ltl::Until(Box::new(self), Box::new(r))
    }

    pub fn release(self, r: Ltl) -> Ltl {
        Ltl::Release(Box::new(self), Box::new(r))
    }

    /// Distinct atom names in order of first occurrence.
    pub fn atoms(&self) -> Vec<String> {
        fn walk(f: &Ltl, out: &mut Vec<String>) {
            match f {
                Ltl::True | Ltl::False => {}
                Ltl::Atom(a) => {
                    if !out.contains(a) {
                        out.push(a.clone());
                    }
                }
                Ltl::Not(a) | Ltl::Next(a) | Ltl::Finally(a) | Ltl::Globally(a) => walk(a, out),
                Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) | Ltl::Until(a, b) | Ltl::Release(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Nesting depth of operators; atoms and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => 0,
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Finally(a) | Ltl::Globally(a) => 1 + a.depth(),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) | Ltl::Until(a, b) | Ltl::Release(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Negation normal form with atoms resolved to indices into `atoms`.
    pub fn to_nnf(&self, atoms: &[String]) -> Result<Nnf> {
        nnf(self, atoms, false)
    }
}

fn nnf(f: &Ltl, atoms: &[String], neg: bool) -> Result<Nnf> {
    let bx = |r: Result<Nnf>| r.map(Box::new);
    Ok(match (f, neg) {
        (Ltl::True, false) | (Ltl::False, true) => Nnf::True,
        (Ltl::True, true) | (Ltl::False, false) => Nnf::False,
        (Ltl::Atom(a), _) => {
            let i = atoms
                .iter()
                .position(|x| x == a)
                .ok_or_else(|| Error::UndeclaredAtom(a.clone()))?;
            Nnf::Lit(i, !neg)
        }
        (Ltl::Not(a), _) => nnf(a, atoms, !neg)?,
        (Ltl::And(a, b), false) | (Ltl::Or(a, b), true) => Nnf::And(bx(nnf(a, atoms, neg))?, bx(nnf(b, atoms, neg))?),
        (Ltl::Or(a, b), false) | (Ltl::And(a, b), true) => Nnf::Or(bx(nnf(a, atoms, neg))?, bx(nnf(b, atoms, neg))?),
        (Ltl::Implies(a, b), false) => Nnf::Or(bx(nnf(a, atoms, true))?, bx(nnf(b, atoms, false))?),
        (Ltl::Implies(a, b), true) => Nnf::And(bx(nnf(a, atoms, false))?, bx(nnf(b, atoms, true))?),
        (Ltl::Next(a), _) => Nnf::Next(bx(nnf(a, atoms, neg))?),
        (Ltl::Finally(a), false) | (Ltl::Globally(a), true) => Nnf::Until(Box::new(Nnf::True), bx(nnf(a, atoms, neg))?),
        (Ltl::Globally(a), false) | (Ltl::Finally(a), true) => {
            Nnf::Release(Box::new(Nnf::False), bx(nnf(a, atoms, neg))?)
        }
        (Ltl::Until(a, b), false) | (Ltl::Release(a, b), true) => {
            Nnf::Until(bx(nnf(a, atoms, neg))?, bx(nnf(b, atoms, neg))?)
        }
        (Ltl::Release(a, b), false) | (Ltl::Until(a, b), true) => {
            Nnf::Release(bx(nnf(a, atoms, neg))?, bx(nnf(b, atoms, neg))?)
        }
    })
}

/// LTL in negation normal form; `Lit(i, true)` is atom `i`, `Lit(i, false)`
/// its negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nnf {
    True,
    False,
    Lit(usize, bool),
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
    Next(Box<Nnf>),
    Until(Box<Nnf>, Box<Nnf>),
    Release(Box<Nnf>, Box<Nnf>),
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_reserved(s)
}

fn is_reserved(s: &str) -> bool {
    matches!(s, "X" | "F" | "G" | "U" | "R" | "true" | "false" | "pi" | "abs")
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // every non-trivial operand is parenthesized so printing and parsing
        // round-trip without tracking precedence
        fn operand(g: &Ltl, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match g {
                Ltl::True | Ltl::False => write!(f, "{g}"),
                Ltl::Atom(a) if is_ident(a) => write!(f, "{a}"),
                _ => write!(f, "({g})"),
            }
        }
        fn unary(op: &str, g: &Ltl, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match g {
                Ltl::Atom(a) if op == "!" && is_ident(a) => write!(f, "!{a}"),
                _ => write!(f, "{op}({g})"),
            }
        }
        fn binary(op: &str, a: &Ltl, b: &Ltl, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            operand(a, f)?;
            write!(f, " {op} ")?;
            operand(b, f)
        }
        match self {
            Ltl::True => write!(f, "true"),
            Ltl::False => write!(f, "false"),
            Ltl::Atom(a) => write!(f, "{a}"),
            Ltl::Not(a) => unary("!", a, f),
            Ltl::Next(a) => unary("X", a, f),
            Ltl::Finally(a) => unary("F", a, f),
            Ltl::Globally(a) => unary("G", a, f),
            Ltl::And(a, b) => binary("&&", a, b, f),
            Ltl::Or(a, b) => binary("||", a, b, f),
            Ltl::Implies(a, b) => binary("->", a, b, f),
            Ltl::Until(a, b) => binary("U", a, b, f),
            Ltl::Release(a, b) => binary("R", a, b, f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Cmp {
    fn flip(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Gt,
            Cmp::Le => Cmp::Ge,
            Cmp::Gt => Cmp::Lt,
            Cmp::Ge => Cmp::Le,
        }
    }

    pub fn holds(self, x: f64, k: f64) -> bool {
        match self {
            Cmp::Lt => x < k,
            Cmp::Le => x <= k,
            Cmp::Gt => x > k,
            Cmp::Ge => x >= k,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

/// `sum coeffs[v] * v + offset` over named variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Affine {
    pub coeffs: BTreeMap<String, f64>,
    pub offset: f64,
}

impl Affine {
    fn constant(c: f64) -> Self {
        Affine {
            coeffs: BTreeMap::new(),
            offset: c,
        }
    }

    fn var(name: &str) -> Self {
        Affine {
            coeffs: BTreeMap::from([(name.to_string(), 1.0)]),
            offset: 0.0,
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn scale(mut self, k: f64) -> Self {
        self.coeffs.values_mut().for_each(|c| *c *= k);
        self.offset *= k;
        self.normalized()
    }

    fn add(mut self, other: Affine) -> Self {
        for (v, c) in other.coeffs {
            *self.coeffs.entry(v).or_insert(0.0) += c;
        }
        self.offset += other.offset;
        self.normalized()
    }

    fn normalized(mut self) -> Self {
        self.coeffs.retain(|_, c| *c != 0.0);
        // turn -0.0 into 0.0 so printing is stable
        self.coeffs.values_mut().for_each(|c| *c += 0.0);
        self.offset += 0.0;
        self
    }

    fn fmt_terms(&self, with_offset: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, &c) in &self.coeffs {
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            match (first, sign) {
                (true, "-") => write!(f, "-")?,
                (true, _) => {}
                (false, s) => write!(f, " {s} ")?,
            }
            if mag == 1.0 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if with_offset && (self.offset != 0.0 || first) {
            if first {
                write!(f, "{}", self.offset)?;
            } else if self.offset < 0.0 {
                write!(f, " - {}", -self.offset)?;
            } else {
                write!(f, " + {}", self.offset)?;
            }
        }
        Ok(())
    }
}

/// A normalized comparison: `lhs cmp threshold`, where `lhs` is the affine
/// form itself or, with `abs`, its absolute value.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub abs: bool,
    pub expr: Affine,
    pub cmp: Cmp,
    pub threshold: f64,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.abs {
            write!(f, "abs(")?;
            self.expr.fmt_terms(true, f)?;
            write!(f, ")")?;
        } else {
            self.expr.fmt_terms(false, f)?;
            if self.expr.is_constant() {
                write!(f, "0")?;
            }
        }
        write!(f, " {} {}", self.cmp.as_str(), self.threshold)
    }
}

/// Three-valued truth of a proposition over a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Truth {
    DefinitelyTrue,
    DefinitelyFalse,
    Unknown,
}

impl Truth {
    pub fn symbol(self) -> char {
        match self {
            Truth::DefinitelyTrue => 'T',
            Truth::DefinitelyFalse => 'F',
            Truth::Unknown => '?',
        }
    }
}

/// A named comparison resolved against an environment's variables.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicProposition {
    name: String,
    comparison: Comparison,
    /// Coefficient per state dimension.
    coeffs: Vec<f64>,
}

impl AtomicProposition {
    pub fn new(name: &str, comparison: Comparison, variables: &[String]) -> Result<Self> {
        let mut coeffs = vec![0.0; variables.len()];
        for (v, &c) in &comparison.expr.coeffs {
            let i = variables
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| Error::UnknownProposition(v.clone()))?;
            coeffs[i] = c;
        }
        Ok(AtomicProposition {
            name: name.to_string(),
            comparison,
            coeffs,
        })
    }

    /// Parse `text` as a single comparison and name it by its canonical form.
    pub fn inline(text: &str, variables: &[String]) -> Result<Self> {
        let c = parse_comparison(text)?;
        AtomicProposition::new(&c.to_string(), c, variables)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn comparison(&self) -> &Comparison {
        &self.comparison
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn value(&self, s: &[f64]) -> f64 {
        let lin = self.coeffs.iter().zip(s).map(|(c, x)| c * x).sum::<f64>();
        if self.comparison.abs {
            (lin + self.comparison.expr.offset).abs()
        } else {
            lin
        }
    }

    pub fn eval(&self, s: &[f64]) -> bool {
        self.comparison.cmp.holds(self.value(s), self.comparison.threshold)
    }

    /// DefinitelyTrue iff the comparison holds on the whole box,
    /// DefinitelyFalse iff it fails on the whole box.
    pub fn label(&self, b: &IntervalBox) -> Truth {
        let mut acc = Interval::point(0.0);
        for (&c, iv) in self.coeffs.iter().zip(b.intervals()) {
            if c != 0.0 {
                acc = acc + iv.scale(c);
            }
        }
        if self.comparison.abs {
            acc = acc.add_scalar(self.comparison.expr.offset).abs();
        }
        let k = self.comparison.threshold;
        let cmp = self.comparison.cmp;
        if cmp.holds(acc.lo, k) && cmp.holds(acc.hi, k) {
            Truth::DefinitelyTrue
        } else if !cmp.holds(acc.lo, k) && !cmp.holds(acc.hi, k) {
            Truth::DefinitelyFalse
        } else {
            Truth::Unknown
        }
    }
}

/// Propositions available to formulas: declared names plus the
/// environment's variables for inline comparisons.
#[derive(Clone, Debug, Default)]
pub struct Propositions {
    variables: Vec<String>,
    declared: Vec<AtomicProposition>,
}

impl Propositions {
    pub fn new(variables: &[String]) -> Self {
        Propositions {
            variables: variables.to_vec(),
            declared: Vec::new(),
        }
    }

    /// Add `name := <comparison>`.
    pub fn declare(&mut self, declaration: &str) -> Result<()> {
        let (name, body) = declaration.split_once(":=").ok_or_else(|| Error::Syntax {
            pos: 0,
            msg: format!("expected `name := comparison`, got `{declaration}`"),
        })?;
        let name = name.trim();
        if !is_ident(name) {
            return Err(Error::Syntax {
                pos: 0,
                msg: format!("`{name}` is not a valid proposition name"),
            });
        }
        let offset = declaration.len() - body.len();
        let c = parse_comparison(body).map_err(|e| match e {
            Error::Syntax { pos, msg } => Error::Syntax { pos: pos + offset, msg },
            e => e,
        })?;
        let p = AtomicProposition::new(name, c, &self.variables)?;
        self.declared.retain(|q| q.name != name);
        self.declared.push(p);
        Ok(())
    }

    pub fn declared(&self) -> &[AtomicProposition] {
        &self.declared
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// The propositions for every atom of `f`, in `f.atoms()` order.
    pub fn resolve(&self, f: &Ltl) -> Result<Vec<AtomicProposition>> {
        f.atoms()
            .iter()
            .map(|a| match self.declared.iter().find(|p| &p.name == a) {
                Some(p) => Ok(p.clone()),
                None if is_ident(a) => Err(Error::UnknownProposition(a.clone())),
                None => AtomicProposition::inline(a, &self.variables),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(&'static str),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    const SYMS: [&str; 16] = [
        "&&", "||", "->", "<=", ">=", "!", "(", ")", "<", ">", "+", "-", "*", "/", ",", "=",
    ];
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let v = text[start..i].parse::<f64>().map_err(|_| Error::Syntax {
                pos: start,
                msg: format!("malformed number `{}`", &text[start..i]),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if let Some(s) = SYMS.iter().find(|s| text[i..].starts_with(**s)) {
            if *s == "=" {
                return Err(Error::Syntax {
                    pos: i,
                    msg: "unexpected `=`; comparisons are <, <=, > and >=".into(),
                });
            }
            out.push((i, Tok::Sym(s)));
            i += s.len();
        } else {
            return Err(Error::Syntax {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

/// Arithmetic value during comparison parsing.
#[derive(Clone, Debug)]
enum Arith {
    Lin(Affine),
    /// `scale * |inner| + plus`
    Abs {
        scale: f64,
        inner: Affine,
        plus: f64,
    },
}

impl Arith {
    fn scale(self, k: f64) -> Arith {
        match self {
            Arith::Lin(a) => Arith::Lin(a.scale(k)),
            Arith::Abs { scale, inner, plus } => Arith::Abs {
                scale: scale * k,
                inner,
                plus: plus * k,
            },
        }
    }

    fn constant(&self) -> Option<f64> {
        match self {
            Arith::Lin(a) if a.is_constant() => Some(a.offset),
            Arith::Abs { scale, plus, .. } if *scale == 0.0 => Some(*plus),
            _ => None,
        }
    }
}

struct Parser<'t> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    text: &'t str,
    /// Furthest failure seen, reported when every alternative fails.
    furthest: Option<(usize, String)>,
}

type P<T> = std::result::Result<T, (usize, String)>;

impl<'t> Parser<'t> {
    fn new(text: &'t str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            end: text.len(),
            text,
            furthest: None,
        })
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn fail<T>(&mut self, msg: impl Into<String>) -> P<T> {
        let e = (self.offset(), msg.into());
        if self.furthest.as_ref().is_none_or(|f| e.0 >= f.0) {
            self.furthest = Some(e.clone());
        }
        Err(e)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_ident(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(x)) if x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> P<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            let found = self.describe();
            self.fail(format!("expected `{s}`, found {found}"))
        }
    }

    fn describe(&self) -> String {
        match self.toks.get(self.pos) {
            None => "end of input".into(),
            Some((p, _)) => {
                let rest = &self.text[*p..];
                let word: String = rest.chars().take_while(|c| !c.is_whitespace()).take(12).collect();
                format!("`{word}`")
            }
        }
    }

    fn formula(&mut self) -> P<Ltl> {
        let lhs = self.or()?;
        if self.eat_sym("->") {
            Ok(lhs.implies(self.formula()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> P<Ltl> {
        let mut lhs = self.and()?;
        while self.eat_sym("||") {
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> P<Ltl> {
        let mut lhs = self.binary()?;
        while self.eat_sym("&&") {
            lhs = lhs.and(self.binary()?);
        }
        Ok(lhs)
    }

    fn binary(&mut self) -> P<Ltl> {
        let lhs = self.unary()?;
        if self.eat_ident("U") {
            Ok(lhs.until(self.binary()?))
        } else if self.eat_ident("R") {
            Ok(lhs.release(self.binary()?))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> P<Ltl> {
        if self.eat_sym("!") {
            return Ok(self.unary()?.not());
        }
        for (op, build) in [
            ("X", Ltl::next as fn(Ltl) -> Ltl),
            ("F", Ltl::finally),
            ("G", Ltl::globally),
        ] {
            if self.eat_ident(op) {
                return Ok(build(self.unary()?));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> P<Ltl> {
        let start = self.pos;
        if let Ok(c) = self.comparison() {
            return Ok(Ltl::Atom(c.to_string()));
        }
        self.pos = start;
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(Ltl::True)
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(Ltl::False)
            }
            Some(Tok::Ident(s)) if is_ident(&s) => {
                self.pos += 1;
                Ok(Ltl::Atom(s))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect_sym(")")?;
                Ok(f)
            }
            _ => {
                let found = self.describe();
                self.fail(format!("expected a formula, found {found}"))
            }
        }
    }

    fn comparison(&mut self) -> P<Comparison> {
        let lhs = self.side()?;
        let cmp = match self.peek() {
            Some(Tok::Sym("<")) => Cmp::Lt,
            Some(Tok::Sym("<=")) => Cmp::Le,
            Some(Tok::Sym(">")) => Cmp::Gt,
            Some(Tok::Sym(">=")) => Cmp::Ge,
            _ => {
                let found = self.describe();
                return self.fail(format!("expected a comparison operator, found {found}"));
            }
        };
        self.pos += 1;
        let at = self.offset();
        let rhs = self.side()?;
        self.normalize(lhs, cmp, rhs).map_err(|m| (at, m))
    }

    fn normalize(&mut self, lhs: Arith, cmp: Cmp, rhs: Arith) -> std::result::Result<Comparison, String> {
        // move everything to the left: lhs - rhs cmp 0
        let diff = sum(lhs, rhs.scale(-1.0))?;
        match diff {
            Arith::Lin(a) => {
                if a.is_constant() {
                    return Err("comparison does not mention any state variable".into());
                }
                let threshold = -a.offset + 0.0;
                let expr = Affine {
                    coeffs: a.coeffs,
                    offset: 0.0,
                };
                Ok(Comparison {
                    abs: false,
                    expr,
                    cmp,
                    threshold,
                })
            }
            Arith::Abs { scale, inner, plus } => {
                if inner.is_constant() || scale == 0.0 {
                    return Err("comparison does not mention any state variable".into());
                }
                let cmp = if scale < 0.0 { cmp.flip() } else { cmp };
                Ok(Comparison {
                    abs: true,
                    expr: inner,
                    cmp,
                    threshold: -plus / scale + 0.0,
                })
            }
        }
    }

    fn side(&mut self) -> P<Arith> {
        let neg = self.eat_sym("-");
        let mut acc = self.term()?;
        if neg {
            acc = acc.scale(-1.0);
        }
        loop {
            let k = if self.eat_sym("+") {
                1.0
            } else if self.eat_sym("-") {
                -1.0
            } else {
                return Ok(acc);
            };
            let t = self.term()?.scale(k);
            acc = match sum(acc, t) {
                Ok(v) => v,
                Err(m) => return self.fail(m),
            };
        }
    }

    fn term(&mut self) -> P<Arith> {
        let mut acc = self.factor()?;
        loop {
            if self.eat_sym("*") {
                let rhs = self.factor()?;
                acc = match (acc.constant(), rhs.constant()) {
                    (Some(k), _) => rhs.scale(k),
                    (_, Some(k)) => acc.scale(k),
                    _ => return self.fail("product of two non-constant expressions"),
                };
            } else if self.eat_sym("/") {
                let rhs = self.factor()?;
                match rhs.constant() {
                    Some(k) if k != 0.0 => acc = acc.scale(1.0 / k),
                    Some(_) => return self.fail("division by zero"),
                    None => return self.fail("division by a non-constant expression"),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> P<Arith> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Arith::Lin(Affine::constant(v)))
            }
            Some(Tok::Sym("-")) => {
                self.pos += 1;
                Ok(self.factor()?.scale(-1.0))
            }
            Some(Tok::Ident(s)) if s == "pi" => {
                self.pos += 1;
                Ok(Arith::Lin(Affine::constant(std::f64::consts::PI)))
            }
            Some(Tok::Ident(s)) if s == "abs" => {
                self.pos += 1;
                self.expect_sym("(")?;
                let inner = self.side()?;
                self.expect_sym(")")?;
                match inner {
                    Arith::Lin(a) => Ok(Arith::Abs {
                        scale: 1.0,
                        inner: a,
                        plus: 0.0,
                    }),
                    Arith::Abs { .. } => self.fail("nested abs is not supported"),
                }
            }
            Some(Tok::Ident(s)) if is_ident(&s) => {
                self.pos += 1;
                Ok(Arith::Lin(Affine::var(&s)))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let v = self.side()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            _ => {
                let found = self.describe();
                self.fail(format!("expected a number, variable or abs(...), found {found}"))
            }
        }
    }

    fn finish<T>(&mut self, r: P<T>) -> Result<T> {
        let r = r.and_then(|v| {
            if self.pos == self.toks.len() {
                Ok(v)
            } else {
                let found = self.describe();
                self.fail(format!("unexpected {found} after the end of the expression"))
            }
        });
        r.map_err(|e| {
            let (pos, msg) = match self.furthest.take() {
                Some(f) if f.0 > e.0 => f,
                _ => e,
            };
            Error::Syntax { pos, msg }
        })
    }
}

fn sum(a: Arith, b: Arith) -> std::result::Result<Arith, String> {
    match (a, b) {
        (Arith::Lin(x), Arith::Lin(y)) => Ok(Arith::Lin(x.add(y))),
        (Arith::Abs { scale, inner, plus }, Arith::Lin(y)) | (Arith::Lin(y), Arith::Abs { scale, inner, plus }) => {
            if y.is_constant() {
                Ok(Arith::Abs {
                    scale,
                    inner,
                    plus: plus + y.offset,
                })
            } else {
                Err("abs(...) can only be combined with constants".into())
            }
        }
        (Arith::Abs { .. }, Arith::Abs { .. }) => Err("at most one abs(...) per comparison".into()),
    }
}

/// Parse an LTL formula. Inline comparisons become atoms named by their
/// canonical text; bare names are left for [`Propositions::resolve`].
pub fn parse_ltl(text: &str) -> Result<Ltl> {
    let mut p = Parser::new(text)?;
    if p.toks.is_empty() {
        return Err(Error::Syntax {
            pos: 0,
            msg: "empty formula".into(),
        });
    }
    let r = p.formula();
    p.finish(r)
}

/// Parse a single comparison such as `abs(theta) <= pi/2`.
pub fn parse_comparison(text: &str) -> Result<Comparison> {
    let mut p = Parser::new(text)?;
    let r = p.comparison();
    p.finish(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn pendulum_safety_is_globally_one_atom() {
        let f = parse_ltl("G(abs(theta) <= 1.5708)").unwrap();
        assert_eq!(f, Ltl::atom("abs(theta) <= 1.5708").globally());
    }

    #[test]
    fn mountain_car_properties() {
        let f = parse_ltl("G((abs(p - 0.2) < 0.05) -> (v > 0.02))").unwrap();
        assert_eq!(
            f,
            Ltl::atom("abs(p - 0.2) < 0.05")
                .implies(Ltl::atom("v > 0.02"))
                .globally()
        );
        let g = parse_ltl("F(p >= 0.5)").unwrap();
        assert_eq!(g, Ltl::atom("p >= 0.5").finally());
        // parentheses are optional around a comparison
        assert_eq!(parse_ltl("G(abs(p-0.2)<0.05 -> v>0.02)").unwrap(), f);
    }

    #[test]
    fn pi_constant_and_rearrangement() {
        let c = parse_comparison("abs(theta) <= pi/2").unwrap();
        assert!(c.abs);
        assert_eq!(c.threshold, std::f64::consts::FRAC_PI_2);
        let c = parse_comparison("0.5 <= p").unwrap();
        assert_eq!(c.to_string(), "-p <= -0.5");
        let c = parse_comparison("-abs(x) >= -1").unwrap();
        assert_eq!(c.to_string(), "abs(x) <= 1");
        let c = parse_comparison("2*(p + v) - v > 1").unwrap();
        assert_eq!(c.to_string(), "2*p + v > 1");
    }

    #[test]
    fn precedence() {
        let f = parse_ltl("a || b && c -> d").unwrap();
        let want = Ltl::atom("a")
            .or(Ltl::atom("b").and(Ltl::atom("c")))
            .implies(Ltl::atom("d"));
        assert_eq!(f, want);
        let f = parse_ltl("!a U b R c").unwrap();
        assert_eq!(f, Ltl::atom("a").not().until(Ltl::atom("b").release(Ltl::atom("c"))));
        let f = parse_ltl("G F a").unwrap();
        assert_eq!(f, Ltl::atom("a").finally().globally());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_ltl("G(p >= )") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        match parse_ltl("a && ") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_ltl("a $ b"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_ltl("p = 1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_ltl(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse_ltl("abs(abs(x)) < 1"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_names_are_reported() {
        let props = Propositions::new(&vars(&["p", "v"]));
        let f = parse_ltl("G(safe)").unwrap();
        assert!(matches!(props.resolve(&f), Err(Error::UnknownProposition(n)) if n == "safe"));
        let f = parse_ltl("G(q > 0)").unwrap();
        assert!(matches!(props.resolve(&f), Err(Error::UnknownProposition(n)) if n == "q"));
    }

    #[test]
    fn declared_propositions() {
        let mut props = Propositions::new(&vars(&["theta", "omega"]));
        props.declare("upright := abs(theta) <= pi/2").unwrap();
        let f = parse_ltl("G upright && F(omega >= 0)").unwrap();
        let resolved = props.resolve(&f).unwrap();
        assert_eq!(resolved[0].name(), "upright");
        assert_eq!(resolved[1].name(), "omega >= 0");
        assert!(matches!(
            props.declare("bad := theta == 0"),
            Err(Error::Syntax { pos: 13, .. })
        ));
    }

    fn boxed(pairs: &[[f64; 2]]) -> IntervalBox {
        IntervalBox::from_pairs(pairs).unwrap()
    }

    #[test]
    fn labels() {
        let v = vars(&["theta", "omega"]);
        let upright = AtomicProposition::inline("abs(theta) <= pi/2", &v).unwrap();
        assert_eq!(
            upright.label(&boxed(&[[0.0, 0.01], [0.0, 0.01]])),
            Truth::DefinitelyTrue
        );
        let v = vars(&["p", "v"]);
        let goal = AtomicProposition::inline("p >= 0.5", &v).unwrap();
        assert_eq!(goal.label(&boxed(&[[0.4, 0.6], [0.0, 0.0]])), Truth::Unknown);
        assert_eq!(goal.label(&boxed(&[[0.5, 0.52], [0.0, 0.0]])), Truth::DefinitelyTrue);
        assert_eq!(goal.label(&boxed(&[[0.1, 0.2], [0.0, 0.0]])), Truth::DefinitelyFalse);
        let band = AtomicProposition::inline("abs(p - 0.2) < 0.05", &v).unwrap();
        assert_eq!(band.label(&boxed(&[[0.19, 0.21], [0.0, 0.0]])), Truth::DefinitelyTrue);
        assert_eq!(band.label(&boxed(&[[0.1, 0.3], [0.0, 0.0]])), Truth::Unknown);
        assert_eq!(band.label(&boxed(&[[0.3, 0.4], [0.0, 0.0]])), Truth::DefinitelyFalse);
        // abs over a box straddling zero
        assert_eq!(band.label(&boxed(&[[0.14, 0.26], [0.0, 0.0]])), Truth::Unknown);
    }

    #[test]
    fn nnf_pushes_negation_to_literals() {
        let atoms = vars(&["a", "b"]);
        let f = Ltl::atom("a").until(Ltl::atom("b")).not();
        let n = f.to_nnf(&atoms).unwrap();
        assert_eq!(
            n,
            Nnf::Release(Box::new(Nnf::Lit(0, false)), Box::new(Nnf::Lit(1, false)))
        );
        assert!(matches!(Ltl::atom("c").to_nnf(&atoms), Err(Error::UndeclaredAtom(_))));
    }

    fn arb_formula() -> impl Strategy<Value = Ltl> {
        let leaf = prop_oneof![
            Just(Ltl::True),
            Just(Ltl::False),
            prop::sample::select(vec!["a", "b", "c"]).prop_map(Ltl::atom),
            (prop::sample::select(vec!["x", "y"]), -3.0f64..3.0, any::<bool>()).prop_map(|(v, k, abs)| {
                let text = if abs {
                    format!("abs({v} - 1) < {k}")
                } else {
                    format!("2*{v} >= {k}")
                };
                Ltl::Atom(parse_comparison(&text).unwrap().to_string())
            }),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Ltl::not),
                inner.clone().prop_map(Ltl::next),
                inner.clone().prop_map(Ltl::finally),
                inner.clone().prop_map(Ltl::globally),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.implies(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.until(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.release(b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(f in arb_formula()) {
            let text = f.to_string();
            prop_assert_eq!(parse_ltl(&text).unwrap(), f, "{}", text);
        }

        #[test]
        fn labels_are_sound(lo in -2.0f64..2.0, w in 0.0f64..1.0, k in -2.0f64..2.0, abs in any::<bool>(), t in 0.0f64..=1.0) {
            let v = vars(&["x"]);
            let text = if abs { format!("abs(x - 0.3) <= {k}") } else { format!("x > {k}") };
            let p = AtomicProposition::inline(&text, &v).unwrap();
            let b = boxed(&[[lo, lo + w]]);
            let x = lo + t * w;
            match p.label(&b) {
                Truth::DefinitelyTrue => prop_assert!(p.eval(&[x])),
                Truth::DefinitelyFalse => prop_assert!(!p.eval(&[x])),
                Truth::Unknown => {}
            }
        }
    }
}
