// SPDX-License-Identifier: Apache-2.0

//! Formula syntax shared by the propositional and set-theoretic layers.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! formula := imp ("<->" imp)?
//! imp     := or ("->" imp)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | "o" unary | quant | atom
//! quant   := ("forall" | "exists") ident ("in" term)? "." formula
//! atom    := term ("in" | "=") term | ident | "(" formula ")"
//! term    := ident | "#" digits
//! ```
//!
//! Unicode spellings `¬ ∘ ∧ ∨ → ↔ ∈ ≈ ∀ ∃` are accepted too.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::universe::NameId;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    Mem,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Name(NameId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// Propositional variable (or schema metavariable).
    Prop(String),
    Atom(Pred, Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Circ(Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    ForallIn(String, Term, Box<Formula>),
    ExistsIn(String, Term, Box<Formula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unbound name `{0}`")]
    UnboundName(String),
}

fn syntax<T>(pos: usize, msg: impl Into<String>) -> Result<T, FormulaError> {
    Err(FormulaError::Syntax { pos, msg: msg.into() })
}

// Constructors.
impl Formula {
    pub fn prop(s: &str) -> Formula {
        Formula::Prop(s.to_string())
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }
    pub fn circ(a: Formula) -> Formula {
        Formula::Circ(Box::new(a))
    }
    pub fn mem(a: Term, b: Term) -> Formula {
        Formula::Atom(Pred::Mem, a, b)
    }
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Atom(Pred::Eq, a, b)
    }
}

impl Term {
    pub fn var(s: &str) -> Term {
        Term::Var(s.to_string())
    }
}

impl Formula {
    pub fn parse(text: &str) -> Result<Formula, FormulaError> {
        let toks = lex(text)?;
        let mut p = Parser { toks, i: 0, end: text.len() };
        let f = p.formula()?;
        match p.peek() {
            None => Ok(f),
            Some((pos, t)) => syntax(*pos, format!("unexpected `{t}`")),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().map(Formula::size).sum::<usize>()
    }

    pub fn children(&self) -> impl Iterator<Item = &Formula> {
        let (a, b): (Option<&Formula>, Option<&Formula>) = match self {
            Formula::Prop(_) | Formula::Atom(..) => (None, None),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => (Some(a), Some(b)),
            Formula::Not(a)
            | Formula::Circ(a)
            | Formula::Forall(_, a)
            | Formula::Exists(_, a)
            | Formula::ForallIn(_, _, a)
            | Formula::ExistsIn(_, _, a) => (Some(a), None),
        };
        a.into_iter().chain(b)
    }

    /// True when the formula uses no quantifiers or set-theoretic atoms.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Prop(_) => true,
            Formula::Atom(..)
            | Formula::Forall(..)
            | Formula::Exists(..)
            | Formula::ForallIn(..)
            | Formula::ExistsIn(..) => false,
            _ => self.children().all(Formula::is_propositional),
        }
    }

    pub fn mentions_negation(&self) -> bool {
        matches!(self, Formula::Not(_) | Formula::Circ(_)) || self.children().any(Formula::mentions_negation)
    }

    /// True when every quantifier is bounded.
    pub fn is_restricted(&self) -> bool {
        !matches!(self, Formula::Forall(..) | Formula::Exists(..)) && self.children().all(Formula::is_restricted)
    }

    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        if let Formula::Prop(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_props(out);
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let term = |t: &Term, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::Atom(_, a, b) => {
                term(a, bound, out);
                term(b, bound, out);
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Formula::ForallIn(x, t, body) | Formula::ExistsIn(x, t, body) => {
                term(t, bound, out);
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding substitution of `t` for free occurrences of `var`.
    pub fn subst(&self, var: &str, t: &Term) -> Formula {
        let st = |u: &Term| match u {
            Term::Var(v) if v == var => t.clone(),
            other => other.clone(),
        };
        let bx = |f: &Formula| Box::new(f.subst(var, t));
        match self {
            Formula::Prop(_) => self.clone(),
            Formula::Atom(p, a, b) => Formula::Atom(*p, st(a), st(b)),
            Formula::And(a, b) => Formula::And(bx(a), bx(b)),
            Formula::Or(a, b) => Formula::Or(bx(a), bx(b)),
            Formula::Imp(a, b) => Formula::Imp(bx(a), bx(b)),
            Formula::Not(a) => Formula::Not(bx(a)),
            Formula::Circ(a) => Formula::Circ(bx(a)),
            Formula::Forall(x, _) | Formula::Exists(x, _) if x == var => self.clone(),
            Formula::ForallIn(x, bound, body) if x == var => Formula::ForallIn(x.clone(), st(bound), body.clone()),
            Formula::ExistsIn(x, bound, body) if x == var => Formula::ExistsIn(x.clone(), st(bound), body.clone()),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let (x, body) = self.rebind(x, body, var, t);
                let body = Box::new(body.subst(var, t));
                if matches!(self, Formula::Forall(..)) {
                    Formula::Forall(x, body)
                } else {
                    Formula::Exists(x, body)
                }
            }
            Formula::ForallIn(x, bound, body) | Formula::ExistsIn(x, bound, body) => {
                let bound = st(bound);
                let (x, body) = self.rebind(x, body, var, t);
                let body = Box::new(body.subst(var, t));
                if matches!(self, Formula::ForallIn(..)) {
                    Formula::ForallIn(x, bound, body)
                } else {
                    Formula::ExistsIn(x, bound, body)
                }
            }
        }
    }

    // Returns the binder and body to use under a substitution of `t` for
    // `var`, renaming the binder when `t` would be captured.
    fn rebind(&self, x: &str, body: &Formula, var: &str, t: &Term) -> (String, Formula) {
        match t {
            Term::Var(y) if y == x && body.free_vars().contains(var) => {
                let fresh = fresh_var(x, body, t);
                (fresh.clone(), body.rename_free(x, &fresh))
            }
            _ => (x.to_string(), body.clone()),
        }
    }

    fn rename_free(&self, from: &str, to: &str) -> Formula {
        self.subst(from, &Term::Var(to.to_string()))
    }

    /// Replaces free variables that match a binding with the bound name.
    pub fn resolve(&self, bindings: &HashMap<String, NameId>) -> Formula {
        let mut f = self.clone();
        for v in self.free_vars() {
            if let Some(id) = bindings.get(&v) {
                f = f.subst(&v, &Term::Name(*id));
            }
        }
        f
    }

    /// Like `resolve`, but every free variable must be bound.
    pub fn resolve_closed(&self, bindings: &HashMap<String, NameId>) -> Result<Formula, FormulaError> {
        let f = self.resolve(bindings);
        match f.free_vars().into_iter().next() {
            Some(v) => Err(FormulaError::UnboundName(v)),
            None => Ok(f),
        }
    }

    /// Rewrites every `o b` as `~(b & ~b)`.
    pub fn expand_circ(&self) -> Formula {
        self.map(&|f| match f {
            Formula::Circ(b) => Some(Formula::not(Formula::and((**b).clone(), Formula::not((**b).clone())))),
            _ => None,
        })
    }

    /// Bottom-up rewrite: children first, then `rule` on the rebuilt node.
    fn map(&self, rule: &dyn Fn(&Formula) -> Option<Formula>) -> Formula {
        let bx = |f: &Formula| Box::new(f.map(rule));
        let rebuilt = match self {
            Formula::Prop(_) | Formula::Atom(..) => self.clone(),
            Formula::And(a, b) => Formula::And(bx(a), bx(b)),
            Formula::Or(a, b) => Formula::Or(bx(a), bx(b)),
            Formula::Imp(a, b) => Formula::Imp(bx(a), bx(b)),
            Formula::Not(a) => Formula::Not(bx(a)),
            Formula::Circ(a) => Formula::Circ(bx(a)),
            Formula::Forall(x, a) => Formula::Forall(x.clone(), bx(a)),
            Formula::Exists(x, a) => Formula::Exists(x.clone(), bx(a)),
            Formula::ForallIn(x, t, a) => Formula::ForallIn(x.clone(), t.clone(), bx(a)),
            Formula::ExistsIn(x, t, a) => Formula::ExistsIn(x.clone(), t.clone(), bx(a)),
        };
        rule(&rebuilt).unwrap_or(rebuilt)
    }

    /// Simultaneous substitution of formulas for propositional variables.
    pub fn instantiate(&self, sub: &HashMap<String, Formula>) -> Formula {
        match self {
            Formula::Prop(p) => sub.get(p).cloned().unwrap_or_else(|| self.clone()),
            _ => self.map_children(&|c| c.instantiate(sub)),
        }
    }

    fn map_children(&self, f: &dyn Fn(&Formula) -> Formula) -> Formula {
        let bx = |a: &Formula| Box::new(f(a));
        match self {
            Formula::Prop(_) | Formula::Atom(..) => self.clone(),
            Formula::And(a, b) => Formula::And(bx(a), bx(b)),
            Formula::Or(a, b) => Formula::Or(bx(a), bx(b)),
            Formula::Imp(a, b) => Formula::Imp(bx(a), bx(b)),
            Formula::Not(a) => Formula::Not(bx(a)),
            Formula::Circ(a) => Formula::Circ(bx(a)),
            Formula::Forall(x, a) => Formula::Forall(x.clone(), bx(a)),
            Formula::Exists(x, a) => Formula::Exists(x.clone(), bx(a)),
            Formula::ForallIn(x, t, a) => Formula::ForallIn(x.clone(), t.clone(), bx(a)),
            Formula::ExistsIn(x, t, a) => Formula::ExistsIn(x.clone(), t.clone(), bx(a)),
        }
    }

    /// Name constants occurring in the formula.
    pub fn names(&self) -> BTreeSet<NameId> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<NameId>) {
        let mut term = |t: &Term| {
            if let Term::Name(id) = t {
                out.insert(*id);
            }
        };
        match self {
            Formula::Atom(_, a, b) => {
                term(a);
                term(b);
            }
            Formula::ForallIn(_, t, _) | Formula::ExistsIn(_, t, _) => term(t),
            _ => {}
        }
        for c in self.children() {
            c.collect_names(out);
        }
    }

    /// Renames name constants.
    pub fn map_names(&self, m: &dyn Fn(NameId) -> NameId) -> Formula {
        let mt = |t: &Term| match t {
            Term::Name(id) => Term::Name(m(*id)),
            other => other.clone(),
        };
        match self {
            Formula::Atom(p, a, b) => Formula::Atom(*p, mt(a), mt(b)),
            Formula::ForallIn(x, t, a) => Formula::ForallIn(x.clone(), mt(t), Box::new(a.map_names(m))),
            Formula::ExistsIn(x, t, a) => Formula::ExistsIn(x.clone(), mt(t), Box::new(a.map_names(m))),
            _ => self.map_children(&|c| c.map_names(m)),
        }
    }

    /// Pretty-prints with a custom renderer for name constants.
    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(NameId) -> String) -> impl fmt::Display + 'a {
        Printer { f: self, names }
    }
}

fn fresh_var(base: &str, body: &Formula, t: &Term) -> String {
    let mut used = body.free_vars();
    collect_binders(body, &mut used);
    if let Term::Var(v) = t {
        used.insert(v.clone());
    }
    (0..).map(|i| format!("{base}{i}")).find(|c| !used.contains(c)).unwrap()
}

fn collect_binders(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Forall(x, _) | Formula::Exists(x, _) | Formula::ForallIn(x, _, _) | Formula::ExistsIn(x, _, _) => {
            out.insert(x.clone());
        }
        _ => {}
    }
    for c in f.children() {
        collect_binders(c, out);
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    NameRef(u32),
    Not,
    And,
    Or,
    Imp,
    Iff,
    In,
    Eq,
    Dot,
    LParen,
    RParen,
    Forall,
    Exists,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => f.write_str(s),
            Tok::NameRef(n) => write!(f, "#{n}"),
            Tok::Not => f.write_str("~"),
            Tok::And => f.write_str("&"),
            Tok::Or => f.write_str("|"),
            Tok::Imp => f.write_str("->"),
            Tok::Iff => f.write_str("<->"),
            Tok::In => f.write_str("in"),
            Tok::Eq => f.write_str("="),
            Tok::Dot => f.write_str("."),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Forall => f.write_str("forall"),
            Tok::Exists => f.write_str("exists"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        let single = match c {
            c if c.is_whitespace() => {
                it.next();
                continue;
            }
            '~' | '¬' => Some(Tok::Not),
            '∘' => Some(Tok::Ident("o".into())),
            '&' | '∧' => Some(Tok::And),
            '|' | '∨' => Some(Tok::Or),
            '→' => Some(Tok::Imp),
            '↔' => Some(Tok::Iff),
            '∈' => Some(Tok::In),
            '=' | '≈' => Some(Tok::Eq),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '∀' => Some(Tok::Forall),
            '∃' => Some(Tok::Exists),
            _ => None,
        };
        if let Some(t) = single {
            it.next();
            out.push((pos, t));
            continue;
        }
        if text[pos..].starts_with("->") {
            it.next();
            it.next();
            out.push((pos, Tok::Imp));
        } else if text[pos..].starts_with("<->") {
            for _ in 0..3 {
                it.next();
            }
            out.push((pos, Tok::Iff));
        } else if c == '#' {
            it.next();
            let mut digits = String::new();
            while let Some(&(_, d)) = it.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                digits.push(d);
                it.next();
            }
            match digits.parse() {
                Ok(n) => out.push((pos, Tok::NameRef(n))),
                Err(_) => return syntax(pos, "expected digits after `#`"),
            }
        } else if c.is_alphanumeric() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, d)) = it.peek() {
                if !(d.is_alphanumeric() || d == '_' || d == '\'') {
                    break;
                }
                s.push(d);
                it.next();
            }
            out.push((
                pos,
                match s.as_str() {
                    "in" => Tok::In,
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(s),
                },
            ));
        } else {
            return syntax(pos, format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.i)
    }

    fn peek_tok(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.i + k).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek_tok(0) == Some(t) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<(), FormulaError> {
        if self.eat(t) {
            Ok(())
        } else {
            syntax(self.pos(), format!("expected `{t}`"))
        }
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        let a = self.imp()?;
        if self.eat(&Tok::Iff) {
            let b = self.imp()?;
            return Ok(Formula::iff(a, b));
        }
        Ok(a)
    }

    fn imp(&mut self) -> Result<Formula, FormulaError> {
        let a = self.or()?;
        if self.eat(&Tok::Imp) {
            let b = self.imp()?;
            return Ok(Formula::imp(a, b));
        }
        Ok(a)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut a = self.and()?;
        while self.eat(&Tok::Or) {
            a = Formula::or(a, self.and()?);
        }
        Ok(a)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut a = self.unary()?;
        while self.eat(&Tok::And) {
            a = Formula::and(a, self.unary()?);
        }
        Ok(a)
    }

    // `o` is the consistency operator unless it is used as an identifier.
    fn circ_here(&self) -> bool {
        matches!(self.peek_tok(0), Some(Tok::Ident(s)) if s == "o")
            && matches!(
                self.peek_tok(1),
                Some(Tok::Ident(_) | Tok::NameRef(_) | Tok::Not | Tok::LParen | Tok::Forall | Tok::Exists)
            )
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::not(self.unary()?));
        }
        if self.circ_here() {
            self.i += 1;
            return Ok(Formula::circ(self.unary()?));
        }
        match self.peek_tok(0) {
            Some(Tok::Forall) | Some(Tok::Exists) => self.quant(),
            Some(Tok::LParen) => {
                self.i += 1;
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            _ => self.atom(),
        }
    }

    fn quant(&mut self) -> Result<Formula, FormulaError> {
        let universal = self.peek_tok(0) == Some(&Tok::Forall);
        self.i += 1;
        let x = match self.peek_tok(0) {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return syntax(self.pos(), "expected a variable after quantifier"),
        };
        self.i += 1;
        let bound = if self.eat(&Tok::In) { Some(self.term()?) } else { None };
        self.expect(&Tok::Dot)?;
        let body = Box::new(self.formula()?);
        Ok(match (universal, bound) {
            (true, None) => Formula::Forall(x, body),
            (false, None) => Formula::Exists(x, body),
            (true, Some(t)) => Formula::ForallIn(x, t, body),
            (false, Some(t)) => Formula::ExistsIn(x, t, body),
        })
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        let t = match self.peek_tok(0) {
            Some(Tok::Ident(s)) => Term::Var(s.clone()),
            Some(Tok::NameRef(n)) => Term::Name(NameId(*n)),
            _ => return syntax(self.pos(), "expected a term"),
        };
        self.i += 1;
        Ok(t)
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        let pos = self.pos();
        match (self.peek_tok(0), self.peek_tok(1)) {
            (Some(Tok::Ident(_) | Tok::NameRef(_)), Some(Tok::In | Tok::Eq)) => {
                let a = self.term()?;
                let pred = if self.eat(&Tok::In) {
                    Pred::Mem
                } else {
                    self.i += 1;
                    Pred::Eq
                };
                let b = self.term()?;
                Ok(Formula::Atom(pred, a, b))
            }
            (Some(Tok::Ident(s)), _) => {
                let f = Formula::Prop(s.clone());
                self.i += 1;
                Ok(f)
            }
            (Some(t), _) => syntax(pos, format!("unexpected `{t}`")),
            (None, _) => syntax(pos, "unexpected end of input"),
        }
    }
}

// ---------------------------------------------------------------------------
// Printer

struct Printer<'a> {
    f: &'a Formula,
    names: &'a dyn Fn(NameId) -> String,
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(out, self.f, 0, true, self.names)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(out, self, 0, true, &|id| format!("#{}", id.0))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Name(id) => write!(f, "#{}", id.0),
        }
    }
}

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Imp(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Forall(..) | Formula::Exists(..) | Formula::ForallIn(..) | Formula::ExistsIn(..) => 0,
        _ => 4,
    }
}

// `min` is the loosest precedence allowed without parentheses; `tail` says
// whether nothing follows, so quantifier bodies can extend to the right.
fn write_formula(
    out: &mut fmt::Formatter<'_>,
    f: &Formula,
    min: u8,
    tail: bool,
    names: &dyn Fn(NameId) -> String,
) -> fmt::Result {
    let p = prec(f);
    let is_quant = p == 0;
    if (is_quant && !tail) || (!is_quant && p < min) {
        out.write_str("(")?;
        write_formula(out, f, 0, true, names)?;
        return out.write_str(")");
    }
    let term = |t: &Term| match t {
        Term::Var(v) => v.clone(),
        Term::Name(id) => names(*id),
    };
    match f {
        Formula::Prop(s) => out.write_str(s),
        Formula::Atom(pred, a, b) => {
            let op = if *pred == Pred::Mem { "in" } else { "=" };
            write!(out, "{} {op} {}", term(a), term(b))
        }
        Formula::And(a, b) => {
            write_formula(out, a, 3, false, names)?;
            out.write_str(" & ")?;
            write_formula(out, b, 4, tail, names)
        }
        Formula::Or(a, b) => {
            write_formula(out, a, 2, false, names)?;
            out.write_str(" | ")?;
            write_formula(out, b, 3, tail, names)
        }
        Formula::Imp(a, b) => {
            write_formula(out, a, 2, false, names)?;
            out.write_str(" -> ")?;
            write_formula(out, b, 1, tail, names)
        }
        Formula::Not(a) => {
            out.write_str("~")?;
            write_formula(out, a, 4, tail, names)
        }
        Formula::Circ(a) => {
            out.write_str("o ")?;
            write_formula(out, a, 4, tail, names)
        }
        Formula::Forall(x, a) => {
            write!(out, "forall {x}. ")?;
            write_formula(out, a, 0, true, names)
        }
        Formula::Exists(x, a) => {
            write!(out, "exists {x}. ")?;
            write_formula(out, a, 0, true, names)
        }
        Formula::ForallIn(x, t, a) => {
            write!(out, "forall {x} in {}. ", term(t))?;
            write_formula(out, a, 0, true, names)
        }
        Formula::ExistsIn(x, t, a) => {
            write!(out, "exists {x} in {}. ", term(t))?;
            write_formula(out, a, 0, true, names)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("a -> (b -> a)"), Formula::imp(p("a"), Formula::imp(p("b"), p("a"))));
        assert_eq!(p("a -> b -> a"), p("a -> (b -> a)"));
        assert_eq!(p("a & b | c"), Formula::or(p("a & b"), p("c")));
        assert_eq!(p("~a & b"), Formula::and(Formula::not(p("a")), p("b")));
        assert_eq!(p("a & b & c"), Formula::and(p("a & b"), p("c")));
        assert_eq!(p("o a & b"), Formula::and(Formula::circ(p("a")), p("b")));
    }

    #[test]
    fn biconditional_expands() {
        let f = p("~(a & b) <-> (~a | ~b)");
        let l = p("~(a & b)");
        let r = p("~a | ~b");
        assert_eq!(f, Formula::and(Formula::imp(l.clone(), r.clone()), Formula::imp(r, l)));
    }

    #[test]
    fn circ_versus_identifier() {
        assert_eq!(p("o a"), Formula::circ(p("a")));
        assert_eq!(p("o"), Formula::prop("o"));
        assert_eq!(p("o -> a"), Formula::imp(Formula::prop("o"), p("a")));
        assert_eq!(p("o in x"), Formula::mem(Term::var("o"), Term::var("x")));
        assert_eq!(p("o a").expand_circ(), p("~(a & ~a)"));
        assert_eq!(p("∘a ∧ ¬b → a ∨ b"), p("o a & ~b -> a | b"));
    }

    #[test]
    fn set_formulas() {
        let f = p("forall y in u. y in v");
        assert_eq!(
            f,
            Formula::ForallIn("y".into(), Term::var("u"), Box::new(Formula::mem(Term::var("y"), Term::var("v"))))
        );
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec!["u", "v"]);
        assert!(f.is_restricted());
        assert!(!p("exists x. x = x").is_restricted());
        assert_eq!(p("#3 ≈ #4"), Formula::eq(Term::Name(NameId(3)), Term::Name(NameId(4))));
        // Quantifier bodies extend to the right.
        assert!(matches!(p("forall x. x = x & a"), Formula::Forall(..)));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(
            Formula::parse("a & "),
            Err(FormulaError::Syntax { pos: 4, msg: "unexpected end of input".into() })
        );
        assert!(matches!(Formula::parse("a $ b"), Err(FormulaError::Syntax { pos: 2, .. })));
        assert!(matches!(Formula::parse("(a"), Err(FormulaError::Syntax { pos: 2, .. })));
        assert!(matches!(Formula::parse("a b"), Err(FormulaError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn substitution_avoids_capture() {
        let f = p("exists y. y in x");
        let g = f.subst("x", &Term::var("y"));
        // The substituted `y` stays free.
        assert_eq!(g.free_vars().into_iter().collect::<Vec<_>>(), vec!["y"]);
        assert!(matches!(&g, Formula::Exists(b, _) if b != "y"));
        // Shadowed variables are untouched.
        let h = p("forall x. x in x").subst("x", &Term::Name(NameId(0)));
        assert!(h.is_closed());
        assert!(!h.to_string().contains('#'));
    }

    #[test]
    fn resolve_binds_names() {
        let mut b = HashMap::new();
        b.insert("u".to_string(), NameId(7));
        let f = p("forall y in u. y in v");
        assert_eq!(f.resolve_closed(&b), Err(FormulaError::UnboundName("v".into())));
        b.insert("v".to_string(), NameId(8));
        assert_eq!(f.resolve_closed(&b).unwrap().to_string(), "forall y in #7. y in #8");
    }

    #[test]
    fn printer_parenthesizes_quantifiers() {
        let q = p("forall x. x = x");
        let f = Formula::and(q.clone(), p("a"));
        assert_eq!(f.to_string(), "(forall x. x = x) & a");
        assert_eq!(p(&f.to_string()), f);
        let g = Formula::and(Formula::and(p("a"), q), p("b"));
        assert_eq!(p(&g.to_string()), g);
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            prop::sample::select(vec!["x", "y", "u"]).prop_map(Term::var),
            (0u32..4).prop_map(|n| Term::Name(NameId(n))),
        ]
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["p", "q", "r", "o"]).prop_map(Formula::prop),
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::mem(a, b)),
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::eq(a, b)),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            let var = prop::sample::select(vec!["x", "y"]).prop_map(String::from);
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
                inner.clone().prop_map(Formula::not),
                inner.clone().prop_map(Formula::circ),
                (var.clone(), inner.clone()).prop_map(|(x, a)| Formula::Forall(x, Box::new(a))),
                (var.clone(), inner.clone()).prop_map(|(x, a)| Formula::Exists(x, Box::new(a))),
                (var.clone(), arb_term(), inner.clone()).prop_map(|(x, t, a)| Formula::ForallIn(x, t, Box::new(a))),
                (var, arb_term(), inner).prop_map(|(x, t, a)| Formula::ExistsIn(x, t, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in arb_formula()) {
            let s = f.to_string();
            prop_assert_eq!(Formula::parse(&s), Ok(f), "{}", s);
        }

        #[test]
        fn substituting_a_name_closes_the_variable(f in arb_formula()) {
            let g = f.subst("x", &Term::Name(NameId(9)));
            prop_assert!(!g.free_vars().contains("x"));
            prop_assert_eq!(g.free_vars().len() + usize::from(f.free_vars().contains("x")), f.free_vars().len());
        }
    }
}
