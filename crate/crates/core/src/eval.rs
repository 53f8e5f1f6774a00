// SPDX-License-Identifier: Apache-2.0

//! The truth-value map ⟦·⟧ for closed set-theoretic sentences over a
//! finite fragment.
//!
//! Membership and equality are computed by mutual recursion on name pairs:
//!
//! ```text
//! ⟦u∈v⟧ = ⋁_{x∈dom v} v(x) ∧ ⟦x≈u⟧
//! ⟦u≈v⟧ = ⋀_{x∈dom u} (u(x) → ⟦x∈v⟧) ∧ ⋀_{y∈dom v} (v(y) → ⟦y∈u⟧)
//! ```
//!
//! Connectives are pointwise, bounded quantifiers range over the domain of
//! their bound (exact), unbounded ones over the whole fragment
//! (fragment-relative). Values of `~φ` and `o φ` that the rule set leaves
//! open are supplied by a [`NegationPolicy`] and checked against the rule
//! set's constraints.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, Elem, ElemSet};
use crate::fidel::{FidelKind, FidelStructure};
use crate::formula::{Formula, Pred, Term};
use crate::universe::{NameId, Universe, UniverseError};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RuleSet {
    HV,
    N4,
    C1,
    COmega,
    BV2,
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleSet::HV => "HV",
            RuleSet::N4 => "N4",
            RuleSet::C1 => "C1",
            RuleSet::COmega => "COMEGA",
            RuleSet::BV2 => "BV2",
        })
    }
}

impl FromStr for RuleSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hv" => Ok(RuleSet::HV),
            "n4" => Ok(RuleSet::N4),
            "c1" => Ok(RuleSet::C1),
            "comega" | "cw" => Ok(RuleSet::COmega),
            "bv2" | "bv" => Ok(RuleSet::BV2),
            _ => Err(format!("unknown rule set `{s}` (expected hv, n4, c1, comega or bv2)")),
        }
    }
}

impl RuleSet {
    fn tag(self, clause: Clause) -> String {
        use Clause::*;
        let t = match (self, clause) {
            (_, Bounded) => "BQ",
            (RuleSet::HV, Mem) => "HV1",
            (RuleSet::HV, Eq) => "HV2",
            (RuleSet::HV, Leibniz) => "HV3",
            (RuleSet::HV, Quant) => "HV5",
            (RuleSet::HV, _) => "HV4",
            (RuleSet::N4, Mem) => "N4-1",
            (RuleSet::N4, Eq) => "N4-2",
            (RuleSet::N4, Connective) => "N4-3",
            (RuleSet::N4, Neg | DoubleNeg | Circ | CircDist) => "N4-4",
            (RuleSet::N4, DeMorgan) => "N4-5",
            (RuleSet::N4, NegImp) => "N4-6",
            (RuleSet::N4, Quant) => "N4-7",
            (RuleSet::N4, Leibniz) => "N4-8",
            (RuleSet::C1 | RuleSet::COmega, Mem) => "C1-1",
            (RuleSet::C1 | RuleSet::COmega, Eq) => "C1-2",
            (RuleSet::C1 | RuleSet::COmega, Connective | DeMorgan | NegImp) => "C1-3",
            (RuleSet::C1 | RuleSet::COmega, Neg | DoubleNeg) => "C1-4",
            (RuleSet::C1 | RuleSet::COmega, Circ) => "C1-5",
            (RuleSet::C1 | RuleSet::COmega, CircDist) => "C1-6",
            (RuleSet::C1 | RuleSet::COmega, Quant) => "C1-7",
            (RuleSet::C1 | RuleSet::COmega, Leibniz) => "C1-8",
            (RuleSet::BV2, Mem) => "BV1",
            (RuleSet::BV2, Eq) => "BV2",
            (RuleSet::BV2, Connective | DeMorgan | NegImp) => "BV3",
            (RuleSet::BV2, Neg) => "BV4",
            (RuleSet::BV2, DoubleNeg) => "bv5a",
            (RuleSet::BV2, Circ) => "bv5b",
            (RuleSet::BV2, CircDist) => "bv7",
            (RuleSet::BV2, Quant) => "HV5",
            (RuleSet::BV2, Leibniz) => "BV8",
        };
        t.to_string()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Clause {
    Mem,
    Eq,
    Connective,
    Neg,
    DoubleNeg,
    DeMorgan,
    NegImp,
    Circ,
    CircDist,
    Quant,
    Leibniz,
    Bounded,
}

/// How the open choices for `~φ` and `o φ` are resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NegationPolicy {
    /// `~φ` is top (and `~~φ` is `φ`); `o φ` is bottom.
    ConstantTop,
    /// Boolean complement when the family admits it, else as `ConstantTop`;
    /// `o φ` is top when admissible and consistent, else bottom.
    Complement,
    /// `~φ(u)` takes the value of `φ(σu)` for the name involution given by
    /// the pairs; `~~φ` is `φ`; `o φ` is bottom.
    Swap(Vec<(NameId, NameId)>),
    /// Explicit values for closed `~φ` / `o φ` formulas.
    Table(HashMap<Formula, Elem>),
    /// The algebra's own negation table; `o x = ¬(x ∧ ¬x)`.
    Unary,
}

impl NegationPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            NegationPolicy::ConstantTop => "constant-top",
            NegationPolicy::Complement => "complement",
            NegationPolicy::Swap(_) => "swap",
            NegationPolicy::Table(_) => "table",
            NegationPolicy::Unary => "unary",
        }
    }

    /// Default policy of a rule set.
    pub fn default_for(rules: RuleSet) -> NegationPolicy {
        match rules {
            RuleSet::N4 => NegationPolicy::Swap(vec![]),
            RuleSet::BV2 | RuleSet::HV => NegationPolicy::ConstantTop,
            RuleSet::C1 | RuleSet::COmega => NegationPolicy::Complement,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("{clause} violated by {formula} = {value}: {detail}")]
    PolicyViolation { clause: String, formula: String, value: String, detail: String },
    #[error("formula has free variable `{0}`")]
    OpenFormula(String),
    #[error("membership in an empty-domain name needs a bottom element")]
    NoBottom,
    #[error("the {0} rule set has no clause for `~` or `o`")]
    NegationUnavailable(RuleSet),
    #[error("fragment and structure use different algebras")]
    MixedAlgebras,
    #[error("not a subalgebra: {0}")]
    NotASubalgebra(String),
    #[error("the {rules} rule set needs {needed}")]
    StructureMismatch { rules: RuleSet, needed: &'static str },
    #[error("policy `{policy}` needs {needed}")]
    PolicyMismatch { policy: &'static str, needed: &'static str },
    #[error("no table entry for {0}")]
    MissingTableEntry(String),
    #[error("name {0} is not in the fragment")]
    UnknownName(NameId),
    #[error("a mixture needs at least one part")]
    EmptyMixture,
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("`{0}` is not a sentence of set theory")]
    PropositionalVariable(String),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// The algebraic side of a model: a bare algebra or a Fidel structure.
#[derive(Clone, Debug)]
pub enum Frame {
    Bare(Arc<Algebra>),
    Fidel(FidelStructure),
}

impl Frame {
    pub fn algebra(&self) -> &Arc<Algebra> {
        match self {
            Frame::Bare(a) => a,
            Frame::Fidel(s) => s.algebra(),
        }
    }

    pub fn n_set(&self, x: Elem) -> ElemSet {
        match self {
            Frame::Bare(a) => a.carrier(),
            Frame::Fidel(s) => s.n_set(x),
        }
    }

    pub fn o_set(&self, x: Elem) -> ElemSet {
        match self {
            Frame::Bare(a) => a.carrier(),
            Frame::Fidel(s) => s.o_set(x),
        }
    }

    pub fn kind(&self) -> Option<FidelKind> {
        match self {
            Frame::Bare(_) => None,
            Frame::Fidel(s) => Some(s.kind()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub depth: usize,
    pub clause: String,
    pub text: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub value: String,
    /// False when an unbounded quantifier was evaluated over the fragment.
    pub exact: bool,
    /// Values the policy supplied, by formula.
    pub choices: Vec<(String, String)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MemoStats {
    pub hits: u64,
    pub misses: u64,
}

/// Evaluation state: frame, fragment, rule set, policy and memo tables.
pub struct EvalContext {
    frame: Frame,
    universe: Universe,
    rules: RuleSet,
    policy: NegationPolicy,
    eq_memo: HashMap<(NameId, NameId), Elem>,
    mem_memo: HashMap<(NameId, NameId), Elem>,
    formula_memo: HashMap<Formula, (Elem, bool)>,
    memo_stamp: usize,
    choices: BTreeMap<Formula, Elem>,
    fragment_relative: bool,
    trace: Option<Vec<TraceEntry>>,
    depth: usize,
    stats: MemoStats,
}

impl EvalContext {
    pub fn new(frame: Frame, universe: Universe, rules: RuleSet, policy: NegationPolicy) -> Result<Self, EvalError> {
        let alg = frame.algebra().clone();
        if **universe.algebra() != *alg {
            return Err(EvalError::MixedAlgebras);
        }
        let mismatch = |needed| Err(EvalError::StructureMismatch { rules, needed });
        match (rules, &frame) {
            (RuleSet::HV, _) => {}
            (RuleSet::N4, Frame::Fidel(s)) if s.kind() == FidelKind::N4 && s.is_saturated() => {}
            (RuleSet::N4, _) => return mismatch("a saturated N4 structure"),
            (RuleSet::C1, Frame::Fidel(s)) if s.kind() == FidelKind::C1 => {}
            (RuleSet::C1, _) => return mismatch("a C1 structure"),
            (RuleSet::COmega, Frame::Fidel(s)) if s.kind() == FidelKind::COmega => {}
            (RuleSet::COmega, _) => return mismatch("a Cω structure"),
            (RuleSet::BV2, _) if alg.size() == 2 && alg.is_boolean() => {}
            (RuleSet::BV2, _) => return mismatch("the two-element Boolean algebra"),
        }
        match &policy {
            NegationPolicy::Complement if !alg.is_boolean() => {
                return Err(EvalError::PolicyMismatch { policy: "complement", needed: "a Boolean algebra" })
            }
            NegationPolicy::Unary if !alg.has_negation_table() => {
                return Err(EvalError::PolicyMismatch { policy: "unary", needed: "an algebra with a negation table" })
            }
            NegationPolicy::Swap(pairs) => {
                if let Some(&(a, b)) = pairs.iter().find(|(a, b)| !universe.contains(*a) || !universe.contains(*b)) {
                    return Err(EvalError::UnknownName(if universe.contains(a) { b } else { a }));
                }
            }
            _ => {}
        }
        Ok(EvalContext {
            frame,
            universe,
            rules,
            policy,
            eq_memo: HashMap::new(),
            mem_memo: HashMap::new(),
            formula_memo: HashMap::new(),
            memo_stamp: 0,
            choices: BTreeMap::new(),
            fragment_relative: false,
            trace: None,
            depth: 0,
            stats: MemoStats::default(),
        })
    }

    /// A context with the rule set's default policy.
    pub fn with_default_policy(frame: Frame, universe: Universe, rules: RuleSet) -> Result<Self, EvalError> {
        EvalContext::new(frame, universe, rules, NegationPolicy::default_for(rules))
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        self.frame.algebra()
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Mutable access for registering new names. Existing names never change,
    /// so memoized ∈/≈ values stay valid.
    pub fn universe_mut(&mut self) -> &mut Universe {
        &mut self.universe
    }

    pub fn rules(&self) -> RuleSet {
        self.rules
    }

    pub fn policy(&self) -> &NegationPolicy {
        &self.policy
    }

    /// Replaces the policy and drops every value that could depend on it.
    pub fn set_policy(&mut self, policy: NegationPolicy) {
        self.policy = policy;
        self.formula_memo.clear();
        self.choices.clear();
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn take_trace(&mut self) -> Vec<TraceEntry> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn stats(&self) -> &MemoStats {
        &self.stats
    }

    pub fn name(&self, e: Elem) -> &str {
        self.algebra().name(e)
    }

    /// Renders a formula with fragment labels.
    pub fn show(&self, f: &Formula) -> String {
        f.display_with(&|id| self.universe.display(id)).to_string()
    }

    fn record(&mut self, clause: Clause, text: impl FnOnce(&Self) -> String, value: Elem) {
        if self.trace.is_some() {
            let entry = TraceEntry {
                depth: self.depth,
                clause: self.rules.tag(clause),
                text: text(self),
                value: self.name(value).to_string(),
            };
            self.trace.as_mut().unwrap().push(entry);
        }
    }

    fn check_name(&self, id: NameId) -> Result<(), EvalError> {
        if self.universe.contains(id) {
            Ok(())
        } else {
            Err(EvalError::UnknownName(id))
        }
    }

    // -----------------------------------------------------------------------
    // Atomic clauses

    /// ⟦u≈v⟧.
    pub fn equality(&mut self, u: NameId, v: NameId) -> Result<Elem, EvalError> {
        self.check_name(u)?;
        self.check_name(v)?;
        if let Some(&e) = self.eq_memo.get(&(u, v)) {
            self.stats.hits += 1;
            return Ok(e);
        }
        self.stats.misses += 1;
        self.depth += 1;
        let alg = self.algebra().clone();
        let mut acc = alg.top();
        for &(x, a) in self.universe.entries(u).to_vec().iter() {
            acc = alg.meet(acc, alg.implies(a, self.membership(x, v)?));
        }
        for &(y, b) in self.universe.entries(v).to_vec().iter() {
            acc = alg.meet(acc, alg.implies(b, self.membership(y, u)?));
        }
        self.depth -= 1;
        self.eq_memo.insert((u, v), acc);
        self.record(Clause::Eq, |c| format!("{} = {}", c.universe.display(u), c.universe.display(v)), acc);
        Ok(acc)
    }

    /// ⟦u∈v⟧.
    pub fn membership(&mut self, u: NameId, v: NameId) -> Result<Elem, EvalError> {
        self.check_name(u)?;
        self.check_name(v)?;
        if let Some(&e) = self.mem_memo.get(&(u, v)) {
            self.stats.hits += 1;
            return Ok(e);
        }
        self.stats.misses += 1;
        let alg = self.algebra().clone();
        let entries = self.universe.entries(v).to_vec();
        if entries.is_empty() && alg.bottom().is_none() {
            return Err(EvalError::NoBottom);
        }
        self.depth += 1;
        let mut acc = alg.least();
        for (x, a) in entries {
            acc = alg.join(acc, alg.meet(a, self.equality(x, u)?));
        }
        self.depth -= 1;
        self.mem_memo.insert((u, v), acc);
        self.record(Clause::Mem, |c| format!("{} in {}", c.universe.display(u), c.universe.display(v)), acc);
        Ok(acc)
    }

    // -----------------------------------------------------------------------
    // Sentences

    /// ⟦f⟧ for a closed formula.
    pub fn eval(&mut self, f: &Formula) -> Result<Elem, EvalError> {
        if let Some(v) = f.free_vars().into_iter().next() {
            return Err(EvalError::OpenFormula(v));
        }
        let f = if self.rules == RuleSet::C1 || self.rules == RuleSet::BV2 { f.clone() } else { f.expand_circ() };
        self.value(&f)
    }

    /// ⟦f⟧ with exactness and the policy choices that were used.
    pub fn evaluate(&mut self, f: &Formula) -> Result<Evaluation, EvalError> {
        self.fragment_relative = false;
        self.choices.clear();
        // Choices are recorded on memo misses only.
        self.formula_memo.clear();
        let v = self.eval(f)?;
        Ok(Evaluation {
            value: self.name(v).to_string(),
            exact: !self.fragment_relative,
            choices: self.choices.iter().map(|(g, e)| (self.show(g), self.name(*e).to_string())).collect(),
        })
    }

    /// ⟦f(id)⟧ for a formula with one free variable `var`.
    pub fn eval_with(&mut self, f: &Formula, var: &str, id: NameId) -> Result<Elem, EvalError> {
        self.eval(&f.subst(var, &Term::Name(id)))
    }

    /// Whether the last `evaluate` stayed exact.
    pub fn last_exact(&self) -> bool {
        !self.fragment_relative
    }

    fn term_name(&self, t: &Term) -> Result<NameId, EvalError> {
        match t {
            Term::Name(id) => {
                self.check_name(*id)?;
                Ok(*id)
            }
            Term::Var(v) => Err(EvalError::OpenFormula(v.clone())),
        }
    }

    fn value(&mut self, f: &Formula) -> Result<Elem, EvalError> {
        if self.memo_stamp != self.universe.len() {
            self.formula_memo.clear();
            self.memo_stamp = self.universe.len();
        }
        if let Some(&(e, rel)) = self.formula_memo.get(f) {
            self.fragment_relative |= rel;
            return Ok(e);
        }
        let outer = std::mem::replace(&mut self.fragment_relative, false);
        self.depth += 1;
        let result = self.compute(f);
        self.depth -= 1;
        let rel = self.fragment_relative;
        self.fragment_relative |= outer;
        let (e, clause) = result?;
        self.formula_memo.insert(f.clone(), (e, rel));
        if !matches!(f, Formula::Atom(..)) {
            self.record(clause, |c| c.show(f), e);
        }
        Ok(e)
    }

    fn compute(&mut self, f: &Formula) -> Result<(Elem, Clause), EvalError> {
        let alg = self.algebra().clone();
        let v = match f {
            Formula::Prop(p) => return Err(EvalError::PropositionalVariable(p.clone())),
            Formula::Atom(Pred::Mem, a, b) => (self.membership(self.term_name(a)?, self.term_name(b)?)?, Clause::Mem),
            Formula::Atom(Pred::Eq, a, b) => (self.equality(self.term_name(a)?, self.term_name(b)?)?, Clause::Eq),
            Formula::And(a, b) => (alg.meet(self.value(a)?, self.value(b)?), Clause::Connective),
            Formula::Or(a, b) => (alg.join(self.value(a)?, self.value(b)?), Clause::Connective),
            Formula::Imp(a, b) => (alg.implies(self.value(a)?, self.value(b)?), Clause::Connective),
            Formula::Not(g) => self.negation(g)?,
            Formula::Circ(g) => (self.circ(g)?, Clause::Circ),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                self.fragment_relative = true;
                let ids: Vec<NameId> = self.universe.ids().collect();
                let mut vals = Vec::with_capacity(ids.len());
                for id in ids {
                    vals.push(self.value(&body.subst(x, &Term::Name(id)))?);
                }
                let v = if matches!(f, Formula::Forall(..)) { alg.big_meet(vals) } else { alg.big_join(vals)? };
                (v, Clause::Quant)
            }
            Formula::ForallIn(x, t, body) | Formula::ExistsIn(x, t, body) => {
                let u = self.term_name(t)?;
                let universal = matches!(f, Formula::ForallIn(..));
                let mut acc = if universal { alg.top() } else { alg.least() };
                if !universal && self.universe.entries(u).is_empty() && alg.bottom().is_none() {
                    return Err(EvalError::NoBottom);
                }
                for (y, a) in self.universe.entries(u).to_vec() {
                    let phi = self.value(&body.subst(x, &Term::Name(y)))?;
                    acc = if universal { alg.meet(acc, alg.implies(a, phi)) } else { alg.join(acc, alg.meet(a, phi)) };
                }
                (acc, Clause::Bounded)
            }
        };
        Ok(v)
    }

    fn negation(&mut self, g: &Formula) -> Result<(Elem, Clause), EvalError> {
        let alg = self.algebra().clone();
        let not = |h: &Formula| Formula::not(h.clone());
        match self.rules {
            RuleSet::HV => match self.policy {
                NegationPolicy::Unary => {
                    let x = self.value(g)?;
                    Ok((alg.negation(x).expect("checked at construction"), Clause::Neg))
                }
                NegationPolicy::Table(_) => {
                    let x = self.value(g)?;
                    Ok((self.choose_neg(g, x)?, Clause::Neg))
                }
                _ => Err(EvalError::NegationUnavailable(RuleSet::HV)),
            },
            RuleSet::N4 => {
                let v = match g {
                    Formula::Not(h) => return Ok((self.value(h)?, Clause::DoubleNeg)),
                    Formula::And(a, b) => alg.join(self.value(&not(a))?, self.value(&not(b))?),
                    Formula::Or(a, b) => alg.meet(self.value(&not(a))?, self.value(&not(b))?),
                    Formula::Imp(a, b) => return Ok((alg.meet(self.value(a)?, self.value(&not(b))?), Clause::NegImp)),
                    Formula::Forall(x, b) => return Ok((self.value(&Formula::Exists(x.clone(), Box::new(not(b))))?, Clause::Quant)),
                    Formula::Exists(x, b) => return Ok((self.value(&Formula::Forall(x.clone(), Box::new(not(b))))?, Clause::Quant)),
                    Formula::ForallIn(x, t, b) => {
                        return Ok((self.value(&Formula::ExistsIn(x.clone(), t.clone(), Box::new(not(b))))?, Clause::Bounded))
                    }
                    Formula::ExistsIn(x, t, b) => {
                        return Ok((self.value(&Formula::ForallIn(x.clone(), t.clone(), Box::new(not(b))))?, Clause::Bounded))
                    }
                    _ => {
                        let x = self.value(g)?;
                        let c = self.choose_neg(g, x)?;
                        self.require(Clause::Neg, g, c, self.frame.n_set(x).contains(c), "outside N")?;
                        return Ok((c, Clause::Neg));
                    }
                };
                Ok((v, Clause::DeMorgan))
            }
            RuleSet::C1 | RuleSet::COmega | RuleSet::BV2 => {
                let x = self.value(g)?;
                let c = self.choose_neg(g, x)?;
                if self.rules == RuleSet::BV2 {
                    let (zero, one) = (alg.least(), alg.top());
                    self.require(Clause::Neg, g, c, x != zero || c == one, "φ is 0 but ¬φ is not 1")?;
                    if let Formula::Not(h) = g {
                        let hv = self.value(h)?;
                        self.require(Clause::DoubleNeg, g, c, c != one || hv == one, "¬¬φ is 1 but φ is not")?;
                    }
                } else {
                    self.require(Clause::Neg, g, c, self.frame.n_set(x).contains(c), "outside N")?;
                    if let Formula::Not(h) = g {
                        let hv = self.value(h)?;
                        self.require(Clause::DoubleNeg, g, c, alg.leq(c, hv), "¬¬φ exceeds φ")?;
                    }
                }
                Ok((c, Clause::Neg))
            }
        }
    }

    fn circ(&mut self, g: &Formula) -> Result<Elem, EvalError> {
        let alg = self.algebra().clone();
        match self.rules {
            RuleSet::HV => match self.policy {
                NegationPolicy::Unary => {
                    let x = self.value(g)?;
                    let n = |e| alg.negation(e).expect("checked at construction");
                    Ok(n(alg.meet(x, n(x))))
                }
                NegationPolicy::Table(_) => {
                    let x = self.value(g)?;
                    self.choose_circ(g, x)
                }
                _ => Err(EvalError::NegationUnavailable(RuleSet::HV)),
            },
            RuleSet::N4 | RuleSet::COmega => {
                let expanded = Formula::circ(g.clone()).expand_circ();
                self.value(&expanded)
            }
            RuleSet::C1 | RuleSet::BV2 => {
                let x = self.value(g)?;
                let c = self.choose_circ(g, x)?;
                let parts = match g {
                    Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => Some(((**a).clone(), (**b).clone())),
                    _ => None,
                };
                let circ_g = Formula::circ(g.clone());
                if self.rules == RuleSet::C1 {
                    self.require(Clause::Circ, &circ_g, c, self.frame.o_set(x).contains(c), "outside O")?;
                    if let Some((a, b)) = parts {
                        let ca = self.value(&Formula::circ(a))?;
                        let cb = self.value(&Formula::circ(b))?;
                        self.require(Clause::CircDist, &circ_g, c, alg.leq(alg.meet(ca, cb), c), "o a ∧ o b exceeds it")?;
                    }
                } else {
                    let one = alg.top();
                    let neg = self.value(&Formula::not(g.clone()))?;
                    self.require(Clause::Circ, &circ_g, c, c != one || x != one || neg != one, "o φ, φ and ¬φ are all 1")?;
                    if let Some((a, b)) = parts {
                        if c != one {
                            let av = self.value(&a)?;
                            let ca = self.value(&Formula::circ(a))?;
                            let cb = self.value(&Formula::circ(b))?;
                            self.require(
                                Clause::CircDist,
                                &circ_g,
                                c,
                                av != one || ca != one || cb != one,
                                "o(a#b) is 0 while a, o a and o b are 1",
                            )?;
                        }
                    }
                }
                Ok(c)
            }
        }
    }

    fn require(&self, clause: Clause, f: &Formula, value: Elem, ok: bool, detail: &str) -> Result<(), EvalError> {
        if ok {
            return Ok(());
        }
        let shown = match clause {
            Clause::Circ | Clause::CircDist => self.show(f),
            _ => self.show(&Formula::not(f.clone())),
        };
        Err(EvalError::PolicyViolation {
            clause: self.rules.tag(clause),
            formula: shown,
            value: self.name(value).to_string(),
            detail: detail.to_string(),
        })
    }

    fn choose_neg(&mut self, g: &Formula, x: Elem) -> Result<Elem, EvalError> {
        let alg = self.algebra().clone();
        let key = Formula::not(g.clone());
        let c = match &self.policy {
            NegationPolicy::ConstantTop => match g {
                Formula::Not(h) => self.value(h)?,
                _ => alg.top(),
            },
            NegationPolicy::Complement => match alg.complement(x) {
                Some(c) if self.frame.n_set(x).contains(c) => c,
                _ => match g {
                    Formula::Not(h) => self.value(h)?,
                    _ => alg.top(),
                },
            },
            NegationPolicy::Swap(pairs) => match g {
                Formula::Not(h) => self.value(h)?,
                _ => {
                    let pairs = pairs.clone();
                    let sigma = move |id: NameId| {
                        pairs.iter().find_map(|&(a, b)| (a == id).then_some(b).or((b == id).then_some(a))).unwrap_or(id)
                    };
                    self.value(&g.map_names(&sigma))?
                }
            },
            NegationPolicy::Table(t) => match t.get(&key) {
                Some(&c) => c,
                None => return Err(EvalError::MissingTableEntry(self.show(&key))),
            },
            NegationPolicy::Unary => alg.negation(x).expect("checked at construction"),
        };
        self.choices.insert(key, c);
        Ok(c)
    }

    fn choose_circ(&mut self, g: &Formula, x: Elem) -> Result<Elem, EvalError> {
        let alg = self.algebra().clone();
        let key = Formula::circ(g.clone());
        let c = match &self.policy {
            NegationPolicy::ConstantTop | NegationPolicy::Swap(_) => alg.least(),
            NegationPolicy::Complement => {
                let neg = self.value(&Formula::not(g.clone()))?;
                if self.frame.o_set(x).contains(alg.top()) && alg.meet(x, neg) == alg.least() {
                    alg.top()
                } else {
                    alg.least()
                }
            }
            NegationPolicy::Table(t) => match t.get(&key) {
                Some(&c) => c,
                None => return Err(EvalError::MissingTableEntry(self.show(&key))),
            },
            NegationPolicy::Unary => {
                let n = |e| alg.negation(e).expect("checked at construction");
                n(alg.meet(x, n(x)))
            }
        };
        self.choices.insert(key, c);
        Ok(c)
    }

    // -----------------------------------------------------------------------
    // Derived constructions

    /// Registers the mixture Σ a_i·u_i: dom is the union of the domains and
    /// u(x) = ⋁_i a_i ∧ ⟦x∈u_i⟧.
    pub fn mixture(&mut self, parts: &[(Elem, NameId)]) -> Result<NameId, EvalError> {
        if parts.is_empty() {
            return Err(EvalError::EmptyMixture);
        }
        let alg = self.algebra().clone();
        let mut dom: Vec<NameId> = Vec::new();
        for &(_, u) in parts {
            self.check_name(u)?;
            dom.extend(self.universe.domain(u));
        }
        dom.sort();
        dom.dedup();
        let mut pairs = Vec::with_capacity(dom.len());
        for x in dom {
            let mut w = alg.least();
            for &(a, u) in parts {
                w = alg.join(w, alg.meet(a, self.membership(x, u)?));
            }
            pairs.push((x, w));
        }
        Ok(self.universe.make_name(&pairs)?)
    }

    /// Checks ⟦u≈v⟧ ≤ ⟦φ(u)⟧ → ⟦φ(v)⟧ for every fragment pair and every φ
    /// (each with exactly one free variable).
    pub fn check_leibniz(&mut self, formulas: &[Formula]) -> Result<LeibnizReport, EvalError> {
        let alg = self.algebra().clone();
        let ids: Vec<NameId> = self.universe.ids().collect();
        let mut report = LeibnizReport { checked: 0, violations: Vec::new() };
        for phi in formulas {
            let fv = phi.free_vars();
            let var = match (fv.len(), fv.iter().next()) {
                (1, Some(v)) => v.clone(),
                _ => return Err(EvalError::Precondition(format!("`{phi}` must have exactly one free variable"))),
            };
            let mut vals = Vec::with_capacity(ids.len());
            for &id in &ids {
                vals.push(self.eval_with(phi, &var, id)?);
            }
            for (i, &u) in ids.iter().enumerate() {
                for (j, &v) in ids.iter().enumerate() {
                    report.checked += 1;
                    let eq = self.equality(u, v)?;
                    let bound = alg.implies(vals[i], vals[j]);
                    if !alg.leq(eq, bound) {
                        report.violations.push(LeibnizViolation {
                            clause: self.rules.tag(Clause::Leibniz),
                            formula: self.show(phi),
                            u: self.universe.display(u),
                            v: self.universe.display(v),
                            eq: self.name(eq).to_string(),
                            phi_u: self.name(vals[i]).to_string(),
                            phi_v: self.name(vals[j]).to_string(),
                            implication: self.name(bound).to_string(),
                        });
                    }
                }
            }
        }
        Ok(report)
    }

    /// Leibniz audit for the closed negated (and `o`) subformulas of `f`:
    /// each name occurring in such a subformula is abstracted in turn.
    pub fn audit_sentence(&mut self, f: &Formula) -> Result<LeibnizReport, EvalError> {
        let mut templates = Vec::new();
        collect_negated(f, &mut templates);
        let mut phis: Vec<Formula> = Vec::new();
        for g in templates.into_iter().filter(Formula::is_closed) {
            for id in g.names() {
                let x = fresh(&g);
                let phi = abstract_name(&g, id, &x);
                if !phis.contains(&phi) {
                    phis.push(phi);
                }
            }
        }
        self.check_leibniz(&phis)
    }

    /// Evaluates a restricted negation-free sentence both here and in `sub`
    /// (whose elements embed by name) and compares the results.
    pub fn check_subalgebra_invariance(&mut self, sub: Arc<Algebra>, f: &Formula) -> Result<SubalgebraReport, EvalError> {
        if !f.is_restricted() {
            return Err(EvalError::Precondition("formula has an unbounded quantifier".into()));
        }
        if f.mentions_negation() {
            return Err(EvalError::Precondition("formula mentions ~ or o".into()));
        }
        let full = self.algebra().clone();
        let embed: Vec<Elem> = sub
            .elements()
            .map(|e| full.elem(sub.name(e)).ok_or_else(|| EvalError::NotASubalgebra(format!("`{}` missing", sub.name(e)))))
            .collect::<Result<_, _>>()?;
        let image = ElemSet::from_elems(embed.iter().copied());
        if image.len() != sub.size() || !full.is_closed_subset(image) {
            return Err(EvalError::NotASubalgebra("image is not closed under the operations".into()));
        }
        for a in sub.elements() {
            for b in sub.elements() {
                let (ea, eb) = (embed[a.index()], embed[b.index()]);
                if embed[sub.meet(a, b).index()] != full.meet(ea, eb)
                    || embed[sub.join(a, b).index()] != full.join(ea, eb)
                    || embed[sub.implies(a, b).index()] != full.implies(ea, eb)
                {
                    return Err(EvalError::NotASubalgebra(format!(
                        "operations disagree at ({}, {})",
                        sub.name(a),
                        sub.name(b)
                    )));
                }
            }
        }
        let back = |e: Elem| embed.iter().position(|&x| x == e).map(|i| Elem(i as u8));
        let (sub_universe, ids) = self.universe.transport(sub.clone(), |_| true, back);
        if let Some(id) = f.names().into_iter().find(|id| !ids.contains_key(id)) {
            return Err(EvalError::Precondition(format!(
                "{} has weights outside the subalgebra",
                self.universe.display(id)
            )));
        }
        let g = f.map_names(&|id| ids[&id]);
        let mut sub_ctx = EvalContext::new(Frame::Bare(sub.clone()), sub_universe, RuleSet::HV, NegationPolicy::ConstantTop)?;
        let in_sub = sub_ctx.eval(&g)?;
        let in_full = self.eval(f)?;
        Ok(SubalgebraReport {
            formula: self.show(f),
            value_sub: sub.name(in_sub).to_string(),
            value_full: self.name(in_full).to_string(),
            equal: embed[in_sub.index()] == in_full,
        })
    }
}

fn collect_negated(f: &Formula, out: &mut Vec<Formula>) {
    if matches!(f, Formula::Not(_) | Formula::Circ(_)) && !out.contains(f) {
        out.push(f.clone());
    }
    for c in f.children() {
        collect_negated(c, out);
    }
}

fn fresh(f: &Formula) -> String {
    let used = f.free_vars();
    (0..).map(|i| format!("x{i}")).find(|v| !used.contains(v) && !f.to_string().contains(v.as_str())).unwrap()
}

fn abstract_name(f: &Formula, id: NameId, x: &str) -> Formula {
    // Names and variables share term positions, so swap the constant for a
    // placeholder name that cannot occur, then rewrite it to the variable.
    let placeholder = NameId(u32::MAX);
    let g = f.map_names(&|n| if n == id { placeholder } else { n });
    replace_name_by_var(&g, placeholder, x)
}

fn replace_name_by_var(f: &Formula, id: NameId, x: &str) -> Formula {
    let rt = |t: &Term| match t {
        Term::Name(n) if *n == id => Term::Var(x.to_string()),
        other => other.clone(),
    };
    let b = |g: &Formula| Box::new(replace_name_by_var(g, id, x));
    match f {
        Formula::Prop(_) => f.clone(),
        Formula::Atom(p, a, c) => Formula::Atom(*p, rt(a), rt(c)),
        Formula::And(a, c) => Formula::And(b(a), b(c)),
        Formula::Or(a, c) => Formula::Or(b(a), b(c)),
        Formula::Imp(a, c) => Formula::Imp(b(a), b(c)),
        Formula::Not(a) => Formula::Not(b(a)),
        Formula::Circ(a) => Formula::Circ(b(a)),
        Formula::Forall(v, a) => Formula::Forall(v.clone(), b(a)),
        Formula::Exists(v, a) => Formula::Exists(v.clone(), b(a)),
        Formula::ForallIn(v, t, a) => Formula::ForallIn(v.clone(), rt(t), b(a)),
        Formula::ExistsIn(v, t, a) => Formula::ExistsIn(v.clone(), rt(t), b(a)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeibnizViolation {
    pub clause: String,
    pub formula: String,
    pub u: String,
    pub v: String,
    pub eq: String,
    pub phi_u: String,
    pub phi_v: String,
    pub implication: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeibnizReport {
    pub checked: usize,
    pub violations: Vec<LeibnizViolation>,
}

impl LeibnizReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubalgebraReport {
    pub formula: String,
    pub value_sub: String,
    pub value_full: String,
    pub equal: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin::{diamond, h3, two};
    use crate::universe::HfSet;

    struct Setup {
        ctx: EvalContext,
        w: NameId,
        u: NameId,
        v: NameId,
    }

    // w = ∅, u = {(w, 1/2)}, v = {(w, 1)}.
    fn h3_setup(frame: Frame, rules: RuleSet, policy: impl FnOnce(NameId, NameId) -> NegationPolicy) -> Setup {
        let mut un = Universe::new(frame.algebra().clone());
        let w = un.empty();
        let u = un.make_name_named(&[(w, "1/2")]).unwrap();
        let v = un.make_name_named(&[(w, "1")]).unwrap();
        for (l, id) in [("w", w), ("u", u), ("v", v)] {
            un.bind(l, id).unwrap();
        }
        let ctx = EvalContext::new(frame, un, rules, policy(u, v)).unwrap();
        Setup { ctx, w, u, v }
    }

    fn n3() -> Frame {
        Frame::Fidel(FidelStructure::saturate(Arc::new(h3()), FidelKind::N4).unwrap())
    }

    fn parse(ctx: &EvalContext, s: &str) -> Formula {
        Formula::parse(s).unwrap().resolve_closed(&ctx.universe().bindings()).unwrap()
    }

    #[test]
    fn h3_values() {
        let mut s = h3_setup(n3(), RuleSet::N4, |u, v| NegationPolicy::Swap(vec![(u, v)]));
        let half = s.ctx.algebra().elem("1/2").unwrap();
        let top = s.ctx.algebra().top();
        assert_eq!(s.ctx.equality(s.u, s.v).unwrap(), half);
        assert_eq!(s.ctx.membership(s.w, s.u).unwrap(), half);
        assert_eq!(s.ctx.membership(s.w, s.v).unwrap(), top);
        assert_eq!(s.ctx.equality(s.u, s.u).unwrap(), top);
        // Swap: ¬ψ(u) = ψ(v) = 1, ¬ψ(v) = ψ(u) = 1/2.
        let f = parse(&s.ctx, "~(w in u)");
        assert_eq!(s.ctx.eval(&f).unwrap(), top);
        let g = parse(&s.ctx, "~(w in v)");
        assert_eq!(s.ctx.eval(&g).unwrap(), half);
        let phi = Formula::parse("~(w in x)").unwrap().resolve(&s.ctx.universe().bindings());
        assert!(s.ctx.check_leibniz(&[phi]).unwrap().passed());
    }

    #[test]
    fn unary_table_negation_breaks_leibniz() {
        let mut s = h3_setup(Frame::Bare(Arc::new(h3())), RuleSet::HV, |_, _| NegationPolicy::Unary);
        let phi = Formula::parse("~(w in x)").unwrap().resolve(&s.ctx.universe().bindings());
        let r = s.ctx.check_leibniz(&[phi]).unwrap();
        let bad = r.violations.iter().find(|x| x.u == "u" && x.v == "v").expect("violation");
        assert_eq!((bad.eq.as_str(), bad.phi_u.as_str(), bad.phi_v.as_str(), bad.implication.as_str()), ("1/2", "1/2", "0", "0"));
    }

    #[test]
    fn hv_has_no_negation_without_a_table() {
        let mut un = Universe::new(Arc::new(two()));
        let e = un.empty();
        let mut ctx = EvalContext::new(Frame::Bare(Arc::new(two())), un, RuleSet::HV, NegationPolicy::ConstantTop).unwrap();
        let f = Formula::not(Formula::eq(Term::Name(e), Term::Name(e)));
        assert_eq!(ctx.eval(&f), Err(EvalError::NegationUnavailable(RuleSet::HV)));
    }

    #[test]
    fn table_policy_realizes_listed_choices() {
        let both_half = |u: NameId, v: NameId| {
            let w = NameId(0);
            let half = h3().elem("1/2").unwrap();
            let key = |x| Formula::not(Formula::mem(Term::Name(w), Term::Name(x)));
            NegationPolicy::Table([(key(u), half), (key(v), half)].into_iter().collect())
        };
        let mut s = h3_setup(n3(), RuleSet::N4, both_half);
        let phi = Formula::parse("~(w in x)").unwrap().resolve(&s.ctx.universe().bindings());
        let half = s.ctx.algebra().elem("1/2").unwrap();
        assert_eq!(s.ctx.eval_with(&phi, "x", s.u).unwrap(), half);
        assert_eq!(s.ctx.eval_with(&phi, "x", s.v).unwrap(), half);
        // ¬¬ψ(u) = ψ(u) regardless of the table.
        let dn = parse(&s.ctx, "~~(w in u)");
        assert_eq!(s.ctx.eval(&dn).unwrap(), half);
        // Entries outside the table are reported.
        let f = parse(&s.ctx, "~(w in w)");
        assert!(matches!(s.ctx.eval(&f), Err(EvalError::MissingTableEntry(_))));
    }

    #[test]
    fn n4_negation_pushes_through_compounds() {
        let mut s = h3_setup(n3(), RuleSet::N4, |u, v| NegationPolicy::Swap(vec![(u, v)]));
        for (lhs, rhs) in [
            ("~(w in u & w in v)", "~(w in u) | ~(w in v)"),
            ("~(w in u | w in v)", "~(w in u) & ~(w in v)"),
            ("~(w in u -> w in v)", "w in u & ~(w in v)"),
            ("~~(w in u)", "w in u"),
            ("~(forall x in v. x in u)", "exists x in v. ~(x in u)"),
        ] {
            let (l, r) = (parse(&s.ctx, lhs), parse(&s.ctx, rhs));
            assert_eq!(s.ctx.eval(&l).unwrap(), s.ctx.eval(&r).unwrap(), "{lhs}");
        }
    }

    #[test]
    fn bounded_quantifier_identity() {
        let mut s = h3_setup(n3(), RuleSet::N4, |_, _| NegationPolicy::Swap(vec![]));
        let alg = s.ctx.algebra().clone();
        let body = Formula::parse("w in x").unwrap().resolve(&s.ctx.universe().bindings());
        for t in [s.u, s.v, s.w] {
            let f = Formula::ForallIn("x".into(), Term::Name(t), Box::new(body.clone()));
            let mut want = alg.top();
            for (x, a) in s.ctx.universe().entries(t).to_vec() {
                want = alg.meet(want, alg.implies(a, s.ctx.eval_with(&body, "x", x).unwrap()));
            }
            let e = s.ctx.evaluate(&f).unwrap();
            assert!(e.exact);
            assert_eq!(e.value, alg.name(want));
        }
        let unbounded = parse(&s.ctx, "exists x. x = x");
        assert!(!s.ctx.evaluate(&unbounded).unwrap().exact);
    }

    #[test]
    fn bv2_constant_top_is_paraconsistent() {
        let two = Arc::new(two());
        let mut un = Universe::new(two.clone());
        let e = un.empty();
        let mut ctx = EvalContext::with_default_policy(Frame::Bare(two), un, RuleSet::BV2).unwrap();
        let a = Formula::eq(Term::Name(e), Term::Name(e));
        let top = ctx.algebra().top();
        assert_eq!(ctx.eval(&a).unwrap(), top);
        assert_eq!(ctx.eval(&Formula::not(a.clone())).unwrap(), top);
        assert_eq!(ctx.eval(&Formula::not(Formula::not(a.clone()))).unwrap(), top);
        assert_eq!(ctx.eval(&Formula::circ(a.clone())).unwrap(), ctx.algebra().least());
        assert_eq!(ctx.eval(&Formula::mem(Term::Name(e), Term::Name(e))).unwrap(), ctx.algebra().least());
    }

    #[test]
    fn bv2_checks_reject_bad_tables() {
        let two_alg = Arc::new(two());
        let mut un = Universe::new(two_alg.clone());
        let e = un.empty();
        let bad = Formula::mem(Term::Name(e), Term::Name(e));
        let table = [(Formula::not(bad.clone()), two_alg.least())].into_iter().collect();
        let mut ctx = EvalContext::new(Frame::Bare(two_alg), un, RuleSet::BV2, NegationPolicy::Table(table)).unwrap();
        match ctx.eval(&Formula::not(bad)) {
            Err(EvalError::PolicyViolation { clause, .. }) => assert_eq!(clause, "BV4"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn c1_complement_policy() {
        let s = FidelStructure::saturate(Arc::new(diamond()), FidelKind::C1).unwrap();
        let alg = s.algebra().clone();
        let mut un = Universe::new(alg.clone());
        let e = un.empty();
        let a = alg.elem("a").unwrap();
        let x = un.make_name(&[(e, a)]).unwrap();
        let mut ctx = EvalContext::with_default_policy(Frame::Fidel(s), un, RuleSet::C1).unwrap();
        let f = Formula::mem(Term::Name(e), Term::Name(x));
        assert_eq!(ctx.eval(&f).unwrap(), a);
        assert_eq!(ctx.eval(&Formula::not(f.clone())).unwrap(), alg.complement(a).unwrap());
        assert_eq!(ctx.eval(&Formula::circ(f.clone())).unwrap(), alg.top());
        let both = Formula::and(Formula::circ(f.clone()), Formula::circ(Formula::not(f.clone())));
        assert_eq!(ctx.eval(&both).unwrap(), alg.top());
    }

    #[test]
    fn rule_sets_check_their_frames() {
        let h = Arc::new(h3());
        let un = Universe::new(h.clone());
        assert!(matches!(
            EvalContext::with_default_policy(Frame::Bare(h.clone()), un.clone(), RuleSet::N4),
            Err(EvalError::StructureMismatch { .. })
        ));
        assert!(matches!(
            EvalContext::with_default_policy(Frame::Bare(h.clone()), un.clone(), RuleSet::BV2),
            Err(EvalError::StructureMismatch { .. })
        ));
        assert!(matches!(
            EvalContext::new(Frame::Bare(h), un, RuleSet::HV, NegationPolicy::Complement),
            Err(EvalError::PolicyMismatch { .. })
        ));
        let other = Universe::new(Arc::new(two()));
        assert_eq!(
            EvalContext::with_default_policy(Frame::Bare(Arc::new(h3())), other, RuleSet::HV).err(),
            Some(EvalError::MixedAlgebras)
        );
    }

    #[test]
    fn open_formulas_are_rejected() {
        let mut s = h3_setup(n3(), RuleSet::N4, |_, _| NegationPolicy::Swap(vec![]));
        assert_eq!(s.ctx.eval(&Formula::parse("x in y").unwrap()), Err(EvalError::OpenFormula("x".into())));
    }

    #[test]
    fn hat_membership_matches_set_membership() {
        let two = Arc::new(two());
        let mut un = Universe::new(two.clone());
        let sets = HfSet::all_up_to_rank(3);
        let hats: Vec<NameId> = sets.iter().map(|s| un.hat(s)).collect();
        let mut ctx = EvalContext::with_default_policy(Frame::Bare(two.clone()), un, RuleSet::HV).unwrap();
        for (i, s) in sets.iter().enumerate() {
            for (j, t) in sets.iter().enumerate() {
                let mem = ctx.membership(hats[i], hats[j]).unwrap() == two.top();
                assert_eq!(mem, t.contains(s));
                let eq = ctx.equality(hats[i], hats[j]).unwrap() == two.top();
                assert_eq!(eq, i == j);
            }
        }
    }

    #[test]
    fn mixture_of_one_part_is_extensionally_equal() {
        let mut s = h3_setup(n3(), RuleSet::N4, |_, _| NegationPolicy::Swap(vec![]));
        let top = s.ctx.algebra().top();
        let m = s.ctx.mixture(&[(top, s.u)]).unwrap();
        assert_eq!(s.ctx.equality(m, s.u).unwrap(), top);
        assert_eq!(s.ctx.mixture(&[]), Err(EvalError::EmptyMixture));
    }

    #[test]
    fn subalgebra_invariance() {
        let h = Arc::new(h3());
        let mut un = Universe::new(h.clone());
        let e = un.empty();
        let a = un.make_name_named(&[(e, "1")]).unwrap();
        let b = un.make_name_named(&[(e, "0"), (a, "1")]).unwrap();
        let half = un.make_name_named(&[(e, "1/2")]).unwrap();
        un.bind("u", a).unwrap();
        un.bind("v", b).unwrap();
        un.bind("h", half).unwrap();
        let mut ctx = EvalContext::with_default_policy(Frame::Bare(h), un, RuleSet::HV).unwrap();
        let sub = Arc::new(two());
        for src in ["forall y in u. y in v", "forall y in v. y in u", "u = u", "exists y in v. y = u"] {
            let f = parse(&ctx, src);
            let r = ctx.check_subalgebra_invariance(sub.clone(), &f).unwrap();
            assert!(r.equal, "{src}: {r:?}");
        }
        let unbounded = parse(&ctx, "exists y. y in u");
        assert!(matches!(ctx.check_subalgebra_invariance(sub.clone(), &unbounded), Err(EvalError::Precondition(_))));
        let outside = parse(&ctx, "h = h");
        assert!(matches!(ctx.check_subalgebra_invariance(sub, &outside), Err(EvalError::Precondition(_))));
    }
}
