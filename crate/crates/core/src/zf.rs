// SPDX-License-Identifier: Apache-2.0

//! Witness names for the ZF axioms, axiom checks over a fragment, the
//! Mixing Lemma, the maximum principle, cores over **2** and the
//! paraconsistency demonstrations.
//!
//! Every check records whether its verdict is exact (a property of the full
//! universe) or fragment-relative, and in which direction a fragment result
//! relates to the full one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{builtin, AlgebraError, Elem};
use crate::eval::{EvalContext, EvalError, Frame, LeibnizReport, LeibnizViolation, NegationPolicy, RuleSet};
use crate::fidel::{FidelError, FidelKind, FidelStructure};
use crate::formula::{Formula, Term};
use crate::universe::{HfSet, NameId, Universe, UniverseError};

/// Failing instances kept per report.
pub const MAX_FAILURES: usize = 10;

/// Default cap on |A|^|dom u| for the powerset witness.
pub const POWERSET_BUDGET: u128 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZfError {
    #[error("unsupported axiom `{0}` (expected extensionality, pairing, union, separation, powerset, empty, infinity, collection or induction)")]
    UnsupportedAxiom(String),
    #[error("witness needs {count} names, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("the construction needs a Boolean algebra")]
    NotBoolean,
    #[error("the construction needs the {0} rule set")]
    WrongRuleSet(RuleSet),
    #[error("constructed witness has value {value}, not top")]
    WitnessFailed { value: String },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Fidel(#[from] FidelError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

// ---------------------------------------------------------------------------
// Witnesses

/// w = {⟨u,1⟩, ⟨v,1⟩}.
pub fn witness_pairing(ctx: &mut EvalContext, u: NameId, v: NameId) -> Result<NameId, ZfError> {
    let top = ctx.algebra().top();
    Ok(ctx.universe_mut().make_name(&[(u, top), (v, top)])?)
}

/// dom(w) = ⋃_{v∈dom u} dom(v), w(x) = ⋁_{v∈dom u, x∈dom v} u(v) ∧ v(x).
pub fn witness_union(ctx: &mut EvalContext, u: NameId) -> Result<NameId, ZfError> {
    let alg = ctx.algebra().clone();
    let un = ctx.universe();
    let mut w: BTreeMap<NameId, Elem> = BTreeMap::new();
    for &(v, a) in un.entries(u) {
        for &(x, b) in un.entries(v) {
            let e = w.entry(x).or_insert(alg.least());
            *e = alg.join(*e, alg.meet(a, b));
        }
    }
    let pairs: Vec<(NameId, Elem)> = w.into_iter().collect();
    Ok(ctx.universe_mut().make_name(&pairs)?)
}

/// dom(w) = dom(u), w(x) = ⟦x∈u⟧ ∧ ⟦φ(x)⟧ for `phi` with free variable `var`.
pub fn witness_separation(ctx: &mut EvalContext, u: NameId, phi: &Formula, var: &str) -> Result<NameId, ZfError> {
    let alg = ctx.algebra().clone();
    let dom: Vec<NameId> = ctx.universe().domain(u).collect();
    let mut pairs = Vec::with_capacity(dom.len());
    for x in dom {
        let m = ctx.membership(x, u)?;
        pairs.push((x, alg.meet(m, ctx.eval_with(phi, var, x)?)));
    }
    Ok(ctx.universe_mut().make_name(&pairs)?)
}

/// dom(w) = every function f: dom(u) → A (as a name), w(f) = ⟦∀y∈f (y∈u)⟧.
pub fn witness_powerset(ctx: &mut EvalContext, u: NameId, budget: u128) -> Result<NameId, ZfError> {
    let alg = ctx.algebra().clone();
    let dom: Vec<NameId> = ctx.universe().domain(u).collect();
    let count = (alg.size() as u128).saturating_pow(dom.len() as u32);
    if count > budget {
        return Err(ZfError::BudgetExceeded { count, budget });
    }
    let elems: Vec<Elem> = alg.elements().collect();
    let mut pairs = Vec::with_capacity(count as usize);
    for code in 0..count as usize {
        let mut c = code;
        let f: Vec<(NameId, Elem)> = dom
            .iter()
            .map(|&x| {
                let e = elems[c % elems.len()];
                c /= elems.len();
                (x, e)
            })
            .collect();
        let fid = ctx.universe_mut().make_name(&f)?;
        pairs.push((fid, ctx.eval(&subset_of(fid, u))?));
    }
    Ok(ctx.universe_mut().make_name(&pairs)?)
}

/// w = {⟨anchor, ⟦¬(anchor≈anchor)⟧⟩}, so ⟦anchor∈w⟧ = ⟦¬(anchor≈anchor)⟧.
pub fn witness_empty(ctx: &mut EvalContext, anchor: NameId) -> Result<NameId, ZfError> {
    let c = self_inequality(ctx, anchor)?;
    Ok(ctx.universe_mut().make_name(&[(anchor, c)])?)
}

/// dom(w) = the current fragment, w(x) = ⟦¬(x≈x)⟧: one witness for every
/// fragment name at once.
pub fn witness_empty_global(ctx: &mut EvalContext) -> Result<NameId, ZfError> {
    let ids: Vec<NameId> = ctx.universe().ids().collect();
    let mut pairs = Vec::with_capacity(ids.len());
    for x in ids {
        pairs.push((x, self_inequality(ctx, x)?));
    }
    Ok(ctx.universe_mut().make_name(&pairs)?)
}

/// ⟦¬(x≈x)⟧, required to lie in N_top.
fn self_inequality(ctx: &mut EvalContext, x: NameId) -> Result<Elem, ZfError> {
    let f = Formula::not(Formula::eq(Term::Name(x), Term::Name(x)));
    let c = ctx.eval(&f)?;
    let top = ctx.algebra().top();
    if !ctx.frame().n_set(top).contains(c) {
        return Err(EvalError::PolicyViolation {
            clause: "N_1".into(),
            formula: ctx.show(&f),
            value: ctx.name(c).to_string(),
            detail: "the empty-set witness needs a value in N_1".into(),
        }
        .into());
    }
    Ok(c)
}

fn subset_of(v: NameId, u: NameId) -> Formula {
    Formula::ForallIn("y".into(), Term::Name(v), Box::new(Formula::mem(Term::var("y"), Term::Name(u))))
}

// ---------------------------------------------------------------------------
// Axiom checks

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Axiom {
    Extensionality,
    Pairing,
    Union,
    /// φ with one free variable.
    Separation(Formula),
    Powerset,
    EmptySet,
    /// ψ(n̂) for ψ(x) = ∅∈x ∧ ∀y∈x (y⁺∈x).
    InfinityApprox(usize),
    /// φ with free variables `y` and `z`; the candidate collects the z's.
    CollectionBounded { phi: Formula, candidate: Option<NameId> },
    /// φ with one free variable.
    InductionInstance(Formula),
}

impl Axiom {
    pub fn tag(&self) -> &'static str {
        match self {
            Axiom::Extensionality => "extensionality",
            Axiom::Pairing => "pairing",
            Axiom::Union => "union",
            Axiom::Separation(_) => "separation",
            Axiom::Powerset => "powerset",
            Axiom::EmptySet => "empty",
            Axiom::InfinityApprox(_) => "infinity",
            Axiom::CollectionBounded { .. } => "collection",
            Axiom::InductionInstance(_) => "induction",
        }
    }
}

/// The axiom kinds, for front ends that supply parameters separately.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AxiomKind {
    Extensionality,
    Pairing,
    Union,
    Separation,
    Powerset,
    EmptySet,
    Infinity,
    Collection,
    Induction,
}

impl FromStr for AxiomKind {
    type Err = ZfError;
    fn from_str(s: &str) -> Result<Self, ZfError> {
        Ok(match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "extensionality" => AxiomKind::Extensionality,
            "pairing" => AxiomKind::Pairing,
            "union" => AxiomKind::Union,
            "separation" => AxiomKind::Separation,
            "powerset" => AxiomKind::Powerset,
            "empty" | "emptyset" => AxiomKind::EmptySet,
            "infinity" | "infinityapprox" => AxiomKind::Infinity,
            "collection" | "collectionbounded" => AxiomKind::Collection,
            "induction" | "inductioninstance" => AxiomKind::Induction,
            _ => return Err(ZfError::UnsupportedAxiom(s.to_string())),
        })
    }
}

/// One element-level relation between two computed values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub label: String,
    pub lhs: String,
    pub relation: &'static str,
    pub rhs: String,
    pub holds: bool,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.holds { "ok" } else { "FAILS" };
        write!(f, "{}: {} {} {} [{mark}]", self.label, self.lhs, self.relation, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheckReport {
    pub axiom: String,
    pub parameters: Vec<String>,
    /// Meet of the residuals of every checked relation; top iff all hold.
    pub value: String,
    pub holds: bool,
    pub exact: bool,
    pub direction: String,
    pub witnesses: Vec<String>,
    pub checked: usize,
    /// Listed conjunct by conjunct (infinity approximation only).
    pub conjuncts: Vec<Relation>,
    pub failures: Vec<Relation>,
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Parameter names; defaults to the whole fragment.
    pub instances: Option<Vec<NameId>>,
    pub powerset_budget: u128,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { instances: None, powerset_budget: POWERSET_BUDGET }
    }
}

struct Tally<'a> {
    ctx: &'a EvalContext,
    value: Elem,
    checked: usize,
    failures: Vec<Relation>,
}

impl<'a> Tally<'a> {
    fn new(ctx: &'a EvalContext) -> Self {
        Tally { ctx, value: ctx.algebra().top(), checked: 0, failures: Vec::new() }
    }

    fn relate(&mut self, label: impl FnOnce() -> String, a: Elem, rel: &'static str, b: Elem) -> Relation {
        let alg = self.ctx.algebra();
        let r = if rel == "=" { alg.iff(a, b) } else { alg.implies(a, b) };
        self.value = alg.meet(self.value, r);
        self.checked += 1;
        let rel = Relation {
            label: if r == alg.top() { String::new() } else { label() },
            lhs: alg.name(a).to_string(),
            relation: rel,
            rhs: alg.name(b).to_string(),
            holds: r == alg.top(),
        };
        if !rel.holds && self.failures.len() < MAX_FAILURES {
            self.failures.push(rel.clone());
        }
        rel
    }
}

/// Checks one axiom over the fragment held by `ctx`. Witness names are added
/// to the fragment; the universally quantified `z` ranges over the names
/// present before the check started.
pub fn check_axiom(ctx: &mut EvalContext, axiom: &Axiom, opts: &CheckOptions) -> Result<AxiomCheckReport, ZfError> {
    let snapshot: Vec<NameId> = ctx.universe().ids().collect();
    let params = opts.instances.clone().unwrap_or_else(|| snapshot.clone());
    let alg = ctx.algebra().clone();
    let top = alg.top();
    let mut witnesses = Vec::new();
    let mut conjuncts = Vec::new();
    let mut tally_value = top;
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut parameters: Vec<String> = Vec::new();
    let (exact, direction): (bool, &str);

    macro_rules! flush {
        ($t:expr) => {{
            let t = $t;
            tally_value = alg.meet(tally_value, t.value);
            checked += t.checked;
            for f in t.failures {
                if failures.len() < MAX_FAILURES {
                    failures.push(f);
                }
            }
        }};
    }

    match axiom {
        Axiom::Extensionality => {
            exact = true;
            direction = "exact: ⟦∀z(z∈x↔z∈y)⟧ over the fragment bounds the class-wide meet from above, \
                         and the fragment contains dom(x) ∪ dom(y)";
            let mut vals = Vec::with_capacity(params.len() * params.len());
            for &x in &params {
                for &y in &params {
                    let mut lhs = top;
                    for &z in &snapshot {
                        lhs = alg.meet(lhs, alg.iff(ctx.membership(z, x)?, ctx.membership(z, y)?));
                    }
                    vals.push((x, y, lhs, ctx.equality(x, y)?));
                }
            }
            let mut t = Tally::new(ctx);
            for (x, y, lhs, rhs) in vals {
                t.relate(|| format!("x={}, y={}: ∀z(z∈x↔z∈y) ≤ x≈y", t_name(ctx, x), t_name(ctx, y)), lhs, "≤", rhs);
            }
            flush!(t);
        }
        Axiom::Pairing => {
            exact = false;
            direction = "fragment-relative: the identity ⟦z∈w⟧ = ⟦z≈u⟧∨⟦z≈v⟧ is checked for every fragment z";
            let mut rows = Vec::new();
            for (i, &u) in params.iter().enumerate() {
                for &v in &params[i..] {
                    let w = witness_pairing(ctx, u, v)?;
                    for &z in &snapshot {
                        let lhs = ctx.membership(z, w)?;
                        let rhs = alg.join(ctx.equality(z, u)?, ctx.equality(z, v)?);
                        rows.push((u, v, z, lhs, rhs));
                    }
                }
            }
            let mut t = Tally::new(ctx);
            for (u, v, z, lhs, rhs) in rows {
                t.relate(
                    || format!("u={}, v={}, z={}: z∈w = z≈u ∨ z≈v", t_name(ctx, u), t_name(ctx, v), t_name(ctx, z)),
                    lhs,
                    "=",
                    rhs,
                );
            }
            flush!(t);
        }
        Axiom::Union => {
            exact = false;
            direction = "fragment-relative: ⟦z∈w⟧ = ⟦∃v∈u(z∈v)⟧ is checked for every fragment z";
            let mut rows = Vec::new();
            for &u in &params {
                let w = witness_union(ctx, u)?;
                witnesses.push(format!("⋃{} = {}", t_name(ctx, u), ctx.universe().structural(w)));
                for &z in &snapshot {
                    let rhs = Formula::ExistsIn(
                        "v".into(),
                        Term::Name(u),
                        Box::new(Formula::mem(Term::Name(z), Term::var("v"))),
                    );
                    rows.push((u, z, ctx.membership(z, w)?, ctx.eval(&rhs)?));
                }
            }
            let mut t = Tally::new(ctx);
            for (u, z, lhs, rhs) in rows {
                t.relate(|| format!("u={}, z={}: z∈w = ∃v∈u(z∈v)", t_name(ctx, u), t_name(ctx, z)), lhs, "=", rhs);
            }
            flush!(t);
        }
        Axiom::Separation(phi) => {
            exact = false;
            direction = "fragment-relative: both inclusions between ⟦z∈w⟧ and ⟦z∈u⟧∧⟦φ(z)⟧ are checked for every fragment z";
            let var = single_free_var(phi)?;
            parameters.push(format!("φ = {}", ctx.show(phi)));
            let mut rows = Vec::new();
            for &u in &params {
                let w = witness_separation(ctx, u, phi, &var)?;
                for &z in &snapshot {
                    let lhs = ctx.membership(z, w)?;
                    let rhs = alg.meet(ctx.membership(z, u)?, ctx.eval_with(phi, &var, z)?);
                    rows.push((u, z, lhs, rhs));
                }
            }
            let mut t = Tally::new(ctx);
            for (u, z, lhs, rhs) in rows {
                let who = || format!("u={}, z={}", t_name(ctx, u), t_name(ctx, z));
                t.relate(|| format!("{}: z∈w ≤ z∈u ∧ φ(z)", who()), lhs, "≤", rhs);
                t.relate(|| format!("{}: z∈u ∧ φ(z) ≤ z∈w", who()), rhs, "≤", lhs);
            }
            flush!(t);
        }
        Axiom::Powerset => {
            exact = false;
            direction = "fragment-relative: ⟦v∈w⟧ = ⟦∀y∈v(y∈u)⟧ is checked for every fragment v";
            let mut rows = Vec::new();
            for &u in &params {
                let w = witness_powerset(ctx, u, opts.powerset_budget)?;
                witnesses.push(format!("P({}) has {} entries", t_name(ctx, u), ctx.universe().entries(w).len()));
                for &v in &snapshot {
                    rows.push((u, v, ctx.membership(v, w)?, ctx.eval(&subset_of(v, u))?));
                }
            }
            let mut t = Tally::new(ctx);
            for (u, v, lhs, rhs) in rows {
                t.relate(|| format!("u={}, v={}: v∈w = ∀y∈v(y∈u)", t_name(ctx, u), t_name(ctx, v)), lhs, "=", rhs);
            }
            flush!(t);
        }
        Axiom::EmptySet => {
            exact = false;
            direction = "fragment-relative: one witness with domain the fragment; ⟦z∈w⟧ = ⟦¬(z≈z)⟧ is checked \
                         for every fragment z, names created afterwards are not covered";
            let w = witness_empty_global(ctx)?;
            witnesses.push(format!("∅ witness with {} entries", ctx.universe().entries(w).len()));
            let mut rows = Vec::new();
            for &z in &snapshot {
                rows.push((z, ctx.membership(z, w)?, self_inequality(ctx, z)?));
            }
            let mut t = Tally::new(ctx);
            for (z, lhs, rhs) in rows {
                t.relate(|| format!("z={}: z∈w = ¬(z≈z)", t_name(ctx, z)), lhs, "=", rhs);
            }
            flush!(t);
        }
        Axiom::InfinityApprox(n) => {
            exact = true;
            direction = "approximation: ψ(x) = ∅∈x ∧ ∀y∈x(y⁺∈x) is evaluated at x = n̂ only; \
                         Infinity itself is never claimed";
            parameters.push(format!("n = {n}"));
            let sets: Vec<HfSet> = (0..=*n).map(HfSet::numeral).collect();
            let x = ctx.universe_mut().hat(&sets[*n]);
            let zero = ctx.universe_mut().hat(&sets[0]);
            let succ: Vec<NameId> = (1..=*n).map(|k| ctx.universe_mut().hat(&sets[k])).collect();
            let mut rows = vec![("∅ ∈ x".to_string(), ctx.membership(zero, x)?)];
            for (k, &s) in succ.iter().enumerate() {
                rows.push((format!("{k}⁺ ∈ x"), ctx.membership(s, x)?));
            }
            let mut t = Tally::new(ctx);
            for (label, v) in rows {
                let mut r = t.relate(|| label.clone(), v, "=", top);
                r.label = label;
                conjuncts.push(r);
            }
            flush!(t);
        }
        Axiom::CollectionBounded { phi, candidate } => {
            exact = false;
            direction = "bounded variant: ∃z ranges over the fragment on the left and over the candidate's \
                         domain on the right; a fixed candidate replaces the rank bound";
            let fv = phi.free_vars();
            if fv.len() != 2 || !fv.contains("y") || !fv.contains("z") {
                return Err(ZfError::Precondition("collection needs φ(y, z) with free variables y and z".into()));
            }
            parameters.push(format!("φ = {}", ctx.show(phi)));
            let cand = match candidate {
                Some(c) => *c,
                None => {
                    let pairs: Vec<(NameId, Elem)> = snapshot.iter().map(|&z| (z, top)).collect();
                    let c = ctx.universe_mut().make_name(&pairs)?;
                    witnesses.push(format!("collector over {} fragment names", snapshot.len()));
                    c
                }
            };
            parameters.push(format!("candidate = {}", t_name(ctx, cand)));
            let mut rows = Vec::new();
            for &u in &params {
                let mut lhs = top;
                let mut rhs = top;
                for (y, a) in ctx.universe().entries(u).to_vec() {
                    let at_y = phi.subst("y", &Term::Name(y));
                    let mut some = alg.least();
                    for &z in &snapshot {
                        some = alg.join(some, ctx.eval_with(&at_y, "z", z)?);
                    }
                    lhs = alg.meet(lhs, alg.implies(a, some));
                    let bounded = Formula::ExistsIn("z".into(), Term::Name(cand), Box::new(at_y));
                    rhs = alg.meet(rhs, alg.implies(a, ctx.eval(&bounded)?));
                }
                rows.push((u, lhs, rhs));
            }
            let mut t = Tally::new(ctx);
            for (u, lhs, rhs) in rows {
                t.relate(|| format!("u={}: ∀y∈u∃zφ ≤ ∀y∈u∃z∈cφ", t_name(ctx, u)), lhs, "≤", rhs);
            }
            flush!(t);
        }
        Axiom::InductionInstance(phi) => {
            exact = false;
            direction = "fragment-relative: both unbounded ∀x range over the fragment";
            let var = single_free_var(phi)?;
            parameters.push(format!("φ = {}", ctx.show(phi)));
            let (x, y) = ("x", if var == "y" { "y1" } else { "y" });
            let at = |v: &str| phi.subst(&var, &Term::var(v));
            let step = Formula::imp(Formula::ForallIn(y.into(), Term::var(x), Box::new(at(y))), at(x));
            let f = Formula::imp(
                Formula::Forall(x.into(), Box::new(step)),
                Formula::Forall(x.into(), Box::new(at(x))),
            );
            let v = ctx.eval(&f)?;
            let mut t = Tally::new(ctx);
            t.relate(|| "∀x[(∀y∈x φ(y)) → φ(x)] → ∀x φ(x)".into(), v, "=", top);
            flush!(t);
        }
    }

    if opts.instances.is_some() {
        parameters.extend(params.iter().map(|&id| t_name(ctx, id)));
    }
    Ok(AxiomCheckReport {
        axiom: axiom.tag().to_string(),
        parameters,
        value: alg.name(tally_value).to_string(),
        holds: tally_value == top,
        exact,
        direction: direction.to_string(),
        witnesses,
        checked,
        conjuncts,
        failures,
    })
}

fn t_name(ctx: &EvalContext, id: NameId) -> String {
    ctx.universe().display(id)
}

fn single_free_var(phi: &Formula) -> Result<String, ZfError> {
    let fv = phi.free_vars();
    match (fv.len(), fv.into_iter().next()) {
        (1, Some(v)) => Ok(v),
        _ => Err(ZfError::Precondition(format!("`{phi}` must have exactly one free variable"))),
    }
}

// ---------------------------------------------------------------------------
// Mixtures and the maximum principle

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum MixingVerdict {
    /// Some a_i ∧ a_j exceeds ⟦u_i≈u_j⟧; nothing is claimed.
    HypothesisNotMet { i: usize, j: usize, meet: String, eq: String },
    Holds { mixture: String },
    Violated { i: usize, weight: String, eq: String },
}

/// If a_i ∧ a_j ≤ ⟦u_i≈u_j⟧ for all i, j, checks a_i ≤ ⟦u_i≈u⟧ for the
/// mixture u of the parts.
pub fn check_mixing_lemma(ctx: &mut EvalContext, parts: &[(Elem, NameId)]) -> Result<MixingVerdict, ZfError> {
    let alg = ctx.algebra().clone();
    for (i, &(a, u)) in parts.iter().enumerate() {
        for (j, &(b, v)) in parts.iter().enumerate() {
            let eq = ctx.equality(u, v)?;
            if !alg.leq(alg.meet(a, b), eq) {
                return Ok(MixingVerdict::HypothesisNotMet {
                    i,
                    j,
                    meet: alg.name(alg.meet(a, b)).into(),
                    eq: alg.name(eq).into(),
                });
            }
        }
    }
    let m = ctx.mixture(parts)?;
    for (i, &(a, u)) in parts.iter().enumerate() {
        let eq = ctx.equality(u, m)?;
        if !alg.leq(a, eq) {
            return Ok(MixingVerdict::Violated { i, weight: alg.name(a).into(), eq: alg.name(eq).into() });
        }
    }
    Ok(MixingVerdict::Holds { mixture: ctx.universe().structural(m) })
}

/// Builds u with ⟦ψ(u)⟧ = top from ⟦∃xψ(x)⟧ = top: each atom a of the
/// algebra picks a fragment x_a with a ≤ ⟦ψ(x_a)⟧, and u mixes the x_a.
pub fn maximum_principle_witness(ctx: &mut EvalContext, psi: &Formula) -> Result<NameId, ZfError> {
    let alg = ctx.algebra().clone();
    if !alg.is_boolean() {
        return Err(ZfError::NotBoolean);
    }
    let var = single_free_var(psi)?;
    let ids: Vec<NameId> = ctx.universe().ids().collect();
    let mut vals = Vec::with_capacity(ids.len());
    for &x in &ids {
        vals.push(ctx.eval_with(psi, &var, x)?);
    }
    let ex = alg.big_join(vals.iter().copied())?;
    if ex != alg.top() {
        return Err(ZfError::HypothesisNotMet(format!("⟦∃x ψ(x)⟧ = {}", alg.name(ex))));
    }
    let atoms = alg.antichain_refinement(&vals)?;
    let parts: Vec<(Elem, NameId)> = atoms
        .iter()
        .map(|&a| {
            let k = vals.iter().position(|&b| alg.leq(a, b)).expect("atoms lie below some value");
            (a, ids[k])
        })
        .collect();
    let u = ctx.mixture(&parts)?;
    let got = ctx.eval_with(psi, &var, u)?;
    if got != alg.top() {
        return Err(ZfError::WitnessFailed { value: alg.name(got).into() });
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// Cores over 2

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Core {
    pub owner: NameId,
    pub members: Vec<NameId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoreCheck {
    /// ⟦x∈owner⟧ = 1 for every member.
    pub members_belong: bool,
    /// Every y with ⟦y∈owner⟧ = 1 equals exactly one member.
    pub unique: bool,
    /// ∀x ∃y∈core ⟦x≈y⟧ = ⟦x∈owner⟧; `None` for an empty core.
    pub corollary: Option<bool>,
    pub failures: Vec<String>,
}

impl CoreCheck {
    pub fn passed(&self) -> bool {
        self.members_belong && self.unique && self.corollary != Some(false)
    }
}

/// Groups fragment members of `u` by a_x = ⟨u(z) ∧ ⟦z≈x⟧⟩_{z∈dom u} and
/// keeps the least id of each class.
pub fn compute_core(ctx: &mut EvalContext, u: NameId) -> Result<Core, ZfError> {
    if ctx.rules() != RuleSet::BV2 {
        return Err(ZfError::WrongRuleSet(RuleSet::BV2));
    }
    let alg = ctx.algebra().clone();
    let entries = ctx.universe().entries(u).to_vec();
    let ids: Vec<NameId> = ctx.universe().ids().collect();
    let mut classes: BTreeMap<Vec<Elem>, NameId> = BTreeMap::new();
    for x in ids {
        if ctx.membership(x, u)? != alg.top() {
            continue;
        }
        let mut fp = Vec::with_capacity(entries.len());
        for &(z, a) in &entries {
            fp.push(alg.meet(a, ctx.equality(z, x)?));
        }
        classes.entry(fp).or_insert(x);
    }
    let mut members: Vec<NameId> = classes.into_values().collect();
    members.sort();
    Ok(Core { owner: u, members })
}

pub fn check_core(ctx: &mut EvalContext, core: &Core) -> Result<CoreCheck, ZfError> {
    let top = ctx.algebra().top();
    let u = core.owner;
    let ids: Vec<NameId> = ctx.universe().ids().collect();
    let mut failures = Vec::new();
    let mut members_belong = true;
    for &x in &core.members {
        if ctx.membership(x, u)? != top {
            members_belong = false;
            failures.push(format!("{} ∉ {}", t_name(ctx, x), t_name(ctx, u)));
        }
    }
    let mut unique = true;
    for &y in &ids {
        if ctx.membership(y, u)? != top {
            continue;
        }
        let mut n = 0;
        for &x in &core.members {
            n += usize::from(ctx.equality(x, y)? == top);
        }
        if n != 1 {
            unique = false;
            failures.push(format!("{} equals {n} core members", t_name(ctx, y)));
        }
    }
    let corollary = if core.members.is_empty() {
        None
    } else {
        let mut ok = true;
        for &x in &ids {
            let target = ctx.membership(x, u)?;
            let mut found = false;
            for &y in &core.members {
                if ctx.equality(x, y)? == target {
                    found = true;
                    break;
                }
            }
            if !found {
                ok = false;
                failures.push(format!("no core y with ⟦{}≈y⟧ = {}", t_name(ctx, x), ctx.name(target)));
            }
        }
        Some(ok)
    };
    failures.truncate(MAX_FAILURES);
    Ok(CoreCheck { members_belong, unique, corollary, failures })
}

// ---------------------------------------------------------------------------
// Paraconsistency and the three-element counterexample

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParaconsistencyReport {
    pub rules: String,
    pub policy: String,
    pub alpha: String,
    pub alpha_value: String,
    /// `None` when the rule set has no negation.
    pub not_alpha_value: Option<String>,
    pub beta: String,
    pub beta_value: String,
    /// ⟦α⟧ = ⟦¬α⟧ = top.
    pub contradiction: bool,
    /// ⟦α ∧ ¬α⟧ ≤ ⟦β⟧.
    pub explosive: bool,
    pub leibniz: Option<LeibnizReport>,
    pub extra: Vec<(String, String)>,
    pub note: String,
}

impl ParaconsistencyReport {
    /// A true contradiction next to a false sentence, with Leibniz intact.
    pub fn non_explosive(&self) -> bool {
        self.contradiction && !self.explosive && self.leibniz.as_ref().is_some_and(LeibnizReport::passed)
    }
}

/// α := u≈u, β := u∈∅̂.
pub fn demo_paraconsistency(ctx: &mut EvalContext, u: NameId) -> Result<ParaconsistencyReport, ZfError> {
    let alg = ctx.algebra().clone();
    let e = ctx.universe_mut().empty();
    let alpha = Formula::eq(Term::Name(u), Term::Name(u));
    let beta = Formula::mem(Term::Name(u), Term::Name(e));
    let a = ctx.eval(&alpha)?;
    let b = ctx.eval(&beta)?;
    let mut report = ParaconsistencyReport {
        rules: ctx.rules().to_string(),
        policy: ctx.policy().name().to_string(),
        alpha: ctx.show(&alpha),
        alpha_value: alg.name(a).into(),
        not_alpha_value: None,
        beta: ctx.show(&beta),
        beta_value: alg.name(b).into(),
        contradiction: false,
        explosive: true,
        leibniz: None,
        extra: Vec::new(),
        note: String::new(),
    };
    let not_alpha = Formula::not(alpha.clone());
    match ctx.eval(&not_alpha) {
        Ok(na) => {
            report.not_alpha_value = Some(alg.name(na).into());
            report.contradiction = a == alg.top() && na == alg.top();
            report.explosive = alg.leq(alg.meet(a, na), b);
            let audited = Formula::and(not_alpha, Formula::not(beta));
            report.leibniz = Some(ctx.audit_sentence(&audited)?);
            report.note = if report.contradiction && !report.explosive {
                "α and ¬α both hold while β fails: the model is not explosive".into()
            } else {
                "no contradiction exhibited".into()
            };
        }
        Err(EvalError::NegationUnavailable(r)) => {
            report.note = format!("{r} has no negation clause: classical/intuitionistic negation unavailable (control case)");
        }
        Err(other) => return Err(other.into()),
    }
    Ok(report)
}

/// The saturated N4 structure over H3 with w = ∅, u = {⟨w,½⟩}, v = {⟨w,1⟩}.
pub fn n3_fragment() -> Result<(FidelStructure, Universe, [NameId; 3]), ZfError> {
    let s = FidelStructure::saturate(Arc::new(builtin::h3()), FidelKind::N4)?;
    let (un, ids) = h3_names(s.algebra().clone())?;
    Ok((s, un, ids))
}

fn h3_names(alg: Arc<crate::algebra::Algebra>) -> Result<(Universe, [NameId; 3]), ZfError> {
    let mut un = Universe::new(alg);
    let w = un.empty();
    let u = un.make_name_named(&[(w, "1/2")])?;
    let v = un.make_name_named(&[(w, "1")])?;
    for (l, id) in [("w", w), ("u", u), ("v", v)] {
        un.bind(l, id)?;
    }
    Ok((un, [w, u, v]))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeibnizRepro {
    pub eq_uv: String,
    pub psi_u: String,
    pub psi_v: String,
    pub neg_psi_u: String,
    pub neg_psi_v: String,
    /// ⟦¬ψ(u)⟧ → ⟦¬ψ(v)⟧.
    pub implication: String,
    pub violated: bool,
    pub violation: Option<LeibnizViolation>,
    /// The same names under the swap policy on the saturated structure.
    pub swap_neg_psi_u: String,
    pub swap_neg_psi_v: String,
    pub swap_audit_passes: bool,
}

/// ψ(x) := w∈x over H3 with its negation table, then under the swap policy.
pub fn h3_leibniz() -> Result<LeibnizRepro, ZfError> {
    let alg = Arc::new(builtin::h3());
    let (un, [w, u, v]) = h3_names(alg.clone())?;
    let mut ctx = EvalContext::new(Frame::Bare(alg.clone()), un, RuleSet::HV, NegationPolicy::Unary)?;
    let psi = Formula::mem(Term::Name(w), Term::var("x"));
    let neg = Formula::not(psi.clone());
    let name = |e: Elem| alg.name(e).to_string();
    let eq_uv = ctx.equality(u, v)?;
    let (pu, pv) = (ctx.eval_with(&psi, "x", u)?, ctx.eval_with(&psi, "x", v)?);
    let (nu, nv) = (ctx.eval_with(&neg, "x", u)?, ctx.eval_with(&neg, "x", v)?);
    let implication = alg.implies(nu, nv);
    let audit = ctx.check_leibniz(std::slice::from_ref(&neg))?;
    let violation = audit.violations.into_iter().find(|x| x.u == "u" && x.v == "v");

    let (s, un, [_, su, sv]) = n3_fragment()?;
    let mut swap = EvalContext::new(Frame::Fidel(s), un, RuleSet::N4, NegationPolicy::Swap(vec![(su, sv)]))?;
    let (snu, snv) = (swap.eval_with(&neg, "x", su)?, swap.eval_with(&neg, "x", sv)?);
    let swap_audit = swap.check_leibniz(&[neg])?;

    Ok(LeibnizRepro {
        eq_uv: name(eq_uv),
        psi_u: name(pu),
        psi_v: name(pv),
        neg_psi_u: name(nu),
        neg_psi_v: name(nv),
        implication: name(implication),
        violated: !alg.leq(eq_uv, implication),
        violation,
        swap_neg_psi_u: name(snu),
        swap_neg_psi_v: name(snv),
        swap_audit_passes: swap_audit.passed(),
    })
}

/// The standard demonstration for a rule set: BV2 over **2** with the
/// constant-top policy, N4 over the saturated H3 structure with the swap
/// policy, or the HV control over **2**.
pub fn standard_demo(rules: RuleSet) -> Result<ParaconsistencyReport, ZfError> {
    match rules {
        RuleSet::BV2 | RuleSet::HV => {
            let two = Arc::new(builtin::two());
            let mut un = Universe::new(two.clone());
            let e = un.empty();
            let u = un.hat(&HfSet::numeral(1));
            un.bind("0", e)?;
            un.bind("u", u)?;
            let mut ctx = EvalContext::with_default_policy(Frame::Bare(two), un, rules)?;
            demo_paraconsistency(&mut ctx, u)
        }
        RuleSet::N4 => {
            let (s, un, [w, u, v]) = n3_fragment()?;
            let n_half = {
                let half = s.algebra().elem("1/2").expect("H3 has 1/2");
                s.n_set(half).contains(half)
            };
            let mut ctx = EvalContext::new(Frame::Fidel(s), un, RuleSet::N4, NegationPolicy::Swap(vec![(u, v)]))?;
            let mut report = demo_paraconsistency(&mut ctx, u)?;
            let psi = Formula::mem(Term::Name(w), Term::var("x"));
            let neg = Formula::not(psi.clone());
            for (label, f, id) in [("ψ(u)", &psi, u), ("ψ(v)", &psi, v), ("¬ψ(u)", &neg, u), ("¬ψ(v)", &neg, v)] {
                let val = ctx.eval_with(f, "x", id)?;
                report.extra.push((label.to_string(), ctx.name(val).to_string()));
            }
            report.extra.push(("½ ∈ N_½ (¬ψ(u) = ½ admissible)".into(), n_half.to_string()));
            Ok(report)
        }
        other => Err(ZfError::Precondition(format!("no standard demonstration for {other}"))),
    }
}
