// SPDX-License-Identifier: Apache-2.0

//! Propositional layer: Hilbert schemas and derivation checking, valuations
//! into Fidel structures, and bivaluations, with exhaustive search.
//!
//! Validity search runs over the subformula closure of the query. A closure
//! is compiled into a [`Plan`]: a topologically ordered list of nodes, each
//! either free (chosen by the search, subject to local constraints) or
//! forced by earlier nodes.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{distributive_lattices, Algebra, Elem};
use crate::fidel::{candidate_count, enumerate_structures, FidelError, FidelKind, FidelStructure, VerifyOptions};
use crate::formula::Formula;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PropError {
    #[error("algebra size {requested} exceeds the cap {cap}")]
    SizeCapExceeded { requested: usize, cap: usize },
    #[error("step {step}: {reason}")]
    BadJustification { step: usize, reason: String },
    #[error("`{0}` is not propositional")]
    NotPropositional(String),
    #[error("{0} has no structure semantics")]
    UnsupportedLogic(Logic),
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
    #[error("bad justification `{0}` (expected premise, an axiom tag, or MP i,j)")]
    BadJustificationSyntax(String),
    #[error(transparent)]
    Fidel(#[from] FidelError),
}

// ---------------------------------------------------------------------------
// Logics and schemas

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Logic {
    N4,
    N3,
    COmega,
    C1,
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Logic::N4 => "N4",
            Logic::N3 => "N3",
            Logic::COmega => "Cω",
            Logic::C1 => "C1",
        })
    }
}

impl FromStr for Logic {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "n4" => Ok(Logic::N4),
            "n3" => Ok(Logic::N3),
            "comega" | "cw" | "cω" => Ok(Logic::COmega),
            "c1" => Ok(Logic::C1),
            _ => Err(format!("unknown logic `{s}` (expected n4, n3, comega or c1)")),
        }
    }
}

const POSITIVE: [&str; 8] = ["Ax1", "Ax2", "Ax3", "Ax4", "Ax5", "Ax6", "Ax7", "Ax8"];

impl Logic {
    /// Axiom tags of the logic's Hilbert calculus.
    pub fn axioms(self) -> Vec<&'static str> {
        let mut v = POSITIVE.to_vec();
        match self {
            Logic::N4 => v.extend(["PN1", "PN2", "PN3", "PN4"]),
            Logic::N3 => v.extend(["PN1", "PN2", "PN3", "PN4", "N3-EXP"]),
            Logic::COmega => v.extend(["C1", "C2"]),
            Logic::C1 => v.extend(["C1", "C2", "C3", "C4", "C5"]),
        }
        v
    }

    pub fn kind(self) -> Option<FidelKind> {
        match self {
            Logic::N4 => Some(FidelKind::N4),
            Logic::COmega => Some(FidelKind::COmega),
            Logic::C1 => Some(FidelKind::C1),
            Logic::N3 => None,
        }
    }

    /// Whether `o` is primitive; otherwise it abbreviates `~(a & ~a)`.
    pub fn circ_primitive(self) -> bool {
        self == Logic::C1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    pub id: &'static str,
    /// Pattern over the metavariables `A`, `B`, `C`.
    pub pattern: Formula,
}

const SCHEMAS: [(&str, &str); 18] = [
    ("Ax1", "A -> (B -> A)"),
    ("Ax2", "(A -> (B -> C)) -> ((A -> B) -> (A -> C))"),
    ("Ax3", "A & B -> A"),
    ("Ax4", "A & B -> B"),
    ("Ax5", "A -> (B -> A & B)"),
    ("Ax6", "A -> A | B"),
    ("Ax7", "B -> A | B"),
    ("Ax8", "(A -> C) -> ((B -> C) -> (A | B -> C))"),
    ("PN1", "~~A <-> A"),
    ("PN2", "~(A | B) <-> ~A & ~B"),
    ("PN3", "~(A & B) <-> ~A | ~B"),
    ("PN4", "~(A -> B) <-> A & ~B"),
    ("N3-EXP", "A -> (~A -> B)"),
    ("C1", "A | ~A"),
    ("C2", "~~A -> A"),
    ("C3", "A | (A -> B)"),
    ("C4", "o A -> (A -> (~A -> B))"),
    ("C5", "(o A & o B) -> (o (A & B) & o (A | B) & o (A -> B))"),
];

/// Every shipped schema.
pub fn schemas() -> &'static [Schema] {
    static CELL: OnceLock<Vec<Schema>> = OnceLock::new();
    CELL.get_or_init(|| {
        SCHEMAS
            .iter()
            .map(|&(id, src)| Schema { id, pattern: Formula::parse(src).expect("schema source parses") })
            .collect()
    })
}

pub fn schema(id: &str) -> Option<&'static Schema> {
    schemas().iter().find(|s| s.id.eq_ignore_ascii_case(id))
}

/// Syntactic matching: every propositional variable of the pattern is a
/// metavariable.
pub fn match_schema(f: &Formula, s: &Schema) -> Option<HashMap<String, Formula>> {
    let mut sub = HashMap::new();
    matches(&s.pattern, f, &mut sub).then_some(sub)
}

fn matches(pat: &Formula, f: &Formula, sub: &mut HashMap<String, Formula>) -> bool {
    use Formula::*;
    match (pat, f) {
        (Prop(m), _) => match sub.get(m) {
            Some(bound) => bound == f,
            None => {
                sub.insert(m.clone(), f.clone());
                true
            }
        },
        (And(a, b), And(c, d)) | (Or(a, b), Or(c, d)) | (Imp(a, b), Imp(c, d)) => {
            matches(a, c, sub) && matches(b, d, sub)
        }
        (Not(a), Not(c)) | (Circ(a), Circ(c)) => matches(a, c, sub),
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Derivations

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Premise,
    Axiom(String),
    /// `MP(i, j)`: step `i` is `step_j -> current` (1-indexed).
    MP(usize, usize),
}

impl FromStr for Justification {
    type Err = PropError;
    fn from_str(s: &str) -> Result<Self, PropError> {
        let t = s.trim();
        let bad = || PropError::BadJustificationSyntax(s.to_string());
        if t.eq_ignore_ascii_case("premise") || t.eq_ignore_ascii_case("hyp") {
            return Ok(Justification::Premise);
        }
        if let Some(rest) = t.strip_prefix("MP").or_else(|| t.strip_prefix("mp")) {
            let inner = rest.trim().trim_start_matches('(').trim_end_matches(')');
            let mut it = inner.split(',').map(|x| x.trim().parse::<usize>());
            return match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => Ok(Justification::MP(i, j)),
                _ => Err(bad()),
            };
        }
        let tag = t.strip_prefix("axiom").map(str::trim).unwrap_or(t);
        match schema(tag) {
            Some(s) => Ok(Justification::Axiom(s.id.to_string())),
            None => Err(bad()),
        }
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Premise => f.write_str("premise"),
            Justification::Axiom(id) => f.write_str(id),
            Justification::MP(i, j) => write!(f, "MP {i},{j}"),
        }
    }
}

/// Checks a Hilbert derivation in `logic`. Step numbers in errors are 1-indexed.
pub fn check_derivation(
    logic: Logic,
    premises: &[Formula],
    steps: &[(Formula, Justification)],
) -> Result<(), PropError> {
    let allowed = logic.axioms();
    for (k, (f, just)) in steps.iter().enumerate() {
        let step = k + 1;
        let bad = |reason: String| PropError::BadJustification { step, reason };
        match just {
            Justification::Premise => {
                if !premises.contains(f) {
                    return Err(bad(format!("{f} is not a premise")));
                }
            }
            Justification::Axiom(id) => {
                let s = schema(id).ok_or_else(|| PropError::UnknownSchema(id.clone()))?;
                if !allowed.contains(&s.id) {
                    return Err(bad(format!("{} is not an axiom of {logic}", s.id)));
                }
                if match_schema(f, s).is_none() {
                    return Err(bad(format!("{f} is not an instance of {}", s.id)));
                }
            }
            Justification::MP(i, j) => {
                let earlier = |n: usize| -> Result<&Formula, PropError> {
                    if n == 0 || n >= step {
                        Err(bad(format!("MP cites step {n}, which is not an earlier step")))
                    } else {
                        Ok(&steps[n - 1].0)
                    }
                };
                let (imp, a) = (earlier(*i)?, earlier(*j)?);
                let expected = Formula::imp(a.clone(), f.clone());
                if *imp != expected {
                    return Err(bad(format!("step {i} is not `{expected}`")));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Closure plans

#[derive(Clone, Debug, PartialEq, Eq)]
enum Op {
    Free,
    Meet(usize, usize),
    Join(usize, usize),
    Imp(usize, usize),
    Copy(usize),
    /// Negation chosen by the search. `double` is the index of `b` when the
    /// node is `~~b`. `em` demands `arg ∨ value = top`.
    Neg { arg: usize, double: Option<usize>, em: bool },
    /// `o a`: `neg` is the node of `~a`; `parts` is `(a, o x, o y)` for
    /// a binary `a = x # y`.
    Circ { arg: usize, neg: usize, parts: Option<(usize, usize, usize)> },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Sem {
    /// N4: negation pushed to atoms.
    Nelson,
    /// C1 / Cω valuations and bivaluations.
    DaCosta,
}

#[derive(Clone, Debug)]
struct Plan {
    nodes: Vec<(Formula, Op)>,
    index: HashMap<Formula, usize>,
}

impl Plan {
    fn build(sem: Sem, fs: &[Formula]) -> Result<Plan, PropError> {
        let mut p = Plan { nodes: Vec::new(), index: HashMap::new() };
        for f in fs {
            if !f.is_propositional() {
                return Err(PropError::NotPropositional(f.to_string()));
            }
            p.add(sem, f);
        }
        Ok(p)
    }

    fn add(&mut self, sem: Sem, f: &Formula) -> usize {
        if let Some(&i) = self.index.get(f) {
            return i;
        }
        use Formula::*;
        let op = match f {
            Prop(_) => Op::Free,
            And(a, b) => Op::Meet(self.add(sem, a), self.add(sem, b)),
            Or(a, b) => Op::Join(self.add(sem, a), self.add(sem, b)),
            Imp(a, b) => Op::Imp(self.add(sem, a), self.add(sem, b)),
            Not(g) => match (sem, &**g) {
                (Sem::Nelson, Not(h)) => Op::Copy(self.add(sem, h)),
                (Sem::Nelson, And(a, b)) => {
                    Op::Join(self.add(sem, &Formula::not((**a).clone())), self.add(sem, &Formula::not((**b).clone())))
                }
                (Sem::Nelson, Or(a, b)) => {
                    Op::Meet(self.add(sem, &Formula::not((**a).clone())), self.add(sem, &Formula::not((**b).clone())))
                }
                (Sem::Nelson, Imp(a, b)) => Op::Meet(self.add(sem, a), self.add(sem, &Formula::not((**b).clone()))),
                (Sem::Nelson, _) => Op::Neg { arg: self.add(sem, g), double: None, em: false },
                (Sem::DaCosta, _) => {
                    let arg = self.add(sem, g);
                    let double = match &**g {
                        Not(h) => Some(self.add(sem, h)),
                        _ => None,
                    };
                    Op::Neg { arg, double, em: true }
                }
            },
            Circ(g) => {
                let arg = self.add(sem, g);
                let neg = self.add(sem, &Formula::not((**g).clone()));
                let parts = match &**g {
                    And(x, y) | Or(x, y) | Imp(x, y) => Some((
                        arg,
                        self.add(sem, &Formula::circ((**x).clone())),
                        self.add(sem, &Formula::circ((**y).clone())),
                    )),
                    _ => None,
                };
                Op::Circ { arg, neg, parts }
            }
            _ => unreachable!("checked propositional"),
        };
        let i = self.nodes.len();
        self.nodes.push((f.clone(), op));
        self.index.insert(f.clone(), i);
        i
    }

    fn idx(&self, f: &Formula) -> usize {
        self.index[f]
    }
}

fn prepare(logic: Logic, f: &Formula) -> Formula {
    if logic.circ_primitive() {
        f.clone()
    } else {
        f.expand_circ()
    }
}

// ---------------------------------------------------------------------------
// Algebraic valuations

/// An admissible valuation on the closure of a query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropValuation {
    /// `(formula, element)` for every closure node, in evaluation order.
    pub values: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Countermodel {
    pub structure: String,
    pub valuation: PropValuation,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageEntry {
    pub algebra: String,
    pub size: usize,
    /// `all-structures` or `saturated-dominance`.
    pub mode: &'static str,
    pub structures: usize,
    pub valuations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub logic: Logic,
    pub formula: String,
    pub max_size: usize,
    pub countermodel: Option<Countermodel>,
    pub coverage: Vec<CoverageEntry>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.countermodel.is_none()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ValidityOptions {
    pub max_size: usize,
    /// Largest `max_size` accepted.
    pub size_cap: usize,
    /// Above this many candidate families per algebra, only the saturated
    /// structure is checked; it dominates every other structure.
    pub structure_budget: u128,
    pub parallel: bool,
}

/// Largest algebra the lattice enumerator supports.
pub const HARD_SIZE_CAP: usize = 6;

impl Default for ValidityOptions {
    fn default() -> Self {
        ValidityOptions { max_size: 4, size_cap: 4, structure_budget: 100_000, parallel: true }
    }
}

impl ValidityOptions {
    pub fn with_max_size(max_size: usize) -> Self {
        ValidityOptions { max_size, ..Default::default() }
    }
}

/// Algebras of the logic's kind with at most `max_size` elements.
pub fn algebras_for(logic: Logic, max_size: usize) -> Vec<Algebra> {
    (1..=max_size.min(HARD_SIZE_CAP))
        .flat_map(distributive_lattices)
        .filter(|a| logic == Logic::N4 || a.is_boolean())
        .collect()
}

/// Is `f` true under every admissible valuation into every structure of the
/// logic's kind with at most `opts.max_size` elements?
pub fn prop_validity(f: &Formula, logic: Logic, opts: ValidityOptions) -> Result<ValidityReport, PropError> {
    let cap = opts.size_cap.min(HARD_SIZE_CAP);
    if opts.max_size > cap {
        return Err(PropError::SizeCapExceeded { requested: opts.max_size, cap });
    }
    let kind = logic.kind().ok_or(PropError::UnsupportedLogic(logic))?;
    let target = prepare(logic, f);
    let sem = if logic == Logic::N4 { Sem::Nelson } else { Sem::DaCosta };
    let plan = Plan::build(sem, std::slice::from_ref(&target))?;
    let mut coverage = Vec::new();
    let mut countermodel = None;
    for alg in algebras_for(logic, opts.max_size) {
        let alg = Arc::new(alg);
        let (structures, mode) = if candidate_count(&alg, kind) <= opts.structure_budget {
            (enumerate_structures(&alg, kind, VerifyOptions::default(), opts.structure_budget)?, "all-structures")
        } else {
            (vec![FidelStructure::saturate(alg.clone(), kind)?], "saturated-dominance")
        };
        let run = |s: &FidelStructure| search_structure(&plan, s, &target);
        let results: Vec<(u64, Option<Countermodel>)> =
            if opts.parallel { structures.par_iter().map(run).collect() } else { structures.iter().map(run).collect() };
        coverage.push(CoverageEntry {
            algebra: alg.to_string(),
            size: alg.size(),
            mode,
            structures: structures.len(),
            valuations: results.iter().map(|r| r.0).sum(),
        });
        if let Some(cm) = results.into_iter().find_map(|r| r.1) {
            countermodel = Some(cm);
            break;
        }
    }
    Ok(ValidityReport { logic, formula: f.to_string(), max_size: opts.max_size, countermodel, coverage })
}

/// Searches one structure; returns the number of admissible valuations seen
/// and the first countermodel.
fn search_structure(plan: &Plan, s: &FidelStructure, target: &Formula) -> (u64, Option<Countermodel>) {
    let t = plan.idx(target);
    let top = s.algebra().top();
    let mut count = 0u64;
    let mut found = None;
    let mut vals = vec![Elem(0); plan.nodes.len()];
    for_each_valuation(plan, s, &mut vals, 0, &mut |vals| {
        count += 1;
        if vals[t] != top {
            found = Some(Countermodel {
                structure: s.describe(),
                valuation: render(plan, s.algebra(), vals),
                value: s.algebra().name(vals[t]).to_string(),
            });
            return false;
        }
        true
    });
    (count, found)
}

fn render(plan: &Plan, alg: &Algebra, vals: &[Elem]) -> PropValuation {
    PropValuation {
        values: plan.nodes.iter().zip(vals).map(|((f, _), &v)| (f.to_string(), alg.name(v).to_string())).collect(),
    }
}

/// Depth-first enumeration of admissible valuations. `visit` returns false to stop.
fn for_each_valuation(
    plan: &Plan,
    s: &FidelStructure,
    vals: &mut Vec<Elem>,
    i: usize,
    visit: &mut dyn FnMut(&[Elem]) -> bool,
) -> bool {
    if i == plan.nodes.len() {
        return visit(vals);
    }
    let alg = s.algebra();
    let forced = match plan.nodes[i].1 {
        Op::Meet(a, b) => Some(alg.meet(vals[a], vals[b])),
        Op::Join(a, b) => Some(alg.join(vals[a], vals[b])),
        Op::Imp(a, b) => Some(alg.implies(vals[a], vals[b])),
        Op::Copy(a) => Some(vals[a]),
        _ => None,
    };
    if let Some(v) = forced {
        vals[i] = v;
        return for_each_valuation(plan, s, vals, i + 1, visit);
    }
    for c in alg.elements() {
        let ok = match plan.nodes[i].1 {
            Op::Free => true,
            Op::Neg { arg, double, em } => {
                let x = vals[arg];
                s.n_set(x).contains(c)
                    && (!em || alg.join(x, c) == alg.top())
                    && double.is_none_or(|b| alg.leq(c, vals[b]))
            }
            Op::Circ { arg, neg, parts } => {
                let x = vals[arg];
                s.o_set(x).contains(c)
                    && alg.meet(alg.meet(x, vals[neg]), c) == alg.least()
                    && parts.is_none_or(|(_, ca, cb)| alg.leq(alg.meet(vals[ca], vals[cb]), c))
            }
            _ => unreachable!(),
        };
        if ok {
            vals[i] = c;
            if !for_each_valuation(plan, s, vals, i + 1, visit) {
                return false;
            }
        }
    }
    true
}

/// Every admissible valuation of `f`'s closure over one structure.
pub fn valuations(f: &Formula, logic: Logic, s: &FidelStructure) -> Result<Vec<PropValuation>, PropError> {
    let target = prepare(logic, f);
    let sem = if logic == Logic::N4 { Sem::Nelson } else { Sem::DaCosta };
    let plan = Plan::build(sem, std::slice::from_ref(&target))?;
    let mut out = Vec::new();
    let mut vals = vec![Elem(0); plan.nodes.len()];
    for_each_valuation(&plan, s, &mut vals, 0, &mut |v| {
        out.push(render(&plan, s.algebra(), v));
        true
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Bivaluations

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bivaluation {
    pub assignment: Vec<(String, bool)>,
}

impl Bivaluation {
    pub fn get(&self, f: &str) -> Option<bool> {
        self.assignment.iter().find(|(g, _)| g == f).map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsequenceReport {
    pub premises: Vec<String>,
    pub conclusion: String,
    pub countervaluation: Option<Bivaluation>,
    pub bivaluations: u64,
}

impl ConsequenceReport {
    pub fn is_valid(&self) -> bool {
        self.countervaluation.is_none()
    }
}

/// Does every bivaluation making all of `gamma` true make `f` true?
pub fn bivaluation_consequence(gamma: &[Formula], f: &Formula) -> Result<ConsequenceReport, PropError> {
    let mut all = gamma.to_vec();
    all.push(f.clone());
    let plan = Plan::build(Sem::DaCosta, &all)?;
    let hyps: Vec<usize> = gamma.iter().map(|g| plan.idx(g)).collect();
    let t = plan.idx(f);
    let mut count = 0u64;
    let mut found = None;
    for_each_bivaluation(&plan, &mut vec![false; plan.nodes.len()], 0, &mut |v| {
        count += 1;
        if hyps.iter().all(|&h| v[h]) && !v[t] {
            found = Some(Bivaluation {
                assignment: plan.nodes.iter().zip(v).map(|((g, _), &b)| (g.to_string(), b)).collect(),
            });
            return false;
        }
        true
    });
    Ok(ConsequenceReport {
        premises: gamma.iter().map(Formula::to_string).collect(),
        conclusion: f.to_string(),
        countervaluation: found,
        bivaluations: count,
    })
}

/// Every bivaluation on the closure of `fs`.
pub fn bivaluations(fs: &[Formula]) -> Result<Vec<Bivaluation>, PropError> {
    let plan = Plan::build(Sem::DaCosta, fs)?;
    let mut out = Vec::new();
    for_each_bivaluation(&plan, &mut vec![false; plan.nodes.len()], 0, &mut |v| {
        out.push(Bivaluation { assignment: plan.nodes.iter().zip(v).map(|((g, _), &b)| (g.to_string(), b)).collect() });
        true
    });
    Ok(out)
}

fn for_each_bivaluation(plan: &Plan, v: &mut Vec<bool>, i: usize, visit: &mut dyn FnMut(&[bool]) -> bool) -> bool {
    if i == plan.nodes.len() {
        return visit(v);
    }
    let forced = match plan.nodes[i].1 {
        // bv1-bv3
        Op::Meet(a, b) => Some(v[a] && v[b]),
        Op::Join(a, b) => Some(v[a] || v[b]),
        Op::Imp(a, b) => Some(!v[a] || v[b]),
        Op::Copy(a) => Some(v[a]),
        _ => None,
    };
    if let Some(b) = forced {
        v[i] = b;
        return for_each_bivaluation(plan, v, i + 1, visit);
    }
    for c in [false, true] {
        let ok = match plan.nodes[i].1 {
            Op::Free => true,
            // bv4, bv5a
            Op::Neg { arg, double, .. } => (v[arg] || c) && (!c || double.is_none_or(|b| v[b])),
            // bv5b (a.k.a. bv6), bv7
            Op::Circ { arg, neg, parts } => {
                (!c || !v[arg] || !v[neg]) && (c || parts.is_none_or(|(a, ca, cb)| !v[a] || !v[ca] || !v[cb]))
            }
            _ => unreachable!(),
        };
        if ok {
            v[i] = c;
            if !for_each_bivaluation(plan, v, i + 1, visit) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin::{diamond, h3, two};

    fn p(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn schema_matching() {
        let ax1 = schema("Ax1").unwrap();
        let sub = match_schema(&p("(p | q) -> ((r -> r) -> (p | q))"), ax1).unwrap();
        assert_eq!(sub["A"], p("p | q"));
        assert_eq!(sub["B"], p("r -> r"));
        assert_eq!(match_schema(&p("p | ~p"), schema("C1").unwrap()).unwrap()["A"], p("p"));
        assert!(match_schema(&p("p -> (~q -> r)"), schema("N3-EXP").unwrap()).is_none());
        assert!(match_schema(&p("(p | q) -> ((r -> r) -> (q | p))"), ax1).is_none());
        assert_eq!(schemas().len(), 18);
    }

    #[test]
    fn one_step_derivation() {
        let prem = [p("p")];
        let steps = vec![
            (p("p"), Justification::Premise),
            (p("p -> (q -> p)"), Justification::Axiom("Ax1".into())),
            (p("q -> p"), Justification::MP(2, 1)),
        ];
        assert_eq!(check_derivation(Logic::N4, &prem, &steps), Ok(()));
        let mut swapped = steps.clone();
        swapped[2].1 = Justification::MP(1, 2);
        assert!(matches!(
            check_derivation(Logic::N4, &prem, &swapped),
            Err(PropError::BadJustification { step: 3, .. })
        ));
    }

    #[test]
    fn identity_derivation() {
        let steps = vec![
            (p("(p -> ((p -> p) -> p)) -> ((p -> (p -> p)) -> (p -> p))"), "Ax2"),
            (p("p -> ((p -> p) -> p)"), "Ax1"),
            (p("(p -> (p -> p)) -> (p -> p)"), "MP 1,2"),
            (p("p -> (p -> p)"), "Ax1"),
            (p("p -> p"), "MP(3,4)"),
        ];
        let steps: Vec<_> = steps.into_iter().map(|(f, j)| (f, j.parse().unwrap())).collect();
        for logic in [Logic::N4, Logic::N3, Logic::COmega, Logic::C1] {
            assert_eq!(check_derivation(logic, &[], &steps), Ok(()));
        }
    }

    #[test]
    fn axioms_are_logic_specific() {
        let steps = vec![(p("p | ~p"), Justification::Axiom("C1".into()))];
        assert!(check_derivation(Logic::C1, &[], &steps).is_ok());
        assert!(check_derivation(Logic::N4, &[], &steps).is_err());
        assert!("frobnicate".parse::<Justification>().is_err());
    }

    fn valid(f: &str, logic: Logic, size: usize) -> bool {
        prop_validity(&p(f), logic, ValidityOptions::with_max_size(size)).unwrap().is_valid()
    }

    #[test]
    fn explosion_fails_in_n4() {
        let r = prop_validity(&p("a -> (~a -> b)"), Logic::N4, ValidityOptions::with_max_size(3)).unwrap();
        let cm = r.countermodel.expect("paraconsistent");
        assert_ne!(cm.value, "1");
    }

    #[test]
    fn identity_is_valid_everywhere() {
        for logic in [Logic::N4, Logic::COmega, Logic::C1] {
            assert!(valid("a -> a", logic, 4));
        }
    }

    #[test]
    fn positive_tautologies_need_not_hold_intuitionistically() {
        assert!(!valid("a | (a -> b)", Logic::N4, 3));
        assert!(valid("a | (a -> b)", Logic::C1, 4));
        assert!(!valid("~a -> (a -> b)", Logic::COmega, 4));
    }

    #[test]
    fn size_cap_is_enforced() {
        assert_eq!(
            prop_validity(&p("a"), Logic::N4, ValidityOptions::with_max_size(5)).unwrap_err(),
            PropError::SizeCapExceeded { requested: 5, cap: 4 }
        );
        assert!(matches!(
            prop_validity(&p("a"), Logic::N3, ValidityOptions::default()),
            Err(PropError::UnsupportedLogic(Logic::N3))
        ));
    }

    #[test]
    fn n4_compound_negations_are_forced() {
        // Oracle: push negation inward by hand and compare on every valuation.
        let s = FidelStructure::saturate(Arc::new(h3()), FidelKind::N4).unwrap();
        let f = p("~(a -> (b | ~c)) | ~~(a & ~b)");
        let pushed = p("(a & (~b & c)) | (a & ~b)");
        let g = Formula::and(Formula::imp(f.clone(), pushed.clone()), Formula::imp(pushed, f));
        for v in valuations(&g, Logic::N4, &s).unwrap() {
            assert_eq!(v.values.last().unwrap().1, "1");
        }
    }

    #[test]
    fn witness_reading_for_da_costa_negation() {
        let s = FidelStructure::saturate(Arc::new(diamond()), FidelKind::COmega).unwrap();
        for v in valuations(&p("~a"), Logic::COmega, &s).unwrap() {
            let (a, na) = (&v.values[0].1, &v.values[1].1);
            let alg = s.algebra();
            let (a, na) = (alg.elem(a).unwrap(), alg.elem(na).unwrap());
            assert_eq!(alg.join(a, na), alg.top());
        }
    }

    #[test]
    fn bivaluation_examples() {
        let r = bivaluation_consequence(&[p("p"), p("~p")], &p("q")).unwrap();
        let cv = r.countervaluation.expect("paraconsistent");
        assert_eq!((cv.get("p"), cv.get("~p"), cv.get("q")), (Some(true), Some(true), Some(false)));
        assert!(bivaluation_consequence(&[p("p"), p("~p"), p("o p")], &p("q")).unwrap().is_valid());
        assert!(bivaluation_consequence(&[], &p("p | ~p")).unwrap().is_valid());
        assert!(bivaluation_consequence(&[p("~~p")], &p("p")).unwrap().is_valid());
        assert!(!bivaluation_consequence(&[p("p")], &p("~~p")).unwrap().is_valid());
    }

    #[test]
    fn positive_bivaluations_are_homomorphisms() {
        let f = p("(a & b) -> (a | (b -> c))");
        let t = two();
        let (zero, one) = (t.least(), t.top());
        for bv in bivaluations(std::slice::from_ref(&f)).unwrap() {
            let atom = |x: &str| if bv.get(x).unwrap() { one } else { zero };
            let (a, b, c) = (atom("a"), atom("b"), atom("c"));
            let want = t.implies(t.meet(a, b), t.join(a, t.implies(b, c)));
            assert_eq!(bv.get(&f.to_string()).unwrap(), want == one);
        }
    }

    #[test]
    fn bivaluations_validate_c1_axioms() {
        for id in Logic::C1.axioms().into_iter().filter(|&id| id != "C5") {
            let f = &schema(id).unwrap().pattern;
            assert!(bivaluation_consequence(&[], f).unwrap().is_valid(), "{id}");
        }
        // bv7 as stated only propagates o through compounds whose left part is true.
        let c5 = bivaluation_consequence(&[], &schema("C5").unwrap().pattern).unwrap();
        assert_eq!(c5.countervaluation.unwrap().get("A"), Some(false));
        assert!(!bivaluation_consequence(&[], &schema("N3-EXP").unwrap().pattern).unwrap().is_valid());
    }
}
