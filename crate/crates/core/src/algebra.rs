// SPDX-License-Identifier: Apache-2.0

//! Finite distributive lattices with residuated implication.
//!
//! A single [`Algebra`] value covers the three classes used throughout the
//! crate: generalized Heyting algebras (top and residual, bottom not part of
//! the signature), Heyting algebras and Boolean algebras. Elements are dense
//! indices into tables; the string identifiers from input files are kept for
//! reporting only.
//!
//! Elements are stored in a canonical order (by the size of their principal
//! down-set, then by name), so the order of elements in an input file never
//! leaks into reports.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard limit on carrier size; element sets are `u64` bitmasks.
pub const MAX_ELEMENTS: usize = 64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Elem(pub u8);

impl Elem {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A subset of the carrier.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElemSet(pub u64);

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn full(n: usize) -> ElemSet {
        if n >= 64 {
            ElemSet(u64::MAX)
        } else {
            ElemSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(e: Elem) -> ElemSet {
        ElemSet(1u64 << e.0)
    }

    pub fn from_elems<I: IntoIterator<Item = Elem>>(it: I) -> ElemSet {
        it.into_iter().fold(ElemSet::EMPTY, |s, e| s.with(e))
    }

    pub fn with(self, e: Elem) -> ElemSet {
        ElemSet(self.0 | (1u64 << e.0))
    }

    pub fn contains(self, e: Elem) -> bool {
        self.0 >> e.0 & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: ElemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & other.0)
    }

    pub fn union(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Elem> {
        let bits = self.0;
        (0..64u8).filter(move |i| bits >> i & 1 == 1).map(Elem)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("algebra has no elements")]
    Empty,
    #[error("carrier has {0} elements; at most {MAX_ELEMENTS} are supported")]
    TooLarge(usize),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("order is not a partial order: {0}")]
    NotAPartialOrder(String),
    #[error("not a lattice: `{a}` and `{b}` have no {bound}")]
    NotALattice { a: String, b: String, bound: &'static str },
    #[error("lattice is not distributive at ({a}, {b}, {c})")]
    NotDistributive { a: String, b: String, c: String },
    #[error("no residual: {{z : {a} ∧ z ≤ {b}}} has no greatest element")]
    NoResidual { a: String, b: String },
    #[error("inconsistent `{table}` table at {at}: given `{given}`, derived `{derived}`")]
    InconsistentTables { table: &'static str, at: String, given: String, derived: String },
    #[error("missing order information: give `leq` or a `meet`/`join` table")]
    NoOrder,
    #[error("empty join in an algebra without bottom")]
    EmptyJoinNoBottom,
    #[error("operation needs a Boolean algebra")]
    NotBoolean,
    #[error("no antichain refines the given set with equal join")]
    NotRefinable,
}

/// How much structure the algebra carries.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    GeneralizedHeyting,
    Heyting,
    Boolean,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::GeneralizedHeyting => write!(f, "generalized Heyting"),
            Classification::Heyting => write!(f, "Heyting"),
            Classification::Boolean => write!(f, "Boolean"),
        }
    }
}

type Table2 = BTreeMap<String, BTreeMap<String, String>>;

/// Input/output record for algebra files.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub elements: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leq: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meet: Option<Table2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join: Option<Table2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implies: Option<Table2>,
    /// Extra unary operation, e.g. the ¬ column of a three-valued matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neg: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<String>,
    /// Drop bottom from the signature (generalized Heyting algebra).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub generalized: bool,
}

/// A validated finite distributive lattice with residual implication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    label: Option<String>,
    names: Vec<String>,
    /// `up[a]` is the set of `b` with `a ≤ b`.
    up: Vec<ElemSet>,
    meet: Vec<Elem>,
    join: Vec<Elem>,
    implies: Vec<Elem>,
    top: Elem,
    least: Elem,
    bottom_in_signature: bool,
    complement: Option<Vec<Elem>>,
    negation: Option<Vec<Elem>>,
}

impl Algebra {
    /// Validates a specification and derives every table.
    pub fn load(spec: &AlgebraSpec) -> Result<Algebra, AlgebraError> {
        let n = spec.elements.len();
        if n == 0 {
            return Err(AlgebraError::Empty);
        }
        if n > MAX_ELEMENTS {
            return Err(AlgebraError::TooLarge(n));
        }
        let mut raw_index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, e) in spec.elements.iter().enumerate() {
            if raw_index.insert(e.as_str(), i).is_some() {
                return Err(AlgebraError::DuplicateElement(e.clone()));
            }
        }
        let idx = |s: &str| -> Result<usize, AlgebraError> {
            raw_index.get(s).copied().ok_or_else(|| AlgebraError::UnknownElement(s.to_string()))
        };
        let table = |t: &Table2, a: usize, b: usize| -> Result<Option<usize>, AlgebraError> {
            match t.get(&spec.elements[a]).and_then(|row| row.get(&spec.elements[b])) {
                Some(v) => idx(v).map(Some),
                None => Ok(None),
            }
        };

        // Raw order relation in input indexing.
        let mut le = vec![vec![false; n]; n];
        if let Some(pairs) = &spec.leq {
            for i in 0..n {
                le[i][i] = true;
            }
            for (a, b) in pairs {
                le[idx(a)?][idx(b)?] = true;
            }
            // Accept a generating relation: close transitively.
            for k in 0..n {
                for i in 0..n {
                    if le[i][k] {
                        for j in 0..n {
                            if le[k][j] {
                                le[i][j] = true;
                            }
                        }
                    }
                }
            }
        } else if let Some(m) = &spec.meet {
            for a in 0..n {
                for b in 0..n {
                    le[a][b] = table(m, a, b)? == Some(a);
                }
            }
        } else if let Some(j) = &spec.join {
            for a in 0..n {
                for b in 0..n {
                    le[a][b] = table(j, a, b)? == Some(b);
                }
            }
        } else {
            return Err(AlgebraError::NoOrder);
        }
        for a in 0..n {
            if !le[a][a] {
                return Err(AlgebraError::NotAPartialOrder(format!(
                    "`{}` is not below itself",
                    spec.elements[a]
                )));
            }
            for b in 0..n {
                if a != b && le[a][b] && le[b][a] {
                    return Err(AlgebraError::NotAPartialOrder(format!(
                        "`{}` and `{}` are mutually below each other",
                        spec.elements[a], spec.elements[b]
                    )));
                }
                for c in 0..n {
                    if le[a][b] && le[b][c] && !le[a][c] {
                        return Err(AlgebraError::NotAPartialOrder("not transitive".into()));
                    }
                }
            }
        }

        // Canonical order: size of down-set, then name.
        let mut perm: Vec<usize> = (0..n).collect();
        let down = |a: usize| (0..n).filter(|&x| le[x][a]).count();
        perm.sort_by(|&a, &b| down(a).cmp(&down(b)).then(spec.elements[a].cmp(&spec.elements[b])));
        let names: Vec<String> = perm.iter().map(|&i| spec.elements[i].clone()).collect();
        let mut leq = vec![vec![false; n]; n];
        for (ca, &ra) in perm.iter().enumerate() {
            for (cb, &rb) in perm.iter().enumerate() {
                leq[ca][cb] = le[ra][rb];
            }
        }
        let mut to_canon = vec![0usize; n];
        for (c, &r) in perm.iter().enumerate() {
            to_canon[r] = c;
        }

        let bound = |a: usize, b: usize, lower: bool| -> Result<usize, AlgebraError> {
            let cands: Vec<usize> = (0..n)
                .filter(|&z| if lower { leq[z][a] && leq[z][b] } else { leq[a][z] && leq[b][z] })
                .collect();
            cands
                .iter()
                .copied()
                .find(|&z| cands.iter().all(|&w| if lower { leq[w][z] } else { leq[z][w] }))
                .ok_or_else(|| AlgebraError::NotALattice {
                    a: names[a].clone(),
                    b: names[b].clone(),
                    bound: if lower { "greatest lower bound" } else { "least upper bound" },
                })
        };
        let mut meet = vec![Elem(0); n * n];
        let mut join = vec![Elem(0); n * n];
        for a in 0..n {
            for b in 0..n {
                meet[a * n + b] = Elem(bound(a, b, true)? as u8);
                join[a * n + b] = Elem(bound(a, b, false)? as u8);
            }
        }
        let top = (0..n).find(|&t| (0..n).all(|x| leq[x][t])).expect("finite lattice has a top");
        let least = (0..n).find(|&t| (0..n).all(|x| leq[t][x])).expect("finite lattice has a bottom");

        let m = |a: usize, b: usize| meet[a * n + b].index();
        let j = |a: usize, b: usize| join[a * n + b].index();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if m(a, j(b, c)) != j(m(a, b), m(a, c)) {
                        return Err(AlgebraError::NotDistributive {
                            a: names[a].clone(),
                            b: names[b].clone(),
                            c: names[c].clone(),
                        });
                    }
                }
            }
        }

        // Residual: greatest z with a ∧ z ≤ b.
        let mut implies = vec![Elem(0); n * n];
        for a in 0..n {
            for b in 0..n {
                let cands: Vec<usize> = (0..n).filter(|&z| leq[m(a, z)][b]).collect();
                let g = cands
                    .iter()
                    .copied()
                    .find(|&z| cands.iter().all(|&w| leq[w][z]))
                    .ok_or_else(|| AlgebraError::NoResidual { a: names[a].clone(), b: names[b].clone() })?;
                implies[a * n + b] = Elem(g as u8);
            }
        }

        // Boolean iff every element has a lattice complement.
        let complement: Option<Vec<Elem>> = (0..n)
            .map(|a| (0..n).find(|&c| m(a, c) == least && j(a, c) == top).map(|c| Elem(c as u8)))
            .collect();

        let canon = |s: &str| -> Result<usize, AlgebraError> { Ok(to_canon[idx(s)?]) };
        let negation = match &spec.neg {
            None => None,
            Some(t) => {
                let mut v = vec![Elem(0); n];
                for (ci, name) in names.iter().enumerate() {
                    let img = t.get(name).ok_or_else(|| AlgebraError::InconsistentTables {
                        table: "neg",
                        at: name.clone(),
                        given: "<missing>".into(),
                        derived: "<required>".into(),
                    })?;
                    v[ci] = Elem(canon(img)? as u8);
                }
                Some(v)
            }
        };

        let alg = Algebra {
            label: spec.name.clone(),
            names,
            up: (0..n).map(|a| ElemSet::from_elems((0..n).filter(|&b| leq[a][b]).map(|b| Elem(b as u8)))).collect(),
            meet,
            join,
            implies,
            top: Elem(top as u8),
            least: Elem(least as u8),
            bottom_in_signature: !spec.generalized,
            complement: if spec.generalized { None } else { complement },
            negation,
        };

        // Cross-check whatever tables were supplied explicitly.
        let check2 = |alg: &Algebra, t: &Option<Table2>, name: &'static str, f: &dyn Fn(Elem, Elem) -> Elem| {
            if let Some(t) = t {
                for (ra, row) in t {
                    for (rb, given) in row {
                        let a = Elem(canon(ra)? as u8);
                        let b = Elem(canon(rb)? as u8);
                        let g = Elem(canon(given)? as u8);
                        let d = f(a, b);
                        if g != d {
                            return Err(AlgebraError::InconsistentTables {
                                table: name,
                                at: format!("({ra}, {rb})"),
                                given: given.clone(),
                                derived: alg.name(d).to_string(),
                            });
                        }
                    }
                }
            }
            Ok(())
        };
        check2(&alg, &spec.meet, "meet", &|a, b| alg.meet(a, b))?;
        check2(&alg, &spec.join, "join", &|a, b| alg.join(a, b))?;
        check2(&alg, &spec.implies, "implies", &|a, b| alg.implies(a, b))?;
        if let Some(t) = &spec.top {
            if canon(t)? != alg.top.index() {
                return Err(AlgebraError::InconsistentTables {
                    table: "top",
                    at: "top".into(),
                    given: t.clone(),
                    derived: alg.name(alg.top).to_string(),
                });
            }
        }
        if let Some(b) = &spec.bottom {
            if canon(b)? != alg.least.index() {
                return Err(AlgebraError::InconsistentTables {
                    table: "bottom",
                    at: "bottom".into(),
                    given: b.clone(),
                    derived: alg.name(alg.least).to_string(),
                });
            }
        }
        if let Some(t) = &spec.complement {
            for (ra, given) in t {
                let a = Elem(canon(ra)? as u8);
                let g = Elem(canon(given)? as u8);
                match alg.complement(a) {
                    Some(d) if d == g => {}
                    other => {
                        return Err(AlgebraError::InconsistentTables {
                            table: "complement",
                            at: ra.clone(),
                            given: given.clone(),
                            derived: other.map_or("<none>".to_string(), |d| alg.name(d).to_string()),
                        })
                    }
                }
            }
        }
        Ok(alg)
    }

    /// Serializes every derived table; `load(to_spec())` reproduces `self`.
    pub fn to_spec(&self) -> AlgebraSpec {
        let all: Vec<Elem> = self.elements().collect();
        let tab = |f: &dyn Fn(Elem, Elem) -> Elem| -> Table2 {
            all.iter()
                .map(|&a| {
                    (
                        self.name(a).to_string(),
                        all.iter().map(|&b| (self.name(b).to_string(), self.name(f(a, b)).to_string())).collect(),
                    )
                })
                .collect()
        };
        let unary = |v: &Vec<Elem>| -> BTreeMap<String, String> {
            all.iter().map(|&a| (self.name(a).to_string(), self.name(v[a.index()]).to_string())).collect()
        };
        AlgebraSpec {
            name: self.label.clone(),
            elements: self.names.clone(),
            leq: Some(
                all.iter()
                    .flat_map(|&a| all.iter().filter(move |&&b| self.leq(a, b)).map(move |&b| (a, b)))
                    .map(|(a, b)| (self.name(a).to_string(), self.name(b).to_string()))
                    .collect(),
            ),
            meet: Some(tab(&|a, b| self.meet(a, b))),
            join: Some(tab(&|a, b| self.join(a, b))),
            implies: Some(tab(&|a, b| self.implies(a, b))),
            neg: self.negation.as_ref().map(unary),
            complement: self.complement.as_ref().map(unary),
            top: Some(self.name(self.top).to_string()),
            bottom: self.bottom().map(|b| self.name(b).to_string()),
            generalized: !self.bottom_in_signature,
        }
    }

    pub fn from_json(text: &str) -> Result<Algebra, crate::Error> {
        let spec: AlgebraSpec = serde_json::from_str(text)?;
        Ok(Algebra::load(&spec)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("algebra spec serializes")
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.names.len()).map(|i| Elem(i as u8))
    }

    pub fn carrier(&self) -> ElemSet {
        ElemSet::full(self.size())
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e.index()]
    }

    pub fn elem(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name).map(|i| Elem(i as u8))
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.up[a.index()].contains(b)
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        self.meet[a.index() * self.size() + b.index()]
    }

    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        self.join[a.index() * self.size() + b.index()]
    }

    pub fn implies(&self, a: Elem, b: Elem) -> Elem {
        self.implies[a.index() * self.size() + b.index()]
    }

    pub fn iff(&self, a: Elem, b: Elem) -> Elem {
        self.meet(self.implies(a, b), self.implies(b, a))
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    /// Least element, when bottom is part of the signature.
    pub fn bottom(&self) -> Option<Elem> {
        self.bottom_in_signature.then_some(self.least)
    }

    /// Least element of the carrier regardless of signature.
    pub fn least(&self) -> Elem {
        self.least
    }

    pub fn complement(&self, a: Elem) -> Option<Elem> {
        self.complement.as_ref().map(|c| c[a.index()])
    }

    /// The optional extra unary operation supplied by the algebra file.
    pub fn negation(&self, a: Elem) -> Option<Elem> {
        self.negation.as_ref().map(|c| c[a.index()])
    }

    pub fn has_negation_table(&self) -> bool {
        self.negation.is_some()
    }

    pub fn classification(&self) -> Classification {
        if !self.bottom_in_signature {
            Classification::GeneralizedHeyting
        } else if self.complement.is_some() {
            Classification::Boolean
        } else {
            Classification::Heyting
        }
    }

    pub fn is_boolean(&self) -> bool {
        self.classification() == Classification::Boolean
    }

    pub fn is_chain(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.leq(a, b) || self.leq(b, a)))
    }

    pub fn big_join<I: IntoIterator<Item = Elem>>(&self, it: I) -> Result<Elem, AlgebraError> {
        let mut it = it.into_iter();
        match it.next() {
            None => self.bottom().ok_or(AlgebraError::EmptyJoinNoBottom),
            Some(first) => Ok(it.fold(first, |acc, x| self.join(acc, x))),
        }
    }

    pub fn big_meet<I: IntoIterator<Item = Elem>>(&self, it: I) -> Elem {
        it.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    /// Minimal non-bottom elements.
    pub fn atoms(&self) -> Vec<Elem> {
        self.elements()
            .filter(|&a| a != self.least)
            .filter(|&a| self.elements().all(|b| b == self.least || b == a || !self.leq(b, a)))
            .collect()
    }

    /// Sub-carrier closed under meet, join, implication and the constants.
    pub fn is_closed_subset(&self, s: ElemSet) -> bool {
        s.contains(self.top)
            && (!self.bottom_in_signature || s.contains(self.least))
            && s.iter().all(|a| {
                s.iter().all(|b| {
                    s.contains(self.meet(a, b)) && s.contains(self.join(a, b)) && s.contains(self.implies(a, b))
                })
            })
    }

    /// An antichain below `s` with the same join, built from atoms.
    ///
    /// Finite Boolean algebras are atomic, so the atoms below members of `s`
    /// always work. For other algebras the maximal elements of `s` are tried,
    /// which is an antichain with the right join whenever it exists among
    /// subsets of `s`.
    pub fn antichain_refinement(&self, s: &[Elem]) -> Result<Vec<Elem>, AlgebraError> {
        if self.is_boolean() {
            let mut out: Vec<Elem> =
                self.atoms().into_iter().filter(|&at| s.iter().any(|&x| self.leq(at, x))).collect();
            if out.is_empty() && s.contains(&self.least) {
                // Only bottom below: {⊥} is a valid singleton antichain.
                out.push(self.least);
            }
            out.sort();
            return Ok(out);
        }
        let mut max: Vec<Elem> =
            s.iter().copied().filter(|&x| !s.iter().any(|&y| y != x && self.leq(x, y))).collect();
        max.sort();
        max.dedup();
        Ok(max)
    }

    pub fn is_antichain(&self, s: &[Elem]) -> bool {
        s.iter().all(|&a| s.iter().all(|&b| a == b || !self.leq(a, b)))
    }

    pub fn set_names(&self, s: ElemSet) -> Vec<&str> {
        s.iter().map(|e| self.name(e)).collect()
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", self.label.as_deref().unwrap_or(""), self.names.join(", "))
    }
}

/// Builtin algebras used by the reproductions and the CLI.
pub mod builtin {
    use super::*;

    fn chain_spec(label: &str, names: &[&str]) -> AlgebraSpec {
        AlgebraSpec {
            name: Some(label.to_string()),
            elements: names.iter().map(|s| s.to_string()).collect(),
            leq: Some(names.windows(2).map(|w| (w[0].to_string(), w[1].to_string())).collect()),
            ..Default::default()
        }
    }

    /// The two-element Boolean algebra **2**.
    pub fn two() -> Algebra {
        Algebra::load(&chain_spec("2", &["0", "1"])).expect("2 is Boolean")
    }

    /// Three-element chain with the ¬ table (¬0=1, ¬½=½, ¬1=0).
    pub fn h3() -> Algebra {
        let mut spec = chain_spec("H3", &["0", "1/2", "1"]);
        spec.neg = Some(
            [("0", "1"), ("1/2", "1/2"), ("1", "0")]
                .into_iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        );
        Algebra::load(&spec).expect("H3 is Heyting")
    }

    /// Four-element Boolean algebra {0, a, b, 1}.
    pub fn diamond() -> Algebra {
        let spec = AlgebraSpec {
            name: Some("diamond".into()),
            elements: vec!["0".into(), "a".into(), "b".into(), "1".into()],
            leq: Some(vec![
                ("0".into(), "a".into()),
                ("0".into(), "b".into()),
                ("a".into(), "1".into()),
                ("b".into(), "1".into()),
            ]),
            ..Default::default()
        };
        Algebra::load(&spec).expect("diamond is Boolean")
    }

    pub fn chain(n: usize) -> Algebra {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Algebra::load(&chain_spec(&format!("C{n}"), &refs)).expect("chains are Heyting")
    }

    /// Boolean algebra of subsets of a `k`-element set (size `2^k`).
    pub fn boolean_power(k: usize) -> Algebra {
        let n = 1usize << k;
        let name = |s: usize| -> String {
            if s == 0 {
                "0".into()
            } else if s == n - 1 {
                "1".into()
            } else {
                (0..k).filter(|i| s >> i & 1 == 1).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
            }
        };
        let mut leq = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a & !b == 0 {
                    leq.push((name(a), name(b)));
                }
            }
        }
        Algebra::load(&AlgebraSpec {
            name: Some(format!("B{n}")),
            elements: (0..n).map(name).collect(),
            leq: Some(leq),
            ..Default::default()
        })
        .expect("powerset algebras are Boolean")
    }

    pub fn by_name(name: &str) -> Option<Algebra> {
        match name {
            "two" | "2" => Some(two()),
            "h3" => Some(h3()),
            "diamond" | "four" => Some(diamond()),
            _ => None,
        }
    }
}

/// All distributive lattices with `n` elements, up to isomorphism.
///
/// Orders are enumerated as relations compatible with the identity linear
/// extension, then deduplicated by a permutation-canonical form.
pub fn distributive_lattices(n: usize) -> Vec<Algebra> {
    assert!((1..=6).contains(&n), "lattice enumeration is limited to 1..=6 elements");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let perms = permutations(n);
    for mask in 0u32..(1u32 << pairs.len()) {
        let mut le = vec![vec![false; n]; n];
        for i in 0..n {
            le[i][i] = true;
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                le[i][j] = true;
            }
        }
        // Must be transitive as given (the closure is enumerated separately).
        let transitive = (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| !(le[a][b] && le[b][c]) || le[a][c])));
        if !transitive {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut bits = 0u64;
                for a in 0..n {
                    for b in 0..n {
                        if le[a][b] {
                            bits |= 1 << (p[a] * n + p[b]);
                        }
                    }
                }
                bits
            })
            .min()
            .unwrap();
        if !seen.insert(canon) {
            continue;
        }
        let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        let mut leq = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if le[a][b] {
                    leq.push((names[a].clone(), names[b].clone()));
                }
            }
        }
        let spec = AlgebraSpec { elements: names, leq: Some(leq), ..Default::default() };
        if let Ok(alg) = Algebra::load(&spec) {
            out.push(alg);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}
