// SPDX-License-Identifier: Apache-2.0

//! Fidel structures: an algebra plus families {N_x} (and {O_x} for C1).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Algebra, Elem, ElemSet};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelKind {
    N4,
    C1,
    #[serde(rename = "comega")]
    COmega,
}

impl fmt::Display for FidelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FidelKind::N4 => "N4",
            FidelKind::C1 => "C1",
            FidelKind::COmega => "Cω",
        })
    }
}

impl std::str::FromStr for FidelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "n4" => Ok(FidelKind::N4),
            "c1" => Ok(FidelKind::C1),
            "comega" | "cw" | "cω" => Ok(FidelKind::COmega),
            _ => Err(format!("unknown structure kind `{s}` (expected n4, c1 or comega)")),
        }
    }
}

/// One subset of the carrier per element, indexed by element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Family(pub Vec<ElemSet>);

pub type NFamily = Family;
pub type OFamily = Family;

impl Family {
    pub fn saturated(alg: &Algebra) -> Family {
        Family(vec![alg.carrier(); alg.size()])
    }

    pub fn get(&self, x: Elem) -> ElemSet {
        self.0[x.index()]
    }

    pub fn is_subfamily_of(&self, other: &Family) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a.is_subset(*b))
    }
}

/// Structure conditions, tagged for reports.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    /// N4 (i): N_x nonempty.
    N4Nonempty,
    /// N4 (ii): x'∨y' ∈ N_{x∧y}.
    N4JoinIntoMeet,
    /// N4 (ii): x'∧y' ∈ N_{x∨y}.
    N4MeetIntoJoin,
    /// N4 (ii), strict reading of the last clause: x'∈N_x ⇒ x∈N_{x'}.
    N4Involutive,
    /// N4 (iii): x∧y' ∈ N_{x→y} for y'∈N_y.
    N4Implication,
    /// C1/Cω (i): some x'∈N_x with x∨x'=1.
    ExcludedMiddle,
    /// C1/Cω (ii): every x'∈N_x has x''∈N_{x'} with x''≤x.
    DoubleNegation,
    /// C1 (iii): every y∈N_x has z∈O_x with x∧y∧z=0.
    Consistency,
}

impl Condition {
    pub fn tag(self) -> &'static str {
        match self {
            Condition::N4Nonempty => "N4(i)",
            Condition::N4JoinIntoMeet => "N4(ii)-join",
            Condition::N4MeetIntoJoin => "N4(ii)-meet",
            Condition::N4Involutive => "N4(ii)-involutive",
            Condition::N4Implication => "N4(iii)",
            Condition::ExcludedMiddle => "C(i)",
            Condition::DoubleNegation => "C(ii)",
            Condition::Consistency => "C1(iii)",
        }
    }
}

/// A violated instance: the condition and the elements that witness it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub elems: Vec<Elem>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FidelError {
    #[error("N_{0} is empty")]
    EmptyNSet(String),
    #[error("{kind} structure violates {condition} at ({detail})")]
    ConditionViolation { kind: FidelKind, condition: &'static str, detail: String },
    #[error("{kind} structures need {needed}")]
    KindMismatch { kind: FidelKind, needed: &'static str },
    #[error("family covers {got} elements, carrier has {want}")]
    FamilySize { got: usize, want: usize },
    #[error("C1 structures need an O family")]
    MissingOFamily,
    #[error("enumeration budget exceeded: {count} candidate families (budget {budget})")]
    BudgetExceeded { count: u128, budget: u128 },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Enforce the strict reading of the involutive clause of N4 (ii).
    pub strict_involutive: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { strict_involutive: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub kind: FidelKind,
    pub violations: Vec<Violation>,
    /// N4 only: ∀x ∀x'∈N_x, x∈N_{x'}.
    pub involutive_strict: Option<bool>,
    /// N4 only: ∀x ∃x'∈N_x, x∈N_{x'}.
    pub involutive_existential: Option<bool>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_kind(alg: &Algebra, kind: FidelKind) -> Result<(), FidelError> {
    match kind {
        FidelKind::N4 => Ok(()),
        FidelKind::C1 | FidelKind::COmega if alg.is_boolean() => Ok(()),
        _ => Err(FidelError::KindMismatch { kind, needed: "a Boolean algebra" }),
    }
}

/// Checks every structure condition of `kind` and lists all violations.
pub fn verify_structure(
    alg: &Algebra,
    n: &NFamily,
    o: Option<&OFamily>,
    kind: FidelKind,
    opts: VerifyOptions,
) -> Result<ValidationReport, FidelError> {
    check_kind(alg, kind)?;
    if n.0.len() != alg.size() {
        return Err(FidelError::FamilySize { got: n.0.len(), want: alg.size() });
    }
    if let Some(x) = alg.elements().find(|&x| n.get(x).is_empty()) {
        return Err(FidelError::EmptyNSet(alg.name(x).to_string()));
    }
    let o = match (kind, o) {
        (FidelKind::C1, None) => return Err(FidelError::MissingOFamily),
        (FidelKind::C1, Some(o)) if o.0.len() != alg.size() => {
            return Err(FidelError::FamilySize { got: o.0.len(), want: alg.size() })
        }
        (FidelKind::C1, Some(o)) => Some(o),
        _ => None,
    };
    let mut v = Vec::new();
    let mut push = |condition, elems: Vec<Elem>| v.push(Violation { condition, elems });
    let mut report = ValidationReport { kind, violations: vec![], involutive_strict: None, involutive_existential: None };
    match kind {
        FidelKind::N4 => {
            for x in alg.elements() {
                for y in alg.elements() {
                    for xp in n.get(x).iter() {
                        for yp in n.get(y).iter() {
                            if !n.get(alg.meet(x, y)).contains(alg.join(xp, yp)) {
                                push(Condition::N4JoinIntoMeet, vec![x, y, xp, yp]);
                            }
                            if !n.get(alg.join(x, y)).contains(alg.meet(xp, yp)) {
                                push(Condition::N4MeetIntoJoin, vec![x, y, xp, yp]);
                            }
                        }
                    }
                    for yp in n.get(y).iter() {
                        if !n.get(alg.implies(x, y)).contains(alg.meet(x, yp)) {
                            push(Condition::N4Implication, vec![x, y, yp]);
                        }
                    }
                }
            }
            let mut strict = true;
            for x in alg.elements() {
                for xp in n.get(x).iter() {
                    if !n.get(xp).contains(x) {
                        strict = false;
                        if opts.strict_involutive {
                            push(Condition::N4Involutive, vec![x, xp]);
                        }
                    }
                }
            }
            report.involutive_strict = Some(strict);
            report.involutive_existential =
                Some(alg.elements().all(|x| n.get(x).iter().any(|xp| n.get(xp).contains(x))));
        }
        FidelKind::C1 | FidelKind::COmega => {
            for x in alg.elements() {
                if !n.get(x).iter().any(|xp| alg.join(x, xp) == alg.top()) {
                    push(Condition::ExcludedMiddle, vec![x]);
                }
                for xp in n.get(x).iter() {
                    if !n.get(xp).iter().any(|xpp| alg.leq(xpp, x)) {
                        push(Condition::DoubleNegation, vec![x, xp]);
                    }
                }
                if let Some(o) = o {
                    let bot = alg.least();
                    for y in n.get(x).iter() {
                        if !o.get(x).iter().any(|z| alg.meet(alg.meet(x, y), z) == bot) {
                            push(Condition::Consistency, vec![x, y]);
                        }
                    }
                }
            }
        }
    }
    report.violations = v;
    Ok(report)
}

/// A validated Fidel structure. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FidelStructure {
    kind: FidelKind,
    algebra: Arc<Algebra>,
    n: NFamily,
    o: Option<OFamily>,
}

impl FidelStructure {
    pub fn new(
        algebra: Arc<Algebra>,
        n: NFamily,
        o: Option<OFamily>,
        kind: FidelKind,
        opts: VerifyOptions,
    ) -> Result<FidelStructure, FidelError> {
        let report = verify_structure(&algebra, &n, o.as_ref(), kind, opts)?;
        if let Some(first) = report.violations.first() {
            return Err(FidelError::ConditionViolation {
                kind,
                condition: first.condition.tag(),
                detail: first.elems.iter().map(|&e| algebra.name(e)).collect::<Vec<_>>().join(", "),
            });
        }
        let o = if kind == FidelKind::C1 { o } else { None };
        Ok(FidelStructure { kind, algebra, n, o })
    }

    /// N_x = A (and O_x = A for C1) for every x.
    pub fn saturate(algebra: Arc<Algebra>, kind: FidelKind) -> Result<FidelStructure, FidelError> {
        check_kind(&algebra, kind)?;
        let n = Family::saturated(&algebra);
        let o = (kind == FidelKind::C1).then(|| Family::saturated(&algebra));
        FidelStructure::new(algebra, n, o, kind, VerifyOptions::default())
    }

    pub fn kind(&self) -> FidelKind {
        self.kind
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn n(&self) -> &NFamily {
        &self.n
    }

    pub fn o(&self) -> Option<&OFamily> {
        self.o.as_ref()
    }

    pub fn n_set(&self, x: Elem) -> ElemSet {
        self.n.get(x)
    }

    /// O_x; structures without an O family impose no restriction.
    pub fn o_set(&self, x: Elem) -> ElemSet {
        self.o.as_ref().map_or(self.algebra.carrier(), |o| o.get(x))
    }

    pub fn is_saturated(&self) -> bool {
        let full = self.algebra.carrier();
        self.n.0.iter().all(|&s| s == full) && self.o.as_ref().is_none_or(|o| o.0.iter().all(|&s| s == full))
    }

    pub fn describe(&self) -> String {
        let fam = |f: &Family| {
            self.algebra
                .elements()
                .map(|x| format!("{}:{{{}}}", self.algebra.name(x), self.algebra.set_names(f.get(x)).join(",")))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = format!("{} structure over {} N=[{}]", self.kind, self.algebra, fam(&self.n));
        if let Some(o) = &self.o {
            s.push_str(&format!(" O=[{}]", fam(o)));
        }
        s
    }
}

/// Number of candidate families `enumerate_structures` would scan.
pub fn candidate_count(alg: &Algebra, kind: FidelKind) -> u128 {
    let n = alg.size() as u32;
    let nonempty = (1u128 << n) - 1;
    let per_n = nonempty.pow(n);
    match kind {
        FidelKind::C1 => per_n.saturating_mul((1u128 << n).pow(n)),
        _ => per_n,
    }
}

/// Every structure of `kind` over `alg`. Fails fast when the number of
/// candidate families exceeds `budget`.
pub fn enumerate_structures(
    alg: &Arc<Algebra>,
    kind: FidelKind,
    opts: VerifyOptions,
    budget: u128,
) -> Result<Vec<FidelStructure>, FidelError> {
    check_kind(alg, kind)?;
    let count = candidate_count(alg, kind);
    if count > budget {
        return Err(FidelError::BudgetExceeded { count, budget });
    }
    let size = alg.size();
    let all_subsets: Vec<ElemSet> = (1u64..(1u64 << size)).map(ElemSet).collect();
    // Local prefilter on N_x: (i) for C-kinds.
    let local: Vec<Vec<ElemSet>> = alg
        .elements()
        .map(|x| {
            all_subsets
                .iter()
                .copied()
                .filter(|s| match kind {
                    FidelKind::N4 => true,
                    _ => s.iter().any(|xp| alg.join(x, xp) == alg.top()),
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for n in product(&local) {
        let n = Family(n);
        if kind == FidelKind::C1 {
            // (iii) only couples N_x with O_x, so O is chosen per element.
            let bot = alg.least();
            let o_local: Vec<Vec<ElemSet>> = alg
                .elements()
                .map(|x| {
                    (0u64..(1u64 << size))
                        .map(ElemSet)
                        .filter(|ox| n.get(x).iter().all(|y| ox.iter().any(|z| alg.meet(alg.meet(x, y), z) == bot)))
                        .collect()
                })
                .collect();
            let report = verify_structure(alg, &n, Some(&Family::saturated(alg)), kind, opts)?;
            if !report.is_valid() {
                continue;
            }
            for o in product(&o_local) {
                out.push(FidelStructure { kind, algebra: alg.clone(), n: n.clone(), o: Some(Family(o)) });
            }
        } else {
            let report = verify_structure(alg, &n, None, kind, opts)?;
            if report.is_valid() {
                out.push(FidelStructure { kind, algebra: alg.clone(), n, o: None });
            }
        }
    }
    Ok(out)
}

fn product(choices: &[Vec<ElemSet>]) -> Vec<Vec<ElemSet>> {
    let mut acc: Vec<Vec<ElemSet>> = vec![vec![]];
    for opts in choices {
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for prefix in &acc {
            for &o in opts {
                let mut p = prefix.clone();
                p.push(o);
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin::*;

    fn set(a: &Algebra, names: &[&str]) -> ElemSet {
        ElemSet::from_elems(names.iter().map(|n| a.elem(n).unwrap()))
    }

    #[test]
    fn saturated_h3_is_n4() {
        let s = FidelStructure::saturate(Arc::new(h3()), FidelKind::N4).unwrap();
        assert!(s.is_saturated());
        assert_eq!(s.n_set(s.algebra().top()).len(), 3);
    }

    #[test]
    fn two_with_swapped_negation_is_comega() {
        let t = two();
        let n = Family(vec![set(&t, &["1"]), set(&t, &["0"])]);
        let r = verify_structure(&t, &n, None, FidelKind::COmega, VerifyOptions::default()).unwrap();
        assert!(r.is_valid(), "{r:?}");
    }

    #[test]
    fn empty_n_set_is_rejected() {
        let t = two();
        let n = Family(vec![set(&t, &["1"]), ElemSet::EMPTY]);
        assert_eq!(
            verify_structure(&t, &n, None, FidelKind::COmega, VerifyOptions::default()),
            Err(FidelError::EmptyNSet("1".into()))
        );
    }

    #[test]
    fn saturation_always_validates() {
        for alg in [two(), diamond(), boolean_power(3)] {
            let alg = Arc::new(alg);
            for kind in [FidelKind::N4, FidelKind::C1, FidelKind::COmega] {
                FidelStructure::saturate(alg.clone(), kind).unwrap();
            }
        }
        for n in 1..=4 {
            for alg in crate::algebra::distributive_lattices(n) {
                FidelStructure::saturate(Arc::new(alg), FidelKind::N4).unwrap();
            }
        }
    }

    #[test]
    fn c_kinds_need_boolean() {
        assert!(matches!(
            FidelStructure::saturate(Arc::new(h3()), FidelKind::C1),
            Err(FidelError::KindMismatch { .. })
        ));
    }

    #[test]
    fn violations_are_listed() {
        let t = two();
        // N_0 = {0}: 0∨0 ≠ 1.
        let n = Family(vec![set(&t, &["0"]), set(&t, &["0", "1"])]);
        let r = verify_structure(&t, &n, None, FidelKind::COmega, VerifyOptions::default()).unwrap();
        assert!(r.violations.iter().any(|v| v.condition == Condition::ExcludedMiddle));
        let o = Family(vec![ElemSet::EMPTY, ElemSet::EMPTY]);
        let n = Family::saturated(&t);
        let r = verify_structure(&t, &n, Some(&o), FidelKind::C1, VerifyOptions::default()).unwrap();
        assert!(r.violations.iter().any(|v| v.condition == Condition::Consistency));
    }

    #[test]
    fn involutive_readings_are_both_reported() {
        let c = chain(2);
        let (z, o) = (c.least(), c.top());
        // N_0 = {1}, N_1 = {0,1}: 1∈N_0 needs 0∈N_1 (ok); 0∈N_1 needs 1∈N_0 (ok);
        // 1∈N_1 needs 1∈N_1 (ok). Now drop 1 from N_1's support of 0.
        let n = Family(vec![ElemSet::singleton(o), ElemSet::singleton(o)]);
        let r = verify_structure(&c, &n, None, FidelKind::N4, VerifyOptions { strict_involutive: false }).unwrap();
        assert_eq!(r.involutive_strict, Some(false));
        assert!(r.violations.iter().all(|v| v.condition != Condition::N4Involutive));
        let strict = verify_structure(&c, &n, None, FidelKind::N4, VerifyOptions::default()).unwrap();
        assert!(strict.violations.iter().any(|v| v.condition == Condition::N4Involutive));
        let _ = z;
    }

    #[test]
    fn enumeration_matches_brute_force_on_two() {
        let t = Arc::new(two());
        for kind in [FidelKind::N4, FidelKind::COmega, FidelKind::C1] {
            let fast = enumerate_structures(&t, kind, VerifyOptions::default(), 1 << 20).unwrap();
            // Oracle: every assignment of arbitrary subsets, filtered by the validator.
            let subsets: Vec<ElemSet> = (0u64..4).map(ElemSet).collect();
            let mut brute = 0usize;
            for a in &subsets {
                for b in &subsets {
                    let n = Family(vec![*a, *b]);
                    let os: Vec<Option<Family>> = if kind == FidelKind::C1 {
                        subsets.iter().flat_map(|c| subsets.iter().map(move |d| Some(Family(vec![*c, *d])))).collect()
                    } else {
                        vec![None]
                    };
                    for o in os {
                        if let Ok(r) = verify_structure(&t, &n, o.as_ref(), kind, VerifyOptions::default()) {
                            if r.is_valid() {
                                brute += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(fast.len(), brute, "{kind}");
            assert!(fast.iter().all(|s| verify_structure(&t, s.n(), s.o(), kind, VerifyOptions::default())
                .unwrap()
                .is_valid()));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let d = Arc::new(diamond());
        assert!(matches!(
            enumerate_structures(&d, FidelKind::C1, VerifyOptions::default(), 1000),
            Err(FidelError::BudgetExceeded { .. })
        ));
    }
}
