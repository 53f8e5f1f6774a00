// SPDX-License-Identifier: Apache-2.0

//! Finite fragments of the name universe.
//!
//! A name is a finite function from earlier names to algebra elements. Names
//! live in an arena ([`Universe`]) and are referred to by [`NameId`]. Every
//! constructor only accepts ids that already exist, so a fragment is closed
//! under domain membership by construction, and ids are topologically sorted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Algebra, Elem};

/// Index of a name inside its [`Universe`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NameId(pub u32);

impl NameId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UniverseError {
    #[error("unknown name {0}")]
    UnknownName(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("rank {requested} exceeds the enumeration cap {cap}")]
    RankCap { requested: usize, cap: usize },
    #[error("fragment would hold {count} names, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("bad set literal at {pos}: {msg}")]
    SetLiteral { pos: usize, msg: String },
    #[error("label `{0}` is already bound")]
    DuplicateLabel(String),
}

/// Highest rank `enumerate` will materialize.
pub const MAX_ENUM_RANK: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
struct NameData {
    entries: Vec<(NameId, Elem)>,
    rank: usize,
}

/// An arena of names over one algebra.
#[derive(Clone, Debug)]
pub struct Universe {
    algebra: Arc<Algebra>,
    names: Vec<NameData>,
    index: HashMap<Vec<(NameId, Elem)>, NameId>,
    labels: BTreeMap<String, NameId>,
    label_of: HashMap<NameId, String>,
}

impl Universe {
    pub fn new(algebra: Arc<Algebra>) -> Universe {
        Universe { algebra, names: Vec::new(), index: HashMap::new(), labels: BTreeMap::new(), label_of: HashMap::new() }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NameId> + '_ {
        (0..self.names.len() as u32).map(NameId)
    }

    pub fn contains(&self, id: NameId) -> bool {
        id.index() < self.names.len()
    }

    fn check(&self, id: NameId) -> Result<(), UniverseError> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(UniverseError::UnknownName(id.to_string()))
        }
    }

    /// Interns the name with the given graph. Duplicate keys merge by join.
    pub fn make_name(&mut self, pairs: &[(NameId, Elem)]) -> Result<NameId, UniverseError> {
        let mut merged: BTreeMap<NameId, Elem> = BTreeMap::new();
        for &(x, a) in pairs {
            self.check(x)?;
            if a.index() >= self.algebra.size() {
                return Err(UniverseError::UnknownElement(a.0.to_string()));
            }
            merged.entry(x).and_modify(|b| *b = self.algebra.join(*b, a)).or_insert(a);
        }
        let entries: Vec<(NameId, Elem)> = merged.into_iter().collect();
        if let Some(&id) = self.index.get(&entries) {
            return Ok(id);
        }
        let rank = entries.iter().map(|(x, _)| self.rank(*x) + 1).max().unwrap_or(0);
        let id = NameId(self.names.len() as u32);
        self.index.insert(entries.clone(), id);
        self.names.push(NameData { entries, rank });
        Ok(id)
    }

    /// Same as `make_name`, with elements given by their names.
    pub fn make_name_named(&mut self, pairs: &[(NameId, &str)]) -> Result<NameId, UniverseError> {
        let resolved = pairs
            .iter()
            .map(|&(x, a)| {
                self.algebra.elem(a).map(|e| (x, e)).ok_or_else(|| UniverseError::UnknownElement(a.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.make_name(&resolved)
    }

    pub fn empty(&mut self) -> NameId {
        self.make_name(&[]).expect("the empty name is always constructible")
    }

    /// Looks up an existing name without interning.
    pub fn find(&self, pairs: &[(NameId, Elem)]) -> Option<NameId> {
        let mut v = pairs.to_vec();
        v.sort();
        self.index.get(&v).copied()
    }

    /// Graph of the name, sorted by domain id.
    pub fn entries(&self, id: NameId) -> &[(NameId, Elem)] {
        &self.names[id.index()].entries
    }

    pub fn domain(&self, id: NameId) -> impl Iterator<Item = NameId> + '_ {
        self.entries(id).iter().map(|(x, _)| *x)
    }

    pub fn weight(&self, id: NameId, x: NameId) -> Option<Elem> {
        let e = self.entries(id);
        e.binary_search_by_key(&x, |(y, _)| *y).ok().map(|i| e[i].1)
    }

    pub fn rank(&self, id: NameId) -> usize {
        self.names[id.index()].rank
    }

    pub fn bind(&mut self, label: &str, id: NameId) -> Result<(), UniverseError> {
        self.check(id)?;
        if self.labels.contains_key(label) {
            return Err(UniverseError::DuplicateLabel(label.to_string()));
        }
        self.labels.insert(label.to_string(), id);
        self.label_of.entry(id).or_insert_with(|| label.to_string());
        Ok(())
    }

    pub fn lookup(&self, label: &str) -> Option<NameId> {
        self.labels.get(label).copied()
    }

    pub fn label(&self, id: NameId) -> Option<&str> {
        self.label_of.get(&id).map(String::as_str)
    }

    pub fn bindings(&self) -> HashMap<String, NameId> {
        self.labels.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }

    /// Label if bound, else the structural form.
    pub fn display(&self, id: NameId) -> String {
        match self.label(id) {
            Some(l) => l.to_string(),
            None => self.structural(id),
        }
    }

    pub fn structural(&self, id: NameId) -> String {
        let body: Vec<String> = self
            .entries(id)
            .iter()
            .map(|&(x, a)| format!("({}, {})", self.display(x), self.algebra.name(a)))
            .collect();
        format!("{{{}}}", body.join(", "))
    }

    /// The canonical name of a hereditarily finite set: every weight is top.
    pub fn hat(&mut self, s: &HfSet) -> NameId {
        let top = self.algebra.top();
        let pairs: Vec<(NameId, Elem)> = s.0.iter().map(|t| (self.hat(t), top)).collect();
        self.make_name(&pairs).expect("hat uses interned ids")
    }

    /// Copies the names selected by `keep` into a universe over `algebra`,
    /// translating weights with `map`. Names whose domain or weights cannot
    /// be carried over are dropped. Returns the new universe and the id map.
    pub fn transport(
        &self,
        algebra: Arc<Algebra>,
        keep: impl Fn(NameId) -> bool,
        map: impl Fn(Elem) -> Option<Elem>,
    ) -> (Universe, HashMap<NameId, NameId>) {
        let mut out = Universe::new(algebra);
        let mut ids = HashMap::new();
        for id in self.ids().filter(|&id| keep(id)) {
            let pairs: Option<Vec<(NameId, Elem)>> =
                self.entries(id).iter().map(|&(x, a)| Some((*ids.get(&x)?, map(a)?))).collect();
            if let Some(pairs) = pairs {
                let new = out.make_name(&pairs).expect("transported ids exist");
                ids.insert(id, new);
                if let Some(l) = self.label(id) {
                    let _ = out.bind(l, new);
                }
            }
        }
        (out, ids)
    }

    /// Number of names of rank ≤ `max_rank` with at most `max_dom` entries,
    /// over a carrier of size `carrier`. Saturates at `u128::MAX`.
    pub fn count_names(carrier: usize, max_rank: usize, max_dom: usize) -> u128 {
        let mut level: u128 = 1;
        for _ in 0..max_rank {
            level = (0..=max_dom as u128)
                .map(|k| binomial(level, k).saturating_mul((carrier as u128).saturating_pow(k as u32)))
                .fold(0u128, u128::saturating_add);
        }
        level
    }

    /// Every name of rank ≤ `max_rank` whose domain has ≤ `max_dom` entries.
    pub fn enumerate(
        algebra: Arc<Algebra>,
        max_rank: usize,
        max_dom: usize,
        budget: u128,
    ) -> Result<Universe, UniverseError> {
        if max_rank > MAX_ENUM_RANK {
            return Err(UniverseError::RankCap { requested: max_rank, cap: MAX_ENUM_RANK });
        }
        let count = Universe::count_names(algebra.size(), max_rank, max_dom);
        if count > budget {
            return Err(UniverseError::BudgetExceeded { count, budget });
        }
        let mut u = Universe::new(algebra);
        let mut level = vec![u.empty()];
        let elems: Vec<Elem> = u.algebra.elements().collect();
        for _ in 0..max_rank {
            let mut next = Vec::new();
            for k in 0..=max_dom.min(level.len()) {
                for dom in combinations(&level, k) {
                    for weights in assignments(&elems, k) {
                        let pairs: Vec<(NameId, Elem)> = dom.iter().copied().zip(weights).collect();
                        next.push(u.make_name(&pairs)?);
                    }
                }
            }
            next.sort();
            next.dedup();
            level = next;
        }
        Ok(u)
    }
}

impl Universe {
    /// `count` distinct names of rank ≤ `max_rank` (with their domains),
    /// drawn from a ChaCha stream seeded by `seed`. The empty name is always
    /// included. Fewer names are returned if the space is smaller.
    pub fn sample(algebra: Arc<Algebra>, seed: u64, count: usize, max_rank: usize, max_dom: usize) -> Universe {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = Universe::new(algebra);
        let elems: Vec<Elem> = u.algebra.elements().collect();
        u.empty();
        let mut attempts = 0;
        while u.len() < count && attempts < 50 * count.max(1) {
            attempts += 1;
            let pool: Vec<NameId> = u.ids().filter(|&id| u.rank(id) < max_rank).collect();
            if pool.is_empty() {
                break;
            }
            let k = rng.gen_range(0..=max_dom.min(pool.len()));
            let dom: Vec<NameId> = pool.choose_multiple(&mut rng, k).copied().collect();
            let pairs: Vec<(NameId, Elem)> = dom.into_iter().map(|x| (x, *elems.choose(&mut rng).unwrap())).collect();
            // Domain members are interned already, so the new name adds at most one id.
            if u.find(&pairs).is_none() && u.len() < count {
                u.make_name(&pairs).expect("sampled ids exist");
            }
        }
        u
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn combinations<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn assignments<T: Copy>(values: &[T], k: usize) -> Vec<Vec<T>> {
    (0..k).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// A hereditarily finite set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HfSet(pub BTreeSet<HfSet>);

impl HfSet {
    pub fn empty() -> HfSet {
        HfSet::default()
    }

    /// The von Neumann numeral n = {0, …, n-1}.
    pub fn numeral(n: usize) -> HfSet {
        HfSet((0..n).map(HfSet::numeral).collect())
    }

    /// x ∪ {x}.
    pub fn successor(&self) -> HfSet {
        let mut s = self.0.clone();
        s.insert(self.clone());
        HfSet(s)
    }

    pub fn contains(&self, x: &HfSet) -> bool {
        self.0.contains(x)
    }

    pub fn rank(&self) -> usize {
        self.0.iter().map(|t| t.rank() + 1).max().unwrap_or(0)
    }

    /// All sets of rank ≤ `max_rank`.
    pub fn all_up_to_rank(max_rank: usize) -> Vec<HfSet> {
        let mut level = vec![HfSet::empty()];
        for _ in 0..max_rank {
            let n = level.len();
            assert!(n < 20, "rank too large to enumerate");
            level = (0u32..(1 << n))
                .map(|mask| HfSet((0..n).filter(|i| mask & (1 << i) != 0).map(|i| level[i].clone()).collect()))
                .collect();
        }
        level.sort();
        level
    }

    /// Parses `{}`, `{{}, {{}}}`, with decimal digits as numeral shorthand.
    pub fn parse(text: &str) -> Result<HfSet, UniverseError> {
        let bytes: Vec<(usize, char)> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
        let mut i = 0;
        let s = parse_hf(&bytes, &mut i, text.len())?;
        match bytes.get(i) {
            None => Ok(s),
            Some(&(pos, c)) => Err(UniverseError::SetLiteral { pos, msg: format!("unexpected `{c}`") }),
        }
    }
}

fn parse_hf(toks: &[(usize, char)], i: &mut usize, end: usize) -> Result<HfSet, UniverseError> {
    let err = |pos: usize, msg: &str| UniverseError::SetLiteral { pos, msg: msg.to_string() };
    match toks.get(*i) {
        Some(&(_, c)) if c.is_ascii_digit() => {
            let mut n = 0usize;
            while let Some(&(_, d)) = toks.get(*i).filter(|(_, d)| d.is_ascii_digit()) {
                n = n * 10 + d.to_digit(10).unwrap() as usize;
                *i += 1;
            }
            if n > 12 {
                return Err(err(toks[*i - 1].0, "numeral too large"));
            }
            Ok(HfSet::numeral(n))
        }
        Some(&(_, '{')) => {
            *i += 1;
            let mut members = BTreeSet::new();
            if let Some(&(_, '}')) = toks.get(*i) {
                *i += 1;
                return Ok(HfSet(members));
            }
            loop {
                members.insert(parse_hf(toks, i, end)?);
                match toks.get(*i) {
                    Some(&(_, ',')) => *i += 1,
                    Some(&(_, '}')) => {
                        *i += 1;
                        return Ok(HfSet(members));
                    }
                    Some(&(pos, _)) => return Err(err(pos, "expected `,` or `}`")),
                    None => return Err(err(end, "unclosed `{`")),
                }
            }
        }
        Some(&(pos, _)) => Err(err(pos, "expected `{` or a numeral")),
        None => Err(err(end, "unexpected end of input")),
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}
