// SPDX-License-Identifier: Apache-2.0

//! On-disk formats: algebra references, structure files, fragment files,
//! derivation files and negation tables.
//!
//! Fragment files bind one name per line, in dependency order:
//!
//! ```text
//! # comment
//! w = {}
//! u = {(w, 1/2)}
//! v = {(w, 1), (u, 0)}
//! two = hat{0, 1}
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::algebra::{builtin, Algebra, AlgebraSpec, Elem, ElemSet};
use crate::fidel::{Family, FidelKind, FidelStructure, VerifyOptions};
use crate::formula::Formula;
use crate::prop::{Justification, Logic};
use crate::universe::{HfSet, NameId, Universe};
use crate::Error;

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// A builtin algebra name (`two`, `h3`, `diamond`, ...) or a JSON file.
pub fn load_algebra(reference: &str) -> Result<Algebra, Error> {
    load_algebra_from(reference, Path::new("."))
}

fn load_algebra_from(reference: &str, base: &Path) -> Result<Algebra, Error> {
    if let Some(a) = builtin::by_name(reference) {
        return Ok(a);
    }
    let path = resolve(reference, base);
    Algebra::from_json(&read(&path)?)
}

fn resolve(reference: &str, base: &Path) -> PathBuf {
    let p = Path::new(reference);
    if p.is_absolute() || p.exists() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlgebraRef {
    Reference(String),
    Inline(AlgebraSpec),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    algebra: AlgebraRef,
    kind: FidelKind,
    #[serde(rename = "N", default)]
    n: Option<BTreeMap<String, Vec<String>>>,
    #[serde(rename = "O", default)]
    o: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default)]
    saturated: bool,
    #[serde(default = "yes")]
    strict_involutive: bool,
}

fn yes() -> bool {
    true
}

/// A parsed but unverified structure file.
pub struct StructureInput {
    pub algebra: Arc<Algebra>,
    pub kind: FidelKind,
    /// `None` means saturated.
    pub n: Option<Family>,
    pub o: Option<Family>,
    pub opts: VerifyOptions,
}

impl StructureInput {
    pub fn build(self) -> Result<FidelStructure, Error> {
        Ok(match self.n {
            None => FidelStructure::saturate(self.algebra, self.kind)?,
            Some(n) => FidelStructure::new(self.algebra, n, self.o, self.kind, self.opts)?,
        })
    }
}

/// Parses a structure file; relative algebra paths resolve against `base`.
/// A missing `N` (or `"saturated": true`) gives the saturated structure.
pub fn parse_structure_input(text: &str, base: &Path) -> Result<StructureInput, Error> {
    let file: StructureFile = serde_json::from_str(text)?;
    let alg = Arc::new(match &file.algebra {
        AlgebraRef::Reference(r) => load_algebra_from(r, base)?,
        AlgebraRef::Inline(spec) => Algebra::load(spec)?,
    });
    let opts = VerifyOptions { strict_involutive: file.strict_involutive };
    if file.saturated || file.n.is_none() {
        if file.o.is_some() {
            return Err(Error::Input("a saturated structure takes no O family".into()));
        }
        return Ok(StructureInput { algebra: alg, kind: file.kind, n: None, o: None, opts });
    }
    let family = |map: &BTreeMap<String, Vec<String>>, which: &str| -> Result<Family, Error> {
        let mut sets = vec![ElemSet::default(); alg.size()];
        for (x, members) in map {
            let xe = elem(&alg, x)?;
            for m in members {
                sets[xe.index()] = sets[xe.index()].with(elem(&alg, m)?);
            }
        }
        if let Some(x) = alg.elements().find(|&x| !map.contains_key(alg.name(x))) {
            return Err(Error::Input(format!("{which} family has no entry for `{}`", alg.name(x))));
        }
        Ok(Family(sets))
    };
    let n = family(file.n.as_ref().expect("checked above"), "N")?;
    let o = file.o.as_ref().map(|m| family(m, "O")).transpose()?;
    Ok(StructureInput { algebra: alg, kind: file.kind, n: Some(n), o, opts })
}

pub fn parse_structure(text: &str, base: &Path) -> Result<FidelStructure, Error> {
    parse_structure_input(text, base)?.build()
}

pub fn read_structure(path: &Path) -> Result<StructureInput, Error> {
    parse_structure_input(&read(path)?, path.parent().unwrap_or(Path::new(".")))
}

pub fn load_structure(path: &Path) -> Result<FidelStructure, Error> {
    read_structure(path)?.build()
}

fn elem(alg: &Algebra, name: &str) -> Result<Elem, Error> {
    alg.elem(name).ok_or_else(|| Error::Input(format!("unknown element `{name}`")))
}

/// Parses a fragment file into a universe over `alg`.
pub fn parse_fragment(text: &str, alg: Arc<Algebra>) -> Result<Universe, Error> {
    let mut un = Universe::new(alg.clone());
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| Error::Input(format!("line {}: {msg}", lineno + 1));
        let (label, rhs) = line.split_once('=').ok_or_else(|| at("expected `ident = literal`".into()))?;
        let label = label.trim();
        if label.is_empty() || !label.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
            return Err(at(format!("bad identifier `{label}`")));
        }
        let rhs = rhs.trim();
        let id = if let Some(hf) = rhs.strip_prefix("hat") {
            let set = HfSet::parse(hf.trim()).map_err(|e| at(e.to_string()))?;
            un.hat(&set)
        } else {
            let pairs = parse_pairs(rhs, &un, &alg).map_err(at)?;
            un.make_name(&pairs).map_err(|e| at(e.to_string()))?
        };
        un.bind(label, id).map_err(|e| at(e.to_string()))?;
    }
    Ok(un)
}

fn parse_pairs(rhs: &str, un: &Universe, alg: &Algebra) -> Result<Vec<(NameId, Elem)>, String> {
    let inner = rhs
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| format!("expected `{{...}}` or `hat{{...}}`, found `{rhs}`"))?
        .trim();
    let mut pairs = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(|| format!("expected `(` at `{rest}`"))?;
        let close = body.find(')').ok_or("unclosed `(`")?;
        let (name, weight) = body[..close].split_once(',').ok_or("expected `(name, element)`")?;
        let (name, weight) = (name.trim(), weight.trim());
        let id = un.lookup(name).ok_or_else(|| format!("unbound name `{name}`"))?;
        let e = alg.elem(weight).ok_or_else(|| format!("unknown element `{weight}`"))?;
        pairs.push((id, e));
        rest = body[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err("trailing `,`".into());
            }
        } else if !rest.is_empty() {
            return Err(format!("expected `,` at `{rest}`"));
        }
    }
    Ok(pairs)
}

pub fn load_fragment(path: &Path, alg: Arc<Algebra>) -> Result<Universe, Error> {
    parse_fragment(&read(path)?, alg)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DerivationFile {
    logic: String,
    #[serde(default)]
    premises: Vec<String>,
    steps: Vec<StepFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepFile {
    formula: String,
    #[serde(alias = "by")]
    justification: String,
}

/// A Hilbert derivation read from JSON:
/// `{"logic": "n4", "premises": [...], "steps": [{"formula": "...", "justification": "Ax1" | "MP 2,1" | "premise"}]}`.
pub struct Derivation {
    pub logic: Logic,
    pub premises: Vec<Formula>,
    pub steps: Vec<(Formula, Justification)>,
}

pub fn parse_derivation(text: &str) -> Result<Derivation, Error> {
    let file: DerivationFile = serde_json::from_str(text)?;
    let logic: Logic = file.logic.parse().map_err(Error::Input)?;
    let premises = file.premises.iter().map(|p| Formula::parse(p)).collect::<Result<_, _>>()?;
    let steps = file
        .steps
        .iter()
        .map(|s| Ok((Formula::parse(&s.formula)?, s.justification.parse::<Justification>()?)))
        .collect::<Result<_, Error>>()?;
    Ok(Derivation { logic, premises, steps })
}

pub fn load_derivation(path: &Path) -> Result<Derivation, Error> {
    parse_derivation(&read(path)?)
}

/// A negation table: JSON object from closed `~φ` / `o φ` formulas (using
/// fragment labels) to element names.
pub fn parse_table(text: &str, un: &Universe) -> Result<HashMap<Formula, Elem>, Error> {
    let raw: BTreeMap<String, String> = serde_json::from_str(text)?;
    let bindings = un.bindings();
    let alg = un.algebra();
    raw.into_iter()
        .map(|(k, v)| {
            let f = Formula::parse(&k)?.resolve_closed(&bindings)?;
            if !matches!(f, Formula::Not(_) | Formula::Circ(_)) {
                return Err(Error::Input(format!("table key `{k}` is not a `~` or `o` formula")));
            }
            Ok((f, elem(alg, &v)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragment_literals() {
        let alg = Arc::new(builtin::h3());
        let un = parse_fragment("# names\nw = {}\nu = {(w, 1/2)}\nv = {(w, 1), (u, 0)}\nn = hat{0, 1}\n", alg).unwrap();
        let (w, u, v) = (un.lookup("w").unwrap(), un.lookup("u").unwrap(), un.lookup("v").unwrap());
        assert_eq!(un.entries(u).len(), 1);
        assert_eq!(un.domain(v).collect::<Vec<_>>(), vec![w, u]);
        assert_eq!(un.rank(un.lookup("n").unwrap()), 2);
    }

    #[test]
    fn fragment_errors_carry_lines() {
        let alg = Arc::new(builtin::h3());
        for (text, needle) in [
            ("u = {(w, 1)}", "line 1: unbound name `w`"),
            ("w = {}\nu = {(w, 2)}", "line 2: unknown element `2`"),
            ("w = {}\nw = {}", "already bound"),
            ("w {}", "expected `ident = literal`"),
            ("w = {(, 1)", "expected"),
        ] {
            let e = parse_fragment(text, alg.clone()).unwrap_err().to_string();
            assert!(e.contains(needle), "{text}: {e}");
        }
    }

    #[test]
    fn structures() {
        let s = parse_structure(r#"{"algebra": "h3", "kind": "n4"}"#, Path::new(".")).unwrap();
        assert!(s.is_saturated());
        let swapped = r#"{"algebra": "two", "kind": "n4", "N": {"0": ["1"], "1": ["0"]}}"#;
        assert!(!parse_structure(swapped, Path::new(".")).unwrap().is_saturated());
        let missing = r#"{"algebra": "two", "kind": "n4", "N": {"0": ["1"]}}"#;
        assert!(parse_structure(missing, Path::new(".")).unwrap_err().to_string().contains("no entry for `1`"));
        let empty = r#"{"algebra": "two", "kind": "n4", "N": {"0": [], "1": ["0"]}}"#;
        assert!(parse_structure(empty, Path::new(".")).is_err());
    }

    #[test]
    fn derivation_file() {
        let text = r#"{"logic": "n4", "steps": [
            {"formula": "p -> ((p -> p) -> p)", "justification": "Ax1"},
            {"formula": "(p -> ((p -> p) -> p)) -> ((p -> (p -> p)) -> (p -> p))", "justification": "Ax2"},
            {"formula": "(p -> (p -> p)) -> (p -> p)", "justification": "MP 2,1"},
            {"formula": "p -> (p -> p)", "justification": "Ax1"},
            {"formula": "p -> p", "justification": "MP 3,4"}]}"#;
        let d = parse_derivation(text).unwrap();
        assert!(crate::prop::check_derivation(d.logic, &d.premises, &d.steps).is_ok());
    }

    #[test]
    fn tables() {
        let alg = Arc::new(builtin::h3());
        let un = parse_fragment("w = {}\nu = {(w, 1/2)}", alg).unwrap();
        let t = parse_table(r#"{"~(w in u)": "1/2"}"#, &un).unwrap();
        assert_eq!(t.len(), 1);
        assert!(parse_table(r#"{"w in u": "1"}"#, &un).is_err());
        assert!(parse_table(r#"{"~(w in z)": "1"}"#, &un).is_err());
    }
}
