// SPDX-License-Identifier: Apache-2.0

//! Fidel-structure-valued models for paraconsistent set theories.
//!
//! The crate is layered bottom-up:
//!
//! - [`algebra`]: finite distributive lattices with residuals and complements.
//! - [`fidel`]: families of admissible negation (and consistency) values.
//! - [`formula`] and [`prop`]: syntax, Hilbert schemas, propositional
//!   valuations and bivaluations with exhaustive countermodel search.
//! - [`universe`]: bounded-rank names, hat embedding, enumeration.
//! - [`eval`]: the truth-value map for set-theoretic sentences.
//! - [`zf`]: witness constructions and axiom checks.
//! - [`files`] and [`cli`]: input formats and the command-line front end.

pub mod algebra;
pub mod cli;
pub mod eval;
pub mod fidel;
pub mod files;
pub mod formula;
pub mod prop;
pub mod universe;
pub mod zf;

pub use algebra::{Algebra, AlgebraError, Classification, Elem, ElemSet};
pub use eval::{EvalContext, EvalError, NegationPolicy, RuleSet};
pub use fidel::{FidelError, FidelKind, FidelStructure};
pub use formula::{Formula, FormulaError, Term};
pub use universe::{NameId, Universe, UniverseError};

use thiserror::Error;

/// Crate-level error used at I/O boundaries.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Fidel(#[from] FidelError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Prop(#[from] prop::PropError),
    #[error(transparent)]
    Zf(#[from] zf::ZfError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Input(String),
}
