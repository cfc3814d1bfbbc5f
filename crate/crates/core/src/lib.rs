//! Satisfiability, model checking and reductions for star-free Public
//! Observation Logic.

use std::sync::Arc;

pub mod formula;
pub mod model;
pub mod obsexpr;
pub mod oracle;
pub mod pal;
pub mod reductions;
pub mod semantics;
pub mod syntax;
pub mod tableau;

/// Interned-by-sharing name of a letter, agent or atom.
pub type Symbol = Arc<str>;
