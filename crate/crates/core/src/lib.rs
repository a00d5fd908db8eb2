//! Existential rules with nonmonotonic negation.
//!
//! The crate provides
//! * the chase under the oblivious, frontier, skolem, restricted and core
//!   criteria ([`chase`]),
//! * piece-unification, rule dependencies and unified rules ([`unification`]),
//! * position graphs and the acyclicity properties built on them, from weak
//!   acyclicity up to its unifier-compatible refinement ([`acyclicity`]),
//! * C-stable sets computed with the chase tree, and termination guarantees
//!   that exploit negative bodies ([`nonmonotonic`]),
//! * a text format for knowledge bases ([`parser`]).

pub mod acyclicity;
pub mod chase;
pub mod error;
pub mod logic;
pub mod nonmonotonic;
pub mod parser;
pub mod unification;

pub use error::{Error, Result};
pub use logic::{Atom, AtomSet, FreshVars, Rule, Substitution, Term, Var};
pub use nonmonotonic::NmeRule;
pub use parser::KnowledgeBase;
