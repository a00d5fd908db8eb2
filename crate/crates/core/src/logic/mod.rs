//! First-order machinery: terms, atoms, atomsets, substitutions,
//! homomorphisms, cores and rule application.

mod atom;
mod hom;
mod rule;
mod subst;
mod term;

pub use atom::{Atom, AtomSet};
pub use hom::{
    core, core_with_retraction, entails, equivalent, find_homomorphism, freeze, homomorphisms,
    isomorphic, Homomorphisms, FROZEN_PREFIX,
};
pub(crate) use rule::write_atoms;
pub use rule::{apply, check_trigger, instantiate_head, is_useful, renaming, Rule};
pub use subst::Substitution;
pub use term::{FreshVars, Term, Var};
