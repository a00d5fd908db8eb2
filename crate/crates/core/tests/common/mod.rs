#![allow(dead_code)]

pub mod gen;
pub mod oracles;

use std::path::PathBuf;

use nmchase_core::parser::parse;
use nmchase_core::KnowledgeBase;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.kbr"))
}

pub fn load(name: &str) -> KnowledgeBase {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn index(kb: &KnowledgeBase, id: &str) -> usize {
    kb.rules
        .iter()
        .position(|r| &*r.id == id)
        .unwrap_or_else(|| panic!("no rule {id}"))
}

pub const FIXTURES: &[&str] = &[
    "applicability_core_skolem",
    "applicability_f",
    "applicability_f_prime",
    "chase_oblivious_skolem",
    "chase_restricted_core",
    "chase_skolem_restricted",
    "further_refinements",
    "human",
    "pgd_pgu",
    "self_blocking_pair",
    "selfblock_unifier",
    "stable_ground",
    "swap",
    "termination",
    "weak_acyclicity",
];
