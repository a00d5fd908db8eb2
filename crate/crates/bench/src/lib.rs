//! Benchmark inputs shared by the criterion targets.

use nmchase_core::parser::parse;
use nmchase_core::{AtomSet, KnowledgeBase};

/// A chain `e(c0,c1), …, e(c{n-1},cn)` with transitive closure and an
/// existential successor rule guarded by `start`.
pub fn chain(n: usize) -> KnowledgeBase {
    let mut text = String::from("start(c0).\n");
    for i in 0..n {
        text.push_str(&format!("e(c{i}, c{}).\n", i + 1));
    }
    text.push_str("T1: e(X, Y) -> t(X, Y).\n");
    text.push_str("T2: t(X, Y), e(Y, Z) -> t(X, Z).\n");
    text.push_str("S: start(X) -> succ(X, Y), node(Y).\n");
    parse(&text).expect("generated input parses")
}

/// `n` copies of a pattern whose core folds most atoms away.
pub fn foldable(n: usize) -> AtomSet {
    let mut text = String::new();
    for i in 0..n {
        text.push_str(&format!("p(a, X{i}), r(X{i}, Y{i}), q(Y{i}).\n"));
    }
    text.push_str("p(a, b), r(b, b), q(b).\n");
    parse(&text).expect("generated input parses").facts
}

/// Rule sets from the core test fixtures, for acyclicity analysis.
pub const RULE_SETS: &[(&str, &str)] = &[
    ("further_refinements", include_str!("../../core/tests/fixtures/further_refinements.kbr")),
    ("pgd_pgu", include_str!("../../core/tests/fixtures/pgd_pgu.kbr")),
    ("selfblock_unifier", include_str!("../../core/tests/fixtures/selfblock_unifier.kbr")),
];

/// A ground program with `n` even negative loops, which has `2^n` stable
/// models.
pub fn choice_program(n: usize) -> KnowledgeBase {
    let mut text = String::new();
    for i in 0..n {
        text.push_str(&format!("A{i}: not b(c{i}) -> a(c{i}).\n"));
        text.push_str(&format!("B{i}: not a(c{i}) -> b(c{i}).\n"));
    }
    parse(&text).expect("generated input parses")
}
