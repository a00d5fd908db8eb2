//! Seeded generators of small random atomsets, rule sets and programs.
#![allow(dead_code)]

use nmchase_core::{Atom, AtomSet, NmeRule, Rule, Term, Var};
use rand::seq::SliceRandom;
use rand::Rng;

const PREDICATES: &[(&str, usize)] = &[("p", 2), ("q", 1), ("r", 2), ("s", 1)];
const CONSTANTS: &[&str] = &["a", "b"];

fn atom_over(rng: &mut impl Rng, terms: &[Term]) -> Atom {
    let &(p, n) = PREDICATES.choose(rng).expect("non-empty");
    let args = (0..n).map(|_| terms.choose(rng).expect("non-empty").clone()).collect();
    Atom::new(p, args)
}

/// Up to `max_atoms` atoms over up to `max_vars` variables and two
/// constants.
pub fn atomset(rng: &mut impl Rng, max_vars: usize, max_atoms: usize) -> AtomSet {
    let nvars = rng.gen_range(0..=max_vars);
    let mut terms: Vec<Term> = (0..nvars).map(|i| Term::Var(Var::new(format!("X{i}"), 0))).collect();
    terms.extend(CONSTANTS.iter().map(|c| Term::constant(c)));
    let n = rng.gen_range(1..=max_atoms);
    (0..n).map(|_| atom_over(rng, &terms)).collect()
}

/// A ground atomset over the two constants.
pub fn ground_facts(rng: &mut impl Rng, max_atoms: usize) -> AtomSet {
    let terms: Vec<Term> = CONSTANTS.iter().map(|c| Term::constant(c)).collect();
    let n = rng.gen_range(1..=max_atoms);
    (0..n).map(|_| atom_over(rng, &terms)).collect()
}

/// A rule with up to `max_side` atoms in body and head. Variables are
/// scoped by `scope` so rules of one set never share variables.
pub fn rule(rng: &mut impl Rng, id: &str, scope: u32, max_side: usize) -> Rule {
    let var = |n: &str| Term::Var(Var::new(n, scope));
    let body_terms: Vec<Term> = ["X", "Y", "Z"].iter().map(|n| var(n)).collect();
    let nb = rng.gen_range(1..=max_side);
    let body: AtomSet = (0..nb).map(|_| atom_over(rng, &body_terms)).collect();
    let mut head_terms: Vec<Term> = body.vars().into_iter().map(Term::Var).collect();
    if rng.gen_bool(0.5) {
        head_terms.push(var("E"));
    }
    if rng.gen_bool(0.1) {
        head_terms.push(Term::constant("a"));
    }
    let nh = rng.gen_range(1..=max_side);
    let head: AtomSet = (0..nh).map(|_| atom_over(rng, &head_terms)).collect();
    Rule::new(id, body, head)
}

pub fn rules(rng: &mut impl Rng, max_rules: usize, max_side: usize) -> Vec<Rule> {
    let n = rng.gen_range(1..=max_rules);
    (0..n)
        .map(|i| rule(rng, &format!("R{}", i + 1), i as u32 + 1, max_side))
        .collect()
}

/// A ground program over at most `max_atoms` propositional atoms `g(cᵢ)`,
/// as facts and rules with conjunctive negative bodies.
pub fn ground_program(rng: &mut impl Rng, max_atoms: usize, max_rules: usize) -> (AtomSet, Vec<NmeRule>) {
    let universe: Vec<Atom> = (0..rng.gen_range(1..=max_atoms))
        .map(|i| Atom::new("g", vec![Term::constant(&format!("c{i}"))]))
        .collect();
    let pick = |rng: &mut _, k: usize| -> AtomSet {
        (0..k).map(|_| universe.choose(rng).expect("non-empty").clone()).collect()
    };
    let facts = {
        let k = rng.gen_range(0..=2);
        pick(rng, k)
    };
    let n = rng.gen_range(1..=max_rules);
    let rules = (0..n)
        .map(|i| {
            let kb = rng.gen_range(0..=2);
            let positive = pick(rng, kb);
            let kn = rng.gen_range(0..=2);
            let negative: Vec<AtomSet> = (0..kn)
                .map(|_| {
                    let k = rng.gen_range(1..=2);
                    pick(rng, k)
                })
                .collect();
            let head = pick(rng, 1);
            NmeRule::new(format!("P{i}"), positive, negative, head)
        })
        .collect();
    (facts, rules)
}
