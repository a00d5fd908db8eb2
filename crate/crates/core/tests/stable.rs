mod common;

use std::collections::BTreeMap;

use common::load;
use nmchase_core::chase::Criterion;
use nmchase_core::logic::{core, equivalent, isomorphic};
use nmchase_core::nonmonotonic::{stable_sets, StableSets, TreeBudget};
use nmchase_core::parser::parse;
use nmchase_core::{Atom, AtomSet, Error, Term, Var};

fn run(name: &str, c: Criterion) -> StableSets {
    let kb = load(name);
    stable_sets(&kb.facts, &kb.rules, c, TreeBudget::default()).unwrap()
}

/// Replaces every functional term by a variable of its own.
fn unskolemize(set: &AtomSet) -> AtomSet {
    let mut names: BTreeMap<Term, Term> = BTreeMap::new();
    set.iter()
        .map(|a| {
            let args = a
                .args
                .iter()
                .map(|t| match t {
                    Term::Func(..) => {
                        let n = names.len();
                        names
                            .entry(t.clone())
                            .or_insert_with(|| Term::Var(Var::new(format!("S{n}"), 0)))
                            .clone()
                    }
                    t => t.clone(),
                })
                .collect();
            Atom::new(a.predicate.clone(), args)
        })
        .collect()
}

fn atoms(text: &str) -> AtomSet {
    parse(text).unwrap().facts
}

#[test]
fn blocked_trigger_leaves_the_facts() {
    let s = run("applicability_f", Criterion::Skolem);
    assert!(s.exhaustive);
    assert_eq!(s.sets.len(), 1);
    assert_eq!(s.sets[0].atoms.len(), 2);
    assert!(s.sets[0].atoms.is_ground());
}

#[test]
fn equivalent_facts_give_a_different_skolem_stable_set() {
    let s = run("applicability_f_prime", Criterion::Skolem);
    assert!(s.exhaustive);
    assert_eq!(s.sets.len(), 1);
    let set = &s.sets[0].atoms;
    assert_eq!(set.len(), 4);
    assert!(set.iter().any(|a| a.to_string() == "r(a)"));

    let f = load("applicability_f");
    let fp = load("applicability_f_prime");
    assert!(equivalent(&f.facts, &fp.facts));
    let other = &run("applicability_f", Criterion::Skolem).sets[0].atoms;
    assert!(!equivalent(set, other));
}

#[test]
fn core_and_skolem_diverge() {
    let c = run("applicability_core_skolem", Criterion::Core);
    assert!(c.exhaustive);
    assert_eq!(c.sets.len(), 1);
    let expected = atoms("i(a), q(a, Y1), p(a, Y1), t(Y1).");
    assert!(isomorphic(&c.sets[0].atoms, &expected), "{}", c.sets[0].atoms);

    let s = run("applicability_core_skolem", Criterion::Skolem);
    assert!(s.exhaustive);
    assert_eq!(s.sets.len(), 1);
    let set = &s.sets[0].atoms;
    assert!(set.iter().any(|a| a.to_string() == "r(a)"));
    let with_r = atoms("i(a), q(a, Y1), p(a, Y1), t(Y1), r(a).");
    assert!(isomorphic(&core(&unskolemize(set)), &with_r), "{set}");
}

#[test]
fn ground_program_has_its_stable_model() {
    let s = run("stable_ground", Criterion::Skolem);
    assert_eq!(s.sets.len(), 1);
    assert_eq!(s.sets[0].atoms, atoms("p(a), t(a)."));
}

#[test]
fn infinite_core_stable_set_exhausts_the_budget() {
    let s = run("termination", Criterion::Core);
    assert!(!s.exhaustive);
    assert!(s.sets.is_empty());
}

#[test]
fn negation_aware_certified_programs_halt() {
    for name in ["self_blocking_pair", "selfblock_unifier"] {
        let s = run(name, Criterion::Skolem);
        // q(a) has no stable set in either program; the tree still closes
        assert!(s.exhaustive, "{name}");
        assert!(s.sets.is_empty(), "{name}");
    }
}

#[test]
fn negation_free_input_has_one_stable_set() {
    let s = run("chase_skolem_restricted", Criterion::Core);
    assert!(s.exhaustive);
    assert_eq!(s.sets.len(), 1);
}

#[test]
fn only_skolem_and_core_are_accepted() {
    let kb = load("applicability_f");
    for c in [Criterion::Oblivious, Criterion::Frontier, Criterion::Restricted] {
        let err = stable_sets(&kb.facts, &kb.rules, c, TreeBudget::default());
        assert!(matches!(err, Err(Error::UnsupportedCriterion(_))));
    }
}

#[test]
fn json_output() {
    let s = run("stable_ground", Criterion::Skolem);
    let j = s.to_json();
    assert_eq!(j["version"], 1);
    assert_eq!(j["criterion"], "skolem");
    assert_eq!(j["exhaustive"], true);
    assert_eq!(j["sets"][0]["atoms"].as_array().unwrap().len(), 2);
}
