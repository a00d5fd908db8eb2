//! Naive reference implementations used to check the engine.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nmchase_core::{Atom, AtomSet, NmeRule, Substitution, Term, Var};

/// Every total map from `vars(source)` to `terms(target)` sending `source`
/// into `target`.
pub fn homomorphisms(source: &AtomSet, target: &AtomSet) -> BTreeSet<Substitution> {
    let vars: Vec<Var> = source.vars().into_iter().collect();
    let terms: Vec<Term> = target.terms().into_iter().collect();
    let mut out = BTreeSet::new();
    if vars.is_empty() {
        if source.is_subset(target) {
            out.insert(Substitution::new());
        }
        return out;
    }
    if terms.is_empty() {
        return out;
    }
    let mut digits = vec![0usize; vars.len()];
    loop {
        let s: Substitution = vars
            .iter()
            .zip(&digits)
            .map(|(v, &d)| (v.clone(), terms[d].clone()))
            .collect();
        if s.apply(source).is_subset(target) {
            out.insert(s);
        }
        let mut k = 0;
        while k < digits.len() {
            digits[k] += 1;
            if digits[k] < terms.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
        if k == digits.len() {
            return out;
        }
    }
}

pub fn entails(f: &AtomSet, q: &AtomSet) -> bool {
    !homomorphisms(q, f).is_empty()
}

/// A smallest subset of `f` that `f` maps into.
pub fn core(f: &AtomSet) -> AtomSet {
    let atoms: Vec<&Atom> = f.iter().collect();
    let n = atoms.len();
    let mut best: Option<AtomSet> = None;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if best.as_ref().is_some_and(|b| b.len() <= size) {
            continue;
        }
        let s: AtomSet = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| atoms[i].clone())
            .collect();
        if entails(&s, f) {
            best = Some(s);
        }
    }
    best.unwrap_or_default()
}

/// Stable models of a ground program by the Gelfond–Lifschitz reduct, over
/// every subset of the atoms mentioned.
pub fn stable_models(facts: &AtomSet, rules: &[NmeRule]) -> Vec<AtomSet> {
    let mut universe: BTreeSet<Atom> = facts.iter().cloned().collect();
    for r in rules {
        universe.extend(r.positive.iter().cloned());
        universe.extend(r.head.iter().cloned());
        for b in &r.negative {
            universe.extend(b.iter().cloned());
        }
    }
    let universe: Vec<Atom> = universe.into_iter().collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << universe.len()) {
        let m: AtomSet = (0..universe.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| universe[i].clone())
            .collect();
        let reduct: Vec<&NmeRule> = rules
            .iter()
            .filter(|r| r.negative.iter().all(|b| !b.is_subset(&m)))
            .collect();
        let mut least = facts.clone();
        loop {
            let before = least.len();
            for r in &reduct {
                if r.positive.is_subset(&least) {
                    least.extend(r.head.iter().cloned());
                }
            }
            if least.len() == before {
                break;
            }
        }
        if least == m {
            out.push(m);
        }
    }
    out
}

/// Replaces every functional term and every skolem constant of a fact
/// variable by a variable of its own.
pub fn unskolemize(set: &AtomSet) -> AtomSet {
    let mut names: BTreeMap<Term, Term> = BTreeMap::new();
    set.iter()
        .map(|a| {
            let args = a
                .args
                .iter()
                .map(|t| {
                    let skolem = match t {
                        Term::Func(..) => true,
                        Term::Const(c) => c.starts_with("sk_"),
                        Term::Var(_) => false,
                    };
                    if !skolem {
                        return t.clone();
                    }
                    let n = names.len();
                    names
                        .entry(t.clone())
                        .or_insert_with(|| Term::Var(Var::new(format!("S{n}"), 0)))
                        .clone()
                })
                .collect();
            Atom::new(a.predicate.clone(), args)
        })
        .collect()
}
