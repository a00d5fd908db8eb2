//! Homomorphism search between atomsets and the notions built on it:
//! entailment, cores, isomorphism and freezing.

use std::collections::{BTreeMap, BTreeSet};

use super::atom::{Atom, AtomSet};
use super::subst::Substitution;
use super::term::{Term, Var};

/// Prefix of the constants introduced by [`freeze`]. The parser never
/// produces identifiers starting with it.
pub const FROZEN_PREFIX: &str = "!";

/// Matches `pattern` against `target`, extending `s`. Newly bound
/// variables are pushed on `trail` so a failed or finished attempt can be
/// undone.
fn match_term(pattern: &Term, target: &Term, s: &mut Substitution, trail: &mut Vec<Var>) -> bool {
    match pattern {
        Term::Const(_) => pattern == target,
        Term::Var(v) => match s.get(v) {
            Some(bound) => bound == target,
            None => {
                s.bind(v.clone(), target.clone());
                trail.push(v.clone());
                true
            }
        },
        Term::Func(sym, args) => match target {
            Term::Func(tsym, targs) if tsym == sym && targs.len() == args.len() => args
                .iter()
                .zip(targs)
                .all(|(p, t)| match_term(p, t, s, trail)),
            _ => false,
        },
    }
}

fn match_atom(pattern: &Atom, target: &Atom, s: &mut Substitution, trail: &mut Vec<Var>) -> bool {
    pattern.predicate == target.predicate
        && pattern.args.len() == target.args.len()
        && pattern
            .args
            .iter()
            .zip(&target.args)
            .all(|(p, t)| match_term(p, t, s, trail))
}

fn undo(s: &mut Substitution, trail: &mut Vec<Var>) {
    for v in trail.drain(..) {
        s.unbind(&v);
    }
}

/// Lazily enumerates every extension of a seed substitution mapping the
/// source atomset into the target. See [`homomorphisms`].
pub struct Homomorphisms<'a> {
    order: Vec<&'a Atom>,
    candidates: Vec<Vec<&'a Atom>>,
    seed: Option<Substitution>,
    current: Substitution,
    /// Next candidate index and bindings made at each depth.
    frames: Vec<(usize, Vec<Var>)>,
}

impl<'a> Iterator for Homomorphisms<'a> {
    type Item = Substitution;

    fn next(&mut self) -> Option<Substitution> {
        if let Some(seed) = self.seed.take() {
            if self.order.is_empty() {
                return Some(seed);
            }
            self.current = seed;
            self.frames.push((0, Vec::new()));
        }
        while let Some(depth) = self.frames.len().checked_sub(1) {
            let (next, trail) = self.frames.last_mut().expect("non-empty");
            undo(&mut self.current, trail);
            let Some(&cand) = self.candidates[depth].get(*next) else {
                self.frames.pop();
                continue;
            };
            *next += 1;
            if !match_atom(self.order[depth], cand, &mut self.current, trail) {
                continue;
            }
            if depth + 1 == self.order.len() {
                return Some(self.current.clone());
            }
            self.frames.push((0, Vec::new()));
        }
        None
    }
}

/// All substitutions `σ` extending `seed` with `σ(source) ⊆ target`.
///
/// Source atoms are matched by backtracking. The atom with the fewest
/// candidate images goes first; after that, atoms sharing variables with
/// already placed atoms are preferred so bound variables prune early.
pub fn homomorphisms<'a>(
    source: &'a AtomSet,
    target: &'a AtomSet,
    seed: &Substitution,
) -> Homomorphisms<'a> {
    let mut by_pred: BTreeMap<(&str, usize), Vec<&'a Atom>> = BTreeMap::new();
    for a in target {
        by_pred
            .entry((&a.predicate, a.arity()))
            .or_default()
            .push(a);
    }
    let mut pending: Vec<(&'a Atom, Vec<&'a Atom>)> = source
        .iter()
        .map(|a| {
            let cands = by_pred
                .get(&(&*a.predicate, a.arity()))
                .map(|c| {
                    c.iter()
                        .copied()
                        .filter(|t| match_atom(a, t, &mut seed.clone(), &mut Vec::new()))
                        .collect()
                })
                .unwrap_or_default();
            (a, cands)
        })
        .collect();

    let mut bound: BTreeSet<Var> = seed.iter().map(|(v, _)| v.clone()).collect();
    let mut order = Vec::with_capacity(pending.len());
    let mut candidates = Vec::with_capacity(pending.len());
    while !pending.is_empty() {
        let best = (0..pending.len())
            .min_by_key(|&i| {
                let (atom, cands) = &pending[i];
                let vars = atom.vars();
                let connected = vars.is_empty() || vars.iter().any(|v| bound.contains(v));
                (!connected, cands.len())
            })
            .expect("pending is non-empty");
        let (atom, cands) = pending.swap_remove(best);
        bound.extend(atom.vars());
        order.push(atom);
        candidates.push(cands);
    }
    Homomorphisms {
        order,
        candidates,
        seed: Some(seed.clone()),
        current: Substitution::new(),
        frames: Vec::new(),
    }
}

pub fn find_homomorphism(
    source: &AtomSet,
    target: &AtomSet,
    seed: &Substitution,
) -> Option<Substitution> {
    homomorphisms(source, target, seed).next()
}

/// `f ⊨ q`: some homomorphism maps `q` into `f`.
pub fn entails(f: &AtomSet, q: &AtomSet) -> bool {
    find_homomorphism(q, f, &Substitution::new()).is_some()
}

pub fn equivalent(a: &AtomSet, b: &AtomSet) -> bool {
    entails(a, b) && entails(b, a)
}

/// The core of `f` together with the retraction that produced it (the
/// composition of all folding endomorphisms, restricted to `vars(f)`).
///
/// Folds one atom at a time: whenever some homomorphism maps `f` into
/// `f \ {a}`, `f` is replaced by its image and the search restarts.
pub fn core_with_retraction(f: &AtomSet) -> (AtomSet, Substitution) {
    let vars = f.vars();
    let mut current = f.clone();
    let mut sigma: Substitution = vars
        .iter()
        .map(|v| (v.clone(), Term::Var(v.clone())))
        .collect();
    'outer: loop {
        for atom in current.iter().filter(|a| !a.is_ground()) {
            let mut smaller = current.clone();
            smaller.remove(atom);
            if let Some(h) = find_homomorphism(&current, &smaller, &Substitution::new()) {
                current = h.apply(&current);
                sigma = h.compose(&sigma);
                continue 'outer;
            }
        }
        break;
    }
    (current, sigma.restrict(&vars))
}

pub fn core(f: &AtomSet) -> AtomSet {
    core_with_retraction(f).0
}

/// `true` iff some bijective variable renaming maps `a` onto `b`.
pub fn isomorphic(a: &AtomSet, b: &AtomSet) -> bool {
    if a.len() != b.len() || a.vars().len() != b.vars().len() {
        return false;
    }
    homomorphisms(a, b, &Substitution::new()).any(|h| {
        let mut images = BTreeSet::new();
        h.iter()
            .all(|(_, t)| t.is_var() && images.insert(t.clone()))
            && h.apply(a).len() == b.len()
    })
}

/// Replaces each variable by a reserved constant, bijectively. Returns the
/// frozen atomset and the freezing substitution.
pub fn freeze(a: &AtomSet) -> (AtomSet, Substitution) {
    let sub: Substitution = a
        .vars()
        .into_iter()
        .map(|v| {
            let c = Term::Const(format!("{FROZEN_PREFIX}{v}").into());
            (v, c)
        })
        .collect();
    (sub.apply(a), sub)
}
