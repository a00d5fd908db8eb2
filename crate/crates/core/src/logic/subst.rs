use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::atom::{Atom, AtomSet};
use super::term::{Term, Var};

/// A finite map from variables to terms. Unbound variables are left as-is.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn bind(&mut self, var: Var, term: Term) -> Option<Term> {
        self.0.insert(var, term)
    }

    pub(crate) fn unbind(&mut self, var: &Var) {
        self.0.remove(var);
    }

    pub fn get(&self, var: &Var) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn apply_term(&self, term: &Term) -> Term {
        match term {
            Term::Const(_) => term.clone(),
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| term.clone()),
            Term::Func(sym, args) => {
                Term::Func(sym.clone(), args.iter().map(|a| self.apply_term(a)).collect())
            }
        }
    }

    pub fn apply_atom(&self, atom: &Atom) -> Atom {
        Atom {
            predicate: atom.predicate.clone(),
            args: atom.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    pub fn apply(&self, atoms: &AtomSet) -> AtomSet {
        atoms.iter().map(|a| self.apply_atom(a)).collect()
    }

    /// `self ∘ inner`: applying the result equals applying `inner`, then `self`.
    pub fn compose(&self, inner: &Substitution) -> Substitution {
        let mut out: BTreeMap<Var, Term> = inner
            .0
            .iter()
            .map(|(v, t)| (v.clone(), self.apply_term(t)))
            .collect();
        for (v, t) in &self.0 {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution(out)
    }

    /// Keeps only the bindings of the given variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> Substitution {
        Substitution(
            vars.into_iter()
                .filter_map(|v| self.0.get(v).map(|t| (v.clone(), t.clone())))
                .collect(),
        )
    }

    /// Drops bindings `x ↦ x`.
    pub fn without_identity(&self) -> Substitution {
        Substitution(
            self.0
                .iter()
                .filter(|(v, t)| t.as_var() != Some(v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}↦{t}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Substitution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (v, t) in &self.0 {
            map.serialize_entry(&v.to_string(), &t.to_string())?;
        }
        map.end()
    }
}
