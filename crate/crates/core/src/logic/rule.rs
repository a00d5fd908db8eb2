use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::atom::AtomSet;
use super::hom::find_homomorphism;
use super::subst::Substitution;
use super::term::{FreshVars, Term, Var};
use crate::error::{Error, Result};

/// An existential rule `body → head`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Rule {
    pub id: Arc<str>,
    pub body: AtomSet,
    pub head: AtomSet,
}

impl Rule {
    pub fn new(id: impl Into<Arc<str>>, body: AtomSet, head: AtomSet) -> Self {
        Rule {
            id: id.into(),
            body,
            head,
        }
    }

    /// Variables shared by body and head.
    pub fn frontier(&self) -> BTreeSet<Var> {
        let body = self.body.vars();
        self.head
            .vars()
            .into_iter()
            .filter(|v| body.contains(v))
            .collect()
    }

    /// Variables occurring only in the head.
    pub fn existentials(&self) -> BTreeSet<Var> {
        let body = self.body.vars();
        self.head
            .vars()
            .into_iter()
            .filter(|v| !body.contains(v))
            .collect()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vars = self.body.vars();
        vars.extend(self.head.vars());
        vars
    }

    pub fn rename(&self, sub: &Substitution) -> Rule {
        Rule::new(self.id.clone(), sub.apply(&self.body), sub.apply(&self.head))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        write_atoms(f, &self.body)?;
        write!(f, " -> ")?;
        write_atoms(f, &self.head)
    }
}

pub(crate) fn write_atoms(f: &mut fmt::Formatter<'_>, atoms: &AtomSet) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

/// A renaming of every variable of `vars` to a fresh variable with the same
/// name.
pub fn renaming<'a>(vars: impl IntoIterator<Item = &'a Var>, fresh: &mut FreshVars) -> Substitution {
    vars.into_iter()
        .map(|v| (v.clone(), Term::Var(fresh.fresh(&v.name))))
        .collect()
}

/// Checks that `pi` maps the whole body of `rule` into `f`.
pub fn check_trigger(f: &AtomSet, rule: &Rule, pi: &Substitution) -> Result<()> {
    let image = pi.apply(&rule.body);
    let total = rule.body.vars().iter().all(|v| pi.get(v).is_some());
    if total && image.is_subset(f) {
        Ok(())
    } else {
        Err(Error::NotAHomomorphism {
            rule: rule.id.to_string(),
        })
    }
}

/// The atoms `pi(safe(H))`, with existentials renamed to fresh variables.
pub fn instantiate_head(rule: &Rule, pi: &Substitution, fresh: &mut FreshVars) -> AtomSet {
    let mut sub = pi.restrict(&rule.frontier());
    for z in rule.existentials() {
        sub.bind(z.clone(), Term::Var(fresh.fresh(&z.name)));
    }
    sub.apply(&rule.head)
}

/// `f ∪ pi(safe(H))`. `f` itself is left untouched.
pub fn apply(f: &AtomSet, rule: &Rule, pi: &Substitution, fresh: &mut FreshVars) -> Result<AtomSet> {
    check_trigger(f, rule, pi)?;
    Ok(f.union(&instantiate_head(rule, pi, fresh)))
}

/// A trigger is useful when it cannot be extended to map the head as well.
pub fn is_useful(pi: &Substitution, rule: &Rule, f: &AtomSet) -> bool {
    let seed = pi.restrict(&rule.body.vars());
    find_homomorphism(&rule.head, f, &seed).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::atom::Atom;
    use crate::logic::hom::{entails, isomorphic};

    fn c(n: &str) -> Term {
        Term::constant(n)
    }
    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn atom(p: &str, args: &[Term]) -> Atom {
        Atom::new(p, args.to_vec())
    }
    fn set(atoms: Vec<Atom>) -> AtomSet {
        atoms.into_iter().collect()
    }
    fn bind(pairs: &[(&str, Term)]) -> Substitution {
        pairs
            .iter()
            .map(|(n, t)| (Var::new(*n, 0), t.clone()))
            .collect()
    }

    fn human_rule() -> Rule {
        Rule::new(
            "r",
            set(vec![atom("human", &[v("x")])]),
            set(vec![atom("hasParent", &[v("x"), v("y")]), atom("human", &[v("y")])]),
        )
    }

    #[test]
    fn frontier_and_existentials() {
        let r = human_rule();
        assert_eq!(r.frontier(), [Var::new("x", 0)].into_iter().collect());
        assert_eq!(r.existentials(), [Var::new("y", 0)].into_iter().collect());
    }

    #[test]
    fn apply_mints_fresh_nulls() {
        let r = human_rule();
        let f = set(vec![atom("human", &[c("a")])]);
        let mut fresh = FreshVars::starting_at(1);
        let f1 = apply(&f, &r, &bind(&[("x", c("a"))]), &mut fresh).unwrap();
        let expected = set(vec![
            atom("human", &[c("a")]),
            atom("hasParent", &[c("a"), v("y0")]),
            atom("human", &[v("y0")]),
        ]);
        assert!(isomorphic(&f1, &expected));
        assert!(f.is_subset(&f1));

        // second application from the new null creates another one
        let y0 = f1
            .iter()
            .find(|a| &*a.predicate == "hasParent")
            .unwrap()
            .args[1]
            .clone();
        let f2 = apply(&f1, &r, &bind(&[("x", y0)]), &mut fresh).unwrap();
        assert_eq!(f2.len(), 5);
        assert_eq!(f2.vars().len(), 2);
    }

    #[test]
    fn apply_without_existentials() {
        let r = Rule::new("r", set(vec![atom("q", &[v("x")])]), set(vec![atom("s", &[v("x")])]));
        let f = set(vec![atom("q", &[c("a")])]);
        let out = apply(&f, &r, &bind(&[("x", c("a"))]), &mut FreshVars::starting_at(1)).unwrap();
        assert_eq!(out, set(vec![atom("q", &[c("a")]), atom("s", &[c("a")])]));
    }

    #[test]
    fn apply_rejects_non_homomorphism() {
        let r = human_rule();
        let f = set(vec![atom("human", &[c("a")])]);
        let err = apply(&f, &r, &bind(&[("x", c("b"))]), &mut FreshVars::starting_at(1));
        assert!(matches!(err, Err(Error::NotAHomomorphism { .. })));
        assert!(apply(&f, &r, &Substitution::new(), &mut FreshVars::starting_at(1)).is_err());
    }

    #[test]
    fn usefulness() {
        let r = Rule::new(
            "r",
            set(vec![atom("p", &[v("x")])]),
            set(vec![
                atom("r", &[v("x"), v("y")]),
                atom("r", &[v("y"), v("y")]),
                atom("p", &[v("y")]),
            ]),
        );
        let f = set(vec![
            atom("p", &[c("a")]),
            atom("r", &[c("a"), v("y0")]),
            atom("r", &[v("y0"), v("y0")]),
            atom("p", &[v("y0")]),
        ]);
        assert!(!is_useful(&bind(&[("x", v("y0"))]), &r, &f));
        let small = set(vec![atom("p", &[c("a")])]);
        assert!(is_useful(&bind(&[("x", c("a"))]), &r, &small));

        let datalog = Rule::new("d", set(vec![atom("q", &[v("x")])]), set(vec![atom("s", &[v("x")])]));
        let sat = set(vec![atom("q", &[c("a")]), atom("s", &[c("a")])]);
        assert!(!is_useful(&bind(&[("x", c("a"))]), &datalog, &sat));
    }

    #[test]
    fn useless_application_is_equivalent() {
        let r = human_rule();
        let f = set(vec![
            atom("human", &[c("a")]),
            atom("hasParent", &[c("a"), c("b")]),
            atom("human", &[c("b")]),
        ]);
        let pi = bind(&[("x", c("a"))]);
        assert!(!is_useful(&pi, &r, &f));
        let out = apply(&f, &r, &pi, &mut FreshVars::starting_at(1)).unwrap();
        assert!(entails(&f, &out) && entails(&out, &f));
    }
}
