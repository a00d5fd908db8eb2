//! Existential rules with nonmonotonic negation: the rule type, self-blocking
//! detection, negation-aware dependencies, the chase tree and C-stable sets.

mod analysis;
mod tree;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logic::{write_atoms, AtomSet, Rule, Substitution, Var};

pub use analysis::{nm_analyze, nm_depends, nm_grd, NmReport};
pub use tree::{stable_sets, StableSet, StableSets, TreeBudget, TreeNode};

/// `B⁺, not B⁻₁, …, not B⁻ₖ → H`. With no negative bodies this is a plain
/// existential rule.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NmeRule {
    pub id: Arc<str>,
    pub positive: AtomSet,
    pub negative: Vec<AtomSet>,
    pub head: AtomSet,
}

impl NmeRule {
    pub fn new(
        id: impl Into<Arc<str>>,
        positive: AtomSet,
        negative: Vec<AtomSet>,
        head: AtomSet,
    ) -> Self {
        NmeRule {
            id: id.into(),
            positive,
            negative,
            head,
        }
    }

    /// The positive rule obtained by dropping every negative body.
    pub fn pos(&self) -> Rule {
        Rule::new(self.id.clone(), self.positive.clone(), self.head.clone())
    }

    pub fn has_negation(&self) -> bool {
        !self.negative.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vars = self.positive.vars();
        vars.extend(self.head.vars());
        for b in &self.negative {
            vars.extend(b.vars());
        }
        vars
    }

    /// Every variable of a negative body must occur in the positive body.
    pub fn check_safe(&self) -> Result<()> {
        let positive = self.positive.vars();
        for body in &self.negative {
            if let Some(v) = body.vars().into_iter().find(|v| !positive.contains(v)) {
                return Err(Error::Unsafe {
                    rule: self.id.to_string(),
                    var: v.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Some negative body is contained in `B⁺ ∪ H`, so no application of
    /// the rule can ever be sound.
    pub fn is_self_blocking(&self) -> bool {
        let support = self.positive.union(&self.head);
        self.negative.iter().any(|b| b.is_subset(&support))
    }

    pub fn rename(&self, sub: &Substitution) -> NmeRule {
        NmeRule {
            id: self.id.clone(),
            positive: sub.apply(&self.positive),
            negative: self.negative.iter().map(|b| sub.apply(b)).collect(),
            head: sub.apply(&self.head),
        }
    }
}

impl From<Rule> for NmeRule {
    fn from(r: Rule) -> Self {
        NmeRule::new(r.id, r.body, Vec::new(), r.head)
    }
}

impl fmt::Display for NmeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        write_atoms(f, &self.positive)?;
        for (i, b) in self.negative.iter().enumerate() {
            if i > 0 || !self.positive.is_empty() {
                write!(f, ", ")?;
            }
            if b.len() == 1 {
                write!(f, "not ")?;
                write_atoms(f, b)?;
            } else {
                write!(f, "not (")?;
                write_atoms(f, b)?;
                write!(f, ")")?;
            }
        }
        write!(f, " -> ")?;
        write_atoms(f, &self.head)
    }
}

pub fn pos(rules: &[NmeRule]) -> Vec<Rule> {
    rules.iter().map(NmeRule::pos).collect()
}

pub fn self_blocking(rule: &NmeRule) -> bool {
    rule.is_self_blocking()
}
