use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use super::NmeRule;
use crate::chase::{skolemize, skolemize_facts, Criterion};
use crate::error::{Error, Result};
use crate::logic::{
    core, core_with_retraction, homomorphisms, instantiate_head, is_useful, isomorphic, AtomSet,
    FreshVars, Substitution,
};

/// A node of the chase tree.
///
/// `input` is the current atomset. `out` holds the instantiated negative
/// bodies of applied triggers, which must never become true; `mbt` ("must
/// be true") holds the negative bodies chosen as the reason a trigger was
/// not applied, which must eventually become true.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub input: AtomSet,
    pub out: Vec<AtomSet>,
    pub mbt: Vec<AtomSet>,
    pub depth: usize,
    #[serde(skip)]
    decided: BTreeSet<(usize, Substitution)>,
}

impl TreeNode {
    fn root(input: AtomSet) -> Self {
        TreeNode {
            input,
            out: Vec::new(),
            mbt: Vec::new(),
            depth: 0,
            decided: BTreeSet::new(),
        }
    }

    /// Some set that must stay false is already true, or is made true by
    /// atoms that must become true.
    pub fn is_unsound(&self) -> bool {
        let mut promised = self.input.clone();
        for m in &self.mbt {
            promised.extend(m.iter().cloned());
        }
        self.out.iter().any(|o| o.is_subset(&promised))
    }

    /// Every promised negative body came true.
    pub fn is_stable(&self) -> bool {
        self.mbt.iter().all(|m| m.is_subset(&self.input))
    }

    fn retract(&mut self, sigma: &Substitution) {
        self.out = self.out.iter().map(|o| sigma.apply(o)).collect();
        self.mbt = self.mbt.iter().map(|m| sigma.apply(m)).collect();
        self.decided = self
            .decided
            .iter()
            .map(|(r, pi)| {
                let moved: Substitution = pi.iter().map(|(v, t)| (v.clone(), sigma.apply_term(t))).collect();
                (*r, moved)
            })
            .collect();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeBudget {
    pub max_depth: usize,
    pub max_nodes: usize,
}

impl Default for TreeBudget {
    fn default() -> Self {
        TreeBudget {
            max_depth: 64,
            max_nodes: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StableSet {
    pub atoms: AtomSet,
    /// Depth of the leaf it was found at.
    pub depth: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StableSets {
    pub criterion: Criterion,
    pub sets: Vec<StableSet>,
    /// The whole tree was explored within the budget, so `sets` lists every
    /// stable set the tree has.
    pub exhaustive: bool,
    pub explored_nodes: usize,
}

impl StableSets {
    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "criterion": self.criterion,
            "exhaustive": self.exhaustive,
            "explored_nodes": self.explored_nodes,
            "sets": self.sets.iter().map(|s| json!({
                "atoms": s.atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "depth": s.depth,
            })).collect::<Vec<_>>(),
        })
    }
}

struct Explorer<'a> {
    rules: &'a [NmeRule],
    criterion: Criterion,
    producible: BTreeSet<Arc<str>>,
    fresh: FreshVars,
}

/// The first undecided trigger that is neither blocked nor redundant.
struct Choice {
    rule: usize,
    trigger: Substitution,
    result: AtomSet,
    retraction: Substitution,
}

impl Explorer<'_> {
    fn next_trigger(&mut self, node: &TreeNode) -> Option<Choice> {
        for (i, rule) in self.rules.iter().enumerate() {
            let positive = rule.pos();
            let body_vars = rule.positive.vars();
            for pi in homomorphisms(&rule.positive, &node.input, &Substitution::new()) {
                let pi = pi.restrict(&body_vars);
                if node.decided.contains(&(i, pi.clone())) {
                    continue;
                }
                if rule.negative.iter().any(|b| pi.apply(b).is_subset(&node.input)) {
                    continue;
                }
                let added = instantiate_head(&positive, &pi, &mut self.fresh);
                let (result, retraction) = match self.criterion {
                    Criterion::Core => {
                        if !is_useful(&pi, &positive, &node.input) {
                            continue;
                        }
                        core_with_retraction(&node.input.union(&added))
                    }
                    _ => {
                        if added.is_subset(&node.input) {
                            continue;
                        }
                        (node.input.union(&added), Substitution::new())
                    }
                };
                return Some(Choice {
                    rule: i,
                    trigger: pi,
                    result,
                    retraction,
                });
            }
        }
        None
    }

    /// Some promised atom can never be derived: it is missing and no rule
    /// head mentions its predicate.
    fn unprovable(&self, node: &TreeNode) -> bool {
        node.mbt.iter().any(|m| {
            m.iter()
                .any(|a| !node.input.contains(a) && !self.producible.contains(&a.predicate))
        })
    }

    fn children(&mut self, node: &TreeNode, c: Choice) -> Vec<TreeNode> {
        let rule = &self.rules[c.rule];
        let negatives: Vec<AtomSet> = rule.negative.iter().map(|b| c.trigger.apply(b)).collect();
        let mut decided = node.decided.clone();
        decided.insert((c.rule, c.trigger));
        let mut positive = TreeNode {
            input: c.result,
            out: node.out.iter().cloned().chain(negatives.iter().cloned()).collect(),
            mbt: node.mbt.clone(),
            depth: node.depth + 1,
            decided: decided.clone(),
        };
        if !c.retraction.is_empty() {
            positive.retract(&c.retraction);
        }
        let mut out = vec![positive];
        for b in negatives {
            let mut mbt = node.mbt.clone();
            mbt.push(b);
            out.push(TreeNode {
                input: node.input.clone(),
                out: node.out.clone(),
                mbt,
                depth: node.depth + 1,
                decided: decided.clone(),
            });
        }
        out
    }
}

/// Explores the chase tree of `(facts, rules)` depth first and collects the
/// stable sets at its leaves, deduplicated up to isomorphism.
///
/// Only the skolem and core criteria are supported. In skolem mode facts
/// and rules are skolemized up front; in core mode every node holds a core.
pub fn stable_sets(
    facts: &AtomSet,
    rules: &[NmeRule],
    criterion: Criterion,
    budget: TreeBudget,
) -> Result<StableSets> {
    let (root, rules): (AtomSet, Vec<NmeRule>) = match criterion {
        Criterion::Skolem => (
            skolemize_facts(facts),
            rules
                .iter()
                .map(|r| {
                    let s = skolemize(&r.pos());
                    NmeRule::new(r.id.clone(), s.body, r.negative.clone(), s.head)
                })
                .collect(),
        ),
        Criterion::Core => (core(facts), rules.to_vec()),
        other => return Err(Error::UnsupportedCriterion(other.to_string())),
    };
    let mut all = root.vars();
    for r in &rules {
        all.extend(r.vars());
    }
    let mut explorer = Explorer {
        rules: &rules,
        criterion,
        producible: rules.iter().flat_map(|r| r.head.predicates()).collect(),
        fresh: FreshVars::above(&all),
    };
    let mut result = StableSets {
        criterion,
        sets: Vec::new(),
        exhaustive: true,
        explored_nodes: 0,
    };
    let mut stack = vec![TreeNode::root(root)];
    while let Some(node) = stack.pop() {
        if result.explored_nodes >= budget.max_nodes {
            result.exhaustive = false;
            break;
        }
        result.explored_nodes += 1;
        if node.is_unsound() || explorer.unprovable(&node) {
            continue;
        }
        match explorer.next_trigger(&node) {
            None => {
                if node.is_stable() {
                    let known = result.sets.iter().any(|s| {
                        s.atoms == node.input || isomorphic(&s.atoms, &node.input)
                    });
                    if !known {
                        result.sets.push(StableSet {
                            atoms: node.input,
                            depth: node.depth,
                        });
                    }
                }
            }
            Some(_) if node.depth >= budget.max_depth => {
                result.exhaustive = false;
            }
            Some(choice) => {
                let children = explorer.children(&node, choice);
                // positive child explored first
                stack.extend(children.into_iter().rev());
            }
        }
    }
    Ok(result)
}
