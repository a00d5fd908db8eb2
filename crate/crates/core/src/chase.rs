//! Breadth-first chase under the oblivious, frontier, skolem, restricted and
//! core criteria.
//!
//! Each round collects every trigger against the atomset as it stood at the
//! start of the round, then applies them one by one in a fixed order (rule
//! order, then homomorphism order), letting the criterion skip redundant
//! applications. The core criterion folds the atomset to its core once at
//! the end of every round. A run terminates when a whole round leaves the
//! atomset unchanged.
//!
//! Under the restricted criterion termination depends on the trigger order;
//! the fixed order makes runs reproducible, not order-independent.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::logic::{
    core_with_retraction, entails, homomorphisms, instantiate_head, is_useful, Atom, AtomSet,
    FreshVars, Rule, Substitution, Term, Var,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Oblivious,
    Frontier,
    Skolem,
    Restricted,
    Core,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Oblivious,
        Criterion::Frontier,
        Criterion::Skolem,
        Criterion::Restricted,
        Criterion::Core,
    ];

    /// Local criteria never remove atoms: every produced atomset contains
    /// the previous ones.
    pub fn is_local(self) -> bool {
        self != Criterion::Core
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Oblivious => "oblivious",
            Criterion::Frontier => "frontier",
            Criterion::Skolem => "skolem",
            Criterion::Restricted => "restricted",
            Criterion::Core => "core",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown chase criterion `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_rounds: usize,
    pub max_steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_rounds: 64,
            max_steps: 10_000,
        }
    }
}

/// One entry of a chase trace.
///
/// Rule applications carry the rule id and trigger. The end-of-round fold of
/// the core criterion is recorded as a step without a rule whose
/// `simplification` is the folding endomorphism and whose `removed` lists the
/// atoms it dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivationStep {
    pub round: usize,
    pub rule: Option<Arc<str>>,
    pub trigger: Substitution,
    pub added: AtomSet,
    pub removed: AtomSet,
    pub simplification: Substitution,
    pub skipped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Terminated,
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct ChaseResult {
    pub status: Status,
    pub produced: AtomSet,
    pub trace: Vec<DerivationStep>,
    pub rounds: usize,
}

impl ChaseResult {
    pub fn terminated(&self) -> bool {
        self.status == Status::Terminated
    }
}

/// Skolem function symbol for existential `var` of rule `rule_id`.
pub fn skolem_symbol(rule_id: &str, var: &Var) -> String {
    format!("f_{rule_id}_{}", var.name)
}

/// Replaces each existential variable by a functional term over the
/// frontier, taken in order of first occurrence in the body.
pub fn skolemize(rule: &Rule) -> Rule {
    let frontier = rule.frontier();
    let mut ordered: Vec<Var> = Vec::new();
    for atom in &rule.body {
        for v in vars_in_order(atom) {
            if frontier.contains(&v) && !ordered.contains(&v) {
                ordered.push(v);
            }
        }
    }
    let args: Vec<Term> = ordered.into_iter().map(Term::Var).collect();
    let sub: Substitution = rule
        .existentials()
        .into_iter()
        .map(|z| {
            let t = Term::Func(skolem_symbol(&rule.id, &z).into(), args.clone());
            (z, t)
        })
        .collect();
    Rule::new(rule.id.clone(), rule.body.clone(), sub.apply(&rule.head))
}

/// Replaces the labelled nulls of a fact base by 0-ary skolem terms.
pub fn skolemize_facts(facts: &AtomSet) -> AtomSet {
    let sub: Substitution = facts
        .vars()
        .into_iter()
        .map(|v| {
            let t = Term::Func(format!("sk_{v}").into(), Vec::new());
            (v, t)
        })
        .collect();
    sub.apply(facts)
}

fn vars_in_order(atom: &Atom) -> Vec<Var> {
    let mut out = Vec::new();
    for t in &atom.args {
        let mut vs = BTreeSet::new();
        t.collect_vars(&mut vs);
        for v in vs {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// A chase in progress. Drive it with [`Chase::round`] or use [`run`].
pub struct Chase {
    rules: Vec<Rule>,
    criterion: Criterion,
    current: AtomSet,
    applied: BTreeSet<(usize, Substitution)>,
    fresh: FreshVars,
    trace: Vec<DerivationStep>,
    rounds: usize,
    steps: usize,
}

impl Chase {
    pub fn new(facts: &AtomSet, rules: &[Rule], criterion: Criterion) -> Self {
        let mut vars = facts.vars();
        for r in rules {
            vars.extend(r.vars());
        }
        let fresh = FreshVars::above(&vars);
        let rules = match criterion {
            Criterion::Skolem => rules.iter().map(skolemize).collect(),
            _ => rules.to_vec(),
        };
        let current = if criterion == Criterion::Core {
            core_with_retraction(facts).0
        } else {
            facts.clone()
        };
        Chase {
            rules,
            criterion,
            current,
            applied: BTreeSet::new(),
            fresh,
            trace: Vec::new(),
            rounds: 0,
            steps: 0,
        }
    }

    pub fn current(&self) -> &AtomSet {
        &self.current
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn trace(&self) -> &[DerivationStep] {
        &self.trace
    }

    /// Runs one breadth-first round. Returns `Some(changed)`, or `None` if
    /// the step budget ran out part-way through the round.
    pub fn round(&mut self, max_steps: usize) -> Option<bool> {
        self.rounds += 1;
        let round = self.rounds;
        let start = self.current.clone();
        let mut triggers = Vec::new();
        for (idx, rule) in self.rules.iter().enumerate() {
            for pi in homomorphisms(&rule.body, &start, &Substitution::new()) {
                triggers.push((idx, pi));
            }
        }
        for (idx, pi) in triggers {
            let rule = &self.rules[idx];
            let skip = match self.criterion {
                Criterion::Oblivious | Criterion::Skolem => !self.applied.insert((idx, pi.clone())),
                Criterion::Frontier => {
                    let key = pi.restrict(&rule.frontier());
                    !self.applied.insert((idx, key))
                }
                Criterion::Restricted | Criterion::Core => !is_useful(&pi, rule, &self.current),
            };
            if skip {
                self.trace.push(DerivationStep {
                    round,
                    rule: Some(rule.id.clone()),
                    trigger: pi,
                    added: AtomSet::new(),
                    removed: AtomSet::new(),
                    simplification: Substitution::new(),
                    skipped: true,
                });
                continue;
            }
            if self.steps >= max_steps {
                return None;
            }
            self.steps += 1;
            let produced = instantiate_head(rule, &pi, &mut self.fresh);
            let added: AtomSet = produced.difference(&self.current);
            self.current.extend(added.iter().cloned());
            self.trace.push(DerivationStep {
                round,
                rule: Some(rule.id.clone()),
                trigger: pi,
                added,
                removed: AtomSet::new(),
                simplification: Substitution::new(),
                skipped: false,
            });
        }
        if self.criterion == Criterion::Core {
            let (core, sigma) = core_with_retraction(&self.current);
            let sigma = sigma.without_identity();
            if !sigma.is_empty() {
                let removed = self.current.difference(&core);
                self.current = core;
                self.trace.push(DerivationStep {
                    round,
                    rule: None,
                    trigger: Substitution::new(),
                    added: AtomSet::new(),
                    removed,
                    simplification: sigma,
                    skipped: false,
                });
            }
        }
        Some(self.current != start)
    }

    pub fn finish(self, status: Status) -> ChaseResult {
        ChaseResult {
            status,
            produced: self.current,
            trace: self.trace,
            rounds: self.rounds,
        }
    }
}

/// Runs the chase until a round changes nothing or the budget is spent.
pub fn run(facts: &AtomSet, rules: &[Rule], criterion: Criterion, budget: Budget) -> ChaseResult {
    let mut chase = Chase::new(facts, rules, criterion);
    while chase.rounds() < budget.max_rounds {
        match chase.round(budget.max_steps) {
            Some(false) => return chase.finish(Status::Terminated),
            Some(true) => {}
            None => break,
        }
    }
    chase.finish(Status::BudgetExhausted)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "answer", rename_all = "kebab-case")]
pub enum Answer {
    /// Entailed by the atomset produced after `round` rounds.
    Yes { round: usize },
    /// The chase terminated without entailing the query.
    No,
    /// Not entailed within the budget; no verdict.
    NoWithinBudget,
}

/// Answers a Boolean conjunctive query by chasing round by round and
/// testing entailment after each round.
pub fn answer(
    facts: &AtomSet,
    rules: &[Rule],
    query: &AtomSet,
    criterion: Criterion,
    budget: Budget,
) -> Answer {
    let mut chase = Chase::new(facts, rules, criterion);
    if entails(chase.current(), query) {
        return Answer::Yes { round: 0 };
    }
    while chase.rounds() < budget.max_rounds {
        match chase.round(budget.max_steps) {
            Some(changed) => {
                if entails(chase.current(), query) {
                    return Answer::Yes {
                        round: chase.rounds(),
                    };
                }
                if !changed {
                    return Answer::No;
                }
            }
            None => break,
        }
    }
    Answer::NoWithinBudget
}
