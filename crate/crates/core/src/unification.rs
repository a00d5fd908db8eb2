//! Unifiers of rule bodies with rule heads, rule dependency and the graph of
//! rule dependencies (GRD), unified (composed) rules, agglomerated rules, and
//! compatibility of unifiers and unifier sequences.
//!
//! A unifier is stored as a partition of the terms of `B' ∪ H'`. Terms are
//! tagged with the side they come from, so a rule can be unified with itself
//! without renaming, and lifting a unifier through a composition is a matter
//! of relabelling and merging classes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::acyclicity::{PositionGraph, Side};
use crate::error::{Error, Result};
use crate::logic::{
    freeze, homomorphisms, instantiate_head, is_useful, renaming, Atom, AtomSet, FreshVars, Rule,
    Substitution, Term, Var,
};
use crate::nonmonotonic::NmeRule;

/// Rules with more body or head atoms than this are not unified; the pair
/// is treated conservatively and downstream verdicts report `unknown`
/// instead of a violation.
pub const MAX_UNIFY_ATOMS: usize = 12;

/// Reserved unary predicate of agglomerated rules. The parser cannot produce
/// it.
pub const FR_PREDICATE: &str = "#fr";

/// A term of `B' ∪ H'`, tagged with its side. Ground terms are shared by
/// both sides.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Ground(Term),
    Var(Side, Var),
}

impl Slot {
    pub fn of(term: &Term, side: Side) -> Slot {
        match term {
            Term::Var(v) => Slot::Var(side, v.clone()),
            t => Slot::Ground(t.clone()),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Ground(t) => write!(f, "{t}"),
            Slot::Var(Side::Body, v) => write!(f, "{v}"),
            Slot::Var(Side::Head, v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unifier {
    /// Rule whose head is unified (`H'` side).
    pub producer: Arc<str>,
    /// Rule whose body is unified (`B'` side).
    pub consumer: Arc<str>,
    /// Indices into the consumer's (positive) body.
    pub body_part: BTreeSet<usize>,
    /// Indices into the producer's head.
    pub head_part: BTreeSet<usize>,
    pub classes: Vec<BTreeSet<Slot>>,
    /// Admissible piece-unifier.
    pub piece: bool,
}

impl Unifier {
    pub fn class_of(&self, slot: &Slot) -> Option<&BTreeSet<Slot>> {
        self.classes.iter().find(|c| c.contains(slot))
    }

    pub fn same_class(&self, a: &Slot, b: &Slot) -> bool {
        a == b || self.class_of(a).is_some_and(|c| c.contains(b))
    }

    /// Non-singleton classes, for display and tests.
    pub fn merges(&self) -> Vec<&BTreeSet<Slot>> {
        self.classes.iter().filter(|c| c.len() > 1).collect()
    }
}

impl fmt::Display for Unifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}⟶{} [", self.producer, self.consumer)?;
        for (i, c) in self.merges().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let names: Vec<String> = c.iter().map(Slot::to_string).collect();
            write!(f, "{{{}}}", names.join(","))?;
        }
        write!(f, "]")
    }
}

impl Serialize for Unifier {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Union-find over slots.
#[derive(Default)]
struct Partition {
    index: BTreeMap<Slot, usize>,
    parent: Vec<usize>,
}

impl Partition {
    fn id(&mut self, s: &Slot) -> usize {
        if let Some(&i) = self.index.get(s) {
            return i;
        }
        let i = self.parent.len();
        self.parent.push(i);
        self.index.insert(s.clone(), i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: &Slot, b: &Slot) {
        let (a, b) = (self.id(a), self.id(b));
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    /// Canonical classes, or `None` when two distinct ground terms merge.
    fn classes(mut self) -> Option<Vec<BTreeSet<Slot>>> {
        let mut groups: BTreeMap<usize, BTreeSet<Slot>> = BTreeMap::new();
        let slots: Vec<(Slot, usize)> = self.index.iter().map(|(s, &i)| (s.clone(), i)).collect();
        for (s, i) in slots {
            let r = self.find(i);
            groups.entry(r).or_default().insert(s);
        }
        let mut classes: Vec<BTreeSet<Slot>> = groups.into_values().collect();
        for c in &classes {
            if c.iter().filter(|s| matches!(s, Slot::Ground(_))).count() > 1 {
                return None;
            }
        }
        classes.sort();
        Some(classes)
    }
}

fn atoms(set: &AtomSet) -> Vec<&Atom> {
    set.iter().collect()
}

/// Admissibility: a class holding an existential variable of the producer
/// head holds no ground term, no other producer-head variable and no
/// separating variable of `B'`.
fn admissible(
    classes: &[BTreeSet<Slot>],
    existentials: &BTreeSet<Var>,
    separating: &BTreeSet<Var>,
) -> bool {
    classes.iter().all(|class| {
        let has_existential = class
            .iter()
            .any(|s| matches!(s, Slot::Var(Side::Head, v) if existentials.contains(v)));
        if !has_existential {
            return true;
        }
        let head_vars = class
            .iter()
            .filter(|s| matches!(s, Slot::Var(Side::Head, _)))
            .count();
        head_vars == 1
            && class.iter().all(|s| match s {
                Slot::Ground(_) => false,
                Slot::Var(Side::Body, v) => !separating.contains(v),
                Slot::Var(Side::Head, _) => true,
            })
    })
}

/// All unifiers of the body of `consumer` with the head of `producer`, over
/// every non-empty choice of `B'`, deduplicated. With `require_piece`, only
/// admissible piece-unifiers are kept.
///
/// Returns `None` when a side exceeds [`MAX_UNIFY_ATOMS`].
pub fn unifiers(consumer: &Rule, producer: &Rule, require_piece: bool) -> Option<Vec<Unifier>> {
    let body = atoms(&consumer.body);
    let head = atoms(&producer.head);
    if body.len() > MAX_UNIFY_ATOMS || head.len() > MAX_UNIFY_ATOMS {
        return None;
    }
    let existentials = producer.existentials();
    let candidates: Vec<Vec<usize>> = body
        .iter()
        .map(|b| {
            head.iter()
                .enumerate()
                .filter(|(_, h)| h.predicate == b.predicate && h.arity() == b.arity())
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << body.len()) {
        let chosen: Vec<usize> = (0..body.len()).filter(|i| mask & (1 << i) != 0).collect();
        if chosen.iter().any(|&i| candidates[i].is_empty()) {
            continue;
        }
        let in_part: BTreeSet<Var> = chosen.iter().flat_map(|&i| body[i].vars()).collect();
        let outside: BTreeSet<Var> = (0..body.len())
            .filter(|i| mask & (1 << i) == 0)
            .flat_map(|i| body[i].vars())
            .collect();
        let separating: BTreeSet<Var> = in_part.intersection(&outside).cloned().collect();

        // odometer over the head-atom choice of every chosen body atom
        let mut pick = vec![0usize; chosen.len()];
        loop {
            let mut part = Partition::default();
            let mut head_part = BTreeSet::new();
            for (slot, &bi) in chosen.iter().enumerate() {
                let hi = candidates[bi][pick[slot]];
                head_part.insert(hi);
                for (bt, ht) in body[bi].args.iter().zip(&head[hi].args) {
                    part.union(&Slot::of(bt, Side::Body), &Slot::of(ht, Side::Head));
                }
            }
            for &hi in &head_part {
                for t in &head[hi].args {
                    part.id(&Slot::of(t, Side::Head));
                }
            }
            if let Some(classes) = part.classes() {
                let piece = admissible(&classes, &existentials, &separating);
                let body_part: BTreeSet<usize> = chosen.iter().copied().collect();
                let key = (body_part.clone(), head_part.clone(), classes.clone());
                if (!require_piece || piece) && seen.insert(key) {
                    out.push(Unifier {
                        producer: producer.id.clone(),
                        consumer: consumer.id.clone(),
                        body_part,
                        head_part,
                        classes,
                        piece,
                    });
                }
            }
            // advance
            let mut k = 0;
            while k < pick.len() {
                pick[k] += 1;
                if pick[k] < candidates[chosen[k]].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == pick.len() {
                break;
            }
        }
    }
    Some(out)
}

/// The substitutions a unifier induces on the producer's and the consumer's
/// variables. When the two rules share variables (a rule unified with
/// itself) the consumer is renamed apart first; the renaming is returned as
/// the third component.
pub(crate) fn induced_substitutions(
    u: &Unifier,
    producer_vars: &BTreeSet<Var>,
    consumer_vars: &BTreeSet<Var>,
    fresh: &mut FreshVars,
) -> (Substitution, Substitution, Substitution) {
    let rho = if producer_vars.is_disjoint(consumer_vars) {
        Substitution::new()
    } else {
        renaming(consumer_vars, fresh)
    };
    let rep = |class: &BTreeSet<Slot>| -> Term {
        if let Some(Slot::Ground(t)) = class.iter().find(|s| matches!(s, Slot::Ground(_))) {
            return t.clone();
        }
        if let Some(Slot::Var(_, v)) = class
            .iter()
            .find(|s| matches!(s, Slot::Var(Side::Head, _)))
        {
            return Term::Var(v.clone());
        }
        match class.iter().next() {
            Some(Slot::Var(_, v)) => rho.apply_term(&Term::Var(v.clone())),
            _ => unreachable!("classes are non-empty"),
        }
    };
    let mut mu_p = Substitution::new();
    let mut mu_c = rho.clone();
    for class in &u.classes {
        let r = rep(class);
        for s in class {
            match s {
                Slot::Var(Side::Head, v) if producer_vars.contains(v) => {
                    mu_p.bind(v.clone(), r.clone());
                }
                Slot::Var(Side::Body, v) => {
                    mu_c.bind(v.clone(), r.clone());
                }
                _ => {}
            }
        }
    }
    (mu_p, mu_c, rho)
}

fn fresh_for<'a>(vars: impl IntoIterator<Item = &'a BTreeSet<Var>>) -> FreshVars {
    let mut all = BTreeSet::new();
    for v in vars {
        all.extend(v.iter().cloned());
    }
    FreshVars::above(&all)
}

/// Checks a piece-unifier against the semantic definition of dependency on
/// its frozen instance: after applying the producer to
/// `freeze(μ(B_producer) ∪ μ(B_consumer \ B'))`, the consumer must have a
/// homomorphism into the result that is both new and useful.
pub fn validates(u: &Unifier, producer: &Rule, consumer: &Rule) -> bool {
    let pv = producer.vars();
    let cv = consumer.vars();
    let mut fresh = fresh_for([&pv, &cv]);
    let (mu_p, mu_c, _) = induced_substitutions(u, &pv, &cv, &mut fresh);
    let rest: AtomSet = consumer
        .body
        .iter()
        .enumerate()
        .filter(|(i, _)| !u.body_part.contains(i))
        .map(|(_, a)| mu_c.apply_atom(a))
        .collect();
    let unfrozen = mu_p.apply(&producer.body).union(&rest);
    let (f, freezer) = freeze(&unfrozen);
    let trigger: Substitution = producer
        .body
        .vars()
        .into_iter()
        .map(|x| {
            let t = freezer.apply_term(&mu_p.apply_term(&Term::Var(x.clone())));
            (x, t)
        })
        .collect();
    let mut fresh = FreshVars::starting_at(fresh.peek());
    let after = f.union(&instantiate_head(producer, &trigger, &mut fresh));
    homomorphisms(&consumer.body, &after, &Substitution::new())
        .any(|pi| !pi.apply(&consumer.body).is_subset(&f) && is_useful(&pi, consumer, &after))
}

/// Witnesses of `consumer` depending on `producer`: the piece-unifiers that
/// pass [`validates`]. `None` when unification was capped.
pub fn dependency_witnesses(producer: &Rule, consumer: &Rule) -> Option<Vec<Unifier>> {
    let us = unifiers(consumer, producer, true)?;
    Some(
        us.into_iter()
            .filter(|u| validates(u, producer, consumer))
            .collect(),
    )
}

/// `consumer` depends on `producer`.
pub fn depends(producer: &Rule, consumer: &Rule) -> bool {
    dependency_witnesses(producer, consumer).is_none_or(|w| !w.is_empty())
}

/// The graph of rule dependencies: an edge `(i, j)` when rule `j` depends
/// on rule `i`, labelled with the witnessing unifiers.
#[derive(Clone, Debug, Default)]
pub struct DependencyGraph {
    pub ids: Vec<Arc<str>>,
    pub edges: BTreeMap<(usize, usize), Vec<Unifier>>,
    /// Edges were filtered to non-self-blocking unifiers.
    pub negation_aware: bool,
    /// Some pair exceeded the unification cap and was assumed dependent.
    pub capped: bool,
}

impl DependencyGraph {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains_key(&(from, to))
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((from, 0)..=(from, usize::MAX))
            .map(|(&(_, to), _)| to)
    }

    pub fn predecessors(&self, to: usize) -> BTreeSet<usize> {
        self.edges
            .keys()
            .filter(|&&(_, t)| t == to)
            .map(|&(f, _)| f)
            .collect()
    }

    /// A path of length at least one leads from `from` to `to`.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = self.successors(from).collect();
        while let Some(n) = queue.pop_front() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                queue.extend(self.successors(n));
            }
        }
        false
    }

    pub fn is_acyclic(&self) -> bool {
        (0..self.len()).all(|i| !self.reaches(i, i))
    }

    /// Strongly connected components, each sorted.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<usize, ()>::new();
        let nodes: Vec<_> = (0..self.len()).map(|i| g.add_node(i)).collect();
        for &(a, b) in self.edges.keys() {
            g.add_edge(nodes[a], nodes[b], ());
        }
        let mut out: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|n| g[n]).collect();
                c.sort_unstable();
                c
            })
            .collect();
        out.sort();
        out
    }

    pub fn edge_ids(&self) -> Vec<(Arc<str>, Arc<str>)> {
        self.edges
            .keys()
            .map(|&(a, b)| (self.ids[a].clone(), self.ids[b].clone()))
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph grd {\n");
        for id in &self.ids {
            out.push_str(&format!("  \"{id}\";\n"));
        }
        for ((a, b), w) in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                self.ids[*a],
                self.ids[*b],
                w.len()
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the GRD, testing every ordered pair including self-pairs.
pub fn grd(rules: &[Rule]) -> DependencyGraph {
    let mut g = DependencyGraph {
        ids: rules.iter().map(|r| r.id.clone()).collect(),
        ..Default::default()
    };
    for (i, producer) in rules.iter().enumerate() {
        for (j, consumer) in rules.iter().enumerate() {
            match dependency_witnesses(producer, consumer) {
                Some(w) if !w.is_empty() => {
                    g.edges.insert((i, j), w);
                }
                Some(_) => {}
                None => {
                    g.capped = true;
                    g.edges.insert((i, j), Vec::new());
                }
            }
        }
    }
    g
}

/// `R₁ ⊕_μ R₂`: body `μ(B₁) ∪ (μ(B₂) \ μ(H₁))`, head `μ(H₁) ∪ μ(H₂)`, and
/// `μ(B⁻)` for every negative body of either rule. `u` unifies the body of
/// `r2` with the head of `r1`.
pub fn unified_rule(r1: &NmeRule, u: &Unifier, r2: &NmeRule) -> NmeRule {
    let v1 = r1.vars();
    let v2 = r2.vars();
    let mut fresh = fresh_for([&v1, &v2]);
    let (mu1, mu2, _) = induced_substitutions(u, &v1, &v2, &mut fresh);
    compose(r1, &mu1, r2, &mu2)
}

fn compose(r1: &NmeRule, mu1: &Substitution, r2: &NmeRule, mu2: &Substitution) -> NmeRule {
    let h1 = mu1.apply(&r1.head);
    let body = mu1
        .apply(&r1.positive)
        .union(&mu2.apply(&r2.positive).difference(&h1));
    let mut negative: Vec<AtomSet> = r1.negative.iter().map(|b| mu1.apply(b)).collect();
    negative.extend(r2.negative.iter().map(|b| mu2.apply(b)));
    let head = h1.union(&mu2.apply(&r2.head));
    NmeRule::new(format!("{}+{}", r1.id, r2.id), body, negative, head)
}

/// Whether the composition of two rules along `u` is self-blocking.
pub fn self_blocking_unifier(r1: &NmeRule, u: &Unifier, r2: &NmeRule) -> bool {
    unified_rule(r1, u, r2).is_self_blocking()
}

/// `R^j_i`: the body of `R_i` extended with `fr(t)` for every head term `t`
/// consumable along GRD paths from `R_i` to a direct predecessor of `R_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgglomeratedRule {
    pub base: usize,
    pub target: usize,
    pub fr_terms: BTreeSet<Var>,
    pub rule: Rule,
}

/// Upper bound on explored (rule, term set) states per agglomerated rule.
/// Past it every head variable is marked, which only adds edges.
const MAX_AGGLOMERATION_STATES: usize = 4096;

fn with_fr(base: &Rule, terms: &BTreeSet<Var>) -> Rule {
    let mut body = base.body.clone();
    for t in terms {
        body.insert(Atom::new(FR_PREDICATE, vec![Term::Var(t.clone())]));
    }
    Rule::new(base.id.clone(), body, base.head.clone())
}

/// Computes `R^j_i` taking every admissible path into account: states
/// `(rule, T)` are explored from `(i, ∅)`; a step along a GRD edge to `n`
/// needs a piece-unifier of `B_n` with the head of `B_i ∪ fr(T) → H_i`, and
/// adds the head variables that unifier touches. The union of the sets `T`
/// reached at direct predecessors of `j` is the result.
pub fn agglomerate(
    rules: &[Rule],
    grd: &DependencyGraph,
    i: usize,
    j: usize,
) -> Result<AgglomeratedRule> {
    if !grd.reaches(i, j) {
        return Err(Error::Unreachable {
            from: rules[i].id.to_string(),
            target: rules[j].id.to_string(),
        });
    }
    let preds = grd.predecessors(j);
    let base = &rules[i];
    let head_atoms = atoms(&base.head);
    let mut seen: BTreeSet<(usize, BTreeSet<Var>)> = BTreeSet::new();
    let mut queue = VecDeque::from([(i, BTreeSet::new())]);
    let mut fr_terms = BTreeSet::new();
    while let Some((m, t)) = queue.pop_front() {
        if !seen.insert((m, t.clone())) {
            continue;
        }
        if seen.len() > MAX_AGGLOMERATION_STATES {
            fr_terms = base.head.vars();
            break;
        }
        if preds.contains(&m) {
            fr_terms.extend(t.iter().cloned());
        }
        let producer = with_fr(base, &t);
        for n in grd.successors(m) {
            let Some(us) = unifiers(&rules[n], &producer, true) else {
                queue.push_back((n, base.head.vars()));
                continue;
            };
            for u in us {
                let mut next = t.clone();
                for &h in &u.head_part {
                    next.extend(head_atoms[h].vars());
                }
                if !seen.contains(&(n, next.clone())) {
                    queue.push_back((n, next));
                }
            }
        }
    }
    Ok(AgglomeratedRule {
        base: i,
        target: j,
        rule: with_fr(base, &fr_terms),
        fr_terms,
    })
}

pub type Agglomerates = BTreeMap<(usize, usize), AgglomeratedRule>;

/// Agglomerated rules for every pair `(i, j)` with `j` reachable from `i`.
pub fn agglomerate_all(rules: &[Rule], grd: &DependencyGraph) -> Agglomerates {
    let mut out = BTreeMap::new();
    for i in 0..rules.len() {
        for j in 0..rules.len() {
            if grd.reaches(i, j) {
                let a = agglomerate(rules, grd, i, j).expect("reachability checked");
                out.insert((i, j), a);
            }
        }
    }
    out
}

/// Breadth-first search in a position graph from `starts` to `target` that
/// does not pass through an existential position outside `starts`.
fn reaches_avoiding_existentials(g: &PositionGraph, starts: &BTreeSet<usize>, target: usize) -> bool {
    let mut seen: BTreeSet<usize> = starts.clone();
    let mut queue: VecDeque<usize> = starts.iter().copied().collect();
    while let Some(n) = queue.pop_front() {
        for &m in g.successors(n) {
            if m == target {
                return true;
            }
            if g.node(m).is_existential() && !starts.contains(&m) {
                continue;
            }
            if seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    false
}

/// Compatibility of a unifier of the body of original rule `consumer` with
/// the head of `producer` (an original or a composed rule). Every body
/// position whose term is merged with an existential variable `z` of the
/// producer must be reachable in the unifier position graph from a position
/// of `z` without crossing another existential position.
///
/// `consumer_renaming` maps the consumer's original variables to the ones
/// used in `classes`; `origin` maps each producer variable to the rule and
/// original variable the graph knows it by.
fn check_compatible(
    producer: &NmeRule,
    classes: &[BTreeSet<Slot>],
    consumer: usize,
    consumer_rule: &Rule,
    consumer_renaming: &Substitution,
    origin: &BTreeMap<Var, (usize, Var)>,
    pgu: &PositionGraph,
) -> bool {
    let body_vars = producer.positive.vars();
    let existentials: BTreeSet<Var> = producer
        .head
        .vars()
        .into_iter()
        .filter(|v| !body_vars.contains(v))
        .collect();
    for class in classes {
        let starts: Vec<BTreeSet<usize>> = class
            .iter()
            .filter_map(|s| match s {
                Slot::Var(Side::Head, v) if existentials.contains(v) => origin.get(v),
                _ => None,
            })
            .map(|(r, z)| pgu.positions_of_head_var(*r, z))
            .filter(|s| !s.is_empty())
            .collect();
        let has_existential = class
            .iter()
            .any(|s| matches!(s, Slot::Var(Side::Head, v) if existentials.contains(v)));
        if !has_existential {
            continue;
        }
        for (a, atom) in consumer_rule.body.iter().enumerate() {
            for (k, t) in atom.args.iter().enumerate() {
                if !t.is_var() {
                    continue;
                }
                let slot = Slot::of(&consumer_renaming.apply_term(t), Side::Body);
                if !class.contains(&slot) {
                    continue;
                }
                let Some(target) = pgu.find(consumer, Side::Body, a, k) else {
                    return false;
                };
                if !starts
                    .iter()
                    .any(|s| reaches_avoiding_existentials(pgu, s, target))
                {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether `u`, a unifier of the body of `rules[consumer]` with the head of
/// `rules[producer]`, is compatible with respect to `pgu`. Piece-unifiers
/// are always compatible.
pub fn compatible(
    u: &Unifier,
    rules: &[NmeRule],
    producer: usize,
    consumer: usize,
    pgu: &PositionGraph,
) -> bool {
    if u.piece {
        return true;
    }
    let origin = rules[producer]
        .vars()
        .into_iter()
        .map(|v| (v.clone(), (producer, v)))
        .collect();
    check_compatible(
        &rules[producer],
        &u.classes,
        consumer,
        &rules[consumer].pos(),
        &Substitution::new(),
        &origin,
        pgu,
    )
}

/// Relabels the head side of `u` through `embed` and the body side through
/// `rho`, merging classes that collapse. `None` if two ground terms merge.
fn lift(u: &Unifier, embed: &Substitution, rho: &Substitution) -> Option<Vec<BTreeSet<Slot>>> {
    let mut part = Partition::default();
    for class in &u.classes {
        let mapped: Vec<Slot> = class
            .iter()
            .map(|s| match s {
                Slot::Ground(t) => Slot::Ground(t.clone()),
                Slot::Var(side, v) => {
                    let sub = if *side == Side::Head { embed } else { rho };
                    Slot::of(&sub.apply_term(&Term::Var(v.clone())), *side)
                }
            })
            .collect();
        for s in &mapped {
            part.id(s);
        }
        for w in mapped.windows(2) {
            part.union(&w[0], &w[1]);
        }
    }
    part.classes()
}

/// Renames every variable of `rules[index]` apart, recording where each
/// copy comes from.
fn occurrence(
    rules: &[NmeRule],
    index: usize,
    fresh: &mut FreshVars,
    origin: &mut BTreeMap<Var, (usize, Var)>,
) -> (NmeRule, Substitution) {
    let rule = &rules[index];
    let rho = renaming(&rule.vars(), fresh);
    for (v, t) in rho.iter() {
        if let Some(w) = t.as_var() {
            origin.insert(w.clone(), (index, v.clone()));
        }
    }
    (rule.rename(&rho), rho)
}

/// Checks that `(R₁ μ₁ R₂ … μₖ Rₖ₊₁)` is a compatible sequence of unifiers,
/// where `sequence` lists rule indices and `unifiers[i]` unifies the body of
/// rule `sequence[i+1]` with the head of rule `sequence[i]`.
///
/// The sequence is folded from the left: each unifier is lifted onto the
/// head of the rule composed so far, checked for compatibility, and the
/// composition is extended. Every rule occurrence is renamed apart. Returns
/// the composed rule when compatible.
pub fn compatible_sequence(
    rules: &[NmeRule],
    sequence: &[usize],
    unifiers: &[Unifier],
    pgu: &PositionGraph,
) -> Result<Option<NmeRule>> {
    if sequence.len() != unifiers.len() + 1 {
        return Err(Error::MalformedSequence(format!(
            "{} rules need {} unifiers, got {}",
            sequence.len(),
            sequence.len().saturating_sub(1),
            unifiers.len()
        )));
    }
    if let Some(&bad) = sequence.iter().find(|&&i| i >= rules.len()) {
        return Err(Error::MalformedSequence(format!("rule index {bad} out of range")));
    }
    for (k, u) in unifiers.iter().enumerate() {
        let (p, c) = (&rules[sequence[k]].id, &rules[sequence[k + 1]].id);
        if &u.producer != p || &u.consumer != c {
            return Err(Error::MalformedSequence(format!(
                "unifier {k} relates {} to {}, expected {p} to {c}",
                u.producer, u.consumer
            )));
        }
    }
    let mut all = BTreeSet::new();
    for r in rules {
        all.extend(r.vars());
    }
    let mut fresh = FreshVars::above(&all);
    let mut origin = BTreeMap::new();
    let (mut composed, mut embed) = occurrence(rules, sequence[0], &mut fresh, &mut origin);

    for (k, u) in unifiers.iter().enumerate() {
        let next = sequence[k + 1];
        let (renamed, rho) = occurrence(rules, next, &mut fresh, &mut origin);
        let Some(classes) = lift(u, &embed, &rho) else {
            return Ok(None);
        };
        let ok = (k == 0 && u.piece)
            || check_compatible(
                &composed,
                &classes,
                next,
                &rules[next].pos(),
                &rho,
                &origin,
                pgu,
            );
        if !ok {
            return Ok(None);
        }
        let lifted = Unifier {
            producer: composed.id.clone(),
            consumer: renamed.id.clone(),
            body_part: u.body_part.clone(),
            head_part: BTreeSet::new(),
            classes,
            piece: false,
        };
        let (mu_p, mu_c, _) =
            induced_substitutions(&lifted, &composed.vars(), &renamed.vars(), &mut fresh);
        composed = compose(&composed, &mu_p, &renamed, &mu_c);
        embed = rho
            .iter()
            .map(|(w, t)| (w.clone(), mu_c.apply_term(t)))
            .collect();
    }
    Ok(Some(composed))
}
