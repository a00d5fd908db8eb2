//! Position graphs and acyclicity properties that guarantee chase
//! termination: aGRD, weak acyclicity on the full position graph, and its
//! refinements on the dependency (`D`) and unifier (`U`) position graphs,
//! plus the compatible-sequence refinement `U+`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::chase::Criterion;
use crate::error::{Error, Result};
use crate::logic::{Term, Var};
use crate::nonmonotonic::{nm_grd, pos, NmeRule};
use crate::unification::{
    agglomerate_all, compatible_sequence, grd, self_blocking_unifier, unifiers, Agglomerates,
    DependencyGraph, Slot, Unifier,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Body,
    Head,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    /// Only the edges inside each rule.
    Basic,
    /// Every head position linked to every body position of the same
    /// predicate.
    Full,
    /// Head of `R_i` linked to body of `R_j` when `R_j` is reachable from
    /// `R_i` in the GRD.
    Dependency,
    /// Head of `R_i` linked to body of `R_j` when some piece-unifier of
    /// `B_j` with the agglomerated rule `R^j_i` merges the two terms.
    Unifier,
}

impl GraphKind {
    fn suffix(self) -> &'static str {
        match self {
            GraphKind::Basic | GraphKind::Full => "",
            GraphKind::Dependency => "^D",
            GraphKind::Unifier => "^U",
        }
    }
}

/// A position `[a, k]` of an atom of a rule body or head.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PositionNode {
    pub rule: usize,
    pub side: Side,
    pub atom: usize,
    pub arg: usize,
    pub predicate: Arc<str>,
    pub term: Term,
    existential: bool,
}

impl PositionNode {
    /// A head position holding an existential variable.
    pub fn is_existential(&self) -> bool {
        self.existential
    }
}

#[derive(Clone, Debug)]
pub struct PositionGraph {
    pub kind: GraphKind,
    pub rule_ids: Vec<Arc<str>>,
    nodes: Vec<PositionNode>,
    index: BTreeMap<(usize, Side, usize, usize), usize>,
    succ: Vec<Vec<usize>>,
    pub basic_edges: BTreeSet<(usize, usize)>,
    /// Head-to-body edges with their witnessing unifiers (unifier graphs
    /// only; empty otherwise).
    pub transitions: BTreeMap<(usize, usize), Vec<Unifier>>,
    /// Some rule pair exceeded the unification cap and was linked without
    /// witnesses.
    pub capped: bool,
}

impl PositionGraph {
    /// Builds a position graph. Dependency graphs need `grd`; unifier graphs
    /// need `grd` and the agglomerated rules. With a negation-aware `grd`,
    /// unifier witnesses whose composed rule is self-blocking are dropped.
    pub fn build(
        kind: GraphKind,
        rules: &[NmeRule],
        grd: Option<&DependencyGraph>,
        agglomerates: Option<&Agglomerates>,
    ) -> Result<Self> {
        let mut g = PositionGraph {
            kind,
            rule_ids: rules.iter().map(|r| r.id.clone()).collect(),
            nodes: Vec::new(),
            index: BTreeMap::new(),
            succ: Vec::new(),
            basic_edges: BTreeSet::new(),
            transitions: BTreeMap::new(),
            capped: false,
        };
        for (r, rule) in rules.iter().enumerate() {
            let body_vars = rule.positive.vars();
            for (side, atoms) in [(Side::Body, &rule.positive), (Side::Head, &rule.head)] {
                for (a, atom) in atoms.iter().enumerate() {
                    for (k, t) in atom.args.iter().enumerate() {
                        let existential = side == Side::Head
                            && t.as_var().is_some_and(|v| !body_vars.contains(v));
                        g.index.insert((r, side, a, k), g.nodes.len());
                        g.nodes.push(PositionNode {
                            rule: r,
                            side,
                            atom: a,
                            arg: k,
                            predicate: atom.predicate.clone(),
                            term: t.clone(),
                            existential,
                        });
                    }
                }
            }
        }
        g.succ = vec![Vec::new(); g.nodes.len()];
        g.add_basic_edges(rules);
        match kind {
            GraphKind::Basic => {}
            GraphKind::Full => g.add_transitions(rules, |_, _| true),
            GraphKind::Dependency => {
                let grd = grd.ok_or(Error::MissingPrerequisite("dependency position graph", "GRD"))?;
                g.add_transitions(rules, |i, j| grd.reaches(i, j));
            }
            GraphKind::Unifier => {
                let grd = grd.ok_or(Error::MissingPrerequisite("unifier position graph", "GRD"))?;
                let agg = agglomerates.ok_or(Error::MissingPrerequisite(
                    "unifier position graph",
                    "agglomerated rules",
                ))?;
                g.add_unifier_transitions(rules, grd, agg)?;
            }
        }
        for v in &mut g.succ {
            v.sort_unstable();
            v.dedup();
        }
        Ok(g)
    }

    fn add_edge(&mut self, from: usize, to: usize) {
        self.succ[from].push(to);
    }

    fn add_basic_edges(&mut self, rules: &[NmeRule]) {
        for (r, rule) in rules.iter().enumerate() {
            let frontier = rule.pos().frontier();
            let heads: Vec<usize> = self.positions(r, Side::Head).collect();
            for b in self.positions(r, Side::Body).collect::<Vec<_>>() {
                let Some(x) = self.nodes[b].term.as_var().cloned() else { continue };
                let x = &x;
                if !frontier.contains(x) {
                    continue;
                }
                for &h in &heads {
                    let node = &self.nodes[h];
                    if node.existential || node.term.as_var() == Some(x) {
                        self.basic_edges.insert((b, h));
                        self.add_edge(b, h);
                    }
                }
            }
        }
    }

    /// Same-predicate head/body position pairs of rules `i` and `j`.
    fn matching_pairs(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for h in self.positions(i, Side::Head) {
            for b in self.positions(j, Side::Body) {
                let (hn, bn) = (&self.nodes[h], &self.nodes[b]);
                if hn.predicate == bn.predicate && hn.arg == bn.arg {
                    out.push((h, b));
                }
            }
        }
        out
    }

    fn add_transitions(&mut self, rules: &[NmeRule], linked: impl Fn(usize, usize) -> bool) {
        for i in 0..rules.len() {
            for j in 0..rules.len() {
                if linked(i, j) {
                    for (h, b) in self.matching_pairs(i, j) {
                        self.transitions.insert((h, b), Vec::new());
                        self.add_edge(h, b);
                    }
                }
            }
        }
    }

    fn add_unifier_transitions(
        &mut self,
        rules: &[NmeRule],
        grd: &DependencyGraph,
        agg: &Agglomerates,
    ) -> Result<()> {
        for i in 0..rules.len() {
            for j in 0..rules.len() {
                if !grd.reaches(i, j) {
                    continue;
                }
                let a = agg.get(&(i, j)).ok_or(Error::MissingPrerequisite(
                    "unifier position graph",
                    "agglomerated rules",
                ))?;
                let pairs = self.matching_pairs(i, j);
                let Some(mut us) = unifiers(&rules[j].pos(), &a.rule, true) else {
                    self.capped = true;
                    for (h, b) in pairs {
                        self.transitions.insert((h, b), Vec::new());
                        self.add_edge(h, b);
                    }
                    continue;
                };
                if grd.negation_aware {
                    us.retain(|u| !self_blocking_unifier(&rules[i], u, &rules[j]));
                }
                for (h, b) in pairs {
                    let sh = Slot::of(&self.nodes[h].term, Side::Head);
                    let sb = Slot::of(&self.nodes[b].term, Side::Body);
                    let witnesses: Vec<Unifier> = us
                        .iter()
                        .filter(|u| u.class_of(&sh).is_some_and(|c| c.contains(&sb)))
                        .cloned()
                        .collect();
                    if !witnesses.is_empty() {
                        self.transitions.insert((h, b), witnesses);
                        self.add_edge(h, b);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[PositionNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &PositionNode {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from].binary_search(&to).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn find(&self, rule: usize, side: Side, atom: usize, arg: usize) -> Option<usize> {
        self.index.get(&(rule, side, atom, arg)).copied()
    }

    pub fn positions(&self, rule: usize, side: Side) -> impl Iterator<Item = usize> + '_ {
        self.index
            .range((rule, side, 0, 0)..=(rule, side, usize::MAX, usize::MAX))
            .map(|(_, &i)| i)
    }

    /// Head positions of `rule` holding `var`.
    pub fn positions_of_head_var(&self, rule: usize, var: &Var) -> BTreeSet<usize> {
        self.positions(rule, Side::Head)
            .filter(|&i| self.nodes[i].term.as_var() == Some(var))
            .collect()
    }

    pub fn existential_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].existential)
    }

    /// Nodes reachable from `from` through at least one edge.
    pub fn reachable(&self, from: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = self.succ[from].iter().copied().collect();
        while let Some(n) = queue.pop_front() {
            if seen.insert(n) {
                queue.extend(self.succ[n].iter().copied());
            }
        }
        seen
    }

    /// `true` when every edge of `self` is an edge of `other` over the same
    /// rules.
    pub fn is_subgraph_of(&self, other: &PositionGraph) -> bool {
        self.nodes.len() == other.nodes.len()
            && (0..self.nodes.len()).all(|n| self.succ[n].iter().all(|&m| other.has_edge(n, m)))
    }

    pub fn label(&self, i: usize) -> String {
        let n = &self.nodes[i];
        let side = match n.side {
            Side::Body => "b",
            Side::Head => "h",
        };
        format!("{}.{}{}[{}]", self.rule_ids[n.rule], side, n.atom, n.arg)
    }

    pub fn to_dot(&self) -> String {
        let mut out = format!("digraph position_graph_{:?} {{\n", self.kind).to_lowercase();
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if n.existential { "doublecircle" } else { "ellipse" };
            out.push_str(&format!(
                "  n{i} [label=\"{} {}:{}\", shape={shape}];\n",
                self.label(i),
                n.predicate,
                n.term
            ));
        }
        for (from, succ) in self.succ.iter().enumerate() {
            for &to in succ {
                if self.basic_edges.contains(&(from, to)) {
                    out.push_str(&format!("  n{from} -> n{to};\n"));
                } else {
                    let w = self.transitions.get(&(from, to)).map_or(0, Vec::len);
                    if self.kind == GraphKind::Unifier {
                        out.push_str(&format!("  n{from} -> n{to} [style=dashed, label=\"{w}\"];\n"));
                    } else {
                        out.push_str(&format!("  n{from} -> n{to} [style=dashed];\n"));
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                json!({
                    "id": i,
                    "label": self.label(i),
                    "rule": self.rule_ids[n.rule],
                    "side": n.side,
                    "atom": n.atom,
                    "arg": n.arg,
                    "predicate": n.predicate,
                    "term": n.term.to_string(),
                    "existential": n.existential,
                })
            })
            .collect();
        let mut edges = Vec::new();
        for (from, succ) in self.succ.iter().enumerate() {
            for &to in succ {
                let mut e = json!({ "from": from, "to": to });
                if self.basic_edges.contains(&(from, to)) {
                    e["kind"] = json!("basic");
                } else {
                    e["kind"] = json!("transition");
                    if let Some(w) = self.transitions.get(&(from, to)) {
                        if self.kind == GraphKind::Unifier {
                            e["witnesses"] = json!(w.iter().map(Unifier::to_string).collect::<Vec<_>>());
                        }
                    }
                }
                edges.push(e);
            }
        }
        json!({ "version": 1, "kind": self.kind, "nodes": nodes, "edges": edges })
    }
}

/// A marking function: for an existential position, the set of positions
/// its values may be propagated to. Cycles through the position inside its
/// marking are what an acyclicity property forbids.
pub trait Marking {
    fn name(&self) -> &str;
    fn mark(&self, graph: &PositionGraph, position: usize) -> BTreeSet<usize>;
}

/// Weak acyclicity: the marking of a position is everything reachable from
/// it.
#[derive(Clone, Copy, Debug, Default)]
pub struct WeakAcyclicity;

impl Marking for WeakAcyclicity {
    fn name(&self) -> &str {
        "wa"
    }

    fn mark(&self, graph: &PositionGraph, position: usize) -> BTreeSet<usize> {
        graph.reachable(position)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Satisfied,
    Violated,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Satisfied => "satisfied",
            Outcome::Violated => "violated",
            Outcome::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Witness {
    /// Labels of the cycle's positions, starting at the existential one.
    pub cycle: Vec<String>,
    #[serde(skip)]
    pub cycle_nodes: Vec<usize>,
    /// Rules along the cycle (or the GRD cycle for aGRD).
    pub rules: Vec<String>,
    pub unifiers: Vec<Unifier>,
    /// The rule composed along a compatible sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composed: Option<String>,
}

impl Witness {
    /// The cycle is a closed walk of `graph` through an existential
    /// position.
    pub fn verify(&self, graph: &PositionGraph) -> bool {
        let c = &self.cycle_nodes;
        !c.is_empty()
            && graph.node(c[0]).is_existential()
            && (0..c.len()).all(|i| graph.has_edge(c[i], c[(i + 1) % c.len()]))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub property: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    fn new(property: String, outcome: Outcome) -> Self {
        Verdict {
            property,
            outcome,
            witness: None,
            note: None,
        }
    }
}

/// Shortest path from `from` to `to` (through at least one edge) inside
/// `allowed`, as the list of nodes starting at `from` and excluding `to`.
fn path_within(g: &PositionGraph, from: usize, to: usize, allowed: &BTreeSet<usize>) -> Option<Vec<usize>> {
    let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::new();
    while let Some(n) = queue.pop_front() {
        for &m in g.successors(n) {
            if !allowed.contains(&m) {
                continue;
            }
            if m == to {
                let mut path = vec![n];
                let mut cur = n;
                while cur != from {
                    cur = prev[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            if seen.insert(m) {
                prev.insert(m, n);
                queue.push_back(m);
            }
        }
    }
    None
}

fn cycle_witness(g: &PositionGraph, cycle: Vec<usize>) -> Witness {
    let mut rules: Vec<String> = Vec::new();
    for &n in &cycle {
        let id = g.rule_ids[g.node(n).rule].to_string();
        if rules.last() != Some(&id) {
            rules.push(id);
        }
    }
    Witness {
        cycle: cycle.iter().map(|&n| g.label(n)).collect(),
        cycle_nodes: cycle,
        rules,
        unifiers: Vec::new(),
        composed: None,
    }
}

/// Checks the property `Y^G` for marking `Y` on graph `G`: no existential
/// position lies on a cycle contained in its own marking.
pub fn check(marking: &dyn Marking, graph: &PositionGraph) -> Verdict {
    let property = format!("{}{}", marking.name(), graph.kind.suffix());
    for p in graph.existential_positions() {
        let mut allowed = marking.mark(graph, p);
        if !allowed.contains(&p) {
            continue;
        }
        allowed.insert(p);
        if let Some(cycle) = path_within(graph, p, p, &allowed) {
            let mut v = Verdict::new(property, Outcome::Violated);
            v.witness = Some(cycle_witness(graph, cycle));
            if graph.capped {
                v.outcome = Outcome::Unknown;
                v.note = Some("a rule pair exceeded the unification limit".into());
            }
            return v;
        }
    }
    Verdict::new(property, Outcome::Satisfied)
}

/// Default bound on elementary cycles and unifier combinations examined by
/// [`check_u_plus`].
pub const DEFAULT_CYCLE_CAP: usize = 10_000;

/// Elementary cycles through `p` within `allowed`, each starting at `p`.
/// Stops after `cap` cycles and reports whether it did.
fn elementary_cycles(g: &PositionGraph, p: usize, allowed: &BTreeSet<usize>, cap: usize) -> (Vec<Vec<usize>>, bool) {
    // restrict to nodes that can get back to p
    let mut back: BTreeSet<usize> = BTreeSet::from([p]);
    let mut changed = true;
    while changed {
        changed = false;
        for &n in allowed {
            if !back.contains(&n) && g.successors(n).iter().any(|m| back.contains(m)) {
                back.insert(n);
                changed = true;
            }
        }
    }
    let mut cycles = Vec::new();
    let mut path = vec![p];
    let mut on_path = BTreeSet::from([p]);
    let mut stack: Vec<usize> = vec![0];
    while let Some(&next_edge) = stack.last() {
        let n = *path.last().expect("path tracks stack");
        let succ = g.successors(n);
        if next_edge >= succ.len() {
            stack.pop();
            on_path.remove(&n);
            path.pop();
            continue;
        }
        *stack.last_mut().expect("non-empty") += 1;
        let m = succ[next_edge];
        if m == p {
            cycles.push(path.clone());
            if cycles.len() >= cap {
                return (cycles, true);
            }
        } else if back.contains(&m) && allowed.contains(&m) && !on_path.contains(&m) {
            path.push(m);
            on_path.insert(m);
            stack.push(0);
        }
    }
    (cycles, false)
}

/// Checks `Y^U+`: like `Y^U`, but a cycle only counts when the sequence of
/// unifiers it induces (one witness per transition edge, starting at the
/// rule of the existential position) is compatible, and, in
/// negation-aware mode, when the composed rule is not self-blocking.
pub fn check_u_plus(
    marking: &dyn Marking,
    graph: &PositionGraph,
    rules: &[NmeRule],
    negation_aware: bool,
    cap: usize,
) -> Result<Verdict> {
    if graph.kind != GraphKind::Unifier {
        return Err(Error::MissingPrerequisite("U+ check", "unifier position graph"));
    }
    let property = format!("{}^U+", marking.name());
    let mut incomplete: Option<&str> = None;
    let mut budget = cap;
    for p in graph.existential_positions() {
        let mut allowed = marking.mark(graph, p);
        if !allowed.contains(&p) {
            continue;
        }
        allowed.insert(p);
        let (cycles, truncated) = elementary_cycles(graph, p, &allowed, cap);
        if truncated {
            incomplete = Some("cycle enumeration limit reached");
        }
        for cycle in cycles {
            let mut sequence = vec![graph.node(p).rule];
            let mut choices: Vec<&Vec<Unifier>> = Vec::new();
            for i in 0..cycle.len() {
                let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                if let Some(w) = graph.transitions.get(&(a, b)) {
                    sequence.push(graph.node(b).rule);
                    choices.push(w);
                }
            }
            if choices.iter().any(|w| w.is_empty()) {
                incomplete = Some("a rule pair exceeded the unification limit");
                continue;
            }
            let mut pick = vec![0usize; choices.len()];
            loop {
                if budget == 0 {
                    incomplete = Some("unifier combination limit reached");
                    break;
                }
                budget -= 1;
                let us: Vec<Unifier> = pick.iter().zip(&choices).map(|(&k, w)| w[k].clone()).collect();
                if let Some(composed) = compatible_sequence(rules, &sequence, &us, graph)? {
                    if !negation_aware || !composed.is_self_blocking() {
                        let mut w = cycle_witness(graph, cycle.clone());
                        w.unifiers = us;
                        w.composed = Some(composed.to_string());
                        let mut v = Verdict::new(property, Outcome::Violated);
                        v.witness = Some(w);
                        return Ok(v);
                    }
                }
                let mut k = 0;
                while k < pick.len() {
                    pick[k] += 1;
                    if pick[k] < choices[k].len() {
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
    }
    let mut v = Verdict::new(property, Outcome::Satisfied);
    if let Some(why) = incomplete {
        v.outcome = Outcome::Unknown;
        v.note = Some(why.into());
    }
    Ok(v)
}

/// A GRD cycle as a list of rule indices, if any.
fn grd_cycle(g: &DependencyGraph) -> Option<Vec<usize>> {
    for start in 0..g.len() {
        let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([start]);
        let mut seen = BTreeSet::new();
        while let Some(n) = queue.pop_front() {
            for m in g.successors(n) {
                if m == start {
                    let mut path = vec![n];
                    let mut cur = n;
                    while cur != start {
                        cur = prev[&cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                if seen.insert(m) {
                    prev.insert(m, n);
                    queue.push_back(m);
                }
            }
        }
    }
    None
}

fn agrd_verdict(g: &DependencyGraph) -> Verdict {
    match grd_cycle(g) {
        None => Verdict::new("aGRD".into(), Outcome::Satisfied),
        Some(cycle) => {
            let mut v = Verdict::new("aGRD".into(), Outcome::Violated);
            v.witness = Some(Witness {
                rules: cycle.iter().map(|&i| g.ids[i].to_string()).collect(),
                ..Default::default()
            });
            if g.capped {
                v.outcome = Outcome::Unknown;
                v.note = Some("a rule pair exceeded the unification limit".into());
            }
            v
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AnalysisOptions {
    /// Drop unifiers whose composed rule is self-blocking.
    pub negation_aware: bool,
    pub cycle_cap: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            negation_aware: false,
            cycle_cap: DEFAULT_CYCLE_CAP,
        }
    }
}

/// The graphs an analysis is computed on.
#[derive(Clone, Debug)]
pub struct Graphs {
    pub grd: DependencyGraph,
    pub agglomerates: Agglomerates,
    pub full: PositionGraph,
    pub dependency: PositionGraph,
    pub unifier: PositionGraph,
}

impl Graphs {
    pub fn build(rules: &[NmeRule], negation_aware: bool) -> Result<Self> {
        let positive = pos(rules);
        let grd = if negation_aware { nm_grd(rules) } else { grd(&positive) };
        let agglomerates = agglomerate_all(&positive, &grd);
        Ok(Graphs {
            full: PositionGraph::build(GraphKind::Full, rules, None, None)?,
            dependency: PositionGraph::build(GraphKind::Dependency, rules, Some(&grd), None)?,
            unifier: PositionGraph::build(GraphKind::Unifier, rules, Some(&grd), Some(&agglomerates))?,
            grd,
            agglomerates,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub rules: Vec<Arc<str>>,
    pub negation_aware: bool,
    pub verdicts: Vec<Verdict>,
    /// Chase criteria whose termination on every instance the satisfied
    /// properties imply.
    pub guarantees: BTreeMap<Criterion, bool>,
}

impl Report {
    pub fn verdict(&self, property: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.property == property)
    }

    pub fn outcome(&self, property: &str) -> Option<Outcome> {
        self.verdict(property).map(|v| v.outcome)
    }

    pub fn any_satisfied(&self) -> bool {
        self.verdicts.iter().any(|v| v.outcome == Outcome::Satisfied)
    }

    pub fn any_unknown(&self) -> bool {
        self.verdicts.iter().any(|v| v.outcome == Outcome::Unknown)
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["version"] = json!(1);
        v
    }
}

/// The five built-in properties, in hierarchy order.
pub const PROPERTIES: [&str; 5] = ["aGRD", "wa", "wa^D", "wa^U", "wa^U+"];

/// Runs every acyclicity property on `rules`.
pub fn analyze(rules: &[NmeRule], options: AnalysisOptions) -> Result<Report> {
    analyze_with(rules, options, &[])
}

/// Like [`analyze`], additionally checking `M`, `M^D`, `M^U` and `M^U+` for
/// each extra marking `M`.
pub fn analyze_with(rules: &[NmeRule], options: AnalysisOptions, extra: &[&dyn Marking]) -> Result<Report> {
    let graphs = Graphs::build(rules, options.negation_aware)?;
    let mut verdicts = vec![agrd_verdict(&graphs.grd)];
    let wa = WeakAcyclicity;
    let mut markings: Vec<&dyn Marking> = vec![&wa];
    markings.extend_from_slice(extra);
    for m in markings {
        verdicts.push(check(m, &graphs.full));
        verdicts.push(check(m, &graphs.dependency));
        verdicts.push(check(m, &graphs.unifier));
        verdicts.push(check_u_plus(
            m,
            &graphs.unifier,
            rules,
            options.negation_aware,
            options.cycle_cap,
        )?);
    }
    let agrd = verdicts[0].outcome == Outcome::Satisfied;
    let any = verdicts.iter().any(|v| v.outcome == Outcome::Satisfied);
    let guarantees = Criterion::ALL
        .into_iter()
        .map(|c| (c, if c == Criterion::Oblivious { agrd } else { any }))
        .collect();
    Ok(Report {
        rules: rules.iter().map(|r| r.id.clone()).collect(),
        negation_aware: options.negation_aware,
        verdicts,
        guarantees,
    })
}

/// Checks `marking` on the full position graph of each GRD strongly
/// connected component separately; the rule set satisfies the property on
/// components when every cyclic component does.
pub fn check_per_scc(marking: &dyn Marking, rules: &[NmeRule], grd: &DependencyGraph) -> Result<Outcome> {
    let mut outcome = Outcome::Satisfied;
    for scc in grd.sccs() {
        if scc.len() == 1 && !grd.has_edge(scc[0], scc[0]) {
            continue;
        }
        let part: Vec<NmeRule> = scc.iter().map(|&i| rules[i].clone()).collect();
        let g = PositionGraph::build(GraphKind::Full, &part, None, None)?;
        match check(marking, &g).outcome {
            Outcome::Violated => return Ok(Outcome::Violated),
            Outcome::Unknown => outcome = Outcome::Unknown,
            Outcome::Satisfied => {}
        }
    }
    Ok(outcome)
}

/// Builds a single position graph of the requested kind with its
/// prerequisites.
pub fn position_graph(rules: &[NmeRule], kind: GraphKind, negation_aware: bool) -> Result<PositionGraph> {
    match kind {
        GraphKind::Basic | GraphKind::Full => PositionGraph::build(kind, rules, None, None),
        _ => {
            let positive = pos(rules);
            let grd = if negation_aware { nm_grd(rules) } else { grd(&positive) };
            let agg = agglomerate_all(&positive, &grd);
            PositionGraph::build(kind, rules, Some(&grd), Some(&agg))
        }
    }
}
