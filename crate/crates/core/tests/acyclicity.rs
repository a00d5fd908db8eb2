mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{index, load, FIXTURES};
use nmchase_core::acyclicity::{
    analyze, check, check_per_scc, position_graph, AnalysisOptions, GraphKind, Graphs, Outcome,
    Side, WeakAcyclicity, PROPERTIES,
};
use nmchase_core::chase::Criterion;
use nmchase_core::nonmonotonic::{nm_analyze, pos};
use nmchase_core::unification::{compatible, compatible_sequence, unifiers, unified_rule};
use nmchase_core::{NmeRule, Rule};

fn outcomes(rules: &[NmeRule], negation_aware: bool) -> BTreeMap<String, Outcome> {
    let report = analyze(
        rules,
        AnalysisOptions {
            negation_aware,
            ..Default::default()
        },
    )
    .unwrap();
    report
        .verdicts
        .iter()
        .map(|v| (v.property.clone(), v.outcome))
        .collect()
}

/// Weak acyclicity on the predicate-position graph with special edges.
fn classical_wa(rules: &[Rule]) -> bool {
    type Pos = (String, usize);
    let mut edges: BTreeSet<(Pos, Pos, bool)> = BTreeSet::new();
    for r in rules {
        let frontier = r.frontier();
        let existentials = r.existentials();
        for b in &r.body {
            for (i, t) in b.args.iter().enumerate() {
                let Some(x) = t.as_var() else { continue };
                if !frontier.contains(x) {
                    continue;
                }
                for h in &r.head {
                    for (j, s) in h.args.iter().enumerate() {
                        let from = (b.predicate.to_string(), i);
                        let to = (h.predicate.to_string(), j);
                        if s.as_var() == Some(x) {
                            edges.insert((from, to, false));
                        } else if s.as_var().is_some_and(|v| existentials.contains(v)) {
                            edges.insert((from, to, true));
                        }
                    }
                }
            }
        }
    }
    let reach = |from: &Pos, to: &Pos| {
        let mut seen = BTreeSet::from([from.clone()]);
        let mut stack = vec![from.clone()];
        while let Some(n) = stack.pop() {
            if &n == to {
                return true;
            }
            for (a, b, _) in &edges {
                if a == &n && seen.insert(b.clone()) {
                    stack.push(b.clone());
                }
            }
        }
        false
    };
    !edges.iter().any(|(a, b, special)| *special && reach(b, a))
}

#[test]
fn weak_acyclicity_example() {
    let kb = load("weak_acyclicity");
    let o = outcomes(&kb.rules, false);
    assert_eq!(o["wa"], Outcome::Violated);
    assert_eq!(o["aGRD"], Outcome::Satisfied);
    assert_eq!(o["wa^D"], Outcome::Satisfied);
}

#[test]
fn weak_acyclicity_graphs() {
    let kb = load("weak_acyclicity");
    let g = Graphs::build(&kb.rules, false).unwrap();
    let (r1, r2) = (index(&kb, "R1"), index(&kb, "R2"));
    let wa = check(&WeakAcyclicity, &g.full);
    let w = wa.witness.as_ref().unwrap();
    assert!(w.verify(&g.full));
    // no R1-head → R2-body edges in the dependency graph
    for h in g.full.positions(r1, Side::Head) {
        for b in g.full.positions(r2, Side::Body) {
            if g.full.node(h).predicate == g.full.node(b).predicate && g.full.node(h).arg == g.full.node(b).arg {
                assert!(g.full.has_edge(h, b));
                assert!(!g.dependency.has_edge(h, b));
            }
        }
    }
    assert_eq!(check(&WeakAcyclicity, &g.dependency).outcome, Outcome::Satisfied);
}

#[test]
fn pgd_pgu_example() {
    let kb = load("pgd_pgu");
    let o = outcomes(&kb.rules, false);
    assert_eq!(o["aGRD"], Outcome::Violated);
    assert_eq!(o["wa"], Outcome::Violated);
    assert_eq!(o["wa^D"], Outcome::Violated);
    assert_eq!(o["wa^U"], Outcome::Satisfied);
    assert_eq!(o["wa^U+"], Outcome::Satisfied);

    let g = Graphs::build(&kb.rules, false).unwrap();
    let (r1, r2) = (index(&kb, "R1"), index(&kb, "R2"));
    // the p-position transitions disappear in the unifier graph
    for h in g.unifier.positions(r1, Side::Head) {
        for b in g.unifier.positions(r2, Side::Body) {
            let (hn, bn) = (g.unifier.node(h), g.unifier.node(b));
            if &*hn.predicate == "p" && hn.predicate == bn.predicate && hn.arg == bn.arg {
                assert!(g.dependency.has_edge(h, b));
                assert!(!g.unifier.has_edge(h, b));
            }
        }
    }
}

#[test]
fn further_refinements_cycle_is_compatible() {
    let kb = load("further_refinements");
    let o = outcomes(&kb.rules, false);
    assert_eq!(o["wa^U"], Outcome::Violated);
    assert_eq!(o["wa^U+"], Outcome::Violated);

    let report = analyze(&kb.rules, AnalysisOptions::default()).unwrap();
    let w = report.verdict("wa^U+").unwrap().witness.as_ref().unwrap();
    assert_eq!(w.unifiers.len(), 3);

    let pgu = position_graph(&kb.rules, GraphKind::Unifier, false).unwrap();
    let id = |n: &str| index(&kb, n);
    let rules = &kb.rules;
    let piece = |c: usize, p: usize| unifiers(&rules[c].pos(), &rules[p].pos(), true).unwrap();
    let mu1 = piece(id("R2"), id("R1"));
    let mu2: Vec<_> = piece(id("R3"), id("R2"))
        .into_iter()
        .filter(|u| u.body_part.len() == 1)
        .collect();
    let mu3 = piece(id("R1"), id("R3"));
    assert_eq!((mu1.len(), mu2.len(), mu3.len()), (1, 1, 1));
    let seq = [id("R1"), id("R2"), id("R3"), id("R1")];
    let composed = compatible_sequence(
        rules,
        &seq,
        &[mu1[0].clone(), mu2[0].clone(), mu3[0].clone()],
        &pgu,
    )
    .unwrap();
    assert!(composed.is_some());

    // R3's body against the head of R1 ⊕ R2: no piece-unifier, only a
    // relaxed one, which the sequence above accepted
    let r12 = unified_rule(&rules[id("R1")], &mu1[0], &rules[id("R2")]).pos();
    assert!(unifiers(&rules[id("R3")].pos(), &r12, true).unwrap().is_empty());
    assert!(!unifiers(&rules[id("R3")].pos(), &r12, false).unwrap().is_empty());
}

#[test]
fn incompatible_sequence_through_dropped_edges() {
    let kb = load("pgd_pgu");
    let pgu = position_graph(&kb.rules, GraphKind::Unifier, false).unwrap();
    let (r1, r2) = (index(&kb, "R1"), index(&kb, "R2"));
    let rules = &kb.rules;
    let mu1 = unifiers(&rules[r1].pos(), &rules[r2].pos(), true).unwrap();
    assert_eq!(mu1.len(), 1);
    let relaxed: Vec<_> = unifiers(&rules[r2].pos(), &rules[r1].pos(), false)
        .unwrap()
        .into_iter()
        .filter(|u| !u.piece && u.body_part.len() == 1 && u.head_part.len() == 1)
        .filter(|u| {
            let b: Vec<_> = rules[r2].positive.iter().collect();
            u.body_part.iter().all(|&i| &*b[i].predicate == "p")
        })
        .collect();
    assert_eq!(relaxed.len(), 1);
    assert!(!compatible(&relaxed[0], rules, r1, r2, &pgu));
    let seq = [r2, r1, r2];
    let out = compatible_sequence(rules, &seq, &[mu1[0].clone(), relaxed[0].clone()], &pgu).unwrap();
    assert!(out.is_none());
    // a malformed sequence is rejected
    assert!(compatible_sequence(rules, &seq, &[mu1[0].clone()], &pgu).is_err());
}

#[test]
fn swap_rule_is_wa_but_not_agrd() {
    let kb = load("swap");
    let o = outcomes(&kb.rules, false);
    assert_eq!(o["aGRD"], Outcome::Violated);
    assert_eq!(o["wa"], Outcome::Satisfied);
}

#[test]
fn empty_rule_set_satisfies_everything() {
    let o = outcomes(&[], false);
    assert_eq!(o.len(), PROPERTIES.len());
    assert!(o.values().all(|&v| v == Outcome::Satisfied));
}

#[test]
fn self_blocking_pair_is_certified_only_with_negation() {
    let kb = load("self_blocking_pair");
    let positive: Vec<NmeRule> = pos(&kb.rules).into_iter().map(NmeRule::from).collect();
    let o = outcomes(&positive, false);
    assert!(o.values().all(|&v| v == Outcome::Violated), "{o:?}");
    let nm = nm_analyze(&kb.rules, AnalysisOptions::default()).unwrap();
    assert_eq!(nm.report.outcome("aGRD"), Some(Outcome::Satisfied));
    assert!(nm.tree_finite(Criterion::Skolem));
    assert!(nm.dropped.is_empty());
}

#[test]
fn selfblock_unifier_is_certified_by_self_blocking_cycles() {
    let kb = load("selfblock_unifier");
    let positive = outcomes(&kb.rules, false);
    assert_eq!(positive["wa^U+"], Outcome::Violated);
    let nm = nm_analyze(&kb.rules, AnalysisOptions::default()).unwrap();
    assert_eq!(nm.report.outcome("aGRD"), Some(Outcome::Violated));
    assert_eq!(nm.report.outcome("wa^U"), Some(Outcome::Violated));
    assert_eq!(nm.report.outcome("wa^U+"), Some(Outcome::Satisfied));
    assert!(nm.tree_finite(Criterion::Skolem));
}

#[test]
fn negation_free_nm_analysis_matches_analyze() {
    for name in ["weak_acyclicity", "pgd_pgu", "further_refinements", "swap"] {
        let kb = load(name);
        let nm = nm_analyze(&kb.rules, AnalysisOptions::default()).unwrap();
        let plain = analyze(&kb.rules, AnalysisOptions::default()).unwrap();
        for p in PROPERTIES {
            assert_eq!(nm.report.outcome(p), plain.outcome(p), "{name} {p}");
        }
    }
}

#[test]
fn fixtures_respect_inclusions_and_hierarchy() {
    for name in FIXTURES {
        let kb = load(name);
        let g = Graphs::build(&kb.rules, false).unwrap();
        assert!(g.unifier.is_subgraph_of(&g.dependency), "{name}");
        assert!(g.dependency.is_subgraph_of(&g.full), "{name}");
        let o = outcomes(&kb.rules, false);
        let sat = |p: &str| o[p] == Outcome::Satisfied;
        assert!(!sat("wa") || sat("wa^D"), "{name}");
        assert!(!sat("wa^D") || sat("wa^U"), "{name}");
        assert!(!sat("wa^U") || sat("wa^U+"), "{name}");
        assert!(!sat("aGRD") || sat("wa^D"), "{name}");
        let per_scc = check_per_scc(&WeakAcyclicity, &kb.rules, &g.grd).unwrap();
        assert_eq!(per_scc, o["wa^D"], "{name}");
        assert_eq!(sat("wa"), classical_wa(&kb.positive_rules()), "{name}");
    }
}

#[test]
fn guarantees_follow_verdicts() {
    let kb = load("swap");
    let report = analyze(&kb.rules, AnalysisOptions::default()).unwrap();
    assert!(!report.guarantees[&Criterion::Oblivious]);
    assert!(report.guarantees[&Criterion::Skolem]);
    let kb = load("weak_acyclicity");
    let report = analyze(&kb.rules, AnalysisOptions::default()).unwrap();
    assert!(Criterion::ALL.iter().all(|c| report.guarantees[c]));
    let json = report.to_json();
    assert_eq!(json["version"], 1);
    assert_eq!(json["verdicts"].as_array().unwrap().len(), 5);
}

#[test]
fn graph_exports() {
    let kb = load("pgd_pgu");
    let g = position_graph(&kb.rules, GraphKind::Unifier, false).unwrap();
    let dot = g.to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("doublecircle"));
    let json = g.to_json();
    assert_eq!(json["version"], 1);
    assert_eq!(json["nodes"].as_array().unwrap().len(), g.len());
    assert_eq!(json["edges"].as_array().unwrap().len(), g.edge_count());
}
