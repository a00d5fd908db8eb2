use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use super::NmeRule;
use crate::acyclicity::{analyze, AnalysisOptions, Report};
use crate::chase::Criterion;
use crate::error::Result;
use crate::unification::{dependency_witnesses, self_blocking_unifier, DependencyGraph, Unifier};

/// Dependency witnesses of `consumer` on `producer` whose composed rule is
/// not self-blocking. `None` when unification was capped.
pub fn nm_witnesses(producer: &NmeRule, consumer: &NmeRule) -> Option<Vec<Unifier>> {
    let w = dependency_witnesses(&producer.pos(), &consumer.pos())?;
    Some(
        w.into_iter()
            .filter(|u| !self_blocking_unifier(producer, u, consumer))
            .collect(),
    )
}

/// `consumer` depends on `producer` through some unifier that does not
/// make the composed rule self-blocking.
pub fn nm_depends(producer: &NmeRule, consumer: &NmeRule) -> bool {
    nm_witnesses(producer, consumer).is_none_or(|w| !w.is_empty())
}

/// The negation-aware GRD.
pub fn nm_grd(rules: &[NmeRule]) -> DependencyGraph {
    let mut g = DependencyGraph {
        ids: rules.iter().map(|r| r.id.clone()).collect(),
        negation_aware: true,
        ..Default::default()
    };
    for (i, producer) in rules.iter().enumerate() {
        for (j, consumer) in rules.iter().enumerate() {
            match nm_witnesses(producer, consumer) {
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

#[derive(Clone, Debug, Serialize)]
pub struct NmReport {
    /// Self-blocking rules, which can never be applied soundly and are left
    /// out of the analysis.
    pub dropped: Vec<Arc<str>>,
    pub report: Report,
}

impl NmReport {
    /// Every chase tree built with `criterion` is finite.
    pub fn tree_finite(&self, criterion: Criterion) -> bool {
        self.report.guarantees.get(&criterion).copied().unwrap_or(false)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.report.to_json();
        v["dropped"] = json!(self.dropped);
        v
    }
}

/// Negation-aware acyclicity analysis: self-blocking rules are dropped, then
/// every property is checked with unifiers that would make the composed
/// rule self-blocking filtered out.
pub fn nm_analyze(rules: &[NmeRule], options: AnalysisOptions) -> Result<NmReport> {
    let (dropped, kept): (Vec<&NmeRule>, Vec<&NmeRule>) =
        rules.iter().partition(|r| r.is_self_blocking());
    let kept: Vec<NmeRule> = kept.into_iter().cloned().collect();
    let report = analyze(
        &kept,
        AnalysisOptions {
            negation_aware: true,
            ..options
        },
    )?;
    Ok(NmReport {
        dropped: dropped.into_iter().map(|r| r.id.clone()).collect(),
        report,
    })
}
