//! Step-level classification and bounded rule-level search.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::anf::{validate_anf, AnfError, AnfShape, Polarity};
use crate::condition::Constraint;
use crate::consistency::{consistency_index, report_for_shape, ConsistencyReport};
use crate::graph::TypedGraph;
use crate::matching::enumerate_monomorphisms;
use crate::morphism::GraphMorphism;
use crate::rewriting::{apply, apply_found_match, find_matches, RewriteError, Rule, Transformation};
use crate::universe::{HostUniverse, SearchConfig};

/// Occurrence-level evidence behind the direct classifications.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepEvidence {
    /// Valid occurrences in G whose tracked image is total but invalid.
    pub lost_validity: Vec<GraphMorphism>,
    /// Occurrences in H not tracked from G that violate the body.
    pub new_violations: Vec<GraphMorphism>,
    /// Violating occurrences in G whose tracked image is total and valid.
    pub repaired: Vec<GraphMorphism>,
    /// Violating occurrences in G whose tracked image is not total.
    pub destroyed: Vec<GraphMorphism>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepVerdict {
    pub preserving: bool,
    pub guaranteeing: bool,
    pub sustaining: bool,
    pub improving: bool,
    pub directly_sustaining: bool,
    pub directly_improving: bool,
    pub before: ConsistencyReport,
    pub after: ConsistencyReport,
    pub evidence: StepEvidence,
}

impl StepVerdict {
    /// Names of the implications between flags that this verdict breaks.
    pub fn implication_violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let g_sat = self.before.satisfied();
        let checks = [
            (self.guaranteeing && !self.directly_sustaining, "guaranteeing => directly sustaining"),
            (self.directly_sustaining && !self.sustaining, "directly sustaining => sustaining"),
            (self.sustaining && !self.preserving, "sustaining => preserving"),
            (self.directly_improving && !self.improving, "directly improving => improving"),
            (self.improving && !self.sustaining, "improving => sustaining"),
            (self.guaranteeing && !g_sat && !self.directly_improving, "guaranteeing and G violates c => directly improving"),
        ];
        for (broken, name) in checks {
            if broken {
                out.push(name);
            }
        }
        out
    }
}

pub fn classify_step(t: &Transformation, c: &Constraint) -> Result<StepVerdict, AnfError> {
    let shape = validate_anf(c)?;
    Ok(classify_step_with_shape(t, &shape))
}

pub fn classify_step_with_shape(t: &Transformation, shape: &AnfShape) -> StepVerdict {
    let occurrences = host_occurrences(&t.host, shape);
    let before = report_from(shape, &occurrences, &t.host);
    classify_with_before(t, shape, &before, &occurrences)
}

/// Occurrences of the outer graph with their validity, in canonical order.
fn host_occurrences(g: &Arc<TypedGraph>, shape: &AnfShape) -> Vec<(GraphMorphism, bool)> {
    enumerate_monomorphisms(shape.outer_graph(), g)
        .expect("shared type graph")
        .into_iter()
        .map(|p| {
            let valid = shape.occurrence_valid(&p);
            (p, valid)
        })
        .collect()
}

fn report_from(shape: &AnfShape, occurrences: &[(GraphMorphism, bool)], g: &Arc<TypedGraph>) -> ConsistencyReport {
    match shape.polarity {
        Polarity::Universal => {
            let violating: Vec<GraphMorphism> = occurrences.iter().filter(|(_, v)| !v).map(|(p, _)| p.clone()).collect();
            let ncv = violating.len();
            ConsistencyReport {
                polarity: shape.polarity,
                occ: occurrences.len(),
                ro: occurrences.len(),
                ncv,
                ci: consistency_index(ncv, occurrences.len()),
                violating_occurrences: violating,
            }
        }
        Polarity::Existential => report_for_shape(g, shape),
    }
}

fn classify_with_before(
    t: &Transformation,
    shape: &AnfShape,
    before: &ConsistencyReport,
    occurrences: &[(GraphMorphism, bool)],
) -> StepVerdict {
    let before = before.clone();
    let mut evidence = StepEvidence::default();
    let (after, directly) = match shape.polarity {
        Polarity::Existential => (report_for_shape(&t.result, shape), None),
        Polarity::Universal => {
            let in_result = host_occurrences(&t.result, shape);
            // Tracked occurrences keep their ids, so they are exactly the ones inside the context.
            let mut tracked = BTreeMap::new();
            for (q, valid) in &in_result {
                if q.image_within(&t.context) {
                    tracked.insert((q.node_map(), q.edge_map()), *valid);
                } else if !valid {
                    evidence.new_violations.push(q.clone());
                }
            }
            for (p, valid) in occurrences {
                match tracked.get(&(p.node_map(), p.edge_map())) {
                    None if !valid => evidence.destroyed.push(p.clone()),
                    None => {}
                    Some(true) if !valid => evidence.repaired.push(p.clone()),
                    Some(false) if *valid => evidence.lost_validity.push(p.clone()),
                    Some(_) => {}
                }
            }
            (report_from(shape, &in_result, &t.result), Some(()))
        }
    };
    let g_sat = before.satisfied();
    let h_sat = after.satisfied();
    let preserving = !g_sat || h_sat;
    let guaranteeing = h_sat;
    let sustaining = before.ci <= after.ci;
    let improving = sustaining && before.ncv > 0 && before.ncv > after.ncv;
    let (directly_sustaining, directly_improving) = match directly {
        None => (preserving, !g_sat && preserving && guaranteeing),
        Some(()) => {
            let ds = evidence.lost_validity.is_empty() && evidence.new_violations.is_empty();
            let di = !g_sat && ds && (!evidence.repaired.is_empty() || !evidence.destroyed.is_empty());
            (ds, di)
        }
    };
    StepVerdict {
        preserving,
        guaranteeing,
        sustaining,
        improving,
        directly_sustaining,
        directly_improving,
        before,
        after,
        evidence,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Preserving,
    Guaranteeing,
    Sustaining,
    DirectlySustaining,
    Improving,
    StronglyImproving,
    DirectlyImproving,
    StronglyDirectlyImproving,
}

impl Classification {
    pub const ALL: [Classification; 8] = [
        Classification::Preserving,
        Classification::Guaranteeing,
        Classification::Sustaining,
        Classification::DirectlySustaining,
        Classification::Improving,
        Classification::StronglyImproving,
        Classification::DirectlyImproving,
        Classification::StronglyDirectlyImproving,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Classification::Preserving => "preserving",
            Classification::Guaranteeing => "guaranteeing",
            Classification::Sustaining => "sustaining",
            Classification::DirectlySustaining => "directly_sustaining",
            Classification::Improving => "improving",
            Classification::StronglyImproving => "strongly_improving",
            Classification::DirectlyImproving => "directly_improving",
            Classification::StronglyDirectlyImproving => "strongly_directly_improving",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete step, found by the bounded search, that refutes or witnesses a
/// classification. `host_index` is the host's position in the search order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub host_index: usize,
    pub transformation: Transformation,
    pub verdict: StepVerdict,
}

impl Counterexample {
    /// Re-applies the rule at the recorded match and re-classifies the step.
    pub fn replay(&self, c: &Constraint) -> Result<StepVerdict, ReplayError> {
        let t = &self.transformation;
        let again = apply(&t.rule, &t.host, &t.m)?;
        if again.result != t.result {
            return Err(ReplayError::DifferentResult);
        }
        Ok(classify_step(&again, c)?)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Anf(#[from] AnfError),
    #[error("re-applying the rule produced a different result graph")]
    DifferentResult,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleStatus {
    /// Established by a static criterion.
    ProvenYes,
    ProvenNo(Box<Counterexample>),
    NoCounterexampleFound { bound: usize, samples: usize },
    WitnessFound(Box<Counterexample>),
    NoWitnessFound { bound: usize, samples: usize },
}

impl RuleStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RuleStatus::ProvenYes => "proven_yes",
            RuleStatus::ProvenNo(_) => "proven_no",
            RuleStatus::NoCounterexampleFound { .. } => "no_counterexample_found",
            RuleStatus::WitnessFound(_) => "witness_found",
            RuleStatus::NoWitnessFound { .. } => "no_witness_found",
        }
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, RuleStatus::ProvenNo(_))
    }

    pub fn example(&self) -> Option<&Counterexample> {
        match self {
            RuleStatus::ProvenNo(c) | RuleStatus::WitnessFound(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleVerdict {
    pub rule: String,
    pub constraint: String,
    pub config: SearchConfig,
    pub hosts_examined: usize,
    pub steps_examined: usize,
    pub statuses: BTreeMap<Classification, RuleStatus>,
}

impl RuleVerdict {
    pub fn status(&self, c: Classification) -> &RuleStatus {
        &self.statuses[&c]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error(transparent)]
    Anf(#[from] AnfError),
    #[error("bound {bound} is smaller than the {needed} nodes of the left-hand side")]
    BoundTooSmall { bound: usize, needed: usize },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// First refuting step and first witness per classification within one host.
#[derive(Default)]
struct HostFindings {
    steps: usize,
    refuted: BTreeMap<Classification, (Transformation, StepVerdict)>,
    witnessed: BTreeMap<Classification, (Transformation, StepVerdict)>,
}

fn examine_host(rule: &Rule, shape: &AnfShape, host: &Arc<TypedGraph>) -> Result<HostFindings, RewriteError> {
    let mut out = HostFindings::default();
    let matches = find_matches(rule, host)?;
    if matches.is_empty() {
        return Ok(out);
    }
    let occurrences = host_occurrences(host, shape);
    let before = report_from(shape, &occurrences, host);
    for m in matches {
        let t = apply_found_match(rule, host, &m);
        let v = classify_with_before(&t, shape, &before, &occurrences);
        out.steps += 1;
        let violated = v.before.ncv > 0;
        let refutes = [
            (Classification::Preserving, !v.preserving),
            (Classification::Guaranteeing, !v.guaranteeing),
            (Classification::Sustaining, !v.sustaining),
            (Classification::DirectlySustaining, !v.directly_sustaining),
            (Classification::StronglyImproving, violated && !v.improving),
            (Classification::StronglyDirectlyImproving, violated && !v.directly_improving),
        ];
        for (cls, hit) in refutes {
            if hit {
                out.refuted.entry(cls).or_insert_with(|| (t.clone(), v.clone()));
            }
        }
        let witnesses = [
            (Classification::Improving, v.improving),
            (Classification::DirectlyImproving, v.directly_improving),
        ];
        for (cls, hit) in witnesses {
            if hit {
                out.witnessed.entry(cls).or_insert_with(|| (t.clone(), v.clone()));
            }
        }
    }
    Ok(out)
}

/// Bounded search over all hosts up to `config.bound` nodes (up to
/// isomorphism) followed by `config.samples` random larger hosts.
pub fn classify_rule_empirical(rule: &Rule, c: &Constraint, config: SearchConfig) -> Result<RuleVerdict, ClassifyError> {
    let universe = HostUniverse::new(rule.lhs().type_graph().clone());
    classify_rule_in(rule, c, config, &universe)
}

/// As [`classify_rule_empirical`], reusing a host universe across calls.
pub fn classify_rule_in(rule: &Rule, c: &Constraint, config: SearchConfig, universe: &HostUniverse) -> Result<RuleVerdict, ClassifyError> {
    let shape = validate_anf(c)?;
    let needed = rule.lhs().node_count();
    if config.bound < needed {
        return Err(ClassifyError::BoundTooSmall { bound: config.bound, needed });
    }
    let min_counts = rule.lhs().node_type_counts();
    let hosts = universe.hosts_with_samples(config, &min_counts);
    let findings: Vec<HostFindings> = hosts
        .par_iter()
        .map(|h| examine_host(rule, &shape, h))
        .collect::<Result<_, _>>()?;

    let mut steps = 0;
    let mut refuted: BTreeMap<Classification, Counterexample> = BTreeMap::new();
    let mut witnessed: BTreeMap<Classification, Counterexample> = BTreeMap::new();
    for (i, f) in findings.into_iter().enumerate() {
        steps += f.steps;
        for (cls, (t, v)) in f.refuted {
            refuted.entry(cls).or_insert(Counterexample { host_index: i, transformation: t, verdict: v });
        }
        for (cls, (t, v)) in f.witnessed {
            witnessed.entry(cls).or_insert(Counterexample { host_index: i, transformation: t, verdict: v });
        }
    }

    let (bound, samples) = (config.bound, config.samples);
    let mut statuses = BTreeMap::new();
    let universal = |cls: Classification, refuted: &BTreeMap<Classification, Counterexample>| match refuted.get(&cls) {
        Some(cx) => RuleStatus::ProvenNo(Box::new(cx.clone())),
        None => RuleStatus::NoCounterexampleFound { bound, samples },
    };
    for cls in [
        Classification::Preserving,
        Classification::Guaranteeing,
        Classification::Sustaining,
        Classification::DirectlySustaining,
    ] {
        statuses.insert(cls, universal(cls, &refuted));
    }
    // Improvement requires sustainment of every application plus a witness.
    for (cls, base, strong) in [
        (Classification::Improving, Classification::Sustaining, Classification::StronglyImproving),
        (Classification::DirectlyImproving, Classification::DirectlySustaining, Classification::StronglyDirectlyImproving),
    ] {
        let status = if let Some(cx) = refuted.get(&base) {
            RuleStatus::ProvenNo(Box::new(cx.clone()))
        } else if let Some(w) = witnessed.get(&cls) {
            RuleStatus::WitnessFound(Box::new(w.clone()))
        } else {
            RuleStatus::NoWitnessFound { bound, samples }
        };
        let strong_status = match &status {
            RuleStatus::ProvenNo(cx) => RuleStatus::ProvenNo(cx.clone()),
            RuleStatus::NoWitnessFound { .. } => RuleStatus::NoWitnessFound { bound, samples },
            _ => universal(strong, &refuted),
        };
        statuses.insert(cls, status);
        statuses.insert(strong, strong_status);
    }

    Ok(RuleVerdict {
        rule: rule.name.clone(),
        constraint: c.name.clone(),
        config,
        hosts_examined: hosts.len(),
        steps_examined: steps,
        statuses,
    })
}
