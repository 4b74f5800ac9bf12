//! Plain-text and JSON renderings of reports, verdicts and tables.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::analysis::{CriterionResult, IndependenceTable, Overlap};
use crate::classification::{Classification, Counterexample, RuleStatus, RuleVerdict, StepVerdict};
use crate::consistency::ConsistencyReport;
use crate::cra::{sign, PropertyTable, Table1Reproduction, Table3Reproduction};
use crate::format::graph_body;
use crate::morphism::GraphMorphism;
use crate::rewriting::Transformation;

pub fn morphism_json(m: &GraphMorphism) -> Value {
    json!({ "nodes": m.node_map(), "edges": m.edge_map() })
}

fn ratio_string(r: &num_rational::Ratio<u64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn consistency_json(constraint: &str, r: &ConsistencyReport) -> Value {
    json!({
        "constraint": constraint,
        "polarity": r.polarity,
        "occ": r.occ,
        "ro": r.ro,
        "ncv": r.ncv,
        "ci": ratio_string(&r.ci),
        "ci_decimal": r.ci_f64(),
        "satisfied": r.satisfied(),
        "violating_occurrences": r.violating_occurrences.iter().map(morphism_json).collect::<Vec<_>>(),
    })
}

pub fn render_consistency(constraint: &str, r: &ConsistencyReport) -> String {
    let mut s = format!(
        "constraint {constraint}: occ={} ro={} ncv={} ci={} ({})\nsatisfied: {}\n",
        r.occ,
        r.ro,
        r.ncv,
        ratio_string(&r.ci),
        r.ci_f64(),
        r.satisfied()
    );
    for p in &r.violating_occurrences {
        let _ = writeln!(s, "violating occurrence {p}");
    }
    s
}

pub fn transformation_json(t: &Transformation) -> Value {
    json!({
        "rule": t.rule.name,
        "step": t.step,
        "host": graph_body(&t.host),
        "match": morphism_json(&t.m),
        "result": graph_body(&t.result),
        "comatch": morphism_json(&t.n),
        "track": morphism_json(t.track()),
    })
}

pub fn step_json(v: &StepVerdict) -> Value {
    json!({
        "preserving": v.preserving,
        "guaranteeing": v.guaranteeing,
        "sustaining": v.sustaining,
        "improving": v.improving,
        "directly_sustaining": v.directly_sustaining,
        "directly_improving": v.directly_improving,
        "ci_before": ratio_string(&v.before.ci),
        "ci_after": ratio_string(&v.after.ci),
        "ncv_before": v.before.ncv,
        "ncv_after": v.after.ncv,
        "evidence": {
            "lost_validity": v.evidence.lost_validity.iter().map(morphism_json).collect::<Vec<_>>(),
            "new_violations": v.evidence.new_violations.iter().map(morphism_json).collect::<Vec<_>>(),
            "repaired": v.evidence.repaired.iter().map(morphism_json).collect::<Vec<_>>(),
            "destroyed": v.evidence.destroyed.iter().map(morphism_json).collect::<Vec<_>>(),
        },
    })
}

pub fn render_step(v: &StepVerdict) -> String {
    let mut s = String::new();
    let flags = [
        ("preserving", v.preserving),
        ("guaranteeing", v.guaranteeing),
        ("sustaining", v.sustaining),
        ("improving", v.improving),
        ("directly_sustaining", v.directly_sustaining),
        ("directly_improving", v.directly_improving),
    ];
    for (name, b) in flags {
        let _ = writeln!(s, "{name:<20} {b}");
    }
    let _ = writeln!(
        s,
        "ci {} -> {}, ncv {} -> {}",
        ratio_string(&v.before.ci),
        ratio_string(&v.after.ci),
        v.before.ncv,
        v.after.ncv
    );
    for (name, list) in [
        ("lost validity", &v.evidence.lost_validity),
        ("new violation", &v.evidence.new_violations),
        ("repaired", &v.evidence.repaired),
        ("destroyed", &v.evidence.destroyed),
    ] {
        for p in list {
            let _ = writeln!(s, "{name}: {p}");
        }
    }
    s
}

fn example_json(c: &Counterexample) -> Value {
    json!({
        "host_index": c.host_index,
        "transformation": transformation_json(&c.transformation),
        "verdict": step_json(&c.verdict),
    })
}

pub fn status_json(s: &RuleStatus) -> Value {
    match s {
        RuleStatus::ProvenYes => json!({ "status": s.label() }),
        RuleStatus::ProvenNo(c) => json!({ "status": s.label(), "counterexample": example_json(c) }),
        RuleStatus::WitnessFound(c) => json!({ "status": s.label(), "witness": example_json(c) }),
        RuleStatus::NoCounterexampleFound { bound, samples } | RuleStatus::NoWitnessFound { bound, samples } => {
            json!({ "status": s.label(), "evidence": "bounded", "bound": bound, "samples": samples })
        }
    }
}

pub fn rule_verdict_json(v: &RuleVerdict) -> Value {
    let statuses: serde_json::Map<String, Value> =
        v.statuses.iter().map(|(c, s)| (c.name().to_owned(), status_json(s))).collect();
    json!({
        "rule": v.rule,
        "constraint": v.constraint,
        "bound": v.config.bound,
        "samples": v.config.samples,
        "seed": v.config.seed,
        "hosts_examined": v.hosts_examined,
        "steps_examined": v.steps_examined,
        "statuses": statuses,
    })
}

pub fn render_rule_verdict(v: &RuleVerdict) -> String {
    let mut s = format!(
        "rule {} / constraint {} (bound {}, samples {}, seed {}; {} hosts, {} steps)\n",
        v.rule, v.constraint, v.config.bound, v.config.samples, v.config.seed, v.hosts_examined, v.steps_examined
    );
    for cls in Classification::ALL {
        let st = v.status(cls);
        let detail = match st {
            RuleStatus::ProvenNo(c) => format!(" (counterexample: host #{} {})", c.host_index, c.transformation.host),
            RuleStatus::WitnessFound(c) => format!(" (witness: host #{} {})", c.host_index, c.transformation.host),
            RuleStatus::NoCounterexampleFound { .. } | RuleStatus::NoWitnessFound { .. } => " (bounded evidence)".into(),
            RuleStatus::ProvenYes => String::new(),
        };
        let _ = writeln!(s, "  {:<28} {}{}", cls.name(), st.label(), detail);
    }
    s
}

pub fn overlap_json(o: &Overlap) -> Value {
    json!({
        "kind": o.kind,
        "graph": graph_body(&o.graph),
        "first": morphism_json(&o.first),
        "second": morphism_json(&o.second),
        "jointly_surjective": o.jointly_surjective,
    })
}

pub fn criterion_json(r: &CriterionResult) -> Value {
    json!({
        "verdict": r.verdict,
        "conjectured": r.conjectured,
        "basis": r.basis,
        "notes": r.notes,
        "evidence": r.evidence.iter().map(overlap_json).collect::<Vec<_>>(),
    })
}

pub fn render_criterion(label: &str, r: &CriterionResult) -> String {
    let mut s = format!("{label}: {}{}", r.verdict, if r.conjectured { " [conjectured]" } else { "" });
    let _ = write!(s, " (basis: {:?}, {} overlap(s))", r.basis, r.evidence.len());
    for n in &r.notes {
        let _ = write!(s, "; {n}");
    }
    s.push('\n');
    s
}

pub fn render_table3(t: &IndependenceTable) -> String {
    let width = t.rows.iter().map(|r| r.rule.len()).max().unwrap_or(4).max(4);
    let mut s = format!("{:<width$} |", "rule");
    let mut prev = None;
    for c in &t.columns {
        if prev.is_some_and(|p| p != c.kind) {
            s.push_str(" |");
        }
        prev = Some(c.kind);
        let _ = write!(s, " {:>6}", c.label);
    }
    s.push('\n');
    let mut groups = String::new();
    let _ = write!(groups, "{:<width$} |", "");
    let mut prev = None;
    for c in &t.columns {
        if prev.is_some_and(|p| p != c.kind) {
            groups.push_str(" |");
        }
        let tag = match c.kind {
            crate::analysis::ColumnKind::SeqIndep => "seqI",
            crate::analysis::ColumnKind::ParIndep => "parI",
            crate::analysis::ColumnKind::ParDep => "parD",
            crate::analysis::ColumnKind::SeqDep => "seqD",
        };
        prev = Some(c.kind);
        let _ = write!(groups, " {tag:>6}");
    }
    s.push_str(&groups);
    s.push('\n');
    for r in &t.rows {
        let _ = write!(s, "{:<width$} |", r.rule);
        let mut prev = None;
        for (c, &b) in t.columns.iter().zip(&r.cells) {
            if prev.is_some_and(|p| p != c.kind) {
                s.push_str(" |");
            }
            prev = Some(c.kind);
            let _ = write!(s, " {:>6}", sign(b));
        }
        s.push('\n');
    }
    s
}

pub fn table3_json(rep: &Table3Reproduction) -> Value {
    json!({
        "columns": rep.table.columns,
        "rows": rep.table.rows.iter().map(|r| json!({
            "rule": r.rule,
            "cells": r.cells.iter().map(|&b| sign(b)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "diffs": rep.diffs,
    })
}

/// Symbols only: a sustaining group and an improving group, one column per constraint.
pub fn render_property_table(t: &PropertyTable) -> String {
    let width = t.cells.iter().map(|c| c.rule.len()).max().unwrap_or(4).max(4);
    let col = t.constraints.iter().map(String::len).max().unwrap_or(0).max(5);
    let n = t.constraints.len();
    let group = (n * (col + 1)).saturating_sub(1);
    let mut s = format!("{:<width$} | {:^group$} | {:^group$}", "", "sustaining", "improving").trim_end().to_owned();
    s.push('\n');
    let _ = write!(s, "{:<width$} |", "rule");
    for (i, name) in t.constraints.iter().chain(&t.constraints).enumerate() {
        if i == n {
            s.push_str(" |");
        }
        let _ = write!(s, " {name:>col$}");
    }
    s.push('\n');
    for row in t.cells.chunks(2 * n.max(1)) {
        let _ = write!(s, "{:<width$} |", row[0].rule);
        for (i, c) in row.iter().enumerate() {
            if i == n {
                s.push_str(" |");
            }
            let _ = write!(s, " {:>col$}", c.symbol);
        }
        s.push('\n');
    }
    s
}

pub fn render_table1(rep: &Table1Reproduction) -> String {
    render_property_table(&rep.table)
}

/// One line per cell with its provenance and static criterion result.
pub fn render_property_details(t: &PropertyTable) -> String {
    let mut s = String::new();
    for c in &t.cells {
        let stat = match &c.static_result {
            Ok(r) => format!("{}{}", r.verdict, if r.conjectured { " [conjectured]" } else { "" }),
            Err(e) => format!("n/a ({e})"),
        };
        let _ = writeln!(
            s,
            "{}/{} {:?}: {} [{:?}] static: {}",
            c.rule, c.constraint, c.property, c.symbol, c.provenance, stat
        );
    }
    s
}

pub fn property_table_json(t: &PropertyTable) -> Value {
    json!({
        "bound": t.config.bound,
        "samples": t.config.samples,
        "seed": t.config.seed,
        "constraints": t.constraints,
        "cells": t.cells.iter().map(|c| json!({
            "rule": c.rule,
            "constraint": c.constraint,
            "property": c.property,
            "symbol": c.symbol,
            "provenance": c.provenance,
            "static": match &c.static_result {
                Ok(r) => criterion_json(r),
                Err(e) => json!({ "unavailable": e }),
            },
        })).collect::<Vec<_>>(),
        "verdicts": t.verdicts.iter().map(rule_verdict_json).collect::<Vec<_>>(),
    })
}

pub fn table1_json(rep: &Table1Reproduction) -> Value {
    let mut v = property_table_json(&rep.table);
    for (cell, want) in v["cells"].as_array_mut().expect("cells array").iter_mut().zip(&rep.expected) {
        cell["expected"] = json!(want);
    }
    v["diffs"] = json!(rep.diffs);
    v
}
