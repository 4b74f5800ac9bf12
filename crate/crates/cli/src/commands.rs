use std::fmt::Write as _;
use std::sync::Arc;

use gradcons::analysis::independence_table;
use gradcons::cra::{example1, property_table, reproduce_table1, reproduce_table3, CellDiff, CraError};
use gradcons::format::{emit_graph, graph_doc, Document};
use gradcons::report::{
    consistency_json, property_table_json, render_consistency, render_property_details, render_property_table,
    render_step, render_table1, render_table3, step_json, table1_json, table3_json,
    transformation_json,
};
use gradcons::{
    apply, classify_step, consistency_report, find_matches, graph_satisfies, validate_anf, Constraint, Polarity, Rule,
    Transformation, TypedGraph,
};
use num_rational::Ratio;
use serde_json::{json, Value};

use crate::input::{load_case_study, load_constraint, load_document, load_graph, load_rule, same_types, CliError};
use crate::{BenchTarget, Cli, Command, Output};

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Validate { files } => validate(files),
        Command::Satisfy { graph, constraints } => satisfy(graph, constraints),
        Command::Report { graph, constraints } => report(graph, constraints),
        Command::Apply { rule, graph, match_index, output } => {
            let rule = load_rule(rule)?;
            let t = step(&rule, &load_graph(graph)?, *match_index)?;
            if let Some(path) = output {
                std::fs::write(path, emit_graph(&t.result))
                    .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))?;
            }
            let text = format!(
                "rule {} applied at match {match_index}\nhost:   {}\nresult: {}\n",
                rule.name, t.host, t.result
            );
            let mut json = transformation_json(&t);
            json["result_document"] = serde_json::to_value(graph_doc(&t.result)).expect("graph documents serialise");
            Ok(Output { text, json, mismatch: false })
        }
        Command::ClassifyStep { rule, graph, constraint, match_index } => {
            let rule = load_rule(rule)?;
            let c = load_constraint(constraint)?;
            let g = load_graph(graph)?;
            same_types(&g, c.root(), "graph and constraint")?;
            let t = step(&rule, &g, *match_index)?;
            let v = classify_step(&t, &c).map_err(|e| CliError::Validation(format!("{}: {e}", c.name)))?;
            let text = format!("rule {} at match {match_index} against {}\n{}", rule.name, c.name, render_step(&v));
            let json = json!({ "rule": rule.name, "constraint": c.name, "match": match_index, "verdict": step_json(&v) });
            Ok(Output { text, json, mismatch: false })
        }
        Command::ClassifyRule { rule, constraint } => {
            let rule = load_rule(rule)?;
            let c = load_constraint(constraint)?;
            let table = property_table(std::slice::from_ref(&rule), std::slice::from_ref(&c), cli.config(), cli.conjecture)
                .map_err(cra_error)?;
            let mut text = render_property_details(&table);
            text.push_str(&gradcons::report::render_rule_verdict(&table.verdicts[0]));
            Ok(Output { text, json: property_table_json(&table), mismatch: false })
        }
        Command::Analyze { rules, constraints } => {
            let rules = rules.iter().map(|r| load_rule(r)).collect::<Result<Vec<Rule>, _>>()?;
            let constraints = constraints.iter().map(|c| load_constraint(c)).collect::<Result<Vec<Constraint>, _>>()?;
            let deps = independence_table(&rules, &constraints).map_err(|e| CliError::Validation(e.to_string()))?;
            let props = property_table(&rules, &constraints, cli.config(), cli.conjecture).map_err(cra_error)?;
            let text = format!(
                "{}\n{}\n{}",
                render_table3(&deps),
                render_property_table(&props),
                render_property_details(&props)
            );
            let json = json!({
                "independence": {
                    "columns": deps.columns,
                    "rows": deps.rows.iter().map(|r| json!({ "rule": r.rule, "cells": r.cells })).collect::<Vec<_>>(),
                },
                "properties": property_table_json(&props),
            });
            Ok(Output { text, json, mismatch: false })
        }
        Command::Bench { target } => bench(cli, *target),
    }
}

fn cra_error(e: CraError) -> CliError {
    match e {
        CraError::TypeGraphMismatch { .. } => CliError::Validation(e.to_string()),
        CraError::Classify(_) => CliError::Validation(e.to_string()),
        CraError::EngineBug { .. } => CliError::Failure(e.to_string()),
    }
}

fn step(rule: &Rule, g: &Arc<TypedGraph>, index: usize) -> Result<Transformation, CliError> {
    same_types(g, rule.lhs(), "rule and graph")?;
    let matches = find_matches(rule, g).map_err(|e| CliError::Validation(e.to_string()))?;
    let n = matches.len();
    let m = matches
        .into_iter()
        .nth(index)
        .ok_or_else(|| CliError::Failure(format!("rule {} has {n} applicable match(es); index {index} is out of range", rule.name)))?;
    apply(rule, g, &m).map_err(|e| CliError::Failure(e.to_string()))
}

fn validate(files: &[String]) -> Result<Output, CliError> {
    let mut text = String::new();
    let mut items = Vec::new();
    for f in files {
        let (kind, detail, extra) = match load_document(f)? {
            Document::Graph(g) => ("graph", format!("{} nodes, {} edges", g.node_count(), g.edge_count()), json!({})),
            Document::Constraint(c) => {
                let anf = match validate_anf(&c) {
                    Ok(shape) => match shape.polarity {
                        Polarity::Universal => "universal ANF".to_owned(),
                        Polarity::Existential => "existential ANF".to_owned(),
                    },
                    Err(e) => format!("not in ANF: {e}"),
                };
                let detail = format!("{}: nesting level {}, {anf}", c.name, c.nesting_level());
                (
                    "constraint",
                    detail,
                    json!({ "name": c.name, "nesting_level": c.nesting_level(), "anf": anf }),
                )
            }
            Document::Rule(r) => {
                let detail = format!("{}: {} lhs nodes, application condition: {}", r.name, r.lhs().node_count(), r.has_ac());
                ("rule", detail, json!({ "name": r.name, "has_ac": r.has_ac() }))
            }
        };
        let _ = writeln!(text, "{f}: valid {kind} ({detail})");
        let mut item = json!({ "file": f, "kind": kind });
        if let (Some(obj), Some(extra)) = (item.as_object_mut(), extra.as_object()) {
            obj.extend(extra.clone());
        }
        items.push(item);
    }
    Ok(Output { text, json: Value::Array(items), mismatch: false })
}

fn satisfy(graph: &str, constraints: &[String]) -> Result<Output, CliError> {
    let g = load_graph(graph)?;
    let mut text = String::new();
    let mut items = Vec::new();
    for path in constraints {
        let c = load_constraint(path)?;
        same_types(&g, c.root(), "graph and constraint")?;
        let sat = graph_satisfies(&g, &c).map_err(|e| CliError::Validation(e.to_string()))?;
        let _ = writeln!(text, "{}: {}", c.name, if sat { "satisfied" } else { "violated" });
        items.push(json!({ "constraint": c.name, "satisfied": sat }));
    }
    Ok(Output { text, json: Value::Array(items), mismatch: false })
}

fn report(graph: &str, constraints: &[String]) -> Result<Output, CliError> {
    let g = load_graph(graph)?;
    let mut text = String::new();
    let mut items = Vec::new();
    for path in constraints {
        let c = load_constraint(path)?;
        same_types(&g, c.root(), "graph and constraint")?;
        let r = consistency_report(&g, &c).map_err(|e| CliError::Validation(format!("{}: {e}", c.name)))?;
        text.push_str(&render_consistency(&c.name, &r));
        items.push(consistency_json(&c.name, &r));
    }
    Ok(Output { text, json: Value::Array(items), mismatch: false })
}

fn render_diffs(diffs: &[CellDiff]) -> String {
    if diffs.is_empty() {
        return "match\n".into();
    }
    let mut s = String::new();
    for d in diffs {
        let _ = writeln!(s, "MISMATCH {} / {}: expected {}, got {}", d.row, d.column, d.expected, d.actual);
    }
    s
}

fn bench(cli: &Cli, target: BenchTarget) -> Result<Output, CliError> {
    let fx = load_case_study()?;
    let mut text = String::new();
    let mut json = serde_json::Map::new();
    let mut mismatch = false;
    let wants = |t: BenchTarget| target == t || target == BenchTarget::All;
    if wants(BenchTarget::Example1) {
        let e = example1(&fx);
        let sat: Vec<bool> = e.satisfied.iter().map(|(_, b)| *b).collect();
        let ok = e.c3.ci == Ratio::new(1, 2) && (e.c3.ro, e.c3.ncv) == (2, 1) && sat == [true, true, false];
        mismatch |= !ok;
        text.push_str("== example1 ==\n");
        for (name, b) in &e.satisfied {
            let _ = writeln!(text, "{name}: {}", if *b { "satisfied" } else { "violated" });
        }
        text.push_str(&render_consistency("c3", &e.c3));
        text.push_str(if ok { "match\n" } else { "MISMATCH: expected ci = 1/2 (ro 2, ncv 1) and satisfaction (true, true, false)\n" });
        json.insert(
            "example1".into(),
            json!({ "satisfied": e.satisfied, "c3": consistency_json("c3", &e.c3), "match": ok }),
        );
    }
    if wants(BenchTarget::Table3) {
        let rep = reproduce_table3(&fx).map_err(|e| CliError::Validation(e.to_string()))?;
        mismatch |= !rep.diffs.is_empty();
        text.push_str("== table3 ==\n");
        text.push_str(&render_table3(&rep.table));
        text.push_str(&render_diffs(&rep.diffs));
        let mut v = table3_json(&rep);
        v["match"] = json!(rep.diffs.is_empty());
        json.insert("table3".into(), v);
    }
    if wants(BenchTarget::Table1) {
        let rep = reproduce_table1(&fx, cli.config()).map_err(cra_error)?;
        mismatch |= !rep.diffs.is_empty();
        text.push_str("== table1 ==\n");
        text.push_str(&render_table1(&rep));
        text.push_str(&render_property_details(&rep.table));
        text.push_str(&render_diffs(&rep.diffs));
        let mut v = table1_json(&rep);
        v["match"] = json!(rep.diffs.is_empty());
        json.insert("table1".into(), v);
    }
    Ok(Output { text, json: Value::Object(json), mismatch })
}
