//! The class responsibility assignment (CRA) example: fixtures and the
//! reproductions of its published tables.
//!
//! `isAssigned` edges point from a Feature to the Class it belongs to.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    criterion_direct_improve, criterion_direct_sustain, independence_table, AnalysisError, Basis, CriterionResult,
    CriterionVerdict, IndependenceTable,
};
use crate::classification::{classify_rule_in, classify_step_with_shape, Classification, ClassifyError, RuleStatus, RuleVerdict, StepVerdict};
use crate::condition::{graph_satisfies, Constraint};
use crate::consistency::{consistency_report, ConsistencyReport};
use crate::format::{parse_constraint, parse_graph, parse_rule, FormatError};
use crate::graph::{TypeGraph, TypedGraph};
use crate::anf::validate_anf;
use crate::rewriting::{apply, find_matches, Rule, Transformation};
use crate::universe::{HostUniverse, SearchConfig};

pub const RULE_NAMES: [&str; 4] = ["assignFeature", "createClass", "moveFeature", "deleteEmptyClass"];
pub const CONSTRAINT_NAMES: [&str; 3] = ["c1", "c2", "c3"];

/// Embedded copies of the fixture documents, by file name.
pub const EMBEDDED: [(&str, &str); 8] = [
    ("G.json", include_str!("../fixtures/cra/G.json")),
    ("c1.json", include_str!("../fixtures/cra/c1.json")),
    ("c2.json", include_str!("../fixtures/cra/c2.json")),
    ("c3.json", include_str!("../fixtures/cra/c3.json")),
    ("assignFeature.json", include_str!("../fixtures/cra/assignFeature.json")),
    ("createClass.json", include_str!("../fixtures/cra/createClass.json")),
    ("moveFeature.json", include_str!("../fixtures/cra/moveFeature.json")),
    ("deleteEmptyClass.json", include_str!("../fixtures/cra/deleteEmptyClass.json")),
];

pub const TABLE1_GOLDEN: &str = include_str!("../fixtures/cra/table1.golden");
pub const TABLE3_GOLDEN: &str = include_str!("../fixtures/cra/table3.golden");

/// Expected independence table, rows in [`RULE_NAMES`] order. Groups are
/// seq. indep. (P_c1, P_c2, P_c3) | par. indep. (P'_c2, P'_c3) |
/// par. dep. (P_c1, P_c2, P_c3) | seq. dep. (P'_c2, P'_c3).
pub const TABLE3_EXPECTED: [&str; 4] = ["-+-|++|---|++", "---|++|---|++", "-+-|--|+-+|++", "+++|++|-+-|--"];

/// Expected rule properties: sustaining c1..c3, then improving c1..c3.
pub const TABLE1_EXPECTED: [[&str; 6]; 4] = [
    ["+", "+", "-", "-", "+", "-"],
    ["+", "+", "-", "-", "-", "-"],
    ["(+)", "-", "-", "-", "-", "-"],
    ["+", "+", "+", "-", "+*", "-"],
];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{file}: {source}")]
    Format { file: String, source: FormatError },
    #[error("{file} uses a different type graph")]
    TypeGraphMismatch { file: String },
    #[error("fixture invariant broken: {0}")]
    Invariant(String),
}

#[derive(Clone, Debug)]
pub struct CraFixtures {
    pub types: Arc<TypeGraph>,
    pub graph: Arc<TypedGraph>,
    /// In [`RULE_NAMES`] order.
    pub rules: Vec<Rule>,
    /// In [`CONSTRAINT_NAMES`] order.
    pub constraints: Vec<Constraint>,
}

impl CraFixtures {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }
}

/// Loads the embedded fixtures.
pub fn load_fixtures() -> Result<CraFixtures, FixtureError> {
    load_with(|file| {
        Ok(EMBEDDED.iter().find(|(f, _)| *f == file).map(|(_, t)| (*t).to_owned()).expect("embedded fixture"))
    })
}

/// Loads fixtures from a directory holding the same file names.
pub fn load_fixtures_from(dir: &Path) -> Result<CraFixtures, FixtureError> {
    load_with(|file| {
        let path = dir.join(file);
        std::fs::read_to_string(&path).map_err(|source| FixtureError::Io { path: path.display().to_string(), source })
    })
}

fn load_with(read: impl Fn(&str) -> Result<String, FixtureError>) -> Result<CraFixtures, FixtureError> {
    fn fmt(file: &str) -> impl Fn(FormatError) -> FixtureError + '_ {
        move |source| FixtureError::Format { file: file.to_owned(), source }
    }
    let graph = Arc::new(parse_graph(&read("G.json")?).map_err(fmt("G.json"))?);
    let types = graph.type_graph().clone();
    let mut constraints = Vec::new();
    for name in CONSTRAINT_NAMES {
        let file = format!("{name}.json");
        let c = parse_constraint(&read(&file)?).map_err(fmt(&file))?;
        if **c.root().type_graph() != *types {
            return Err(FixtureError::TypeGraphMismatch { file });
        }
        constraints.push(c);
    }
    let mut rules = Vec::new();
    for name in RULE_NAMES {
        let file = format!("{name}.json");
        let r = parse_rule(&read(&file)?).map_err(fmt(&file))?;
        if **r.lhs().type_graph() != *types {
            return Err(FixtureError::TypeGraphMismatch { file });
        }
        rules.push(r);
    }
    let fx = CraFixtures { types, graph, rules, constraints };
    let c3 = consistency_report(&fx.graph, &fx.constraints[2]).map_err(|e| FixtureError::Invariant(e.to_string()))?;
    if (c3.occ, c3.ncv) != (2, 1) {
        return Err(FixtureError::Invariant(format!(
            "G must contain two occurrences of the c3 premise with one violating, found {} and {}",
            c3.occ, c3.ncv
        )));
    }
    Ok(fx)
}

#[derive(Clone, Debug)]
pub struct Example1 {
    /// `(constraint, G satisfies it)` in [`CONSTRAINT_NAMES`] order.
    pub satisfied: Vec<(String, bool)>,
    pub c3: ConsistencyReport,
}

pub fn example1(fx: &CraFixtures) -> Example1 {
    let satisfied = fx
        .constraints
        .iter()
        .map(|c| (c.name.clone(), graph_satisfies(&fx.graph, c).expect("fixture constraint")))
        .collect();
    let c3 = consistency_report(&fx.graph, &fx.constraints[2]).expect("fixture constraint");
    Example1 { satisfied, c3 }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellDiff {
    pub row: String,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug)]
pub struct Table3Reproduction {
    pub table: IndependenceTable,
    pub diffs: Vec<CellDiff>,
}

pub fn reproduce_table3(fx: &CraFixtures) -> Result<Table3Reproduction, AnalysisError> {
    let table = independence_table(&fx.rules, &fx.constraints)?;
    let mut diffs = Vec::new();
    for (row, expected) in table.rows.iter().zip(TABLE3_EXPECTED) {
        let expected: Vec<bool> = expected.chars().filter(|c| *c != '|').map(|c| c == '+').collect();
        for ((col, &got), want) in table.columns.iter().zip(&row.cells).zip(expected) {
            if got != want {
                diffs.push(CellDiff {
                    row: row.rule.clone(),
                    column: format!("{:?} {}", col.kind, col.label),
                    expected: sign(want).into(),
                    actual: sign(got).into(),
                });
            }
        }
    }
    Ok(Table3Reproduction { table, diffs })
}

pub fn sign(b: bool) -> &'static str {
    if b {
        "+"
    } else {
        "-"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Sustaining,
    Improving,
}

/// What a Table 1 cell rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    StaticProof,
    BoundedEvidence,
    Counterexample,
    Witness,
}

#[derive(Clone, Debug)]
pub struct PropertyCell {
    pub rule: String,
    pub constraint: String,
    pub property: Property,
    pub symbol: String,
    pub provenance: Provenance,
    /// Static criterion result, or why none applies.
    pub static_result: Result<CriterionResult, String>,
}

/// Sustaining and improving symbols for every rule against every constraint.
#[derive(Clone, Debug)]
pub struct PropertyTable {
    pub config: SearchConfig,
    pub constraints: Vec<String>,
    /// Row-major: for each rule, sustaining per constraint, then improving per constraint.
    pub cells: Vec<PropertyCell>,
    /// One per (rule, constraint), row-major.
    pub verdicts: Vec<RuleVerdict>,
}

impl PropertyTable {
    /// `(rule, constraint, basis)` of every sustaining cell proven statically.
    pub fn static_proofs(&self) -> Vec<(String, String, Basis)> {
        self.cells
            .iter()
            .filter(|c| c.property == Property::Sustaining && c.provenance == Provenance::StaticProof)
            .map(|c| {
                let basis = c.static_result.as_ref().map(|r| r.basis).unwrap_or(Basis::None);
                (c.rule.clone(), c.constraint.clone(), basis)
            })
            .collect()
    }

    /// The bounded verdict behind a cell.
    pub fn verdict_for(&self, cell: usize) -> &RuleVerdict {
        let n = self.constraints.len();
        &self.verdicts[(cell / (2 * n)) * n + (cell % (2 * n)) % n]
    }
}

#[derive(Clone, Debug)]
pub struct Table1Reproduction {
    pub table: PropertyTable,
    /// Published symbol per cell, parallel to `table.cells`.
    pub expected: Vec<String>,
    pub diffs: Vec<CellDiff>,
}

#[derive(Debug, Error)]
pub enum CraError {
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("static and bounded results disagree for {rule}/{constraint}: {detail}")]
    EngineBug { rule: String, constraint: String, detail: String },
    #[error("rule {rule} and constraint {constraint} use different type graphs")]
    TypeGraphMismatch { rule: String, constraint: String },
}

fn sustain_cell(v: &RuleVerdict, stat: &Result<CriterionResult, String>) -> (String, Provenance) {
    let proven = stat.as_ref().is_ok_and(|r| r.verdict == CriterionVerdict::ProvenSustaining && !r.conjectured);
    if v.status(Classification::Sustaining).is_refuted() {
        ("-".into(), Provenance::Counterexample)
    } else if proven {
        ("+".into(), Provenance::StaticProof)
    } else if !v.status(Classification::DirectlySustaining).is_refuted() {
        ("+".into(), Provenance::BoundedEvidence)
    } else {
        ("(+)".into(), Provenance::BoundedEvidence)
    }
}

fn improve_cell(v: &RuleVerdict) -> (String, Provenance) {
    match v.status(Classification::Improving) {
        RuleStatus::ProvenNo(_) => ("-".into(), Provenance::Counterexample),
        RuleStatus::WitnessFound(_) => {
            let strong = matches!(v.status(Classification::StronglyImproving), RuleStatus::NoCounterexampleFound { .. });
            (if strong { "+*" } else { "+" }.into(), Provenance::Witness)
        }
        _ => ("-".into(), Provenance::BoundedEvidence),
    }
}

fn check_agreement(v: &RuleVerdict, sus: &Result<CriterionResult, String>, imp: &Result<CriterionResult, String>) -> Result<(), String> {
    if let Ok(s) = sus {
        if s.verdict == CriterionVerdict::ProvenSustaining && !s.conjectured {
            if let Some(cx) = v.status(Classification::DirectlySustaining).example() {
                return Err(format!("proven directly sustaining, but host #{} refutes it", cx.host_index));
            }
        }
    }
    if let Ok(i) = imp {
        let refuted = matches!(i.verdict, CriterionVerdict::NecessaryConditionFails | CriterionVerdict::ProvenNotImproving);
        if refuted && !i.conjectured {
            if let RuleStatus::WitnessFound(w) = v.status(Classification::DirectlyImproving) {
                return Err(format!("proven not directly improving, but host #{} witnesses it", w.host_index));
            }
        }
    }
    Ok(())
}

/// Combines the static criteria with a bounded search for every pair. Rules
/// and constraints must share one type graph.
pub fn property_table(rules: &[Rule], constraints: &[Constraint], config: SearchConfig, conjecture: bool) -> Result<PropertyTable, CraError> {
    let mut cells = Vec::new();
    let mut verdicts = Vec::new();
    let Some(first) = rules.first() else {
        return Ok(PropertyTable { config, constraints: constraints.iter().map(|c| c.name.clone()).collect(), cells, verdicts });
    };
    let universe = HostUniverse::new(first.lhs().type_graph().clone());
    for rule in rules {
        let mut row_sus = Vec::new();
        let mut row_imp = Vec::new();
        for c in constraints {
            if **rule.lhs().type_graph() != **universe.type_graph() || **c.root().type_graph() != **universe.type_graph() {
                return Err(CraError::TypeGraphMismatch { rule: rule.name.clone(), constraint: c.name.clone() });
            }
            let v = classify_rule_in(rule, c, config, &universe)?;
            let sus = criterion_direct_sustain(rule, c, conjecture).map_err(|e| e.to_string());
            let imp = criterion_direct_improve(rule, c, conjecture).map_err(|e| e.to_string());
            check_agreement(&v, &sus, &imp).map_err(|detail| CraError::EngineBug {
                rule: rule.name.clone(),
                constraint: c.name.clone(),
                detail,
            })?;
            let (s_sym, s_prov) = sustain_cell(&v, &sus);
            let (i_sym, i_prov) = improve_cell(&v);
            let cell = |property, symbol, provenance, static_result| PropertyCell {
                rule: rule.name.clone(),
                constraint: c.name.clone(),
                property,
                symbol,
                provenance,
                static_result,
            };
            row_sus.push(cell(Property::Sustaining, s_sym, s_prov, sus));
            row_imp.push(cell(Property::Improving, i_sym, i_prov, imp));
            verdicts.push(v);
        }
        cells.extend(row_sus);
        cells.extend(row_imp);
    }
    Ok(PropertyTable { config, constraints: constraints.iter().map(|c| c.name.clone()).collect(), cells, verdicts })
}

pub fn reproduce_table1(fx: &CraFixtures, config: SearchConfig) -> Result<Table1Reproduction, CraError> {
    let table = property_table(&fx.rules, &fx.constraints, config, false)?;
    let expected: Vec<String> = TABLE1_EXPECTED.iter().flatten().map(|s| (*s).to_owned()).collect();
    let diffs = table
        .cells
        .iter()
        .zip(&expected)
        .filter(|(cell, want)| cell.symbol != **want)
        .map(|(cell, want)| CellDiff {
            row: cell.rule.clone(),
            column: format!("{:?} {}", cell.property, cell.constraint),
            expected: want.clone(),
            actual: cell.symbol.clone(),
        })
        .collect();
    Ok(Table1Reproduction { table, expected, diffs })
}

/// A createClass step on a host violating c1 that leaves the violation in
/// place: the rule sustains c1 without ever guaranteeing it.
pub fn sustained_but_not_guaranteed(fx: &CraFixtures, bound: usize) -> Option<(Transformation, StepVerdict)> {
    let rule = fx.rule("createClass")?;
    let shape = validate_anf(fx.constraint("c1")?).ok()?;
    let universe = HostUniverse::new(fx.types.clone());
    for host in universe.hosts(bound, &rule.lhs().node_type_counts()) {
        for m in find_matches(rule, &host).ok()? {
            let t = apply(rule, &host, &m).ok()?;
            let v = classify_step_with_shape(&t, &shape);
            if v.before.ncv > 0 && v.after.ncv > 0 {
                return Some((t, v));
            }
        }
    }
    None
}
