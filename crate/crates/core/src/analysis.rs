//! Conflict and dependency analysis of a rule against check rules, and the
//! static criteria for direct sustainment and improvement built on it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::anf::{validate_anf, AnfError, AnfShape};
use crate::condition::Constraint;
use crate::graph::{EdgeId, NodeId, TypedGraph};
use crate::matching::for_each_extension;
use crate::morphism::GraphMorphism;
use crate::rewriting::Rule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapKind {
    /// The rule deletes an element the check rule matches.
    Conflict,
    /// The rule creates an element the check rule matches.
    Dependency,
}

/// A jointly surjective overlap of a rule side (`L` for conflicts, `R` for
/// dependencies) with a pattern graph `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub kind: OverlapKind,
    pub graph: Arc<TypedGraph>,
    /// `m₁: L → A` or `n₁: R → A`.
    pub first: GraphMorphism,
    /// The check match `C → A`.
    pub second: GraphMorphism,
    pub jointly_surjective: bool,
}

impl Overlap {
    fn new(kind: OverlapKind, first: GraphMorphism, second: GraphMorphism) -> Overlap {
        let graph = first.codomain().clone();
        let nodes: BTreeSet<&NodeId> = first.node_map().values().chain(second.node_map().values()).collect();
        let edges: BTreeSet<&EdgeId> = first.edge_map().values().chain(second.edge_map().values()).collect();
        let jointly_surjective = graph.nodes().iter().all(|n| nodes.contains(&n.id))
            && graph.edges().iter().all(|e| edges.contains(&e.id));
        Overlap { kind, graph, first, second, jointly_surjective }
    }
}

impl fmt::Display for Overlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} overlap {} via {}", self.kind, self.graph, self.second)
    }
}

/// The identity rule on `c`.
pub fn make_check_rule(c: Arc<TypedGraph>) -> Rule {
    Rule::check_rule(c)
}

/// Visits every gluing of `c` onto `base` along a partial injective
/// identification. Unidentified elements of `c` get fresh ids in the
/// overlap graph, which contains `base` unchanged.
fn for_each_gluing(base: &Arc<TypedGraph>, c: &Arc<TypedGraph>, f: &mut impl FnMut(Arc<TypedGraph>, GraphMorphism)) {
    let cn = c.nodes();
    let mut node_choice: Vec<Option<usize>> = vec![None; cn.len()];
    let mut used = vec![false; base.node_count()];
    glue_nodes(base, c, 0, &mut node_choice, &mut used, f);
}

fn glue_nodes(
    base: &Arc<TypedGraph>,
    c: &Arc<TypedGraph>,
    i: usize,
    choice: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    f: &mut impl FnMut(Arc<TypedGraph>, GraphMorphism),
) {
    if i == c.node_count() {
        let mut echoice = vec![None; c.edge_count()];
        let mut eused = vec![false; base.edge_count()];
        glue_edges(base, c, 0, choice, &mut echoice, &mut eused, f);
        return;
    }
    choice[i] = None;
    glue_nodes(base, c, i + 1, choice, used, f);
    for (j, bn) in base.nodes().iter().enumerate() {
        if !used[j] && bn.ty == c.nodes()[i].ty {
            used[j] = true;
            choice[i] = Some(j);
            glue_nodes(base, c, i + 1, choice, used, f);
            used[j] = false;
        }
    }
    choice[i] = None;
}

fn glue_edges(
    base: &Arc<TypedGraph>,
    c: &Arc<TypedGraph>,
    i: usize,
    nchoice: &[Option<usize>],
    echoice: &mut Vec<Option<usize>>,
    eused: &mut Vec<bool>,
    f: &mut impl FnMut(Arc<TypedGraph>, GraphMorphism),
) {
    if i == c.edge_count() {
        let (a, second) = build_gluing(base, c, nchoice, echoice);
        f(a, second);
        return;
    }
    echoice[i] = None;
    glue_edges(base, c, i + 1, nchoice, echoice, eused, f);
    let e = &c.edges()[i];
    let s = nchoice[c.node_index(&e.src).expect("edge source")];
    let t = nchoice[c.node_index(&e.tgt).expect("edge target")];
    if let (Some(s), Some(t)) = (s, t) {
        let (bs, bt) = (&base.nodes()[s].id, &base.nodes()[t].id);
        for (j, be) in base.edges().iter().enumerate() {
            if !eused[j] && be.ty == e.ty && &be.src == bs && &be.tgt == bt {
                eused[j] = true;
                echoice[i] = Some(j);
                glue_edges(base, c, i + 1, nchoice, echoice, eused, f);
                eused[j] = false;
            }
        }
    }
    echoice[i] = None;
}

fn build_gluing(
    base: &Arc<TypedGraph>,
    c: &Arc<TypedGraph>,
    nchoice: &[Option<usize>],
    echoice: &[Option<usize>],
) -> (Arc<TypedGraph>, GraphMorphism) {
    let mut a = (**base).clone();
    let mut nmap: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut emap: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
    for (i, n) in c.nodes().iter().enumerate() {
        let id = match nchoice[i] {
            Some(j) => base.nodes()[j].id.clone(),
            None => {
                let mut id = format!("C.{}", n.id);
                while a.contains_node(&id.as_str().into()) {
                    id.push('\'');
                }
                let id = NodeId::from(id);
                a.add_node(id.clone(), n.ty.clone());
                id
            }
        };
        nmap.insert(n.id.clone(), id);
    }
    for (i, e) in c.edges().iter().enumerate() {
        let id = match echoice[i] {
            Some(j) => base.edges()[j].id.clone(),
            None => {
                let mut id = format!("C.{}", e.id);
                while a.contains_edge(&id.as_str().into()) {
                    id.push('\'');
                }
                let id = EdgeId::from(id);
                a.add_edge(id.clone(), e.ty.clone(), nmap[&e.src].clone(), nmap[&e.tgt].clone());
                id
            }
        };
        emap.insert(e.id.clone(), id);
    }
    let a = Arc::new(a);
    let second = GraphMorphism::new_unchecked(c.clone(), a.clone(), nmap, emap);
    (a, second)
}

/// Nodes of `side` that are not in the interface must have no incident edge
/// of `a` outside `side`.
fn gluing_ok(a: &TypedGraph, side: &TypedGraph, removed_nodes: &[NodeId]) -> bool {
    removed_nodes
        .iter()
        .all(|x| a.incident_edges(x).all(|e| side.contains_edge(&e.id)))
}

/// All overlaps in which `r` deletes an element matched by `check_C` and
/// `r` is applicable (application condition ignored).
pub fn rule_conflicts_on_check(r: &Rule, c: &Arc<TypedGraph>) -> Vec<Overlap> {
    let (del_nodes, del_edges) = r.deleted();
    if del_nodes.is_empty() && del_edges.is_empty() {
        return Vec::new();
    }
    let l = r.lhs();
    let mut out = Vec::new();
    for_each_gluing(l, c, &mut |a, second| {
        if !second.image_touches(&del_nodes, &del_edges) || !gluing_ok(&a, l, &del_nodes) {
            return;
        }
        let first = GraphMorphism::inclusion(l.clone(), a.clone()).expect("L is included in the gluing");
        out.push(Overlap::new(OverlapKind::Conflict, first, second));
    });
    out
}

/// All overlaps in which `r` creates an element matched by `check_C` and
/// the inverse application of `r` exists (application condition ignored).
pub fn check_depends_on_rule(r: &Rule, c: &Arc<TypedGraph>) -> Vec<Overlap> {
    let (new_nodes, new_edges) = r.created();
    if new_nodes.is_empty() && new_edges.is_empty() {
        return Vec::new();
    }
    let rhs = r.rhs();
    let mut out = Vec::new();
    for_each_gluing(rhs, c, &mut |a, second| {
        if !second.image_touches(&new_nodes, &new_edges) || !gluing_ok(&a, rhs, &new_nodes) {
            return;
        }
        let first = GraphMorphism::inclusion(rhs.clone(), a.clone()).expect("R is included in the gluing");
        out.push(Overlap::new(OverlapKind::Dependency, first, second));
    });
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionVerdict {
    ProvenSustaining,
    ProvenNotSustaining,
    ProvenImproving,
    ProvenNotImproving,
    NecessaryConditionHolds,
    /// The necessary condition for direct improvement fails, so the rule is
    /// not directly improving.
    NecessaryConditionFails,
    Inconclusive,
}

impl CriterionVerdict {
    pub fn name(self) -> &'static str {
        match self {
            CriterionVerdict::ProvenSustaining => "proven_sustaining",
            CriterionVerdict::ProvenNotSustaining => "proven_not_sustaining",
            CriterionVerdict::ProvenImproving => "proven_improving",
            CriterionVerdict::ProvenNotImproving => "proven_not_improving",
            CriterionVerdict::NecessaryConditionHolds => "necessary_condition_holds",
            CriterionVerdict::NecessaryConditionFails => "necessary_condition_fails",
            CriterionVerdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for CriterionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which argument produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// No new occurrence of C can be created (and, for `∀(C, ∃C′)`, no
    /// occurrence of C′ destroyed).
    Independence,
    /// Every new occurrence of C created by the rule already extends to C′.
    CreatedOccurrencesValid,
    /// Overlap witnesses decide the question.
    Overlaps,
    /// The generalised pattern for three nesting levels.
    ThreeLevelPattern,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionResult {
    pub verdict: CriterionVerdict,
    pub conjectured: bool,
    pub basis: Basis,
    pub evidence: Vec<Overlap>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    fn new(verdict: CriterionVerdict, basis: Basis, evidence: Vec<Overlap>) -> CriterionResult {
        CriterionResult { verdict, conjectured: false, basis, evidence, notes: Vec::new() }
    }

    fn with_ac_note(mut self, r: &Rule) -> CriterionResult {
        if r.has_ac() {
            self.notes.push("overlaps ignore the application condition".into());
        }
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Anf(#[from] AnfError),
    #[error("no criterion for constraint shape {0}")]
    UnsupportedShape(String),
    #[error("direct improvement w.r.t. a negative constraint needs a proven direct sustainment verdict")]
    MissingSustainingPrerequisite,
    #[error("rule and constraint are typed over different type graphs")]
    TypeGraphMismatch,
}

fn shape_of(r: &Rule, c: &Constraint, conjecture: bool) -> Result<AnfShape, AnalysisError> {
    if !r.lhs().same_type_graph(c.root()) {
        return Err(AnalysisError::TypeGraphMismatch);
    }
    let shape = validate_anf(c)?;
    if shape.is_negative() || shape.is_forall_exists() || (conjecture && shape.is_forall_exists_not()) {
        Ok(shape)
    } else {
        Err(AnalysisError::UnsupportedShape(shape.to_string()))
    }
}

fn level_graph(shape: &AnfShape, i: usize) -> &Arc<TypedGraph> {
    shape.chain[i].1.codomain()
}

/// Whether every dependency overlap's check match extends along `a` into the overlap.
fn overlaps_extend(deps: &[Overlap], a: &GraphMorphism) -> Vec<Overlap> {
    deps.iter()
        .filter(|o| {
            let mut found = false;
            for_each_extension(a, &o.second, |_| {
                found = true;
                ControlFlow::Break(())
            })
            .expect("overlap shares the type graph");
            !found
        })
        .cloned()
        .collect()
}

pub fn criterion_direct_sustain(r: &Rule, c: &Constraint, conjecture: bool) -> Result<CriterionResult, AnalysisError> {
    let shape = shape_of(r, c, conjecture)?;
    let outer = shape.outer_graph();
    let result = if shape.is_negative() {
        let deps = check_depends_on_rule(r, outer);
        if deps.is_empty() {
            CriterionResult::new(CriterionVerdict::ProvenSustaining, Basis::Independence, deps)
        } else if !r.has_ac() {
            CriterionResult::new(CriterionVerdict::ProvenNotSustaining, Basis::Overlaps, deps)
        } else {
            CriterionResult::new(CriterionVerdict::Inconclusive, Basis::Overlaps, deps)
        }
    } else if shape.is_forall_exists() {
        let inner = level_graph(&shape, 1);
        let conflicts = rule_conflicts_on_check(r, inner);
        let deps = check_depends_on_rule(r, outer);
        if !conflicts.is_empty() {
            CriterionResult::new(CriterionVerdict::Inconclusive, Basis::Overlaps, conflicts)
        } else if deps.is_empty() {
            CriterionResult::new(CriterionVerdict::ProvenSustaining, Basis::Independence, deps)
        } else {
            let failing = overlaps_extend(&deps, &shape.chain[1].1);
            if failing.is_empty() {
                CriterionResult::new(CriterionVerdict::ProvenSustaining, Basis::CreatedOccurrencesValid, deps)
            } else {
                CriterionResult::new(CriterionVerdict::Inconclusive, Basis::Overlaps, failing)
            }
        }
    } else {
        let c2 = level_graph(&shape, 1);
        let c3 = level_graph(&shape, 2);
        let mut evidence = check_depends_on_rule(r, outer);
        evidence.extend(rule_conflicts_on_check(r, c2));
        evidence.extend(check_depends_on_rule(r, c3));
        let verdict = if evidence.is_empty() { CriterionVerdict::ProvenSustaining } else { CriterionVerdict::Inconclusive };
        let mut res = CriterionResult::new(verdict, Basis::ThreeLevelPattern, evidence);
        res.conjectured = true;
        res
    };
    Ok(result.with_ac_note(r))
}

/// Whether the created elements hit by the `C′` match all lie outside `a(C)`.
fn comatch_condition(o: &Overlap, r: &Rule, a: &GraphMorphism) -> bool {
    let (new_nodes, new_edges) = r.created();
    let created_nodes: BTreeSet<&NodeId> = new_nodes.iter().map(|x| &o.first.node_map()[x]).collect();
    let created_edges: BTreeSet<&EdgeId> = new_edges.iter().map(|x| &o.first.edge_map()[x]).collect();
    let from_c_nodes: BTreeSet<&NodeId> = a.node_map().values().collect();
    let from_c_edges: BTreeSet<&EdgeId> = a.edge_map().values().collect();
    o.second
        .node_map()
        .iter()
        .all(|(x, y)| !created_nodes.contains(y) || !from_c_nodes.contains(x))
        && o.second
            .edge_map()
            .iter()
            .all(|(x, y)| !created_edges.contains(y) || !from_c_edges.contains(x))
}

pub fn criterion_direct_improve(r: &Rule, c: &Constraint, conjecture: bool) -> Result<CriterionResult, AnalysisError> {
    let shape = shape_of(r, c, conjecture)?;
    let outer = shape.outer_graph();
    let conflicts = rule_conflicts_on_check(r, outer);
    let result = if shape.is_negative() {
        if conflicts.is_empty() {
            CriterionResult::new(CriterionVerdict::NecessaryConditionFails, Basis::Overlaps, conflicts)
        } else {
            let sustain = criterion_direct_sustain(r, c, conjecture)?;
            match sustain.verdict {
                CriterionVerdict::ProvenSustaining if !r.has_ac() => {
                    CriterionResult::new(CriterionVerdict::ProvenImproving, Basis::Overlaps, conflicts)
                }
                CriterionVerdict::ProvenSustaining => {
                    CriterionResult::new(CriterionVerdict::NecessaryConditionHolds, Basis::Overlaps, conflicts)
                }
                CriterionVerdict::ProvenNotSustaining => {
                    CriterionResult::new(CriterionVerdict::ProvenNotImproving, Basis::Overlaps, sustain.evidence)
                }
                _ => return Err(AnalysisError::MissingSustainingPrerequisite),
            }
        }
    } else if shape.is_forall_exists() {
        if !conflicts.is_empty() {
            CriterionResult::new(CriterionVerdict::NecessaryConditionHolds, Basis::Overlaps, conflicts)
        } else {
            let a = &shape.chain[1].1;
            let deps: Vec<Overlap> = check_depends_on_rule(r, level_graph(&shape, 1))
                .into_iter()
                .filter(|o| comatch_condition(o, r, a))
                .collect();
            let verdict = if deps.is_empty() {
                CriterionVerdict::NecessaryConditionFails
            } else {
                CriterionVerdict::NecessaryConditionHolds
            };
            CriterionResult::new(verdict, Basis::Overlaps, deps)
        }
    } else {
        let mut evidence = conflicts;
        evidence.extend(check_depends_on_rule(r, level_graph(&shape, 1)));
        evidence.extend(rule_conflicts_on_check(r, level_graph(&shape, 2)));
        let verdict = if evidence.is_empty() {
            CriterionVerdict::NecessaryConditionFails
        } else {
            CriterionVerdict::NecessaryConditionHolds
        };
        let mut res = CriterionResult::new(verdict, Basis::ThreeLevelPattern, evidence);
        res.conjectured = true;
        res
    };
    Ok(result.with_ac_note(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    SeqIndep,
    ParIndep,
    ParDep,
    SeqDep,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Column {
    pub kind: ColumnKind,
    pub constraint: String,
    /// `P_{name}` for the outer graph, `P'_{name}` for the inner one.
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub rule: String,
    pub cells: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceTable {
    pub columns: Vec<Column>,
    pub rows: Vec<TableRow>,
}

/// Per rule: sequential independence of each outer check, parallel
/// independence of each inner check, conflicts on each outer check and
/// dependencies of each inner check.
pub fn independence_table(rules: &[Rule], constraints: &[Constraint]) -> Result<IndependenceTable, AnalysisError> {
    let mut outer = Vec::new();
    let mut inner = Vec::new();
    for c in constraints {
        let shape = validate_anf(c)?;
        outer.push((c.name.clone(), shape.outer_graph().clone()));
        if shape.chain.len() >= 2 {
            inner.push((c.name.clone(), level_graph(&shape, 1).clone()));
        }
    }
    let mut columns = Vec::new();
    for (kind, set, prime) in [
        (ColumnKind::SeqIndep, &outer, ""),
        (ColumnKind::ParIndep, &inner, "'"),
        (ColumnKind::ParDep, &outer, ""),
        (ColumnKind::SeqDep, &inner, "'"),
    ] {
        for (name, _) in set.iter() {
            columns.push(Column { kind, constraint: name.clone(), label: format!("P{prime}_{name}") });
        }
    }
    let mut rows = Vec::new();
    for r in rules {
        if constraints.iter().any(|c| !r.lhs().same_type_graph(c.root())) {
            return Err(AnalysisError::TypeGraphMismatch);
        }
        let mut cells = Vec::new();
        cells.extend(outer.iter().map(|(_, g)| check_depends_on_rule(r, g).is_empty()));
        cells.extend(inner.iter().map(|(_, g)| rule_conflicts_on_check(r, g).is_empty()));
        cells.extend(outer.iter().map(|(_, g)| !rule_conflicts_on_check(r, g).is_empty()));
        cells.extend(inner.iter().map(|(_, g)| !check_depends_on_rule(r, g).is_empty()));
        rows.push(TableRow { rule: r.name.clone(), cells });
    }
    Ok(IndependenceTable { columns, rows })
}
