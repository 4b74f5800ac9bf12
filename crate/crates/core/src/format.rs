//! JSON documents for graphs, constraints and rules.
//!
//! Nested graphs are written out in full; a child graph contains its parent's
//! element ids, which define the inclusion morphism between them.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::condition::{Condition, ConditionError, Constraint};
use crate::graph::{EdgeType, TypeGraph, TypeGraphError, TypedGraph, ValidationReport};
use crate::morphism::GraphMorphism;
use crate::rewriting::{Rule, RuleError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unrecognised document: expected a graph, constraint or rule")]
    UnknownDocument,
    #[error("invalid type graph: {0}")]
    TypeGraph(#[from] TypeGraphError),
    #[error("invalid {which}: {report}")]
    InvalidGraph { which: String, report: ValidationReport },
    #[error("nested graph at {path} does not contain its parent graph")]
    NotAnExtension { path: String },
    #[error("condition morphism at {path} is not an id-preserving inclusion and cannot be written")]
    NotAnInclusion { path: String },
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

impl FormatError {
    /// Syntax-level errors, as opposed to documents that parse but do not validate.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, FormatError::Json(_) | FormatError::UnknownDocument)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeGraphDoc {
    pub node_types: Vec<String>,
    pub edge_types: Vec<EdgeType>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub src: String,
    pub tgt: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphBody {
    #[serde(default)]
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub type_graph: TypeGraphDoc,
    pub graph: GraphBody,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantifiedDoc {
    pub graph: GraphBody,
    #[serde(default = "true_doc", skip_serializing_if = "is_true_doc")]
    pub then: Box<ConditionDoc>,
}

fn true_doc() -> Box<ConditionDoc> {
    Box::new(ConditionDoc::True)
}

fn is_true_doc(d: &ConditionDoc) -> bool {
    *d == ConditionDoc::True
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionDoc {
    True,
    False,
    Exists(QuantifiedDoc),
    Forall(QuantifiedDoc),
    Not(Box<ConditionDoc>),
    And(Vec<ConditionDoc>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub name: String,
    pub type_graph: TypeGraphDoc,
    pub condition: ConditionDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDoc {
    pub name: String,
    pub type_graph: TypeGraphDoc,
    pub lhs: GraphBody,
    pub interface: GraphBody,
    pub rhs: GraphBody,
    #[serde(default = "true_cond", skip_serializing_if = "is_true_cond")]
    pub ac: ConditionDoc,
}

fn true_cond() -> ConditionDoc {
    ConditionDoc::True
}

fn is_true_cond(d: &ConditionDoc) -> bool {
    *d == ConditionDoc::True
}

pub fn type_graph_doc(t: &TypeGraph) -> TypeGraphDoc {
    TypeGraphDoc { node_types: t.node_types().to_vec(), edge_types: t.edge_types().to_vec() }
}

pub fn type_graph_from_doc(d: &TypeGraphDoc) -> Result<Arc<TypeGraph>, FormatError> {
    Ok(Arc::new(TypeGraph::new(d.node_types.iter().cloned(), d.edge_types.iter().cloned())?))
}

pub fn graph_body(g: &TypedGraph) -> GraphBody {
    GraphBody {
        nodes: g.nodes().iter().map(|n| NodeDoc { id: n.id.to_string(), ty: n.ty.to_string() }).collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeDoc { id: e.id.to_string(), ty: e.ty.to_string(), src: e.src.to_string(), tgt: e.tgt.to_string() })
            .collect(),
    }
}

/// Builds and validates a graph from a document body.
pub fn graph_from_body(types: &Arc<TypeGraph>, body: &GraphBody, which: &str) -> Result<TypedGraph, FormatError> {
    let mut g = TypedGraph::new(types.clone());
    for n in &body.nodes {
        g.add_node(n.id.as_str(), n.ty.as_str());
    }
    for e in &body.edges {
        g.add_edge(e.id.as_str(), e.ty.as_str(), e.src.as_str(), e.tgt.as_str());
    }
    g.validate().map_err(|report| FormatError::InvalidGraph { which: which.to_owned(), report })?;
    Ok(g)
}

pub fn graph_doc(g: &TypedGraph) -> GraphDoc {
    GraphDoc { type_graph: type_graph_doc(g.type_graph()), graph: graph_body(g) }
}

pub fn parse_graph(text: &str) -> Result<TypedGraph, FormatError> {
    let doc: GraphDoc = serde_json::from_str(text)?;
    graph_from_doc(&doc)
}

pub fn graph_from_doc(doc: &GraphDoc) -> Result<TypedGraph, FormatError> {
    let types = type_graph_from_doc(&doc.type_graph)?;
    graph_from_body(&types, &doc.graph, "graph")
}

pub fn emit_graph(g: &TypedGraph) -> String {
    serde_json::to_string_pretty(&graph_doc(g)).expect("graph documents serialise")
}

/// Builds a condition anchored at `anchor`.
pub fn condition_from_doc(
    types: &Arc<TypeGraph>,
    anchor: &Arc<TypedGraph>,
    doc: &ConditionDoc,
    path: &str,
) -> Result<Condition, FormatError> {
    Ok(match doc {
        ConditionDoc::True => Condition::True,
        ConditionDoc::False => Condition::ff(),
        ConditionDoc::Not(inner) => Condition::not(condition_from_doc(types, anchor, inner, &format!("{path}/not"))?),
        ConditionDoc::And(parts) => {
            let mut it = parts.iter().enumerate();
            let Some((_, first)) = it.next() else {
                return Ok(Condition::True);
            };
            let mut acc = condition_from_doc(types, anchor, first, &format!("{path}/and[0]"))?;
            for (i, p) in it {
                acc = Condition::and(acc, condition_from_doc(types, anchor, p, &format!("{path}/and[{i}]"))?);
            }
            acc
        }
        ConditionDoc::Exists(q) | ConditionDoc::Forall(q) => {
            let is_forall = matches!(doc, ConditionDoc::Forall(_));
            let here = format!("{path}/{}", if is_forall { "forall" } else { "exists" });
            let child = Arc::new(graph_from_body(types, &q.graph, &here)?);
            let a = GraphMorphism::inclusion(anchor.clone(), child.clone())
                .map_err(|_| FormatError::NotAnExtension { path: here.clone() })?;
            let sub = condition_from_doc(types, &child, &q.then, &here)?;
            if is_forall {
                Condition::forall(a, sub)
            } else {
                Condition::exists(a, sub)
            }
        }
    })
}

fn is_inclusion(a: &GraphMorphism) -> bool {
    a.node_map().iter().all(|(x, y)| x == y) && a.edge_map().iter().all(|(x, y)| x == y)
}

/// Writes a condition tree; `Not(Exists(..))` is written as a `forall`.
pub fn condition_doc(c: &Condition, path: &str) -> Result<ConditionDoc, FormatError> {
    Ok(match c {
        Condition::True => ConditionDoc::True,
        c if c.is_false() => ConditionDoc::False,
        Condition::Not(inner) => match &**inner {
            Condition::Exists { a, sub } => {
                if !is_inclusion(a) {
                    return Err(FormatError::NotAnInclusion { path: path.to_owned() });
                }
                ConditionDoc::Forall(QuantifiedDoc {
                    graph: graph_body(a.codomain()),
                    then: Box::new(condition_doc(&Condition::not((**sub).clone()), &format!("{path}/forall"))?),
                })
            }
            other => ConditionDoc::Not(Box::new(condition_doc(other, &format!("{path}/not"))?)),
        },
        Condition::Exists { a, sub } => {
            if !is_inclusion(a) {
                return Err(FormatError::NotAnInclusion { path: path.to_owned() });
            }
            ConditionDoc::Exists(QuantifiedDoc {
                graph: graph_body(a.codomain()),
                then: Box::new(condition_doc(sub, &format!("{path}/exists"))?),
            })
        }
        Condition::And(l, r) => {
            let mut parts = Vec::new();
            for (i, side) in [l, r].into_iter().enumerate() {
                parts.push(condition_doc(side, &format!("{path}/and[{i}]"))?);
            }
            ConditionDoc::And(parts)
        }
    })
}

pub fn constraint_from_doc(doc: &ConstraintDoc) -> Result<Constraint, FormatError> {
    let types = type_graph_from_doc(&doc.type_graph)?;
    let root = Arc::new(TypedGraph::new(types.clone()));
    let cond = condition_from_doc(&types, &root, &doc.condition, "")?;
    Ok(Constraint::new(doc.name.clone(), root, cond)?)
}

pub fn constraint_doc(c: &Constraint) -> Result<ConstraintDoc, FormatError> {
    Ok(ConstraintDoc {
        name: c.name.clone(),
        type_graph: type_graph_doc(c.root().type_graph()),
        condition: condition_doc(&c.condition, "")?,
    })
}

pub fn parse_constraint(text: &str) -> Result<Constraint, FormatError> {
    let doc: ConstraintDoc = serde_json::from_str(text)?;
    constraint_from_doc(&doc)
}

pub fn emit_constraint(c: &Constraint) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(&constraint_doc(c)?).expect("constraint documents serialise"))
}

pub fn rule_from_doc(doc: &RuleDoc) -> Result<Rule, FormatError> {
    let types = type_graph_from_doc(&doc.type_graph)?;
    let lhs = Arc::new(graph_from_body(&types, &doc.lhs, "lhs")?);
    let interface = Arc::new(graph_from_body(&types, &doc.interface, "interface")?);
    let rhs = Arc::new(graph_from_body(&types, &doc.rhs, "rhs")?);
    let ac = condition_from_doc(&types, &lhs, &doc.ac, "ac")?;
    Ok(Rule::new(doc.name.clone(), lhs, interface, rhs, ac)?)
}

pub fn rule_doc(r: &Rule) -> Result<RuleDoc, FormatError> {
    Ok(RuleDoc {
        name: r.name.clone(),
        type_graph: type_graph_doc(r.lhs().type_graph()),
        lhs: graph_body(r.lhs()),
        interface: graph_body(r.interface()),
        rhs: graph_body(r.rhs()),
        ac: condition_doc(r.ac(), "ac")?,
    })
}

pub fn parse_rule(text: &str) -> Result<Rule, FormatError> {
    let doc: RuleDoc = serde_json::from_str(text)?;
    rule_from_doc(&doc)
}

pub fn emit_rule(r: &Rule) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(&rule_doc(r)?).expect("rule documents serialise"))
}

/// Any of the three document kinds.
#[derive(Clone, Debug)]
pub enum Document {
    Graph(TypedGraph),
    Constraint(Constraint),
    Rule(Rule),
}

/// Parses a document, telling the kind apart by its top-level fields.
pub fn parse_document(text: &str) -> Result<Document, FormatError> {
    let value: BTreeMap<String, serde_json::Value> = serde_json::from_str(text)?;
    if value.contains_key("lhs") {
        Ok(Document::Rule(rule_from_doc(&serde_json::from_value(serde_json::to_value(value)?)?)?))
    } else if value.contains_key("condition") {
        Ok(Document::Constraint(constraint_from_doc(&serde_json::from_value(serde_json::to_value(value)?)?)?))
    } else if value.contains_key("graph") {
        Ok(Document::Graph(graph_from_doc(&serde_json::from_value(serde_json::to_value(value)?)?)?))
    } else {
        Err(FormatError::UnknownDocument)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TYPES: &str = r#""type_graph": {"node_types": ["Class", "Feature"],
        "edge_types": [{"name": "isAssigned", "src": "Feature", "tgt": "Class"}]}"#;

    #[test]
    fn graph_round_trip() {
        let text = format!(
            r#"{{{TYPES}, "graph": {{"nodes": [{{"id": "c", "type": "Class"}}, {{"id": "f", "type": "Feature"}}],
            "edges": [{{"id": "e", "type": "isAssigned", "src": "f", "tgt": "c"}}]}}}}"#
        );
        let g = parse_graph(&text).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(parse_graph(&emit_graph(&g)).unwrap(), g);
    }

    #[test]
    fn constraint_round_trip_and_forall_sugar() {
        let text = format!(
            r#"{{"name": "c2", {TYPES}, "condition": {{"forall": {{
                "graph": {{"nodes": [{{"id": "c", "type": "Class"}}]}},
                "then": {{"exists": {{"graph": {{"nodes": [{{"id": "c", "type": "Class"}}, {{"id": "f", "type": "Feature"}}],
                    "edges": [{{"id": "e", "type": "isAssigned", "src": "f", "tgt": "c"}}]}}}}}}}}}}}}"#
        );
        let c = parse_constraint(&text).unwrap();
        assert_eq!(c.nesting_level(), 2);
        let back = parse_constraint(&emit_constraint(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(emit_constraint(&c).unwrap().contains("forall"));
    }

    #[test]
    fn child_must_extend_parent() {
        let text = format!(
            r#"{{"name": "bad", {TYPES}, "condition": {{"exists": {{
                "graph": {{"nodes": [{{"id": "c", "type": "Class"}}]}},
                "then": {{"exists": {{"graph": {{"nodes": [{{"id": "d", "type": "Class"}}]}}}}}}}}}}}}"#
        );
        assert!(matches!(parse_constraint(&text), Err(FormatError::NotAnExtension { .. })));
    }

    #[test]
    fn invalid_graph_is_a_validation_error() {
        let text = format!(
            r#"{{{TYPES}, "graph": {{"nodes": [], "edges": [{{"id": "e", "type": "isAssigned", "src": "f", "tgt": "c"}}]}}}}"#
        );
        let err = parse_graph(&text).unwrap_err();
        assert!(!err.is_parse_error());
        assert!(parse_graph("{").unwrap_err().is_parse_error());
    }

    #[test]
    fn document_kind_detection() {
        let text = format!(r#"{{{TYPES}, "graph": {{}}}}"#);
        assert!(matches!(parse_document(&text).unwrap(), Document::Graph(_)));
        assert!(matches!(parse_document("{}"), Err(FormatError::UnknownDocument)));
    }
}
