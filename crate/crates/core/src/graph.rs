//! Type graphs and typed multigraphs with stable element identities.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::Indexed;

/// Opaque node identifier. Comparisons are exact string comparisons.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub Arc<str>);

/// Opaque edge identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub Arc<str>);

macro_rules! id_conversions {
    ($t:ident) => {
        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                $t(s.into())
            }
        }

        impl From<String> for $t {
            fn from(s: String) -> Self {
                $t(s.into())
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl $t {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }
    };
}

id_conversions!(NodeId);
id_conversions!(EdgeId);

/// An edge type of the type graph together with its endpoint node types.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeType {
    pub name: String,
    pub src: String,
    pub tgt: String,
}

impl EdgeType {
    pub fn new(name: impl Into<String>, src: impl Into<String>, tgt: impl Into<String>) -> EdgeType {
        EdgeType { name: name.into(), src: src.into(), tgt: tgt.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeGraphError {
    #[error("duplicate type name `{0}`")]
    DuplicateType(String),
    #[error("edge type `{edge}` refers to unknown node type `{node}`")]
    UnknownEndpointType { edge: String, node: String },
}

/// The shared type graph every graph of an analysis is typed over.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeGraph {
    node_types: Vec<String>,
    edge_types: Vec<EdgeType>,
}

impl TypeGraph {
    pub fn new(
        node_types: impl IntoIterator<Item = impl Into<String>>,
        edge_types: impl IntoIterator<Item = EdgeType>,
    ) -> Result<Self, TypeGraphError> {
        let node_types: Vec<String> = node_types.into_iter().map(Into::into).collect();
        let edge_types: Vec<EdgeType> = edge_types.into_iter().collect();
        let mut seen = std::collections::HashSet::new();
        for name in node_types.iter().chain(edge_types.iter().map(|e| &e.name)) {
            if !seen.insert(name.as_str()) {
                return Err(TypeGraphError::DuplicateType(name.clone()));
            }
        }
        for et in &edge_types {
            for end in [&et.src, &et.tgt] {
                if !node_types.contains(end) {
                    return Err(TypeGraphError::UnknownEndpointType {
                        edge: et.name.clone(),
                        node: end.clone(),
                    });
                }
            }
        }
        Ok(TypeGraph { node_types, edge_types })
    }

    pub fn node_types(&self) -> &[String] {
        &self.node_types
    }

    pub fn edge_types(&self) -> &[EdgeType] {
        &self.edge_types
    }

    pub fn has_node_type(&self, name: &str) -> bool {
        self.node_types.iter().any(|t| t == name)
    }

    pub fn edge_type(&self, name: &str) -> Option<&EdgeType> {
        self.edge_types.iter().find(|t| t.name == name)
    }

    pub fn node_type_index(&self, name: &str) -> Option<usize> {
        self.node_types.iter().position(|t| t == name)
    }

    pub fn edge_type_index(&self, name: &str) -> Option<usize> {
        self.edge_types.iter().position(|t| t.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: NodeId,
    pub ty: Arc<str>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: EdgeId,
    pub ty: Arc<str>,
    pub src: NodeId,
    pub tgt: NodeId,
}

/// A single typing or structural problem found by [`TypedGraph::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateNode { node: NodeId },
    DuplicateEdge { edge: EdgeId },
    UnknownNodeType { node: NodeId, ty: String },
    UnknownEdgeType { edge: EdgeId, ty: String },
    MissingSource { edge: EdgeId, node: NodeId },
    MissingTarget { edge: EdgeId, node: NodeId },
    SourceTypeMismatch { edge: EdgeId, expected: String, found: String },
    TargetTypeMismatch { edge: EdgeId, expected: String, found: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNode { node } => write!(f, "node id `{node}` is used more than once"),
            Violation::DuplicateEdge { edge } => write!(f, "edge id `{edge}` is used more than once"),
            Violation::UnknownNodeType { node, ty } => {
                write!(f, "node `{node}` has unknown type `{ty}`")
            }
            Violation::UnknownEdgeType { edge, ty } => {
                write!(f, "edge `{edge}` has unknown type `{ty}`")
            }
            Violation::MissingSource { edge, node } => {
                write!(f, "edge `{edge}` has missing source node `{node}`")
            }
            Violation::MissingTarget { edge, node } => {
                write!(f, "edge `{edge}` has missing target node `{node}`")
            }
            Violation::SourceTypeMismatch { edge, expected, found } => write!(
                f,
                "edge `{edge}` expects a source of type `{expected}`, found `{found}`"
            ),
            Violation::TargetTypeMismatch { edge, expected, found } => write!(
                f,
                "edge `{edge}` expects a target of type `{expected}`, found `{found}`"
            ),
        }
    }
}

/// Every violation found in a graph, in node-then-edge id order.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} typing error(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

/// A finite graph typed over a [`TypeGraph`].
///
/// Nodes and edges are kept sorted by id, which fixes the canonical order used
/// by morphism enumeration. The graph may be constructed in an invalid state
/// (for example from a file); [`TypedGraph::validate`] reports every problem.
#[derive(Clone, Debug)]
pub struct TypedGraph {
    types: Arc<TypeGraph>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: OnceLock<Arc<Indexed>>,
}

impl PartialEq for TypedGraph {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.types, &other.types) || self.types == other.types)
            && self.nodes == other.nodes
            && self.edges == other.edges
    }
}

impl Eq for TypedGraph {}

impl TypedGraph {
    pub fn new(types: Arc<TypeGraph>) -> Self {
        TypedGraph { types, nodes: Vec::new(), edges: Vec::new(), index: OnceLock::new() }
    }

    pub fn type_graph(&self) -> &Arc<TypeGraph> {
        &self.types
    }

    pub fn same_type_graph(&self, other: &TypedGraph) -> bool {
        Arc::ptr_eq(&self.types, &other.types) || self.types == other.types
    }

    pub fn with_node(mut self, id: impl Into<NodeId>, ty: impl Into<Arc<str>>) -> Self {
        self.add_node(id, ty);
        self
    }

    pub fn with_edge(
        mut self,
        id: impl Into<EdgeId>,
        ty: impl Into<Arc<str>>,
        src: impl Into<NodeId>,
        tgt: impl Into<NodeId>,
    ) -> Self {
        self.add_edge(id, ty, src, tgt);
        self
    }

    pub fn add_node(&mut self, id: impl Into<NodeId>, ty: impl Into<Arc<str>>) {
        self.index = OnceLock::new();
        let node = Node { id: id.into(), ty: ty.into() };
        let pos = self.nodes.partition_point(|n| n.id <= node.id);
        self.nodes.insert(pos, node);
    }

    pub fn add_edge(
        &mut self,
        id: impl Into<EdgeId>,
        ty: impl Into<Arc<str>>,
        src: impl Into<NodeId>,
        tgt: impl Into<NodeId>,
    ) {
        self.index = OnceLock::new();
        let edge = Edge { id: id.into(), ty: ty.into(), src: src.into(), tgt: tgt.into() };
        let pos = self.edges.partition_point(|e| e.id <= edge.id);
        self.edges.insert(pos, edge);
    }

    pub(crate) fn index(&self) -> Arc<Indexed> {
        self.index.get_or_init(|| Arc::new(Indexed::new(self))).clone()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn node_index(&self, id: &NodeId) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.id.cmp(id)).ok()
    }

    pub fn edge_index(&self, id: &EdgeId) -> Option<usize> {
        self.edges.binary_search_by(|e| e.id.cmp(id)).ok()
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.node_index(id).map(|i| &self.nodes[i])
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&Edge> {
        self.edge_index(id).map(|i| &self.edges[i])
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.node_index(id).is_some()
    }

    pub fn contains_edge(&self, id: &EdgeId) -> bool {
        self.edge_index(id).is_some()
    }

    /// The empty graph over the same type graph.
    pub fn empty_like(&self) -> TypedGraph {
        TypedGraph::new(self.types.clone())
    }

    /// Checks every invariant and lists all violations.
    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut violations = Vec::new();
        for pair in self.nodes.windows(2) {
            if pair[0].id == pair[1].id {
                violations.push(Violation::DuplicateNode { node: pair[0].id.clone() });
            }
        }
        for n in &self.nodes {
            if !self.types.has_node_type(&n.ty) {
                violations.push(Violation::UnknownNodeType { node: n.id.clone(), ty: n.ty.to_string() });
            }
        }
        for pair in self.edges.windows(2) {
            if pair[0].id == pair[1].id {
                violations.push(Violation::DuplicateEdge { edge: pair[0].id.clone() });
            }
        }
        for e in &self.edges {
            let et = self.types.edge_type(&e.ty);
            if et.is_none() {
                violations.push(Violation::UnknownEdgeType { edge: e.id.clone(), ty: e.ty.to_string() });
            }
            match self.node(&e.src) {
                None => violations.push(Violation::MissingSource { edge: e.id.clone(), node: e.src.clone() }),
                Some(n) => {
                    if let Some(et) = et.filter(|et| *et.src != *n.ty) {
                        violations.push(Violation::SourceTypeMismatch {
                            edge: e.id.clone(),
                            expected: et.src.clone(),
                            found: n.ty.to_string(),
                        });
                    }
                }
            }
            match self.node(&e.tgt) {
                None => violations.push(Violation::MissingTarget { edge: e.id.clone(), node: e.tgt.clone() }),
                Some(n) => {
                    if let Some(et) = et.filter(|et| *et.tgt != *n.ty) {
                        violations.push(Violation::TargetTypeMismatch {
                            edge: e.id.clone(),
                            expected: et.tgt.clone(),
                            found: n.ty.to_string(),
                        });
                    }
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { violations })
        }
    }

    /// True if every element of `self` occurs in `other` with the same type and
    /// (for edges) the same endpoints.
    pub fn is_subgraph_of(&self, other: &TypedGraph) -> bool {
        self.nodes.iter().all(|n| other.node(&n.id).is_some_and(|m| m.ty == n.ty))
            && self.edges.iter().all(|e| other.edge(&e.id).is_some_and(|f| f == e))
    }

    /// The elements of `self` that are not in `other`, as id lists.
    pub fn difference_ids(&self, other: &TypedGraph) -> (Vec<NodeId>, Vec<EdgeId>) {
        (
            self.nodes.iter().filter(|n| !other.contains_node(&n.id)).map(|n| n.id.clone()).collect(),
            self.edges.iter().filter(|e| !other.contains_edge(&e.id)).map(|e| e.id.clone()).collect(),
        )
    }

    /// Edges with the given node as source or target.
    pub fn incident_edges<'a>(&'a self, node: &'a NodeId) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| &e.src == node || &e.tgt == node)
    }

    /// Removes the given elements. Edges are removed by id only; callers are
    /// responsible for not leaving dangling edges.
    pub fn without(&self, nodes: &[NodeId], edges: &[EdgeId]) -> TypedGraph {
        TypedGraph {
            types: self.types.clone(),
            nodes: self.nodes.iter().filter(|n| !nodes.contains(&n.id)).cloned().collect(),
            edges: self.edges.iter().filter(|e| !edges.contains(&e.id)).cloned().collect(),
            index: OnceLock::new(),
        }
    }

    /// Number of nodes per node type, indexed like [`TypeGraph::node_types`].
    pub fn node_type_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.types.node_types().len()];
        for n in &self.nodes {
            if let Some(i) = self.types.node_type_index(&n.ty) {
                counts[i] += 1;
            }
        }
        counts
    }
}

impl fmt::Display for TypedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for n in &self.nodes {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{}:{}", n.id, n.ty)?;
        }
        for e in &self.edges {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{}:{}({}->{})", e.id, e.ty, e.src, e.tgt)?;
        }
        f.write_str("}")
    }
}

/// Orders graphs by size and then by their sorted element lists.
pub fn graph_order(a: &TypedGraph, b: &TypedGraph) -> Ordering {
    (a.node_count(), a.edge_count())
        .cmp(&(b.node_count(), b.edge_count()))
        .then_with(|| {
            let ka = a.nodes.iter().map(|n| (&n.id, &n.ty));
            let kb = b.nodes.iter().map(|n| (&n.id, &n.ty));
            ka.cmp(kb)
        })
        .then_with(|| {
            let ka = a.edges.iter().map(|e| (&e.id, &e.ty, &e.src, &e.tgt));
            let kb = b.edges.iter().map(|e| (&e.id, &e.ty, &e.src, &e.tgt));
            ka.cmp(kb)
        })
}
