//! Possibly partial, structure- and type-preserving graph morphisms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{EdgeId, NodeId, TypedGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error("node `{0}` is not in the domain")]
    UnknownDomainNode(NodeId),
    #[error("node `{0}` is not in the codomain")]
    UnknownCodomainNode(NodeId),
    #[error("edge `{0}` is not in the domain")]
    UnknownDomainEdge(EdgeId),
    #[error("edge `{0}` is not in the codomain")]
    UnknownCodomainEdge(EdgeId),
    #[error("node `{0}` is mapped to an element of a different type")]
    NodeTypeMismatch(NodeId),
    #[error("edge `{0}` is mapped to an element of a different type")]
    EdgeTypeMismatch(EdgeId),
    #[error("edge `{0}` is mapped but its endpoints do not commute")]
    EndpointMismatch(EdgeId),
    #[error("codomain of the first morphism is not the domain of the second")]
    NotComposable,
    #[error("graphs are typed over different type graphs")]
    TypeGraphMismatch,
    #[error("`{0}` is not a subgraph of the target graph")]
    NotASubgraph(String),
}

/// A morphism between typed graphs given by partial node and edge maps.
///
/// Totality and injectivity are derived predicates. Matches, occurrences and
/// condition morphisms are total and injective; track morphisms are partial.
#[derive(Clone, Debug)]
pub struct GraphMorphism {
    domain: Arc<TypedGraph>,
    codomain: Arc<TypedGraph>,
    nodes: BTreeMap<NodeId, NodeId>,
    edges: BTreeMap<EdgeId, EdgeId>,
}

fn same_graph(a: &Arc<TypedGraph>, b: &Arc<TypedGraph>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl PartialEq for GraphMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && same_graph(&self.domain, &other.domain)
            && same_graph(&self.codomain, &other.codomain)
    }
}

impl Eq for GraphMorphism {}

impl GraphMorphism {
    /// Builds a morphism, checking type and structure preservation.
    pub fn new(
        domain: Arc<TypedGraph>,
        codomain: Arc<TypedGraph>,
        nodes: BTreeMap<NodeId, NodeId>,
        edges: BTreeMap<EdgeId, EdgeId>,
    ) -> Result<Self, MorphismError> {
        let m = GraphMorphism { domain, codomain, nodes, edges };
        m.check()?;
        Ok(m)
    }

    pub(crate) fn new_unchecked(
        domain: Arc<TypedGraph>,
        codomain: Arc<TypedGraph>,
        nodes: BTreeMap<NodeId, NodeId>,
        edges: BTreeMap<EdgeId, EdgeId>,
    ) -> Self {
        let m = GraphMorphism { domain, codomain, nodes, edges };
        debug_assert_eq!(m.check(), Ok(()));
        m
    }

    /// Re-checks the morphism invariants.
    pub fn check(&self) -> Result<(), MorphismError> {
        if !self.domain.same_type_graph(&self.codomain) {
            return Err(MorphismError::TypeGraphMismatch);
        }
        for (x, y) in &self.nodes {
            let a = self.domain.node(x).ok_or_else(|| MorphismError::UnknownDomainNode(x.clone()))?;
            let b = self.codomain.node(y).ok_or_else(|| MorphismError::UnknownCodomainNode(y.clone()))?;
            if a.ty != b.ty {
                return Err(MorphismError::NodeTypeMismatch(x.clone()));
            }
        }
        for (x, y) in &self.edges {
            let a = self.domain.edge(x).ok_or_else(|| MorphismError::UnknownDomainEdge(x.clone()))?;
            let b = self.codomain.edge(y).ok_or_else(|| MorphismError::UnknownCodomainEdge(y.clone()))?;
            if a.ty != b.ty {
                return Err(MorphismError::EdgeTypeMismatch(x.clone()));
            }
            if self.nodes.get(&a.src) != Some(&b.src) || self.nodes.get(&a.tgt) != Some(&b.tgt) {
                return Err(MorphismError::EndpointMismatch(x.clone()));
            }
        }
        Ok(())
    }

    pub fn identity(graph: Arc<TypedGraph>) -> Self {
        let nodes = graph.nodes().iter().map(|n| (n.id.clone(), n.id.clone())).collect();
        let edges = graph.edges().iter().map(|e| (e.id.clone(), e.id.clone())).collect();
        GraphMorphism { domain: graph.clone(), codomain: graph, nodes, edges }
    }

    /// The unique morphism out of an empty graph.
    pub fn from_empty(empty: Arc<TypedGraph>, codomain: Arc<TypedGraph>) -> Result<Self, MorphismError> {
        GraphMorphism::new(empty, codomain, BTreeMap::new(), BTreeMap::new())
    }

    /// The id-preserving inclusion of `sub` into `sup`.
    pub fn inclusion(sub: Arc<TypedGraph>, sup: Arc<TypedGraph>) -> Result<Self, MorphismError> {
        if !sub.same_type_graph(&sup) {
            return Err(MorphismError::TypeGraphMismatch);
        }
        if !sub.is_subgraph_of(&sup) {
            return Err(MorphismError::NotASubgraph(sub.to_string()));
        }
        let nodes = sub.nodes().iter().map(|n| (n.id.clone(), n.id.clone())).collect();
        let edges = sub.edges().iter().map(|e| (e.id.clone(), e.id.clone())).collect();
        Ok(GraphMorphism { domain: sub, codomain: sup, nodes, edges })
    }

    /// Inclusion of a graph known to be a subgraph of `sup`.
    pub(crate) fn inclusion_unchecked(sub: Arc<TypedGraph>, sup: Arc<TypedGraph>) -> Self {
        let nodes = sub.nodes().iter().map(|n| (n.id.clone(), n.id.clone())).collect();
        let edges = sub.edges().iter().map(|e| (e.id.clone(), e.id.clone())).collect();
        GraphMorphism::new_unchecked(sub, sup, nodes, edges)
    }

    pub fn domain(&self) -> &Arc<TypedGraph> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<TypedGraph> {
        &self.codomain
    }

    pub fn node_map(&self) -> &BTreeMap<NodeId, NodeId> {
        &self.nodes
    }

    pub fn edge_map(&self) -> &BTreeMap<EdgeId, EdgeId> {
        &self.edges
    }

    pub fn node(&self, x: &NodeId) -> Option<&NodeId> {
        self.nodes.get(x)
    }

    pub fn edge(&self, x: &EdgeId) -> Option<&EdgeId> {
        self.edges.get(x)
    }

    pub fn is_total(&self) -> bool {
        self.nodes.len() == self.domain.node_count() && self.edges.len() == self.domain.edge_count()
    }

    pub fn is_injective(&self) -> bool {
        let mut ns: Vec<_> = self.nodes.values().collect();
        ns.sort();
        ns.dedup();
        let mut es: Vec<_> = self.edges.values().collect();
        es.sort();
        es.dedup();
        ns.len() == self.nodes.len() && es.len() == self.edges.len()
    }

    pub fn is_surjective(&self) -> bool {
        let ns: std::collections::BTreeSet<_> = self.nodes.values().collect();
        let es: std::collections::BTreeSet<_> = self.edges.values().collect();
        ns.len() == self.codomain.node_count() && es.len() == self.codomain.edge_count()
    }

    /// Total, injective and surjective on nodes and edges.
    pub fn is_isomorphism(&self) -> bool {
        self.is_total() && self.is_injective() && self.is_surjective()
    }

    /// `self` followed by `next`; defined where both maps are defined.
    pub fn then(&self, next: &GraphMorphism) -> Result<GraphMorphism, MorphismError> {
        if !same_graph(&self.codomain, &next.domain) {
            return Err(MorphismError::NotComposable);
        }
        let nodes = self
            .nodes
            .iter()
            .filter_map(|(x, y)| next.nodes.get(y).map(|z| (x.clone(), z.clone())))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|(x, y)| next.edges.get(y).map(|z| (x.clone(), z.clone())))
            .collect();
        Ok(GraphMorphism {
            domain: self.domain.clone(),
            codomain: next.codomain.clone(),
            nodes,
            edges,
        })
    }

    /// Whether some element of the image lies in the given codomain id sets.
    pub fn image_touches(&self, nodes: &[NodeId], edges: &[EdgeId]) -> bool {
        self.nodes.values().any(|n| nodes.contains(n)) || self.edges.values().any(|e| edges.contains(e))
    }

    /// Whether every element of the image lies in `sub` (compared by id).
    pub fn image_within(&self, sub: &TypedGraph) -> bool {
        self.nodes.values().all(|n| sub.contains_node(n)) && self.edges.values().all(|e| sub.contains_edge(e))
    }

    /// Same maps, retargeted at an equal codomain value.
    pub fn with_codomain(&self, codomain: Arc<TypedGraph>) -> Result<GraphMorphism, MorphismError> {
        GraphMorphism::new(self.domain.clone(), codomain, self.nodes.clone(), self.edges.clone())
    }

    /// Restriction of the maps to the domain elements of a subgraph.
    pub fn restrict_to(&self, sub: Arc<TypedGraph>) -> Result<GraphMorphism, MorphismError> {
        if !sub.is_subgraph_of(&self.domain) {
            return Err(MorphismError::NotASubgraph(sub.to_string()));
        }
        let nodes = self.nodes.iter().filter(|(x, _)| sub.contains_node(x)).map(|(a, b)| (a.clone(), b.clone())).collect();
        let edges = self.edges.iter().filter(|(x, _)| sub.contains_edge(x)).map(|(a, b)| (a.clone(), b.clone())).collect();
        GraphMorphism::new(sub, self.codomain.clone(), nodes, edges)
    }
}

/// `f` followed by `g` (that is, `g ∘ f`).
pub fn compose(f: &GraphMorphism, g: &GraphMorphism) -> Result<GraphMorphism, MorphismError> {
    f.then(g)
}

impl fmt::Display for GraphMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        let mut first = true;
        for (x, y) in &self.nodes {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{x}↦{y}")?;
        }
        for (x, y) in &self.edges {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{x}↦{y}")?;
        }
        f.write_str("]")
    }
}
