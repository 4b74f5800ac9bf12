//! DPO rules with injective matches, rule application and track morphisms.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use thiserror::Error;

use crate::condition::{satisfies, Condition, ConditionError};
use crate::graph::{EdgeId, NodeId, TypedGraph, ValidationReport};
use crate::matching::{for_each_monomorphism, MatchError};
use crate::morphism::GraphMorphism;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule graphs are typed over different type graphs")]
    TypeGraphMismatch,
    #[error("{which} is not a valid typed graph: {report}")]
    InvalidGraph { which: &'static str, report: ValidationReport },
    #[error("interface is not a subgraph of the {0}")]
    InterfaceNotIncluded(&'static str),
    #[error("element `{0}` occurs in both L and R but not in K")]
    AmbiguousId(String),
    #[error("application condition: {0}")]
    ApplicationCondition(ConditionError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("morphism is not a total injective match of the left-hand side into the host")]
    NotAMatch,
    #[error("match does not satisfy the application condition")]
    AcViolated,
    #[error("match violates the dangling condition")]
    Dangling,
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// A span `L ⊇ K ⊆ R` with inclusions given by shared ids, plus an
/// application condition over `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    lhs: Arc<TypedGraph>,
    interface: Arc<TypedGraph>,
    rhs: Arc<TypedGraph>,
    ac: Condition,
}

impl Rule {
    pub fn new(
        name: impl Into<String>,
        lhs: Arc<TypedGraph>,
        interface: Arc<TypedGraph>,
        rhs: Arc<TypedGraph>,
        ac: Condition,
    ) -> Result<Rule, RuleError> {
        if !lhs.same_type_graph(&interface) || !lhs.same_type_graph(&rhs) {
            return Err(RuleError::TypeGraphMismatch);
        }
        for (which, g) in [("L", &lhs), ("K", &interface), ("R", &rhs)] {
            g.validate().map_err(|report| RuleError::InvalidGraph { which, report })?;
        }
        if !interface.is_subgraph_of(&lhs) {
            return Err(RuleError::InterfaceNotIncluded("left-hand side"));
        }
        if !interface.is_subgraph_of(&rhs) {
            return Err(RuleError::InterfaceNotIncluded("right-hand side"));
        }
        for n in lhs.nodes() {
            if !interface.contains_node(&n.id) && rhs.contains_node(&n.id) {
                return Err(RuleError::AmbiguousId(n.id.to_string()));
            }
        }
        for e in lhs.edges() {
            if !interface.contains_edge(&e.id) && rhs.contains_edge(&e.id) {
                return Err(RuleError::AmbiguousId(e.id.to_string()));
            }
        }
        ac.check(&lhs).map_err(RuleError::ApplicationCondition)?;
        Ok(Rule { name: name.into(), lhs, interface, rhs, ac })
    }

    /// The identity rule `C ← C → C` without application condition.
    pub fn check_rule(graph: Arc<TypedGraph>) -> Rule {
        Rule {
            name: "check".into(),
            lhs: graph.clone(),
            interface: graph.clone(),
            rhs: graph,
            ac: Condition::True,
        }
    }

    pub fn lhs(&self) -> &Arc<TypedGraph> {
        &self.lhs
    }

    pub fn interface(&self) -> &Arc<TypedGraph> {
        &self.interface
    }

    pub fn rhs(&self) -> &Arc<TypedGraph> {
        &self.rhs
    }

    pub fn ac(&self) -> &Condition {
        &self.ac
    }

    pub fn has_ac(&self) -> bool {
        self.ac != Condition::True
    }

    /// The same span without its application condition.
    pub fn plain(&self) -> Rule {
        Rule { ac: Condition::True, ..self.clone() }
    }

    /// `L ∖ K`.
    pub fn deleted(&self) -> (Vec<NodeId>, Vec<EdgeId>) {
        self.lhs.difference_ids(&self.interface)
    }

    /// `R ∖ K`.
    pub fn created(&self) -> (Vec<NodeId>, Vec<EdgeId>) {
        self.rhs.difference_ids(&self.interface)
    }

    pub fn is_identity(&self) -> bool {
        self.lhs.element_count() == self.interface.element_count()
            && self.rhs.element_count() == self.interface.element_count()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchStats {
    /// Injective morphisms `L -> G` considered.
    pub candidates: usize,
    pub rejected_by_ac: usize,
    pub rejected_by_dangling: usize,
}

/// Whether deleting `m(L∖K)` leaves no dangling edge.
pub fn dangling_ok(rule: &Rule, m: &GraphMorphism) -> bool {
    let host = m.codomain();
    let (del_nodes, _) = rule.deleted();
    let matched_edges: BTreeSet<&EdgeId> = m.edge_map().values().collect();
    del_nodes.iter().all(|x| {
        let hx = &m.node_map()[x];
        host.incident_edges(hx).all(|e| matched_edges.contains(&e.id))
    })
}

pub fn find_matches(rule: &Rule, g: &Arc<TypedGraph>) -> Result<Vec<GraphMorphism>, RewriteError> {
    Ok(find_matches_with_stats(rule, g)?.0)
}

/// Matches in canonical order, with rejection counts. The application
/// condition is checked before the dangling condition.
pub fn find_matches_with_stats(rule: &Rule, g: &Arc<TypedGraph>) -> Result<(Vec<GraphMorphism>, MatchStats), RewriteError> {
    let mut stats = MatchStats::default();
    let mut out = Vec::new();
    let mut err = None;
    for_each_monomorphism(&rule.lhs, g, |m| {
        stats.candidates += 1;
        match satisfies(&m, &rule.ac) {
            Ok(false) => stats.rejected_by_ac += 1,
            Ok(true) if !dangling_ok(rule, &m) => stats.rejected_by_dangling += 1,
            Ok(true) => out.push(m),
            Err(e) => {
                err = Some(e);
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok((out, stats))
}

/// A rule application `G ⇒ H` with both pushout squares and the track morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transformation {
    pub rule: Rule,
    pub step: u64,
    pub host: Arc<TypedGraph>,
    pub m: GraphMorphism,
    pub context: Arc<TypedGraph>,
    pub result: Arc<TypedGraph>,
    /// `D → G`
    pub g: GraphMorphism,
    /// `D → H`
    pub h: GraphMorphism,
    /// comatch `R → H`
    pub n: GraphMorphism,
    track: GraphMorphism,
}

impl Transformation {
    /// The partial morphism `G ⇢ H` defined on the preserved elements.
    pub fn track(&self) -> &GraphMorphism {
        &self.track
    }

    /// `m(L∖K)` as host ids.
    pub fn deleted_in_host(&self) -> (Vec<NodeId>, Vec<EdgeId>) {
        let (ns, es) = self.rule.deleted();
        (
            ns.iter().map(|x| self.m.node_map()[x].clone()).collect(),
            es.iter().map(|x| self.m.edge_map()[x].clone()).collect(),
        )
    }

    /// `n(R∖K)` as result ids.
    pub fn created_in_result(&self) -> (Vec<NodeId>, Vec<EdgeId>) {
        let (ns, es) = self.rule.created();
        (
            ns.iter().map(|x| self.n.node_map()[x].clone()).collect(),
            es.iter().map(|x| self.n.edge_map()[x].clone()).collect(),
        )
    }

    /// Checks the pushout characterisation for injective squares:
    /// each outer graph is the union of the context image and the rule-side
    /// image, and the two images intersect exactly in the interface image.
    pub fn check_pushouts(&self) -> bool {
        square_ok(&self.g, &self.m, self.rule.interface(), &self.host)
            && square_ok(&self.h, &self.n, self.rule.interface(), &self.result)
    }
}

fn square_ok(ctx: &GraphMorphism, side: &GraphMorphism, k: &TypedGraph, outer: &TypedGraph) -> bool {
    let ctx_nodes: BTreeSet<&NodeId> = ctx.node_map().values().collect();
    let ctx_edges: BTreeSet<&EdgeId> = ctx.edge_map().values().collect();
    let side_nodes: BTreeSet<&NodeId> = side.node_map().values().collect();
    let side_edges: BTreeSet<&EdgeId> = side.edge_map().values().collect();
    let k_nodes: BTreeSet<&NodeId> = k.nodes().iter().map(|n| &side.node_map()[&n.id]).collect();
    let k_edges: BTreeSet<&EdgeId> = k.edges().iter().map(|e| &side.edge_map()[&e.id]).collect();
    ctx.is_total()
        && ctx.is_injective()
        && side.is_total()
        && side.is_injective()
        && outer.nodes().iter().all(|n| ctx_nodes.contains(&n.id) || side_nodes.contains(&n.id))
        && outer.edges().iter().all(|e| ctx_edges.contains(&e.id) || side_edges.contains(&e.id))
        && ctx_nodes.intersection(&side_nodes).copied().collect::<BTreeSet<_>>() == k_nodes
        && ctx_edges.intersection(&side_edges).copied().collect::<BTreeSet<_>>() == k_edges
}

/// Applies `rule` at `m` with step counter 0.
pub fn apply(rule: &Rule, g: &Arc<TypedGraph>, m: &GraphMorphism) -> Result<Transformation, RewriteError> {
    apply_numbered(rule, g, m, 0)
}

/// Applies `rule` at `m`. Created elements are named `{rule}:{id}#{k}` with
/// the smallest `k ≥ step` that avoids every id of the context.
pub fn apply_numbered(rule: &Rule, g: &Arc<TypedGraph>, m: &GraphMorphism, step: u64) -> Result<Transformation, RewriteError> {
    if **m.domain() != **rule.lhs() || **m.codomain() != **g || !m.is_total() || !m.is_injective() {
        return Err(RewriteError::NotAMatch);
    }
    if !satisfies(m, &rule.ac)? {
        return Err(RewriteError::AcViolated);
    }
    if !dangling_ok(rule, m) {
        return Err(RewriteError::Dangling);
    }
    let m = m.with_codomain(g.clone()).map_err(|_| RewriteError::NotAMatch)?;
    Ok(construct(rule, g, m, step))
}

/// Applies `rule` at a match returned by [`find_matches`] for `g`.
pub(crate) fn apply_found_match(rule: &Rule, g: &Arc<TypedGraph>, m: &GraphMorphism) -> Transformation {
    construct(rule, g, m.clone(), 0)
}

fn construct(rule: &Rule, g: &Arc<TypedGraph>, m: GraphMorphism, step: u64) -> Transformation {
    let (del_nodes, del_edges) = rule.deleted();
    let del_host_nodes: Vec<NodeId> = del_nodes.iter().map(|x| m.node_map()[x].clone()).collect();
    let del_host_edges: Vec<EdgeId> = del_edges.iter().map(|x| m.edge_map()[x].clone()).collect();
    let context = Arc::new(g.without(&del_host_nodes, &del_host_edges));

    let (new_nodes, new_edges) = rule.created();
    let mut k = step;
    let fresh = |id: &str, k: u64| format!("{}:{}#{}", rule.name, id, k);
    while new_nodes.iter().any(|x| context.contains_node(&fresh(x.as_str(), k).into()))
        || new_edges.iter().any(|x| context.contains_edge(&fresh(x.as_str(), k).into()))
    {
        k += 1;
    }

    let mut n_nodes: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut n_edges: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
    for x in rule.interface().nodes() {
        n_nodes.insert(x.id.clone(), m.node_map()[&x.id].clone());
    }
    for x in rule.interface().edges() {
        n_edges.insert(x.id.clone(), m.edge_map()[&x.id].clone());
    }
    let mut result = (*context).clone();
    for x in &new_nodes {
        let id = NodeId::from(fresh(x.as_str(), k));
        let ty = rule.rhs().node(x).expect("created node in R").ty.clone();
        result.add_node(id.clone(), ty);
        n_nodes.insert(x.clone(), id);
    }
    for x in &new_edges {
        let e = rule.rhs().edge(x).expect("created edge in R");
        let id = EdgeId::from(fresh(x.as_str(), k));
        result.add_edge(id.clone(), e.ty.clone(), n_nodes[&e.src].clone(), n_nodes[&e.tgt].clone());
        n_edges.insert(x.clone(), id);
    }
    let result = Arc::new(result);

    let g_morph = GraphMorphism::inclusion_unchecked(context.clone(), g.clone());
    let h_morph = GraphMorphism::inclusion_unchecked(context.clone(), result.clone());
    let n = GraphMorphism::new_unchecked(rule.rhs().clone(), result.clone(), n_nodes, n_edges);
    let track = GraphMorphism::new_unchecked(
        g.clone(),
        result.clone(),
        context.nodes().iter().map(|x| (x.id.clone(), x.id.clone())).collect(),
        context.edges().iter().map(|x| (x.id.clone(), x.id.clone())).collect(),
    );
    Transformation {
        rule: rule.clone(),
        step: k,
        host: g.clone(),
        m,
        context,
        result,
        g: g_morph,
        h: h_morph,
        n,
        track,
    }
}

/// The track morphism of a transformation.
pub fn track(t: &Transformation) -> GraphMorphism {
    t.track.clone()
}
