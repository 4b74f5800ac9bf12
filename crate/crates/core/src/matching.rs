//! Exhaustive enumeration of injective morphisms (subgraph monomorphisms).
//!
//! Pattern nodes are assigned in id order and candidates are tried in host id
//! order, then edges likewise, so results come out in canonical order: the
//! lexicographic order of the node image tuple, then the edge image tuple.

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::TypedGraph;
use crate::morphism::GraphMorphism;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchError {
    #[error("pattern and host are typed over different type graphs")]
    TypeGraphMismatch,
    #[error("extension requires a total injective anchor and a morphism out of its domain")]
    BadAnchor,
}

const NO_TYPE: usize = usize::MAX;

/// A graph with ids replaced by positions, built once per graph value.
#[derive(Debug)]
pub(crate) struct Indexed {
    node_ty: Vec<usize>,
    edges: Vec<(usize, usize, usize)>,
    out_deg: Vec<usize>,
    in_deg: Vec<usize>,
    /// Edge positions by `(type, src, tgt)`.
    adj: BTreeMap<(usize, usize, usize), Vec<usize>>,
}

impl Indexed {
    pub(crate) fn new(g: &TypedGraph) -> Indexed {
        let tg = g.type_graph();
        let node_ty: Vec<usize> =
            g.nodes().iter().map(|n| tg.node_type_index(&n.ty).unwrap_or(NO_TYPE)).collect();
        let mut out_deg = vec![0; node_ty.len()];
        let mut in_deg = vec![0; node_ty.len()];
        let edges = g
            .edges()
            .iter()
            .map(|e| {
                let s = g.node_index(&e.src).expect("edge source exists");
                let t = g.node_index(&e.tgt).expect("edge target exists");
                out_deg[s] += 1;
                in_deg[t] += 1;
                (tg.edge_type_index(&e.ty).unwrap_or(NO_TYPE), s, t)
            })
            .collect::<Vec<_>>();
        let mut adj: BTreeMap<(usize, usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, &key) in edges.iter().enumerate() {
            adj.entry(key).or_default().push(i);
        }
        Indexed { node_ty, edges, out_deg, in_deg, adj }
    }
}

/// Prepared search space for one (pattern, host) pair.
pub(crate) struct Matcher {
    pattern: Arc<Indexed>,
    host: Arc<Indexed>,
    /// For each pattern node i: edge groups (type, src, tgt, multiplicity)
    /// whose later endpoint is i.
    groups: Vec<Vec<(usize, usize, usize, usize)>>,
}

impl Matcher {
    pub(crate) fn new(pattern: &TypedGraph, host: &TypedGraph) -> Matcher {
        let pattern_ix = pattern.index();
        let host_ix = host.index();
        let mut counts: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
        for &key in &pattern_ix.edges {
            *counts.entry(key).or_default() += 1;
        }
        let mut groups = vec![Vec::new(); pattern_ix.node_ty.len()];
        for ((ty, s, t), c) in counts {
            groups[s.max(t)].push((ty, s, t, c));
        }
        Matcher { pattern: pattern_ix, host: host_ix, groups }
    }

    /// Runs the search. `fixed_nodes[i]` / `fixed_edges[i]` pin pattern
    /// elements to host elements. The visitor receives node and edge images.
    pub(crate) fn run<F>(&self, fixed_nodes: &[Option<usize>], fixed_edges: &[Option<usize>], visit: &mut F)
    where
        F: FnMut(&[usize], &[usize]) -> ControlFlow<()>,
    {
        let np = self.pattern.node_ty.len();
        let mut node_img = vec![usize::MAX; np];
        let mut host_used = vec![false; self.host.node_ty.len()];
        let mut edge_img = vec![usize::MAX; self.pattern.edges.len()];
        let mut edge_used = vec![false; self.host.edges.len()];
        let mut st = State {
            node_img: &mut node_img,
            host_used: &mut host_used,
            edge_img: &mut edge_img,
            edge_used: &mut edge_used,
        };
        let _ = self.assign_node(0, fixed_nodes, fixed_edges, &mut st, visit);
    }

    fn node_fits(&self, i: usize, h: usize, st: &State<'_>) -> bool {
        if st.host_used[h]
            || self.pattern.node_ty[i] != self.host.node_ty[h]
            || self.pattern.node_ty[i] == NO_TYPE
            || self.pattern.out_deg[i] > self.host.out_deg[h]
            || self.pattern.in_deg[i] > self.host.in_deg[h]
        {
            return false;
        }
        self.groups[i].iter().all(|&(ty, s, t, c)| {
            let hs = if s == i { h } else { st.node_img[s] };
            let ht = if t == i { h } else { st.node_img[t] };
            self.host.adj.get(&(ty, hs, ht)).map_or(0, Vec::len) >= c
        })
    }

    fn assign_node<F>(
        &self,
        i: usize,
        fixed_nodes: &[Option<usize>],
        fixed_edges: &[Option<usize>],
        st: &mut State<'_>,
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[usize], &[usize]) -> ControlFlow<()>,
    {
        if i == self.pattern.node_ty.len() {
            return self.assign_edge(0, fixed_edges, st, visit);
        }
        let candidates: Box<dyn Iterator<Item = usize>> = match fixed_nodes.get(i).copied().flatten() {
            Some(h) => Box::new(std::iter::once(h)),
            None => Box::new(0..self.host.node_ty.len()),
        };
        for h in candidates {
            if !self.node_fits(i, h, st) {
                continue;
            }
            st.node_img[i] = h;
            st.host_used[h] = true;
            let flow = self.assign_node(i + 1, fixed_nodes, fixed_edges, st, visit);
            st.host_used[h] = false;
            st.node_img[i] = usize::MAX;
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn assign_edge<F>(&self, j: usize, fixed_edges: &[Option<usize>], st: &mut State<'_>, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[usize], &[usize]) -> ControlFlow<()>,
    {
        if j == self.pattern.edges.len() {
            return visit(st.node_img, st.edge_img);
        }
        let (ty, s, t) = self.pattern.edges[j];
        let Some(cands) = self.host.adj.get(&(ty, st.node_img[s], st.node_img[t])) else {
            return ControlFlow::Continue(());
        };
        let fixed = fixed_edges.get(j).copied().flatten();
        for &h in cands {
            if st.edge_used[h] || fixed.is_some_and(|f| f != h) {
                continue;
            }
            st.edge_img[j] = h;
            st.edge_used[h] = true;
            let flow = self.assign_edge(j + 1, fixed_edges, st, visit);
            st.edge_used[h] = false;
            st.edge_img[j] = usize::MAX;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

struct State<'a> {
    node_img: &'a mut [usize],
    host_used: &'a mut [bool],
    edge_img: &'a mut [usize],
    edge_used: &'a mut [bool],
}

fn to_morphism(pattern: &Arc<TypedGraph>, host: &Arc<TypedGraph>, nodes: &[usize], edges: &[usize]) -> GraphMorphism {
    let node_map = pattern
        .nodes()
        .iter()
        .zip(nodes)
        .map(|(n, &h)| (n.id.clone(), host.nodes()[h].id.clone()))
        .collect();
    let edge_map = pattern
        .edges()
        .iter()
        .zip(edges)
        .map(|(e, &h)| (e.id.clone(), host.edges()[h].id.clone()))
        .collect();
    GraphMorphism::new_unchecked(pattern.clone(), host.clone(), node_map, edge_map)
}

/// Visits every total injective morphism `pattern -> host` in canonical order.
pub fn for_each_monomorphism<F>(pattern: &Arc<TypedGraph>, host: &Arc<TypedGraph>, mut f: F) -> Result<(), MatchError>
where
    F: FnMut(GraphMorphism) -> ControlFlow<()>,
{
    if !pattern.same_type_graph(host) {
        return Err(MatchError::TypeGraphMismatch);
    }
    let m = Matcher::new(pattern, host);
    m.run(&[], &[], &mut |ns, es| f(to_morphism(pattern, host, ns, es)));
    Ok(())
}

/// All total injective morphisms `pattern -> host`, in canonical order.
pub fn enumerate_monomorphisms(pattern: &Arc<TypedGraph>, host: &Arc<TypedGraph>) -> Result<Vec<GraphMorphism>, MatchError> {
    let mut out = Vec::new();
    for_each_monomorphism(pattern, host, |m| {
        out.push(m);
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn count_monomorphisms(pattern: &Arc<TypedGraph>, host: &Arc<TypedGraph>) -> Result<usize, MatchError> {
    if !pattern.same_type_graph(host) {
        return Err(MatchError::TypeGraphMismatch);
    }
    let mut n = 0;
    Matcher::new(pattern, host).run(&[], &[], &mut |_, _| {
        n += 1;
        ControlFlow::Continue(())
    });
    Ok(n)
}

/// Visits every injective `q: codomain(a) -> codomain(p)` with `q ∘ a = p`.
pub fn for_each_extension<F>(a: &GraphMorphism, p: &GraphMorphism, mut f: F) -> Result<(), MatchError>
where
    F: FnMut(GraphMorphism) -> ControlFlow<()>,
{
    let pattern = a.codomain();
    let host = p.codomain();
    if !pattern.same_type_graph(host) {
        return Err(MatchError::TypeGraphMismatch);
    }
    if !a.is_total() || !p.is_total() || a.domain() != p.domain() {
        return Err(MatchError::BadAnchor);
    }
    let mut fixed_nodes = vec![None; pattern.node_count()];
    for (x, ax) in a.node_map() {
        let i = pattern.node_index(ax).ok_or(MatchError::BadAnchor)?;
        let h = host.node_index(&p.node_map()[x]).ok_or(MatchError::BadAnchor)?;
        if fixed_nodes[i].replace(h).is_some_and(|prev| prev != h) {
            return Err(MatchError::BadAnchor);
        }
    }
    let mut fixed_edges = vec![None; pattern.edge_count()];
    for (x, ax) in a.edge_map() {
        let i = pattern.edge_index(ax).ok_or(MatchError::BadAnchor)?;
        let h = host.edge_index(&p.edge_map()[x]).ok_or(MatchError::BadAnchor)?;
        if fixed_edges[i].replace(h).is_some_and(|prev| prev != h) {
            return Err(MatchError::BadAnchor);
        }
    }
    let m = Matcher::new(pattern, host);
    m.run(&fixed_nodes, &fixed_edges, &mut |ns, es| f(to_morphism(pattern, host, ns, es)));
    Ok(())
}

pub fn extensions(a: &GraphMorphism, p: &GraphMorphism) -> Result<Vec<GraphMorphism>, MatchError> {
    let mut out = Vec::new();
    for_each_extension(a, p, |q| {
        out.push(q);
        ControlFlow::Continue(())
    })?;
    Ok(out)
}
