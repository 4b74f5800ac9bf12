//! Generators and brute-force oracles shared by the integration suites.
//!
//! The oracles here deliberately avoid the crate's matcher and rewriting
//! code: they enumerate plain maps and rebuild graphs from id sets.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use gradcons::{
    apply_numbered, find_matches, validate_anf, Condition, Constraint, EdgeId, EdgeType, GraphMorphism, NodeId, Rule, Transformation,
    TypeGraph, TypedGraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type NodeMap = BTreeMap<NodeId, NodeId>;
pub type EdgeMap = BTreeMap<EdgeId, EdgeId>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One node type `N` and one edge type `E: N -> N`.
pub fn single_types() -> Arc<TypeGraph> {
    Arc::new(TypeGraph::new(["N"], [EdgeType::new("E", "N", "N")]).expect("type graph"))
}

/// Node types `A`, `B`; edges `f: A -> B`, `g: B -> B`, `h: A -> A`.
pub fn two_types() -> Arc<TypeGraph> {
    Arc::new(TypeGraph::new(["A", "B"], [EdgeType::new("f", "A", "B"), EdgeType::new("g", "B", "B"), EdgeType::new("h", "A", "A")]).expect("type graph"))
}

fn pick_type(rng: &mut impl Rng, types: &TypeGraph) -> String {
    let ts = types.node_types();
    ts[rng.random_range(0..ts.len())].clone()
}

/// Every `(edge type, src, tgt)` triple allowed between the given nodes.
fn edge_slots(types: &TypeGraph, g: &TypedGraph) -> Vec<(String, NodeId, NodeId)> {
    let mut out = Vec::new();
    for et in types.edge_types() {
        for s in g.nodes().iter().filter(|n| *n.ty == *et.src) {
            for t in g.nodes().iter().filter(|n| *n.ty == *et.tgt) {
                out.push((et.name.clone(), s.id.clone(), t.id.clone()));
            }
        }
    }
    out
}

/// Every labelled single-type graph with 1 to `max_nodes` nodes and at most
/// `max_mult` parallel edges per slot. No isomorphism reduction.
pub fn small_multigraphs(types: &Arc<TypeGraph>, max_nodes: usize, max_mult: usize) -> Vec<Arc<TypedGraph>> {
    assert_eq!(types.node_types().len(), 1);
    let ty = types.node_types()[0].clone();
    let mut out = Vec::new();
    for n in 1..=max_nodes {
        let mut base = TypedGraph::new(types.clone());
        for i in 0..n {
            base.add_node(format!("v{i}"), ty.as_str());
        }
        let slots = edge_slots(types, &base);
        let mut mult = vec![0usize; slots.len()];
        loop {
            let mut g = base.clone();
            for (k, (et, s, t)) in slots.iter().enumerate() {
                for j in 0..mult[k] {
                    g.add_edge(format!("e{k}_{j}"), et.as_str(), s.clone(), t.clone());
                }
            }
            out.push(Arc::new(g));
            let Some(k) = mult.iter().position(|m| *m < max_mult) else { break };
            mult[k] += 1;
            mult[..k].iter_mut().for_each(|m| *m = 0);
        }
    }
    out
}

/// A random graph with `n` nodes. With `multi`, a slot may carry two
/// parallel edges.
pub fn random_graph(rng: &mut impl Rng, types: &Arc<TypeGraph>, n: usize, p: f64, multi: bool, prefix: &str) -> TypedGraph {
    let mut g = TypedGraph::new(types.clone());
    for i in 0..n {
        let ty = pick_type(rng, types);
        g.add_node(format!("{prefix}{i}"), ty);
    }
    let mut k = 0;
    for (ty, s, t) in edge_slots(types, &g) {
        let copies = if rng.random_bool(p) { 1 + usize::from(multi && rng.random_bool(0.2)) } else { 0 };
        for _ in 0..copies {
            g.add_edge(format!("{prefix}e{k}"), ty.clone(), s.clone(), t.clone());
            k += 1;
        }
    }
    g
}

/// Adds between one and three fresh elements to `base`. New ids carry `prefix`.
pub fn random_extension(rng: &mut impl Rng, base: &TypedGraph, prefix: &str) -> TypedGraph {
    let types = base.type_graph().clone();
    loop {
        let mut g = base.clone();
        let mut added = 0;
        if base.is_empty() || rng.random_bool(0.5) {
            let ty = pick_type(rng, &types);
            g.add_node(format!("{prefix}n"), ty);
            added += 1;
        }
        let slots = edge_slots(&types, &g);
        let mut k = 0;
        for _ in 0..rng.random_range(0..=2) {
            if slots.is_empty() {
                break;
            }
            let (ty, s, t) = slots[rng.random_range(0..slots.len())].clone();
            if g.edges().iter().any(|e| *e.ty == *ty && e.src == s && e.tgt == t) {
                continue;
            }
            g.add_edge(format!("{prefix}e{k}"), ty, s, t);
            k += 1;
            added += 1;
        }
        if added > 0 {
            return g;
        }
    }
}

pub fn inclusion(sub: &Arc<TypedGraph>, sup: &Arc<TypedGraph>) -> GraphMorphism {
    GraphMorphism::inclusion(sub.clone(), sup.clone()).expect("inclusion")
}

/// A random ANF constraint with `levels` quantifiers. The innermost body is
/// `false` exactly when the last quantifier is universal.
pub fn random_anf(rng: &mut impl Rng, types: &Arc<TypeGraph>, levels: usize, universal: bool, name: &str) -> Constraint {
    let empty = Arc::new(TypedGraph::new(types.clone()));
    let mut graphs = vec![empty.clone()];
    for i in 0..levels {
        let prev = graphs.last().expect("nonempty").clone();
        let next = if i == 0 {
            let n = rng.random_range(1..=2);
            random_graph(rng, types, n, 0.4, false, "c")
        } else {
            random_extension(rng, &prev, &format!("l{i}"))
        };
        graphs.push(Arc::new(next));
    }
    let quantifier_is_forall = |i: usize| universal == (i % 2 == 0);
    let mut body = if quantifier_is_forall(levels - 1) { Condition::ff() } else { Condition::True };
    for i in (0..levels).rev() {
        let a = inclusion(&graphs[i], &graphs[i + 1]);
        body = if quantifier_is_forall(i) { Condition::forall(a, body) } else { Condition::exists(a, body) };
    }
    let c = Constraint::new(name, empty, body).expect("constraint");
    validate_anf(&c).expect("generated constraint is in ANF");
    c
}

/// `¬∃C`.
pub fn negative_constraint(c: &Arc<TypedGraph>, name: &str) -> Constraint {
    let empty = Arc::new(TypedGraph::new(c.type_graph().clone()));
    let a = inclusion(&empty, c);
    Constraint::new(name, empty, Condition::forall(a, Condition::ff())).expect("constraint")
}

/// `∀(C, ∃C′)`.
pub fn forall_exists(c: &Arc<TypedGraph>, c2: &Arc<TypedGraph>, name: &str) -> Constraint {
    let empty = Arc::new(TypedGraph::new(c.type_graph().clone()));
    let body = Condition::exists_plain(inclusion(c, c2));
    Constraint::new(name, empty.clone(), Condition::forall(inclusion(&empty, c), body)).expect("constraint")
}

pub struct RuleShape {
    pub max_lhs_nodes: usize,
    pub allow_ac: bool,
}

/// A random rule. L nodes are `x*`, created nodes `y*`, L edges `l*`,
/// created edges `r*`.
pub fn random_rule(rng: &mut impl Rng, types: &Arc<TypeGraph>, shape: &RuleShape, name: &str) -> Rule {
    loop {
        let mut l = TypedGraph::new(types.clone());
        for i in 0..rng.random_range(1..=shape.max_lhs_nodes) {
            let ty = pick_type(rng, types);
            l.add_node(format!("x{i}"), ty);
        }
        let mut k_edges = 0;
        for (ty, s, t) in edge_slots(types, &l) {
            if rng.random_bool(0.3) {
                l.add_edge(format!("l{k_edges}"), ty, s, t);
                k_edges += 1;
            }
        }
        let kept: BTreeSet<NodeId> = l.nodes().iter().filter(|_| rng.random_bool(0.6)).map(|n| n.id.clone()).collect();
        let mut k = TypedGraph::new(types.clone());
        for n in l.nodes().iter().filter(|n| kept.contains(&n.id)) {
            k.add_node(n.id.clone(), n.ty.clone());
        }
        for e in l.edges() {
            if kept.contains(&e.src) && kept.contains(&e.tgt) && rng.random_bool(0.6) {
                k.add_edge(e.id.clone(), e.ty.clone(), e.src.clone(), e.tgt.clone());
            }
        }
        let mut r = k.clone();
        if rng.random_bool(0.4) {
            let ty = pick_type(rng, types);
            r.add_node("y0", ty);
        }
        let mut created = 0;
        for (ty, s, t) in edge_slots(types, &r) {
            let parallel = r.edges().iter().any(|e| *e.ty == *ty && e.src == s && e.tgt == t);
            if !parallel && rng.random_bool(0.2) {
                r.add_edge(format!("r{created}"), ty, s, t);
                created += 1;
            }
        }
        let l = Arc::new(l);
        let ac = if shape.allow_ac && rng.random_bool(0.3) {
            let forbidden = Arc::new(random_extension(rng, &l, "nac"));
            Condition::not(Condition::exists_plain(inclusion(&l, &forbidden)))
        } else {
            Condition::True
        };
        let rule = Rule::new(name, l, Arc::new(k), Arc::new(r), ac).expect("generated rule");
        if !rule.is_identity() {
            return rule;
        }
    }
}

/// Random steps of random rules on random hosts of at most `max_host` nodes.
pub fn step_corpus(seed: u64, steps_wanted: usize, max_host: usize) -> Vec<Transformation> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < steps_wanted {
        tries += 1;
        assert!(tries < 100 * steps_wanted, "generator starved");
        let types = if r.random_bool(0.5) { single_types() } else { two_types() };
        let shape = RuleShape { max_lhs_nodes: 3, allow_ac: true };
        let rule = random_rule(&mut r, &types, &shape, &format!("r{tries}"));
        let n = r.random_range(1..=max_host);
        let multi = r.random_bool(0.2);
        let host = Arc::new(random_graph(&mut r, &types, n, 0.3, multi, "h"));
        for m in find_matches(&rule, &host).unwrap().into_iter().take(3) {
            out.push(apply_numbered(&rule, &host, &m, tries as u64).unwrap());
        }
    }
    out.truncate(steps_wanted);
    out
}

/// Every step of `rule` on every host, numbered from 0.
pub fn all_steps(rule: &Rule, hosts: &[Arc<TypedGraph>]) -> Vec<(usize, Transformation)> {
    let mut out = Vec::new();
    for (i, g) in hosts.iter().enumerate() {
        for m in find_matches(rule, g).expect("matching") {
            out.push((i, apply_numbered(rule, g, &m, 0).expect("match is applicable")));
        }
    }
    out
}

/// All total maps from `pattern` to `host`, by exhaustive product
/// enumeration with no pruning beyond types.
pub fn brute_maps(pattern: &TypedGraph, host: &TypedGraph, injective: bool) -> Vec<(NodeMap, EdgeMap)> {
    let mut out = Vec::new();
    let mut nodes = Vec::new();
    brute_nodes(pattern, host, injective, &mut nodes, &mut out);
    out
}

fn brute_nodes(
    pattern: &TypedGraph,
    host: &TypedGraph,
    injective: bool,
    chosen: &mut Vec<usize>,
    out: &mut Vec<(NodeMap, EdgeMap)>,
) {
    let i = chosen.len();
    if i == pattern.node_count() {
        let nm: NodeMap = pattern
            .nodes()
            .iter()
            .zip(chosen.iter())
            .map(|(p, &h)| (p.id.clone(), host.nodes()[h].id.clone()))
            .collect();
        let mut edges = Vec::new();
        brute_edges(pattern, host, injective, &nm, &mut edges, out);
        return;
    }
    for h in 0..host.node_count() {
        if host.nodes()[h].ty != pattern.nodes()[i].ty || (injective && chosen.contains(&h)) {
            continue;
        }
        chosen.push(h);
        brute_nodes(pattern, host, injective, chosen, out);
        chosen.pop();
    }
}

fn brute_edges(
    pattern: &TypedGraph,
    host: &TypedGraph,
    injective: bool,
    nm: &NodeMap,
    chosen: &mut Vec<usize>,
    out: &mut Vec<(NodeMap, EdgeMap)>,
) {
    let i = chosen.len();
    if i == pattern.edge_count() {
        let em: EdgeMap = pattern
            .edges()
            .iter()
            .zip(chosen.iter())
            .map(|(p, &h)| (p.id.clone(), host.edges()[h].id.clone()))
            .collect();
        out.push((nm.clone(), em));
        return;
    }
    let pe = &pattern.edges()[i];
    for h in 0..host.edge_count() {
        let he = &host.edges()[h];
        if he.ty != pe.ty || he.src != nm[&pe.src] || he.tgt != nm[&pe.tgt] || (injective && chosen.contains(&h)) {
            continue;
        }
        chosen.push(h);
        brute_edges(pattern, host, injective, nm, chosen, out);
        chosen.pop();
    }
}

/// Satisfaction by exhaustive enumeration of every injective map at every
/// nesting level. `p` maps the anchor of `cond` into `host`.
pub fn brute_satisfies(host: &TypedGraph, p: &(NodeMap, EdgeMap), cond: &Condition) -> bool {
    match cond {
        Condition::True => true,
        Condition::Not(sub) => !brute_satisfies(host, p, sub),
        Condition::And(l, r) => brute_satisfies(host, p, l) && brute_satisfies(host, p, r),
        Condition::Exists { a, sub } => brute_maps(a.codomain(), host, true).into_iter().any(|q| {
            let commutes = a.node_map().iter().all(|(x, y)| p.0.get(x) == q.0.get(y))
                && a.edge_map().iter().all(|(x, y)| p.1.get(x) == q.1.get(y));
            commutes && brute_satisfies(host, &q, sub)
        }),
    }
}

pub fn brute_graph_satisfies(host: &TypedGraph, c: &Constraint) -> bool {
    brute_satisfies(host, &(NodeMap::new(), EdgeMap::new()), &c.condition)
}

pub type NodeSet = BTreeSet<(String, String)>;
pub type EdgeSet = BTreeSet<(String, String, String, String)>;

pub fn node_set(g: &TypedGraph) -> NodeSet {
    g.nodes().iter().map(|n| (n.id.0.to_string(), n.ty.to_string())).collect()
}

pub fn edge_set(g: &TypedGraph) -> EdgeSet {
    g.edges().iter().map(|e| (e.id.0.to_string(), e.ty.to_string(), e.src.0.to_string(), e.tgt.0.to_string())).collect()
}

/// Double-pushout result computed from id sets: remove the matched deleted
/// part, then add created elements named `{rule}:{id}#{step}`.
pub fn set_dpo(rule: &Rule, host: &TypedGraph, m: &GraphMorphism, step: u64) -> (NodeSet, EdgeSet) {
    let l = rule.lhs();
    let k = rule.interface();
    let r = rule.rhs();
    let del_nodes: BTreeSet<String> =
        l.nodes().iter().filter(|n| !k.contains_node(&n.id)).map(|n| m.node_map()[&n.id].0.to_string()).collect();
    let del_edges: BTreeSet<String> =
        l.edges().iter().filter(|e| !k.contains_edge(&e.id)).map(|e| m.edge_map()[&e.id].0.to_string()).collect();
    let mut nodes: NodeSet = node_set(host).into_iter().filter(|(id, _)| !del_nodes.contains(id)).collect();
    let mut edges: EdgeSet = edge_set(host).into_iter().filter(|(id, ..)| !del_edges.contains(id)).collect();
    let fresh = |id: &str| format!("{}:{}#{}", rule.name, id, step);
    let name_of = |x: &NodeId| -> String {
        if k.contains_node(x) {
            m.node_map()[x].0.to_string()
        } else {
            fresh(x.as_str())
        }
    };
    for n in r.nodes().iter().filter(|n| !k.contains_node(&n.id)) {
        nodes.insert((fresh(n.id.as_str()), n.ty.to_string()));
    }
    for e in r.edges().iter().filter(|e| !k.contains_edge(&e.id)) {
        edges.insert((fresh(e.id.as_str()), e.ty.to_string(), name_of(&e.src), name_of(&e.tgt)));
    }
    (nodes, edges)
}

/// Checks that `side: S -> O` and `ctx: D -> O` form a pushout of
/// `S <- K -> D`, where `K ⊆ S` by id and `k_to_ctx` maps `K` into `D`.
/// The set-level quotient of `S ⊔ D` over `K` must biject onto `O` through
/// the legs, and every cocone into each probe graph must have exactly one
/// mediating map, counted by brute force.
pub fn pushout_universal(
    k_to_ctx: &(NodeMap, EdgeMap),
    side: &GraphMorphism,
    ctx: &GraphMorphism,
    outer: &TypedGraph,
    probes: &[Arc<TypedGraph>],
) -> Result<(), String> {
    let s = side.domain();
    let d = ctx.domain();
    let glued_nodes: BTreeMap<&NodeId, &NodeId> = k_to_ctx.0.iter().map(|(x, y)| (y, x)).collect();
    let glued_edges: BTreeMap<&EdgeId, &EdgeId> = k_to_ctx.1.iter().map(|(x, y)| (y, x)).collect();

    // Quotient classes are keyed by an element of S, or of D when not glued.
    let mut node_classes: BTreeMap<String, NodeId> = BTreeMap::new();
    for n in s.nodes() {
        node_classes.insert(format!("S/{}", n.id), side.node_map()[&n.id].clone());
    }
    for n in d.nodes() {
        let y = ctx.node_map()[&n.id].clone();
        match glued_nodes.get(&n.id) {
            Some(kx) => {
                if node_classes[&format!("S/{kx}")] != y {
                    return Err(format!("glued node {kx} has two images"));
                }
            }
            None => {
                node_classes.insert(format!("D/{}", n.id), y);
            }
        }
    }
    let mut edge_classes: BTreeMap<String, EdgeId> = BTreeMap::new();
    for e in s.edges() {
        edge_classes.insert(format!("S/{}", e.id), side.edge_map()[&e.id].clone());
    }
    for e in d.edges() {
        let y = ctx.edge_map()[&e.id].clone();
        match glued_edges.get(&e.id) {
            Some(kx) => {
                if edge_classes[&format!("S/{kx}")] != y {
                    return Err(format!("glued edge {kx} has two images"));
                }
            }
            None => {
                edge_classes.insert(format!("D/{}", e.id), y);
            }
        }
    }
    let node_images: BTreeSet<&NodeId> = node_classes.values().collect();
    let edge_images: BTreeSet<&EdgeId> = edge_classes.values().collect();
    if node_images.len() != node_classes.len() || node_images.len() != outer.node_count() {
        return Err("node quotient is not in bijection with the outer graph".into());
    }
    if edge_images.len() != edge_classes.len() || edge_images.len() != outer.edge_count() {
        return Err("edge quotient is not in bijection with the outer graph".into());
    }

    // Universal property against each probe X: composing with the legs is a
    // bijection from maps O -> X onto cocones (f1, f2) over the span.
    for x in probes {
        let mut ctx_by_k: BTreeMap<(Vec<NodeId>, Vec<EdgeId>), usize> = BTreeMap::new();
        for f2 in brute_maps(d, x, false) {
            let key = (
                k_to_ctx.0.values().map(|b| f2.0[b].clone()).collect(),
                k_to_ctx.1.values().map(|b| f2.1[b].clone()).collect(),
            );
            *ctx_by_k.entry(key).or_default() += 1;
        }
        let mut cocones = 0usize;
        for f1 in brute_maps(s, x, false) {
            let key = (
                k_to_ctx.0.keys().map(|a| f1.0[a].clone()).collect(),
                k_to_ctx.1.keys().map(|a| f1.1[a].clone()).collect(),
            );
            cocones += ctx_by_k.get(&key).copied().unwrap_or(0);
        }
        let mut induced = BTreeSet::new();
        let mut maps = 0usize;
        for u in brute_maps(outer, x, false) {
            maps += 1;
            let f1: (NodeMap, EdgeMap) = (
                side.node_map().iter().map(|(a, b)| (a.clone(), u.0[b].clone())).collect(),
                side.edge_map().iter().map(|(a, b)| (a.clone(), u.1[b].clone())).collect(),
            );
            let f2: (NodeMap, EdgeMap) = (
                ctx.node_map().iter().map(|(a, b)| (a.clone(), u.0[b].clone())).collect(),
                ctx.edge_map().iter().map(|(a, b)| (a.clone(), u.1[b].clone())).collect(),
            );
            induced.insert((f1, f2));
        }
        if induced.len() != maps {
            return Err(format!("two maps into {x} induce the same cocone"));
        }
        if maps != cocones {
            return Err(format!("{cocones} cocones into {x} but {maps} maps out of the outer graph"));
        }
    }
    Ok(())
}

/// Small test objects for cocone checks: one copy of each node type with up
/// to two parallel edges on the first slot, then two copies with simple edges.
pub fn probe_graphs(types: &Arc<TypeGraph>, rng: &mut impl Rng, count: usize) -> Vec<Arc<TypedGraph>> {
    (0..count)
        .map(|i| {
            let copies = 1 + i % 2;
            let max_parallel = if copies == 1 { 2 } else { 1 };
            let mut g = TypedGraph::new(types.clone());
            for t in 0..copies {
                for ty in types.node_types() {
                    g.add_node(format!("p{t}{ty}"), ty.clone());
                }
            }
            let mut k = 0;
            for (j, (ty, s, t)) in edge_slots(types, &g).into_iter().enumerate() {
                let most = if j == 0 { max_parallel } else { 1 };
                for _ in 0..rng.random_range(0..=most) {
                    g.add_edge(format!("pe{k}"), ty.clone(), s.clone(), t.clone());
                    k += 1;
                }
            }
            Arc::new(g)
        })
        .collect()
}

/// Renames every id of `g` through a seeded permutation of fresh names.
pub fn renamed(g: &TypedGraph, rng: &mut impl Rng) -> (TypedGraph, NodeMap, EdgeMap) {
    let mut node_names: Vec<usize> = (0..g.node_count()).collect();
    let mut edge_names: Vec<usize> = (0..g.edge_count()).collect();
    shuffle(&mut node_names, rng);
    shuffle(&mut edge_names, rng);
    let nm: NodeMap =
        g.nodes().iter().zip(&node_names).map(|(n, &k)| (n.id.clone(), NodeId::from(format!("r{k}")))).collect();
    let em: EdgeMap =
        g.edges().iter().zip(&edge_names).map(|(e, &k)| (e.id.clone(), EdgeId::from(format!("q{k}")))).collect();
    let mut out = TypedGraph::new(g.type_graph().clone());
    for n in g.nodes() {
        out.add_node(nm[&n.id].clone(), n.ty.clone());
    }
    for e in g.edges() {
        out.add_edge(em[&e.id].clone(), e.ty.clone(), nm[&e.src].clone(), nm[&e.tgt].clone());
    }
    (out, nm, em)
}

fn shuffle<T>(v: &mut [T], rng: &mut impl Rng) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
}
