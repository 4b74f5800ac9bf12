//! Host graphs for bounded search: every simple typed graph up to a node
//! bound (one representative per isomorphism class) plus seeded random hosts.
//!
//! Hosts are simple: at most one edge of each type between an ordered pair
//! of nodes (loops allowed).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{TypeGraph, TypedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    /// Largest host size (in nodes) enumerated exhaustively.
    pub bound: usize,
    /// Random hosts with `bound + 1` or `bound + 2` nodes.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { bound: 4, samples: 200, seed: 1 }
    }
}

/// Probability of each possible edge in a random host.
pub const EDGE_PROBABILITY: f64 = 0.25;

/// Compact graph: node types by index, sorted `(edge type, src, tgt)` triples.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Compact {
    ty: Vec<u8>,
    edges: Vec<(u8, u8, u8)>,
}

impl Compact {
    fn canonical(&self) -> Compact {
        let n = self.ty.len();
        let n_et = self.edges.iter().map(|e| e.0 as usize + 1).max().unwrap_or(0);
        let mut inv: Vec<Vec<u16>> = (0..n).map(|i| {
            let mut v = vec![0u16; 1 + 3 * n_et];
            v[0] = self.ty[i] as u16;
            v
        }).collect();
        for &(et, s, t) in &self.edges {
            let et = et as usize;
            inv[s as usize][1 + et] += 1;
            inv[t as usize][1 + n_et + et] += 1;
            if s == t {
                inv[s as usize][1 + 2 * n_et + et] += 1;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| inv[a].cmp(&inv[b]));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in &order {
            match groups.last_mut() {
                Some(g) if inv[g[0]] == inv[i] => g.push(i),
                _ => groups.push(vec![i]),
            }
        }
        let ty: Vec<u8> = order.iter().map(|&i| self.ty[i]).collect();
        let mut best: Option<Vec<(u8, u8, u8)>> = None;
        let mut pos = vec![0u8; n];
        let mut perm_groups: Vec<Vec<usize>> = groups.clone();
        permute_groups(&mut perm_groups, 0, 0, &mut pos, &mut |pos| {
            let mut es: Vec<(u8, u8, u8)> =
                self.edges.iter().map(|&(et, s, t)| (et, pos[s as usize], pos[t as usize])).collect();
            es.sort_unstable();
            if best.as_ref().is_none_or(|b| es < *b) {
                best = Some(es);
            }
        });
        Compact { ty, edges: best.unwrap_or_default() }
    }
}

/// Assigns positions group by group, trying every permutation inside each group.
fn permute_groups(groups: &mut [Vec<usize>], gi: usize, offset: usize, pos: &mut [u8], f: &mut impl FnMut(&[u8])) {
    if gi == groups.len() {
        f(pos);
        return;
    }
    let len = groups[gi].len();
    heap_permutations(groups, gi, len, offset, pos, f);
}

fn heap_permutations(groups: &mut [Vec<usize>], gi: usize, k: usize, offset: usize, pos: &mut [u8], f: &mut impl FnMut(&[u8])) {
    if k <= 1 {
        for (j, &node) in groups[gi].iter().enumerate() {
            pos[node] = (offset + j) as u8;
        }
        let next = offset + groups[gi].len();
        permute_groups(groups, gi + 1, next, pos, f);
        return;
    }
    for i in 0..k {
        heap_permutations(groups, gi, k - 1, offset, pos, f);
        if k % 2 == 0 {
            groups[gi].swap(i, k - 1);
        } else {
            groups[gi].swap(0, k - 1);
        }
    }
}

/// Lazily built, memoised universe of hosts over one type graph.
pub struct HostUniverse {
    types: Arc<TypeGraph>,
    /// `(edge type, src type, tgt type)` by index.
    edge_types: Vec<(u8, u8, u8)>,
    by_counts: Mutex<HashMap<Vec<usize>, Arc<Vec<Compact>>>>,
}

impl HostUniverse {
    pub fn new(types: Arc<TypeGraph>) -> HostUniverse {
        let edge_types = types
            .edge_types()
            .iter()
            .enumerate()
            .map(|(i, et)| {
                (
                    i as u8,
                    types.node_type_index(&et.src).expect("validated type graph") as u8,
                    types.node_type_index(&et.tgt).expect("validated type graph") as u8,
                )
            })
            .collect();
        HostUniverse { types, edge_types, by_counts: Mutex::new(HashMap::new()) }
    }

    pub fn type_graph(&self) -> &Arc<TypeGraph> {
        &self.types
    }

    fn graphs_for(&self, counts: &[usize]) -> Arc<Vec<Compact>> {
        if let Some(g) = self.by_counts.lock().expect("universe cache").get(counts) {
            return g.clone();
        }
        let result = match counts.iter().rposition(|&c| c > 0) {
            None => Arc::new(vec![Compact { ty: Vec::new(), edges: Vec::new() }]),
            Some(t) => {
                let mut prev_counts = counts.to_vec();
                prev_counts[t] -= 1;
                let prev = self.graphs_for(&prev_counts);
                let mut all: Vec<Compact> = prev.par_iter().flat_map_iter(|g| self.extend(g, t as u8)).collect();
                all.par_sort_unstable();
                all.dedup();
                Arc::new(all)
            }
        };
        self.by_counts.lock().expect("universe cache").insert(counts.to_vec(), result.clone());
        result
    }

    fn extend(&self, g: &Compact, t: u8) -> Vec<Compact> {
        let n = g.ty.len() as u8;
        let mut cands = Vec::new();
        for &(et, s, tg) in &self.edge_types {
            if s == t {
                for j in 0..n {
                    if g.ty[j as usize] == tg {
                        cands.push((et, n, j));
                    }
                }
            }
            if tg == t {
                for j in 0..n {
                    if g.ty[j as usize] == s {
                        cands.push((et, j, n));
                    }
                }
            }
            if s == t && tg == t {
                cands.push((et, n, n));
            }
        }
        let mut ty = g.ty.clone();
        ty.push(t);
        let mut out = Vec::with_capacity(1 << cands.len());
        for mask in 0u64..(1u64 << cands.len()) {
            let mut edges = g.edges.clone();
            edges.extend(cands.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e));
            out.push(Compact { ty: ty.clone(), edges }.canonical());
        }
        out
    }

    fn count_vectors(&self, bound: usize, min: &[usize]) -> Vec<Vec<usize>> {
        let k = self.types.node_types().len();
        let mut out = Vec::new();
        let mut cur = vec![0; k];
        fn rec(i: usize, left: usize, min: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            let lo = min.get(i).copied().unwrap_or(0);
            for c in lo..=left {
                cur[i] = c;
                rec(i + 1, left - c, min, cur, out);
            }
        }
        if min.iter().sum::<usize>() <= bound {
            rec(0, bound, min, &mut cur, &mut out);
        }
        out.sort_by_key(|v| (v.iter().sum::<usize>(), v.clone()));
        out
    }

    /// Every simple host with at most `bound` nodes and at least `min[i]`
    /// nodes of type `i`, one per isomorphism class, in a fixed order.
    pub fn hosts(&self, bound: usize, min: &[usize]) -> Vec<Arc<TypedGraph>> {
        self.count_vectors(bound, min)
            .into_iter()
            .flat_map(|v| self.graphs_for(&v).iter().map(|g| Arc::new(self.materialize(g))).collect::<Vec<_>>())
            .collect()
    }

    /// Number of isomorphism classes of simple hosts with at most `bound` nodes.
    pub fn count(&self, bound: usize) -> usize {
        self.count_vectors(bound, &[]).iter().map(|v| self.graphs_for(v).len()).sum()
    }

    /// Seeded random simple hosts with `bound + 1` or `bound + 2` nodes.
    pub fn random_hosts(&self, bound: usize, samples: usize, seed: u64) -> Vec<Arc<TypedGraph>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.types.node_types().len();
        (0..samples)
            .map(|_| {
                let n = rng.random_range(bound + 1..=bound + 2);
                let ty: Vec<u8> = (0..n).map(|_| rng.random_range(0..k) as u8).collect();
                let mut edges = Vec::new();
                for &(et, s, t) in &self.edge_types {
                    for i in 0..n {
                        for j in 0..n {
                            if ty[i] == s && ty[j] == t && rng.random_bool(EDGE_PROBABILITY) {
                                edges.push((et, i as u8, j as u8));
                            }
                        }
                    }
                }
                edges.sort_unstable();
                Arc::new(self.materialize(&Compact { ty, edges }))
            })
            .collect()
    }

    /// Exhaustive hosts followed by the random samples.
    pub fn hosts_with_samples(&self, config: SearchConfig, min: &[usize]) -> Vec<Arc<TypedGraph>> {
        let mut hosts = self.hosts(config.bound, min);
        hosts.extend(self.random_hosts(config.bound, config.samples, config.seed));
        hosts
    }

    fn materialize(&self, g: &Compact) -> TypedGraph {
        let names = self.types.node_types();
        let node_id = |i: usize| format!("{}{}", names[g.ty[i] as usize], i);
        let mut out = TypedGraph::new(self.types.clone());
        for i in 0..g.ty.len() {
            out.add_node(node_id(i), names[g.ty[i] as usize].clone());
        }
        for (k, &(et, s, t)) in g.edges.iter().enumerate() {
            out.add_edge(
                format!("e{k}"),
                self.types.edge_types()[et as usize].name.clone(),
                node_id(s as usize),
                node_id(t as usize),
            );
        }
        out
    }
}
