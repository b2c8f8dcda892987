//! Random instance generators and brute-force oracles shared by the
//! integration tests. The oracles deliberately avoid the library's
//! enumeration code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use hiergame::graph::{HierarchyGraph, Role, Vertex};
use hiergame::{Graph, Spin, VertexId, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds a graph from directed edges with raw positive weights, normalizing
/// each vertex's predecessor weights and tagging roles from the structure.
pub fn assemble(n: usize, raw: &[(usize, usize, f64)], free_float: f64, noise_sigma: f64) -> Graph {
    let mut indeg = vec![0.0; n];
    let mut outdeg = vec![0usize; n];
    for &(u, v, w) in raw {
        indeg[v] += w;
        outdeg[u] += 1;
    }
    let vertices = (0..n)
        .map(|k| {
            let role = if indeg[k] == 0.0 {
                Role::Decider
            } else if outdeg[k] == 0 {
                Role::Executive
            } else {
                Role::Agent
            };
            Vertex { id: format!("v{k}"), role }
        })
        .collect();
    let edges = raw
        .iter()
        .map(|&(u, v, w)| (format!("v{u}"), format!("v{v}"), w / indeg[v]))
        .collect();
    HierarchyGraph::new(vertices, edges, free_float, noise_sigma).unwrap()
}

/// Undirected random tree on `n` vertices as parent links.
fn random_tree_edges(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|k| (rng.random_range(0..k), k)).collect()
}

/// Random tree with every edge oriented at random. Weights are renormalized
/// but exact unit sums can still be off by rounding, hence the retry.
pub fn random_oriented_tree(rng: &mut impl Rng, n: usize, free_float: f64, noise_sigma: f64) -> Graph {
    loop {
        let raw: Vec<(usize, usize, f64)> = random_tree_edges(rng, n)
            .into_iter()
            .map(|(p, c)| {
                let w = rng.random_range(0.05..1.0);
                if rng.random_bool(0.5) {
                    (p, c, w)
                } else {
                    (c, p, w)
                }
            })
            .collect();
        let g = assemble(n, &raw, free_float, noise_sigma);
        if g.validate().is_valid() {
            return g;
        }
    }
}

/// Oriented tree in which every vertex with two or more predecessors has
/// only deciders as predecessors.
pub fn random_exact_tree(rng: &mut impl Rng, n: usize, free_float: f64, noise_sigma: f64) -> Graph {
    loop {
        let g = random_oriented_tree(rng, n, free_float, noise_sigma);
        if is_exact(&g) {
            return g;
        }
    }
}

pub fn is_exact(g: &Graph) -> bool {
    let deciders = g.deciders();
    (0..g.vertex_count())
        .map(VertexId)
        .all(|v| g.pre(v).len() < 2 || g.pre(v).iter().all(|&(p, _)| deciders.contains(p)))
}

/// Random connected DAG with `m` deciders among `n` vertices.
pub fn random_dag(rng: &mut impl Rng, n: usize, m: usize, free_float: f64, noise_sigma: f64) -> Graph {
    assert!(m >= 1 && m < n);
    loop {
        let mut raw = Vec::new();
        for v in m..n {
            let k = rng.random_range(1..=v.min(3));
            let mut preds = BTreeSet::new();
            // Keep every decider in use.
            if v - m < m {
                preds.insert(v - m);
            }
            while preds.len() < k {
                preds.insert(rng.random_range(0..v));
            }
            for p in preds {
                raw.push((p, v, rng.random_range(0.05..1.0)));
            }
        }
        let g = assemble(n, &raw, free_float, noise_sigma);
        if g.validate().is_valid() && g.deciders().len() == m {
            return g;
        }
    }
}

/// Deciders and executives as id lists in graph order.
pub fn roles(g: &Graph) -> (Vec<VertexId>, Vec<VertexId>) {
    (g.deciders().to_vec(), g.executives().to_vec())
}

pub fn spins_of(pattern: usize, k: usize) -> Vec<Spin> {
    (0..k).map(|j| if pattern >> j & 1 == 1 { Spin::Down } else { Spin::Up }).collect()
}

pub fn value(s: Spin) -> f64 {
    if s == Spin::Up {
        1.0
    } else {
        -1.0
    }
}

/// Single vote probability in tanh mode, written out directly.
pub fn tanh_vote(g: &Graph, votes: &[(f64, f64)]) -> f64 {
    let d = g.free_float();
    let a = (2.0 / (std::f64::consts::PI * g.noise_sigma().powi(2))).sqrt();
    let c: f64 = votes.iter().map(|(f, s)| f * s).sum::<f64>() * (1.0 - d) / d;
    0.5 + 0.5 * (a * c).tanh()
}

/// Exact joint law of all vertices of an acyclic graph given the decider
/// commands, grown one vertex at a time in topological order.
pub fn forward_joint(g: &Graph, commands: &[(VertexId, Spin)]) -> HashMap<Vec<i8>, f64> {
    let n = g.vertex_count();
    let order = g.topological_order().expect("acyclic");
    let mut dist: HashMap<Vec<i8>, f64> = HashMap::from([(vec![0i8; n], 1.0)]);
    for v in order {
        let fixed = commands.iter().find(|c| c.0 == v).map(|c| c.1);
        let mut next = HashMap::new();
        for (state, p) in dist {
            let options: Vec<(i8, f64)> = match fixed {
                Some(s) => vec![(s.value(), 1.0)],
                None if g.pre(v).is_empty() => vec![(1, 0.5), (-1, 0.5)],
                None => {
                    let votes: Vec<(f64, f64)> =
                        g.pre(v).iter().map(|&(u, f)| (f, state[u.index()] as f64)).collect();
                    let up = tanh_vote(g, &votes);
                    vec![(1, up), (-1, 1.0 - up)]
                }
            };
            for (s, q) in options {
                let mut st = state.clone();
                st[v.index()] = s;
                *next.entry(st).or_insert(0.0) += p * q;
            }
        }
        dist = next;
    }
    dist
}

/// `P(s_v = +1)` under [`forward_joint`].
pub fn forward_marginal(g: &Graph, commands: &[(VertexId, Spin)], v: VertexId) -> f64 {
    forward_joint(g, commands)
        .into_iter()
        .filter(|(s, _)| s[v.index()] == 1)
        .map(|(_, p)| p)
        .sum()
}

/// Ising conditional `P(s_v = +1 | σ_A)` by summing over every spin of the
/// whole graph with couplings `J = f(1−D)/D` and `β = a`.
pub fn brute_ising(g: &Graph, fixed: &[(VertexId, Spin)], v: VertexId) -> f64 {
    let n = g.vertex_count();
    let d = g.free_float();
    let beta = (2.0 / (std::f64::consts::PI * g.noise_sigma().powi(2))).sqrt();
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .map(|e| (e.from.index(), e.to.index(), e.weight * (1.0 - d) / d))
        .collect();
    let free: Vec<usize> = (0..n).filter(|k| !fixed.iter().any(|f| f.0.index() == *k)).collect();
    let mut s = vec![0.0; n];
    for &(u, sp) in fixed {
        s[u.index()] = value(sp);
    }
    let (mut up, mut total) = (0.0, 0.0);
    for mask in 0u64..1 << free.len() {
        for (k, &u) in free.iter().enumerate() {
            s[u] = if mask >> k & 1 == 1 { -1.0 } else { 1.0 };
        }
        let w = (beta * edges.iter().map(|&(a, b, j)| j * s[a] * s[b]).sum::<f64>()).exp();
        total += w;
        if s[v.index()] > 0.0 {
            up += w;
        }
    }
    up / total
}

fn undirected(g: &Graph) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); g.vertex_count()];
    for e in g.edges() {
        adj[e.from.index()].insert(e.to.index());
        adj[e.to.index()].insert(e.from.index());
    }
    adj
}

/// Whether some simple undirected path from `start` reaches `targets`
/// without visiting `blocked`, by exhaustive path enumeration.
fn some_simple_path(adj: &[BTreeSet<usize>], start: usize, targets: &VertexSet, blocked: &VertexSet) -> bool {
    fn go(adj: &[BTreeSet<usize>], v: usize, targets: &VertexSet, blocked: &VertexSet, seen: &mut Vec<bool>) -> bool {
        if targets.contains(VertexId(v)) {
            return true;
        }
        seen[v] = true;
        let found = adj[v]
            .iter()
            .any(|&w| !seen[w] && !blocked.contains(VertexId(w)) && go(adj, w, targets, blocked, seen));
        seen[v] = false;
        found
    }
    go(adj, start, targets, blocked, &mut vec![false; adj.len()])
}

/// Vertices outside `A ∪ B` that are neither cut off from `B` by `A` nor
/// from `A` by `B`.
pub fn brute_nodes_between(g: &Graph, a: &VertexSet, b: &VertexSet) -> VertexSet {
    let adj = undirected(g);
    (0..g.vertex_count())
        .filter(|&v| !a.contains(VertexId(v)) && !b.contains(VertexId(v)))
        .filter(|&v| some_simple_path(&adj, v, b, a) && some_simple_path(&adj, v, a, b))
        .map(VertexId)
        .collect()
}

/// Sum over all directed paths `from ⇝ to` of the weight products, by
/// explicit path enumeration.
pub fn brute_path_share(g: &Graph, from: VertexId, to: VertexId) -> f64 {
    if from == to {
        return 1.0;
    }
    g.edges()
        .iter()
        .filter(|e| e.from == from)
        .map(|e| e.weight * brute_path_share(g, e.to, to))
        .sum()
}
