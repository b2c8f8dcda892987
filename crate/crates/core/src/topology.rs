//! Undirected reachability used for the "nodes between" construction.
//!
//! Both the hierarchy graph and the Ising model reduce to an undirected
//! adjacency list over `0..n`; the helpers here operate on that form.

use std::collections::VecDeque;

/// Vertices reachable from `sources` without entering `blocked`.
/// Sources themselves are marked reachable.
pub(crate) fn reachable_avoiding(adj: &[Vec<usize>], sources: &[bool], blocked: &[bool]) -> Vec<bool> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if sources[v] && !blocked[v] {
            seen[v] = true;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] && !blocked[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Interior of the region between `a` and `b`: vertices outside both sets
/// that are neither beyond `a` (every path to `b` meets `a`) nor beyond `b`.
pub(crate) fn between(adj: &[Vec<usize>], a: &[bool], b: &[bool]) -> Vec<usize> {
    let from_b = reachable_avoiding(adj, b, a);
    let from_a = reachable_avoiding(adj, a, b);
    (0..adj.len())
        .filter(|&v| !a[v] && !b[v] && from_a[v] && from_b[v])
        .collect()
}

/// Number of connected components of the subgraph induced on `members`.
pub(crate) fn components(adj: &[Vec<usize>], members: &[bool]) -> usize {
    let blocked: Vec<bool> = members.iter().map(|m| !m).collect();
    let mut seen = vec![false; adj.len()];
    let mut count = 0;
    for v in 0..adj.len() {
        if members[v] && !seen[v] {
            count += 1;
            let mut src = vec![false; adj.len()];
            src[v] = true;
            for (w, r) in reachable_avoiding(adj, &src, &blocked).into_iter().enumerate() {
                seen[w] |= r;
            }
        }
    }
    count
}
