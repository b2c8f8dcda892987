//! The hierarchy graph: weighted, directed, with role-tagged vertices.
//!
//! Deciders sit at the sources, executives play the base game, and every
//! other vertex is an agent that votes according to its predecessors. The
//! graph also carries the two noise parameters of the voting process: the
//! free-float fraction `D` and the width `σ_N` of the random vote.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::topology;
use crate::{Error, Result};

/// Dense index of a vertex inside one graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// An ordered set of vertices of one graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(BTreeSet<VertexId>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(v: VertexId) -> Self {
        Self(BTreeSet::from([v]))
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        self.0.insert(v)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.0.union(&other.0).copied().collect()
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        self.0.intersection(&other.0).copied().collect()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn to_vec(&self) -> Vec<VertexId> {
        self.iter().collect()
    }

    pub(crate) fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for v in self.iter() {
            m[v.0] = true;
        }
        m
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Decider,
    Agent,
    Executive,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Decider => "decider",
            Role::Agent => "agent",
            Role::Executive => "executive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub role: Role,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<T> {
    pub from: VertexId,
    pub to: VertexId,
    pub weight: T,
}

/// Immutable hierarchy graph. Construction only checks structure (ids);
/// the modelling invariants are reported by [`HierarchyGraph::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyGraph<T> {
    vertices: Vec<Vertex>,
    index: HashMap<String, VertexId>,
    edges: Vec<Edge<T>>,
    pre: Vec<Vec<(VertexId, T)>>,
    suc: Vec<Vec<VertexId>>,
    neighbours: Vec<Vec<usize>>,
    free_float: T,
    noise_sigma: T,
}

impl<T: Scalar> HierarchyGraph<T> {
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<(String, String, T)>,
        free_float: T,
        noise_sigma: T,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.id.clone(), VertexId(i)).is_some() {
                return Err(Error::DuplicateVertex(v.id.clone()));
            }
        }
        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| Error::UnknownVertex(id.to_string()));
        let mut resolved = Vec::with_capacity(edges.len());
        for (from, to, weight) in &edges {
            resolved.push(Edge {
                from: lookup(from)?,
                to: lookup(to)?,
                weight: *weight,
            });
        }

        let n = vertices.len();
        let mut pre = vec![Vec::new(); n];
        let mut suc = vec![Vec::new(); n];
        let mut neighbours = vec![BTreeSet::new(); n];
        for e in &resolved {
            pre[e.to.0].push((e.from, e.weight));
            suc[e.from.0].push(e.to);
            if e.from != e.to {
                neighbours[e.from.0].insert(e.to.0);
                neighbours[e.to.0].insert(e.from.0);
            }
        }
        Ok(Self {
            vertices,
            index,
            edges: resolved,
            pre,
            suc,
            neighbours: neighbours.into_iter().map(|s| s.into_iter().collect()).collect(),
            free_float,
            noise_sigma,
        })
    }

    pub fn builder() -> GraphBuilder<T> {
        GraphBuilder::new()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn free_float(&self) -> T {
        self.free_float
    }

    pub fn noise_sigma(&self) -> T {
        self.noise_sigma
    }

    /// Same structure with different voting noise.
    pub fn with_noise(&self, free_float: T, noise_sigma: T) -> Self {
        Self {
            free_float,
            noise_sigma,
            ..self.clone()
        }
    }

    pub fn id(&self, v: VertexId) -> &str {
        &self.vertices[v.0].id
    }

    pub fn role(&self, v: VertexId) -> Role {
        self.vertices[v.0].role
    }

    pub fn lookup(&self, id: &str) -> Result<VertexId> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn set(&self, ids: &[&str]) -> Result<VertexSet> {
        ids.iter().map(|id| self.lookup(id)).collect()
    }

    pub fn ids(&self, set: &VertexSet) -> Vec<&str> {
        set.iter().map(|v| self.id(v)).collect()
    }

    /// Direct predecessors of `v` with their edge weights.
    pub fn pre(&self, v: VertexId) -> &[(VertexId, T)] {
        &self.pre[v.0]
    }

    pub fn suc(&self, v: VertexId) -> &[VertexId] {
        &self.suc[v.0]
    }

    pub fn predecessors(&self, id: &str) -> Result<VertexSet> {
        let v = self.lookup(id)?;
        Ok(self.pre(v).iter().map(|&(p, _)| p).collect())
    }

    pub fn successors(&self, id: &str) -> Result<VertexSet> {
        let v = self.lookup(id)?;
        Ok(self.suc(v).iter().copied().collect())
    }

    /// The predecessor-free vertices.
    pub fn deciders(&self) -> VertexSet {
        (0..self.vertex_count())
            .map(VertexId)
            .filter(|&v| self.pre[v.0].is_empty())
            .collect()
    }

    pub fn tagged(&self, role: Role) -> VertexSet {
        (0..self.vertex_count())
            .map(VertexId)
            .filter(|&v| self.role(v) == role)
            .collect()
    }

    pub fn executives(&self) -> VertexSet {
        self.tagged(Role::Executive)
    }

    pub fn has_directed_cycle(&self) -> bool {
        self.topological_order().is_none()
    }

    /// Kahn order over all vertices; `None` when a directed cycle exists.
    pub fn topological_order(&self) -> Option<Vec<VertexId>> {
        let n = self.vertex_count();
        let mut indegree: Vec<usize> = self.pre.iter().map(Vec::len).collect();
        let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(VertexId(v));
            for w in self.suc[v].iter().rev() {
                indegree[w.0] -= 1;
                if indegree[w.0] == 0 {
                    ready.push(w.0);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// `set` together with every vertex that has a directed path into it.
    pub fn ancestral_closure(&self, set: &VertexSet) -> VertexSet {
        let mut seen = set.mask(self.vertex_count());
        let mut stack: Vec<VertexId> = set.to_vec();
        while let Some(v) = stack.pop() {
            for &(p, _) in self.pre(v) {
                if !seen[p.0] {
                    seen[p.0] = true;
                    stack.push(p);
                }
            }
        }
        (0..seen.len()).filter(|&i| seen[i]).map(VertexId).collect()
    }

    /// Vertices strictly between `a` and `b` along undirected paths;
    /// neither `a` nor `b` is included.
    pub fn nodes_between(&self, a: &VertexSet, b: &VertexSet) -> Result<VertexSet> {
        if let Some(v) = a.intersection(b).iter().next() {
            return Err(Error::OverlappingSets(self.id(v).to_string()));
        }
        let n = self.vertex_count();
        Ok(topology::between(&self.neighbours, &a.mask(n), &b.mask(n))
            .into_iter()
            .map(VertexId)
            .collect())
    }

    /// For every executive `i`, the subgraph induced on the deciders, `i`,
    /// and the nodes between them has no undirected cycle.
    pub fn is_locally_tree(&self, deciders: &VertexSet, executives: &VertexSet) -> bool {
        let n = self.vertex_count();
        executives.iter().all(|i| {
            let target = VertexSet::single(i);
            let Ok(inner) = self.nodes_between(deciders, &target) else {
                return false;
            };
            let members = inner.union(deciders).union(&target).mask(n);
            let edges = self
                .edges
                .iter()
                .filter(|e| members[e.from.0] && members[e.to.0])
                .count();
            let size = members.iter().filter(|&&m| m).count();
            edges + topology::components(&self.neighbours, &members) == size
        })
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.vertex_count();
        if n == 0 {
            report.violations.push(Violation::Empty);
            return report;
        }

        let d = self.free_float.as_f64();
        if !(d > 0.0 && d < 1.0) {
            report.violations.push(Violation::FreeFloat(d));
        }
        let sigma = self.noise_sigma.as_f64();
        if !(sigma > 0.0 && sigma.is_finite()) {
            report.violations.push(Violation::NoiseSigma(sigma));
        }

        for e in &self.edges {
            let w = e.weight.as_f64();
            if !(w > 0.0 && w <= 1.0) {
                report.violations.push(Violation::Weight {
                    from: self.id(e.from).to_string(),
                    to: self.id(e.to).to_string(),
                    weight: w,
                });
            }
        }

        let tol = T::tolerance(WEIGHT_TOLERANCE);
        for v in (0..n).map(VertexId) {
            let preds = self.pre(v);
            if !preds.is_empty() {
                let sum: T = preds.iter().map(|&(_, w)| w).sum();
                if (sum - T::one()).abs() > tol {
                    report.violations.push(Violation::WeightSum {
                        vertex: self.id(v).to_string(),
                        sum: sum.as_f64(),
                    });
                }
            }
            match (self.role(v), preds.is_empty()) {
                (Role::Decider, false) => report.violations.push(Violation::DeciderWithPredecessors(self.id(v).to_string())),
                (role, true) if role != Role::Decider => report.violations.push(Violation::UntaggedSource {
                    vertex: self.id(v).to_string(),
                    role,
                }),
                _ => {}
            }
            if self.role(v) == Role::Executive && !self.suc(v).is_empty() {
                report.warnings.push(Warning::ExecutiveWithSuccessors(self.id(v).to_string()));
            }
        }

        let all = vec![true; n];
        let parts = topology::components(&self.neighbours, &all);
        if parts > 1 {
            report.violations.push(Violation::Disconnected(parts));
        }
        if self.executives().is_empty() {
            report.warnings.push(Warning::NoExecutives);
        }
        report
    }

    /// Like `validate`, but as an error when anything is violated.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(report))
        }
    }
}

/// Absolute tolerance on predecessor weight sums.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Empty,
    FreeFloat(f64),
    NoiseSigma(f64),
    Weight { from: String, to: String, weight: f64 },
    WeightSum { vertex: String, sum: f64 },
    DeciderWithPredecessors(String),
    UntaggedSource { vertex: String, role: Role },
    Disconnected(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph has no vertices"),
            Violation::FreeFloat(d) => write!(f, "free float {d} is outside (0, 1)"),
            Violation::NoiseSigma(s) => write!(f, "noise sigma {s} is not positive"),
            Violation::Weight { from, to, weight } => {
                write!(f, "weight of edge {from} -> {to} is {weight}, outside (0, 1]")
            }
            Violation::WeightSum { vertex, sum } => {
                write!(f, "predecessor weights of vertex {vertex} sum to {sum}")
            }
            Violation::DeciderWithPredecessors(v) => write!(f, "vertex {v} is tagged decider but has predecessors"),
            Violation::UntaggedSource { vertex, role } => {
                write!(f, "vertex {vertex} has no predecessors but is tagged {role}")
            }
            Violation::Disconnected(parts) => write!(f, "graph is not connected ({parts} components)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Warning {
    ExecutiveWithSuccessors(String),
    NoExecutives,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ExecutiveWithSuccessors(v) => write!(f, "executive {v} has successors"),
            Warning::NoExecutives => write!(f, "no vertex is tagged executive"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        if msgs.is_empty() {
            f.write_str("valid")
        } else {
            f.write_str(&msgs.join("; "))
        }
    }
}

/// Incremental construction by vertex id.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder<T> {
    vertices: Vec<Vertex>,
    edges: Vec<(String, String, T)>,
}

impl<T: Scalar> GraphBuilder<T> {
    pub fn new() -> Self {
        Self {
            vertices: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn vertex(mut self, id: impl Into<String>, role: Role) -> Self {
        self.vertices.push(Vertex { id: id.into(), role });
        self
    }

    pub fn edge(mut self, from: impl Into<String>, to: impl Into<String>, weight: T) -> Self {
        self.edges.push((from.into(), to.into(), weight));
        self
    }

    pub fn build(self, free_float: T, noise_sigma: T) -> Result<HierarchyGraph<T>> {
        HierarchyGraph::new(self.vertices, self.edges, free_float, noise_sigma)
    }
}

/// Noise width whose inverse temperature `√(2/(π σ²))` equals `beta`.
pub fn sigma_for_beta<T: Scalar>(beta: T) -> T {
    (T::lit(2.0) / T::PI()).sqrt() / beta
}

/// Lengths of the four decider-to-executive chains of the two-decider,
/// two-executive chain hierarchy: `a` is λ1⇝1, `b` is λ1⇝2, `c` is λ2⇝1
/// and `d` is λ2⇝2. Interior edges carry weight 1, the last edge into each
/// executive weight 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainLengths {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl ChainLengths {
    pub fn uniform(k: usize) -> Self {
        Self { a: k, b: k, c: k, d: k }
    }

    /// Mirror-symmetric lengths: x̄ = x and ȳ = y.
    pub fn symmetric(a: usize, c: usize) -> Self {
        Self { a, b: c, c, d: a }
    }
}

/// Builds the crossed-chain hierarchy with deciders `λ1`, `λ2`, executives
/// `1`, `2` and agents named after their chain (`a1`, `a2`, ...).
pub fn crossed_chains<T: Scalar>(lengths: ChainLengths, free_float: T, noise_sigma: T) -> Result<HierarchyGraph<T>> {
    if [lengths.a, lengths.b, lengths.c, lengths.d].contains(&0) {
        return Err(Error::InvalidParameter("chain lengths must be at least 1".into()));
    }
    let mut b = GraphBuilder::new()
        .vertex("λ1", Role::Decider)
        .vertex("λ2", Role::Decider)
        .vertex("1", Role::Executive)
        .vertex("2", Role::Executive);
    let half = T::lit(0.5);
    for (name, len, from, to) in [
        ("a", lengths.a, "λ1", "1"),
        ("b", lengths.b, "λ1", "2"),
        ("c", lengths.c, "λ2", "1"),
        ("d", lengths.d, "λ2", "2"),
    ] {
        let mut prev = from.to_string();
        for k in 1..len {
            let id = format!("{name}{k}");
            b = b.vertex(id.clone(), Role::Agent).edge(prev, id.clone(), T::one());
            prev = id;
        }
        b = b.edge(prev, to, half);
    }
    b.build(free_float, noise_sigma)
}

/// Two deciders joined through a single executive `1`: λ1 ⇝ 1 ⇜ λ2 with
/// `a` and `c` edges. This is the part of [`crossed_chains`] that decides
/// executive 1.
pub fn two_chain_path<T: Scalar>(a: usize, c: usize, free_float: T, noise_sigma: T) -> Result<HierarchyGraph<T>> {
    if a == 0 || c == 0 {
        return Err(Error::InvalidParameter("chain lengths must be at least 1".into()));
    }
    let mut b = GraphBuilder::new()
        .vertex("λ1", Role::Decider)
        .vertex("λ2", Role::Decider)
        .vertex("1", Role::Executive);
    for (name, len, from) in [("a", a, "λ1"), ("c", c, "λ2")] {
        let mut prev = from.to_string();
        for k in 1..len {
            let id = format!("{name}{k}");
            b = b.vertex(id.clone(), Role::Agent).edge(prev, id.clone(), T::one());
            prev = id;
        }
        b = b.edge(prev, "1", T::lit(0.5));
    }
    b.build(free_float, noise_sigma)
}

/// A directed path `λ → v1 → … → 1` of `len` unit-weight edges.
pub fn chain<T: Scalar>(len: usize, free_float: T, noise_sigma: T) -> Result<HierarchyGraph<T>> {
    if len == 0 {
        return Err(Error::InvalidParameter("chain length must be at least 1".into()));
    }
    let mut b = GraphBuilder::new().vertex("λ", Role::Decider);
    let mut prev = "λ".to_string();
    for k in 1..len {
        let id = format!("v{k}");
        b = b.vertex(id.clone(), Role::Agent).edge(prev, id.clone(), T::one());
        prev = id;
    }
    b.vertex("1", Role::Executive).edge(prev, "1", T::one()).build(free_float, noise_sigma)
}
