//! Majority votes with free float, and the conditional influences they induce.
//!
//! A non-decider `p` adopts `+1` when `D·X + (1−D)·Σ f_vp σ_v ≥ 0` with
//! `X ~ N(0, σ_N²)`. The joint law of all vertices is the product of these
//! single-vote probabilities; conditional influences are obtained by summing
//! that product over every configuration consistent with the condition and
//! normalizing. On graphs with directed cycles the same normalized sum is
//! used, with a nontrivial partition function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::enumerate::{self, check_cap, DEFAULT_CAP};
use crate::graph::{HierarchyGraph, VertexId, VertexSet};
use crate::scalar::Scalar;
use crate::spin::{Spin, SpinAssignment};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum VoteMode {
    /// Exact Gaussian tail: `Φ(C/σ_N)`.
    ExactGaussian,
    /// `1/2 + 1/2·tanh(aC)` with `a = √(2/(π σ_N²))`.
    #[default]
    TanhApprox,
}

impl VoteMode {
    pub fn as_str(self) -> &'static str {
        match self {
            VoteMode::ExactGaussian => "gaussian",
            VoteMode::TanhApprox => "tanh",
        }
    }
}

impl std::str::FromStr for VoteMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(VoteMode::ExactGaussian),
            "tanh" => Ok(VoteMode::TanhApprox),
            _ => Err(Error::Parse(format!("unknown vote mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VoteParams<T> {
    pub free_float: T,
    pub noise_sigma: T,
    pub mode: VoteMode,
    /// Maximum number of enumerated free spins.
    pub cap: usize,
}

impl<T: Scalar> VoteParams<T> {
    pub fn new(free_float: T, noise_sigma: T) -> Result<Self> {
        if !(free_float > T::zero() && free_float < T::one()) {
            return Err(Error::InvalidParameter(format!("free float {free_float} outside (0, 1)")));
        }
        if !(noise_sigma > T::zero() && noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise sigma {noise_sigma} is not positive")));
        }
        Ok(Self {
            free_float,
            noise_sigma,
            mode: VoteMode::default(),
            cap: DEFAULT_CAP,
        })
    }

    pub fn from_graph(g: &HierarchyGraph<T>) -> Result<Self> {
        Self::new(g.free_float(), g.noise_sigma())
    }

    pub fn with_mode(self, mode: VoteMode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_cap(self, cap: usize) -> Self {
        Self { cap, ..self }
    }

    /// `a = √(2/(π σ_N²))`, which is also the Ising inverse temperature.
    pub fn inverse_temperature(&self) -> T {
        (T::lit(2.0) / (T::PI() * self.noise_sigma * self.noise_sigma)).sqrt()
    }

    /// `(1−D)/D`, the factor turning edge weights into couplings.
    pub fn coupling_scale(&self) -> T {
        (T::one() - self.free_float) / self.free_float
    }

    /// Probability of a `+1` outcome given the command field `C`.
    /// Strictly increasing in `C`, and exactly 1/2 at `C = 0`.
    pub fn prob_up(&self, field: T) -> T {
        let half = T::lit(0.5);
        match self.mode {
            VoteMode::TanhApprox => half + half * (self.inverse_temperature() * field).tanh(),
            VoteMode::ExactGaussian => half * (-field / (self.noise_sigma * T::SQRT_2())).erfc(),
        }
    }

    /// `C = (1−D)/D · Σ f_v σ_v`.
    pub fn field(&self, votes: impl IntoIterator<Item = (T, Spin)>) -> T {
        let sum = votes
            .into_iter()
            .fold(T::zero(), |acc, (w, s)| acc + if s.is_down() { -w } else { w });
        self.coupling_scale() * sum
    }
}

/// Probability that a vertex with the given `(weight, command)` predecessors
/// votes `+1`.
pub fn single_vote_prob<T: Scalar>(votes: &[(T, Spin)], params: &VoteParams<T>) -> Result<T> {
    if votes.is_empty() {
        return Err(Error::EmptyVote);
    }
    Ok(params.prob_up(params.field(votes.iter().copied())))
}

/// Single-vote probability at vertex `v` of `g`, reading predecessor
/// commands from `commands`.
pub fn vertex_vote_prob<T: Scalar>(
    g: &HierarchyGraph<T>,
    v: VertexId,
    commands: &SpinAssignment,
    params: &VoteParams<T>,
) -> Result<T> {
    let pre = g.pre(v);
    if pre.is_empty() {
        return Err(Error::NoPredecessors(g.id(v).to_string()));
    }
    let votes = pre
        .iter()
        .map(|&(p, w)| {
            commands
                .get(p)
                .map(|s| (w, s))
                .ok_or_else(|| Error::AssignmentMismatch(format!("no command from `{}`", g.id(p))))
        })
        .collect::<Result<Vec<_>>>()?;
    single_vote_prob(&votes, params)
}

/// Largest in-degree for which per-configuration probabilities are tabulated.
const TABLE_DEGREE: usize = 12;

/// One single-vote factor of the product measure.
struct Factor<T> {
    vertex: usize,
    preds: Vec<(usize, T)>,
    /// `[P(+1), P(−1)]` per predecessor configuration (bit k set: pred k is −1).
    table: Option<Vec<[T; 2]>>,
}

impl<T: Scalar> Factor<T> {
    fn new(vertex: usize, preds: Vec<(usize, T)>, params: &VoteParams<T>) -> Self {
        let table = (preds.len() <= TABLE_DEGREE).then(|| {
            (0..1usize << preds.len())
                .map(|idx| {
                    let c = params.field(preds.iter().enumerate().map(|(k, &(_, w))| (w, Spin::from_bit(idx >> k & 1 == 1))));
                    [params.prob_up(c), params.prob_up(-c)]
                })
                .collect()
        });
        Self { vertex, preds, table }
    }

    fn prob(&self, spins: &[Spin], params: &VoteParams<T>) -> T {
        let own = spins[self.vertex];
        match &self.table {
            Some(table) => {
                let idx = self
                    .preds
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (k, &(p, _))| acc | (usize::from(spins[p].is_down()) << k));
                table[idx][usize::from(own.is_down())]
            }
            None => {
                let c = params.field(self.preds.iter().map(|&(p, w)| (w, spins[p])));
                params.prob_up(if own.is_down() { -c } else { c })
            }
        }
    }
}

/// The product of single-vote factors over the non-deciders in `scope`.
struct ProductMeasure<T> {
    factors: Vec<Factor<T>>,
    params: VoteParams<T>,
}

impl<T: Scalar> ProductMeasure<T> {
    fn new(g: &HierarchyGraph<T>, scope: &VertexSet, params: VoteParams<T>) -> Self {
        let factors = scope
            .iter()
            .filter(|&v| !g.pre(v).is_empty())
            .map(|v| {
                let preds = g.pre(v).iter().map(|&(p, w)| (p.0, w)).collect();
                Factor::new(v.0, preds, &params)
            })
            .collect();
        Self { factors, params }
    }

    fn weight(&self, spins: &[Spin]) -> T {
        self.factors
            .iter()
            .fold(T::one(), |acc, f| acc * f.prob(spins, &self.params))
    }
}

/// `P_{B|A}(· | σ_A)` as a table over configurations of `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalDistribution<T> {
    pub condition: SpinAssignment,
    /// Vertices of `B`, in the order used by the table index.
    pub outcome: Vec<VertexId>,
    /// Probability per outcome configuration; bit k of the index set means
    /// `outcome[k]` is −1.
    pub probs: Vec<T>,
    /// The condition fixes vertices that are not deciders.
    pub mid_graph: bool,
}

impl<T: Scalar> ConditionalDistribution<T> {
    pub fn prob(&self, outcome: &SpinAssignment) -> Option<T> {
        if outcome.len() != self.outcome.len() {
            return None;
        }
        let mut idx = 0usize;
        for (k, &v) in self.outcome.iter().enumerate() {
            idx |= usize::from(outcome.get(v)?.is_down()) << k;
        }
        Some(self.probs[idx])
    }

    /// Marginal probability that `v ∈ B` comes out `+1`.
    pub fn marginal_up(&self, v: VertexId) -> Option<T> {
        let k = self.outcome.iter().position(|&w| w == v)?;
        Some(
            self.probs
                .iter()
                .enumerate()
                .filter(|(idx, _)| idx >> k & 1 == 0)
                .map(|(_, &p)| p)
                .sum(),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpinAssignment, T)> + '_ {
        self.probs.iter().enumerate().map(|(idx, &p)| {
            let assignment = self
                .outcome
                .iter()
                .enumerate()
                .map(|(k, &v)| (v, Spin::from_bit(idx >> k & 1 == 1)))
                .collect();
            (assignment, p)
        })
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }
}

fn check_condition<T: Scalar>(g: &HierarchyGraph<T>, a: &VertexSet, b: &VertexSet, sigma_a: &SpinAssignment) -> Result<()> {
    let n = g.vertex_count();
    if let Some(v) = a.union(b).iter().find(|v| v.0 >= n) {
        return Err(Error::UnknownVertex(format!("#{}", v.0)));
    }
    if let Some(v) = a.intersection(b).iter().next() {
        return Err(Error::OverlappingSets(g.id(v).to_string()));
    }
    sigma_a.check_domain(a)
}

/// Unnormalized sums of the product measure over configurations with
/// `τ|_A = σ_A`, bucketed by `τ|_B`. `scope` lists the vertices summed over.
fn bucket_sums<T: Scalar>(
    g: &HierarchyGraph<T>,
    scope: &VertexSet,
    b: &[VertexId],
    sigma_a: &SpinAssignment,
    params: &VoteParams<T>,
) -> Result<Vec<T>> {
    let free: Vec<usize> = scope.iter().filter(|&v| sigma_a.get(v).is_none()).map(|v| v.0).collect();
    check_cap(free.len(), params.cap)?;
    if b.len() >= usize::BITS as usize {
        return Err(Error::InvalidParameter("outcome set too large".into()));
    }
    let measure = ProductMeasure::new(g, scope, *params);
    let mut base = vec![Spin::Up; g.vertex_count()];
    for (v, s) in sigma_a.iter() {
        base[v.0] = s;
    }
    let b: Vec<usize> = b.iter().map(|v| v.0).collect();
    Ok(enumerate::sum_configurations(
        free.len(),
        1 << b.len(),
        || base.clone(),
        |spins, mask| {
            for (k, &v) in free.iter().enumerate() {
                spins[v] = Spin::from_bit(mask >> k & 1 == 1);
            }
            let bucket = b
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &v)| acc | (usize::from(spins[v].is_down()) << k));
            (bucket, measure.weight(spins))
        },
    ))
}

/// Exact conditional influence `P_{B|A}(· | σ_A)` by enumeration.
///
/// On acyclic graphs only the ancestral closure of `A ∪ B` is enumerated;
/// every other vertex sums out to a constant factor.
pub fn conditional_influence<T: Scalar>(
    g: &HierarchyGraph<T>,
    a: &VertexSet,
    b: &VertexSet,
    sigma_a: &SpinAssignment,
    params: &VoteParams<T>,
) -> Result<ConditionalDistribution<T>> {
    check_condition(g, a, b, sigma_a)?;
    let relevant = a.union(b);
    let scope = if g.has_directed_cycle() {
        (0..g.vertex_count()).map(VertexId).collect()
    } else {
        g.ancestral_closure(&relevant)
    };
    let outcome = b.to_vec();
    let sums = bucket_sums(g, &scope, &outcome, sigma_a, params)?;
    let z: T = sums.iter().copied().sum();
    if !(z > T::zero()) {
        return Err(Error::InvalidParameter("condition has zero probability".into()));
    }
    Ok(ConditionalDistribution {
        condition: sigma_a.clone(),
        outcome,
        probs: sums.into_iter().map(|w| w / z).collect(),
        mid_graph: !a.is_subset(&g.deciders()),
    })
}

/// `Z_{·|A}(σ_A)`: the product measure summed over every configuration of
/// the whole graph with `τ|_A = σ_A`. Deciders outside `A` contribute a
/// factor 2 each, as they carry no single-vote factor.
pub fn partition_function<T: Scalar>(
    g: &HierarchyGraph<T>,
    a: &VertexSet,
    sigma_a: &SpinAssignment,
    params: &VoteParams<T>,
) -> Result<T> {
    check_condition(g, a, &VertexSet::new(), sigma_a)?;
    let all: VertexSet = (0..g.vertex_count()).map(VertexId).collect();
    Ok(bucket_sums(g, &all, &[], sigma_a, params)?[0])
}

/// Unnormalized product-measure weight of every configuration of the whole
/// graph, indexed by vertex bitmask (bit set: vertex is −1).
pub fn configuration_weights<T: Scalar>(g: &HierarchyGraph<T>, params: &VoteParams<T>) -> Result<Vec<T>> {
    let n = g.vertex_count();
    check_cap(n, params.cap)?;
    let all: VertexSet = (0..n).map(VertexId).collect();
    let measure = ProductMeasure::new(g, &all, *params);
    let mut spins = vec![Spin::Up; n];
    Ok((0..1u64 << n)
        .map(|mask| {
            for (v, s) in spins.iter_mut().enumerate() {
                *s = Spin::from_bit(mask >> v & 1 == 1);
            }
            measure.weight(&spins)
        })
        .collect())
}

/// Topological-order forward sampler of the vote process on an acyclic graph.
pub struct ForwardSampler<'g, T> {
    graph: &'g HierarchyGraph<T>,
    order: Vec<VertexId>,
    deciders: VertexSet,
    params: VoteParams<T>,
    rng: ChaCha8Rng,
}

impl<'g, T: Scalar> ForwardSampler<'g, T> {
    pub fn new(graph: &'g HierarchyGraph<T>, params: VoteParams<T>, seed: u64) -> Result<Self> {
        let order = graph
            .topological_order()
            .ok_or(Error::Cyclic("forward sampling undefined"))?;
        Ok(Self {
            graph,
            order,
            deciders: graph.deciders(),
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Draws one full assignment given the commands of every decider.
    pub fn draw(&mut self, commands: &SpinAssignment) -> Result<SpinAssignment> {
        commands.check_domain(&self.deciders)?;
        let mut spins = vec![Spin::Up; self.graph.vertex_count()];
        for &v in &self.order {
            let pre = self.graph.pre(v);
            spins[v.0] = if pre.is_empty() {
                commands.get(v).expect("domain checked")
            } else {
                let p = self.params.prob_up(self.params.field(pre.iter().map(|&(q, w)| (w, spins[q.0]))));
                Spin::from_bit(self.rng.random::<f64>() >= p.as_f64())
            };
        }
        Ok(spins.into_iter().enumerate().map(|(v, s)| (VertexId(v), s)).collect())
    }
}

/// One forward sample; identical inputs and seed give identical output.
pub fn sample_outcome<T: Scalar>(
    g: &HierarchyGraph<T>,
    commands: &SpinAssignment,
    params: &VoteParams<T>,
    seed: u64,
) -> Result<SpinAssignment> {
    ForwardSampler::new(g, *params, seed)?.draw(commands)
}
