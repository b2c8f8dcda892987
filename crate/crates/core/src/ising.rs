//! Zero-field Ising model on the undirected hierarchy graph.
//!
//! A hierarchy maps onto couplings `J_vw = f_vw·(1−D)/D` at inverse
//! temperature `β = √(2/(π σ_N²))`. Conditional spin probabilities are
//! ratios of boundary-conditioned Boltzmann sums (k-point functions) over the
//! nodes between the conditioning set and the queried vertex.

use std::collections::{HashMap, HashSet};

use crate::enumerate::{self, check_cap, DEFAULT_CAP};
use crate::graph::{HierarchyGraph, VertexId, VertexSet};
use crate::scalar::Scalar;
use crate::spin::{Spin, SpinAssignment};
use crate::topology;
use crate::vote::VoteParams;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel<T> {
    ids: Vec<String>,
    index: HashMap<String, VertexId>,
    couplings: Vec<(VertexId, VertexId, T)>,
    neighbours: Vec<Vec<usize>>,
    beta: T,
    cap: usize,
}

impl<T: Scalar> IsingModel<T> {
    /// Couplings are given once per unordered pair.
    pub fn new(ids: Vec<String>, couplings: Vec<(VertexId, VertexId, T)>, beta: T) -> Result<Self> {
        let n = ids.len();
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), VertexId(i)).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        if !(beta >= T::zero() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("inverse temperature {beta} must be finite and non-negative")));
        }
        let mut pairs = HashSet::new();
        let mut neighbours = vec![Vec::new(); n];
        for &(v, w, j) in &couplings {
            if v.0 >= n || w.0 >= n {
                return Err(Error::UnknownVertex(format!("#{}", v.0.max(w.0))));
            }
            if v == w || !pairs.insert((v.min(w), v.max(w))) {
                return Err(Error::MultiEdge(ids[v.0].clone(), ids[w.0].clone()));
            }
            if !j.is_finite() {
                return Err(Error::InvalidParameter(format!("coupling {j} is not finite")));
            }
            neighbours[v.0].push(w.0);
            neighbours[w.0].push(v.0);
        }
        if n > 0 && topology::components(&neighbours, &vec![true; n]) > 1 {
            return Err(Error::InvalidParameter("coupling graph is not connected".into()));
        }
        Ok(Self {
            ids,
            index,
            couplings,
            neighbours,
            beta,
            cap: DEFAULT_CAP,
        })
    }

    pub fn with_cap(self, cap: usize) -> Self {
        Self { cap, ..self }
    }

    pub fn with_beta(self, beta: T) -> Self {
        Self { beta, ..self }
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn couplings(&self) -> &[(VertexId, VertexId, T)] {
        &self.couplings
    }

    pub fn coupling(&self, v: VertexId, w: VertexId) -> Option<T> {
        self.couplings
            .iter()
            .find(|&&(a, b, _)| (a, b) == (v, w) || (a, b) == (w, v))
            .map(|&(_, _, j)| j)
    }

    pub fn id(&self, v: VertexId) -> &str {
        &self.ids[v.0]
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

    /// `⟨σ' | N(A,B) | σ⟩`: `Σ exp(−βH)` over the free spins between `A` and
    /// `B`, with the boundary fixed. `H` keeps every coupling whose endpoints
    /// both lie in `N(A,B) ∪ A ∪ B`.
    pub fn k_point(&self, q: &KPointQuery) -> Result<T> {
        let a = q.a.domain();
        let b = q.b.domain();
        let free = self.nodes_between(&a, &b)?.to_vec();
        check_cap(free.len(), self.cap)?;

        let n = self.vertex_count();
        let mut inside = a.union(&b).mask(n);
        for v in &free {
            inside[v.0] = true;
        }
        let terms: Vec<(usize, usize, T)> = self
            .couplings
            .iter()
            .filter(|(v, w, _)| inside[v.0] && inside[w.0])
            .map(|&(v, w, j)| (v.0, w.0, self.beta * j))
            .collect();

        let mut base = vec![Spin::Up; n];
        for (v, s) in q.a.iter().chain(q.b.iter()) {
            base[v.0] = s;
        }
        let sum = enumerate::sum_configurations(
            free.len(),
            1,
            || base.clone(),
            |spins, mask| {
                for (k, v) in free.iter().enumerate() {
                    spins[v.0] = Spin::from_bit(mask >> k & 1 == 1);
                }
                let exponent = terms.iter().fold(T::zero(), |acc, &(v, w, bj)| {
                    if spins[v] == spins[w] {
                        acc + bj
                    } else {
                        acc - bj
                    }
                });
                (0, exponent.exp())
            },
        );
        Ok(sum[0])
    }

    /// `P(σ_v = +1 | σ_A)` as a ratio of two k-point functions.
    pub fn conditional(&self, v: VertexId, a: &VertexSet, sigma_a: &SpinAssignment) -> Result<T> {
        if a.contains(v) {
            return Err(Error::OverlappingSets(self.id(v).to_string()));
        }
        sigma_a.check_domain(a)?;
        let query = |s: Spin| KPointQuery {
            a: sigma_a.clone(),
            b: [(v, s)].into_iter().collect(),
        };
        let up = self.k_point(&query(Spin::Up))?;
        let down = self.k_point(&query(Spin::Down))?;
        Ok(up / (up + down))
    }

    /// Boltzmann weight `exp(−βH)` of every configuration, indexed by vertex
    /// bitmask (bit set: spin −1).
    pub fn boltzmann_weights(&self) -> Result<Vec<T>> {
        let n = self.vertex_count();
        check_cap(n, self.cap)?;
        Ok((0..1u64 << n)
            .map(|mask| {
                let spin = |v: VertexId| mask >> v.0 & 1;
                self.couplings
                    .iter()
                    .fold(T::zero(), |acc, &(v, w, j)| {
                        if spin(v) == spin(w) {
                            acc + self.beta * j
                        } else {
                            acc - self.beta * j
                        }
                    })
                    .exp()
            })
            .collect())
    }

    pub fn partition_function(&self) -> Result<T> {
        Ok(self.boltzmann_weights()?.into_iter().sum())
    }
}

/// Boundary spins of a k-point function: `σ` on `A` and `σ'` on `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct KPointQuery {
    pub a: SpinAssignment,
    pub b: SpinAssignment,
}

impl KPointQuery {
    pub fn new(a: SpinAssignment, b: SpinAssignment) -> Result<Self> {
        if let Some(v) = a.domain().intersection(&b.domain()).iter().next() {
            return Err(Error::OverlappingSets(format!("#{}", v.0)));
        }
        Ok(Self { a, b })
    }
}

/// The Ising model equivalent to `g`: one coupling `f·(1−D)/D` per edge.
pub fn coupling_from_hierarchy<T: Scalar>(g: &HierarchyGraph<T>) -> Result<IsingModel<T>> {
    let params = VoteParams::new(g.free_float(), g.noise_sigma())?;
    let scale = params.coupling_scale();
    let ids = g.vertices().iter().map(|v| v.id.clone()).collect();
    let couplings = g.edges().iter().map(|e| (e.from, e.to, e.weight * scale)).collect();
    IsingModel::new(ids, couplings, params.inverse_temperature())
}

pub fn k_point<T: Scalar>(model: &IsingModel<T>, q: &KPointQuery) -> Result<T> {
    model.k_point(q)
}

pub fn ising_conditional<T: Scalar>(model: &IsingModel<T>, v: VertexId, a: &VertexSet, sigma_a: &SpinAssignment) -> Result<T> {
    model.conditional(v, a, sigma_a)
}

/// Probability that two spins at distance `distance` on a uniform chain
/// agree (`agree = true`) or disagree: `(cosh^a ± sinh^a)/(2 cosh^a)` of βJ.
pub fn chain_conditional<T: Scalar>(distance: u32, beta_j: T, agree: bool) -> T {
    let half = T::lit(0.5);
    let t = beta_j.tanh().powi(distance as i32);
    if agree {
        half + half * t
    } else {
        half - half * t
    }
}

/// `μ(±, k)/(cosh^{k−1}(K) cosh(K/2))` for a chain of `k−1` couplings `K`
/// followed by one coupling `K/2`. Only ratios of μ values are used, so the
/// common scale is dropped to avoid overflow.
fn mu<T: Scalar>(sign: Spin, k: u32, beta_j: T) -> T {
    let s = beta_j.tanh().powi(k as i32 - 1) * (beta_j * T::lit(0.5)).tanh();
    T::one() + sign.sign::<T>() * s
}

/// Closed-form `(x, y)` for executive 1 of the crossed-chain hierarchy with
/// interior coupling `beta_j = βJ` (final edges carry half of it): `a` is
/// the dissenting decider's distance, `c` the other one's.
pub fn chain_xy_coupled<T: Scalar>(a: u32, c: u32, beta_j: T) -> (T, T) {
    let (up, down) = (Spin::Up, Spin::Down);
    let x_num = mu(down, a, beta_j) * mu(up, c, beta_j);
    let x = x_num / (x_num + mu(up, a, beta_j) * mu(down, c, beta_j));
    let y_num = mu(up, a, beta_j) * mu(up, c, beta_j);
    let y = y_num / (y_num + mu(down, a, beta_j) * mu(down, c, beta_j));
    (x, y)
}

/// [`chain_xy_coupled`] at free float 1/2, where `βJ = β`.
pub fn chain_xy<T: Scalar>(a: u32, c: u32, beta: T) -> (T, T) {
    chain_xy_coupled(a, c, beta)
}
