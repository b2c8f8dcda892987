//! Per-executive conditional influences `P(s_i = +1 | σ_Λ^(i))`.
//!
//! Each executive coordinate propagates through the hierarchy as its own
//! binary process, so everything downstream only needs, for every executive
//! `i` and every pattern of decider commands on coordinate `i`, the
//! probability that `i` ends up playing `+1`.

use crate::graph::{HierarchyGraph, VertexId, VertexSet};
use crate::ising::{coupling_from_hierarchy, IsingModel};
use crate::scalar::Scalar;
use crate::spin::{Spin, SpinAssignment};
use crate::vote::{conditional_influence, VoteParams};
use crate::{Error, Result};

pub trait InfluenceOracle<T: Scalar> {
    fn deciders(&self) -> &[String];
    fn executives(&self) -> &[String];
    /// `commands[k]` is the command of decider `k` to executive `executive`.
    fn prob_up(&self, executive: usize, commands: &[Spin]) -> Result<T>;
}

/// How conditional influences are evaluated on a graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum InfluenceModel {
    /// Enumeration of the directed vote process.
    #[default]
    Vote,
    /// Conditional probabilities of the equivalent Ising model.
    Ising,
}

impl InfluenceModel {
    pub fn as_str(self) -> &'static str {
        match self {
            InfluenceModel::Vote => "vote",
            InfluenceModel::Ising => "ising",
        }
    }
}

impl std::str::FromStr for InfluenceModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vote" => Ok(InfluenceModel::Vote),
            "ising" => Ok(InfluenceModel::Ising),
            _ => Err(Error::Parse(format!("unknown influence model {s:?}"))),
        }
    }
}

/// Influences read off a hierarchy graph.
pub struct GraphInfluence<'g, T> {
    graph: &'g HierarchyGraph<T>,
    params: VoteParams<T>,
    ising: Option<IsingModel<T>>,
    decider_ids: Vec<VertexId>,
    executive_ids: Vec<VertexId>,
    deciders: Vec<String>,
    executives: Vec<String>,
}

impl<'g, T: Scalar> GraphInfluence<'g, T> {
    /// Deciders in graph order; executives in the given order.
    pub fn new(graph: &'g HierarchyGraph<T>, executives: &[VertexId], params: VoteParams<T>, model: InfluenceModel) -> Result<Self> {
        let decider_ids = graph.deciders().to_vec();
        let ising = match model {
            InfluenceModel::Vote => None,
            InfluenceModel::Ising => Some(coupling_from_hierarchy(graph)?.with_cap(params.cap)),
        };
        Ok(Self {
            graph,
            params,
            ising,
            deciders: decider_ids.iter().map(|&v| graph.id(v).to_string()).collect(),
            executives: executives.iter().map(|&v| graph.id(v).to_string()).collect(),
            decider_ids,
            executive_ids: executives.to_vec(),
        })
    }

    /// All role-tagged executives in graph order.
    pub fn for_graph(graph: &'g HierarchyGraph<T>, params: VoteParams<T>, model: InfluenceModel) -> Result<Self> {
        Self::new(graph, &graph.executives().to_vec(), params, model)
    }
}

impl<T: Scalar> InfluenceOracle<T> for GraphInfluence<'_, T> {
    fn deciders(&self) -> &[String] {
        &self.deciders
    }

    fn executives(&self) -> &[String] {
        &self.executives
    }

    fn prob_up(&self, executive: usize, commands: &[Spin]) -> Result<T> {
        if commands.len() != self.decider_ids.len() {
            return Err(Error::AssignmentMismatch(format!(
                "{} commands for {} deciders",
                commands.len(),
                self.decider_ids.len()
            )));
        }
        let i = *self
            .executive_ids
            .get(executive)
            .ok_or_else(|| Error::UnknownVertex(format!("executive #{executive}")))?;
        let a: VertexSet = self.decider_ids.iter().copied().collect();
        let sigma: SpinAssignment = self.decider_ids.iter().copied().zip(commands.iter().copied()).collect();
        match &self.ising {
            None => {
                let dist = conditional_influence(self.graph, &a, &VertexSet::single(i), &sigma, &self.params)?;
                Ok(dist.probs[0])
            }
            Some(model) => model.conditional(i, &a, &sigma),
        }
    }
}

/// The four summary influences of a two-decider, two-executive game:
/// `x = P(s₁=+1 | −1, +1)`, `y = P(s₁=+1 | +1, +1)`,
/// `x̄ = P(s₂=+1 | +1, −1)`, `ȳ = P(s₂=+1 | +1, +1)`.
/// The remaining patterns follow from spin-flip symmetry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary<T> {
    pub x: T,
    pub y: T,
    pub x_bar: T,
    pub y_bar: T,
}

impl<T: Scalar> Summary<T> {
    pub fn symmetric(x: T, y: T) -> Self {
        Self { x, y, x_bar: x, y_bar: y }
    }

    /// Reads the summary off any oracle with two deciders and two executives.
    pub fn from_oracle(oracle: &impl InfluenceOracle<T>) -> Result<Self> {
        if oracle.deciders().len() != 2 || oracle.executives().len() != 2 {
            return Err(Error::OutsideScope("summary influences need two deciders and two executives".into()));
        }
        let (u, d) = (Spin::Up, Spin::Down);
        Ok(Self {
            x: oracle.prob_up(0, &[d, u])?,
            y: oracle.prob_up(0, &[u, u])?,
            x_bar: oracle.prob_up(1, &[u, d])?,
            y_bar: oracle.prob_up(1, &[u, u])?,
        })
    }

    pub fn oracle(self) -> SummaryInfluence<T> {
        SummaryInfluence {
            summary: self,
            deciders: vec!["λ1".into(), "λ2".into()],
            executives: vec!["1".into(), "2".into()],
        }
    }
}

/// Oracle defined directly by a [`Summary`].
#[derive(Clone, Debug)]
pub struct SummaryInfluence<T> {
    pub summary: Summary<T>,
    deciders: Vec<String>,
    executives: Vec<String>,
}

impl<T: Scalar> InfluenceOracle<T> for SummaryInfluence<T> {
    fn deciders(&self) -> &[String] {
        &self.deciders
    }

    fn executives(&self) -> &[String] {
        &self.executives
    }

    fn prob_up(&self, executive: usize, commands: &[Spin]) -> Result<T> {
        let [first, second] = commands else {
            return Err(Error::AssignmentMismatch(format!("{} commands for 2 deciders", commands.len())));
        };
        let s = &self.summary;
        // (dissent, agree) probabilities for this executive: in `x` the first
        // decider dissents, in `x̄` the second one does.
        let (x, y, dissenter_is_first) = match executive {
            0 => (s.x, s.y, true),
            1 => (s.x_bar, s.y_bar, false),
            _ => return Err(Error::UnknownVertex(format!("executive #{executive}"))),
        };
        let one = T::one();
        Ok(match (first, second) {
            (Spin::Up, Spin::Up) => y,
            (Spin::Down, Spin::Down) => one - y,
            (Spin::Down, Spin::Up) => {
                if dissenter_is_first {
                    x
                } else {
                    one - x
                }
            }
            (Spin::Up, Spin::Down) => {
                if dissenter_is_first {
                    one - x
                } else {
                    x
                }
            }
        })
    }
}

/// Every command pattern evaluated once and cached.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceTable<T> {
    deciders: Vec<String>,
    executives: Vec<String>,
    /// `probs[i][pattern]`, bit k of `pattern` set: decider k commands −1.
    probs: Vec<Vec<T>>,
}

/// Upper bound on deciders for tabulated influences.
pub const MAX_DECIDERS: usize = 20;

impl<T: Scalar> InfluenceTable<T> {
    pub fn from_oracle(oracle: &impl InfluenceOracle<T>) -> Result<Self> {
        let m = oracle.deciders().len();
        if m > MAX_DECIDERS {
            return Err(Error::InvalidParameter(format!("{m} deciders exceed the limit of {MAX_DECIDERS}")));
        }
        let probs = (0..oracle.executives().len())
            .map(|i| {
                (0..1usize << m)
                    .map(|pattern| oracle.prob_up(i, &pattern_spins(pattern, m)))
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            deciders: oracle.deciders().to_vec(),
            executives: oracle.executives().to_vec(),
            probs,
        })
    }

    pub fn get(&self, executive: usize, pattern: usize) -> T {
        self.probs[executive][pattern]
    }
}

impl<T: Scalar> InfluenceOracle<T> for InfluenceTable<T> {
    fn deciders(&self) -> &[String] {
        &self.deciders
    }

    fn executives(&self) -> &[String] {
        &self.executives
    }

    fn prob_up(&self, executive: usize, commands: &[Spin]) -> Result<T> {
        let row = self
            .probs
            .get(executive)
            .ok_or_else(|| Error::UnknownVertex(format!("executive #{executive}")))?;
        if commands.len() != self.deciders.len() {
            return Err(Error::AssignmentMismatch(format!("{} commands for {} deciders", commands.len(), self.deciders.len())));
        }
        Ok(row[pattern_index(commands)])
    }
}

pub(crate) fn pattern_spins(pattern: usize, m: usize) -> Vec<Spin> {
    (0..m).map(|k| Spin::from_bit(pattern >> k & 1 == 1)).collect()
}

pub(crate) fn pattern_index(commands: &[Spin]) -> usize {
    commands
        .iter()
        .enumerate()
        .fold(0, |acc, (k, s)| acc | (usize::from(s.is_down()) << k))
}
