//! Payoff-collection coefficients `φ_λ^(i)`: how executive `i`'s payoff is
//! split among the deciders.

use crate::graph::{HierarchyGraph, VertexId};
use crate::influence::{pattern_spins, InfluenceOracle, MAX_DECIDERS};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// `entries[λ][i] = φ_λ^(i)`; every executive's column sums to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ShareMatrix<T> {
    deciders: Vec<String>,
    executives: Vec<String>,
    entries: Vec<Vec<T>>,
}

impl<T: Scalar> ShareMatrix<T> {
    pub fn new(deciders: Vec<String>, executives: Vec<String>, entries: Vec<Vec<T>>) -> Result<Self> {
        if entries.len() != deciders.len() || entries.iter().any(|row| row.len() != executives.len()) {
            return Err(Error::InvalidParameter(format!(
                "share matrix must be {}x{}",
                deciders.len(),
                executives.len()
            )));
        }
        let m = Self { deciders, executives, entries };
        let tol = T::tolerance(1e-12);
        for (i, name) in m.executives.iter().enumerate() {
            let sum = m.column_sum(i);
            if !((sum - T::one()).abs() <= tol) {
                return Err(Error::InvalidParameter(format!("shares of executive {name} sum to {sum}")));
            }
        }
        Ok(m)
    }

    pub fn deciders(&self) -> &[String] {
        &self.deciders
    }

    pub fn executives(&self) -> &[String] {
        &self.executives
    }

    pub fn entries(&self) -> &[Vec<T>] {
        &self.entries
    }

    pub fn get(&self, decider: usize, executive: usize) -> T {
        self.entries[decider][executive]
    }

    /// `Σ_λ φ_λ^(i)`.
    pub fn column_sum(&self, executive: usize) -> T {
        self.entries.iter().map(|row| row[executive]).sum()
    }
}

/// `z_i` tabulated over all coalitions; bit `k` of the index set means
/// decider `k` belongs to the coalition.
#[derive(Clone, Debug, PartialEq)]
pub struct CoalitionFunction<T> {
    pub executive: usize,
    values: Vec<T>,
}

impl<T: Scalar> CoalitionFunction<T> {
    pub fn tabulate(oracle: &impl InfluenceOracle<T>, executive: usize) -> Result<Self> {
        let m = check_deciders(oracle)?;
        let (all_down, scale) = normalization(oracle, executive)?;
        let full = (1usize << m) - 1;
        let values = (0..=full)
            .map(|k| {
                if k == 0 {
                    // Exactly zero whatever rounding the oracle does.
                    return Ok(T::zero());
                }
                let p = oracle.prob_up(executive, &pattern_spins(full & !k, m))?;
                Ok((p - all_down) / scale)
            })
            .collect::<Result<_>>()?;
        Ok(Self { executive, values })
    }

    pub fn value(&self, coalition: usize) -> T {
        self.values[coalition]
    }

    pub fn deciders(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }
}

fn check_deciders<T: Scalar>(oracle: &impl InfluenceOracle<T>) -> Result<usize> {
    let m = oracle.deciders().len();
    if m == 0 || m > MAX_DECIDERS {
        return Err(Error::InvalidParameter(format!("{m} deciders; expected 1..={MAX_DECIDERS}")));
    }
    Ok(m)
}

/// `(P(s_i=1 | all −1), 2·P(s_i=1 | all +1) − 1)`.
fn normalization<T: Scalar>(oracle: &impl InfluenceOracle<T>, executive: usize) -> Result<(T, T)> {
    let m = oracle.deciders().len();
    let all_up = oracle.prob_up(executive, &pattern_spins(0, m))?;
    let all_down = oracle.prob_up(executive, &pattern_spins((1 << m) - 1, m))?;
    let scale = all_up + all_up - T::one();
    if !(scale.abs() >= T::tolerance(1e-12)) {
        return Err(Error::DegenerateInfluence {
            executive: oracle.executives()[executive].clone(),
            gap: scale.as_f64(),
        });
    }
    Ok((all_down, scale))
}

/// `z_i(K)` for the coalition `K` given as a bit set over deciders.
pub fn coalition_value<T: Scalar>(oracle: &impl InfluenceOracle<T>, executive: usize, coalition: usize) -> Result<T> {
    let m = check_deciders(oracle)?;
    if coalition >> m != 0 {
        return Err(Error::InvalidParameter(format!("coalition {coalition:#b} outside {m} deciders")));
    }
    if coalition == 0 {
        return Ok(T::zero());
    }
    let (all_down, scale) = normalization(oracle, executive)?;
    let full = (1usize << m) - 1;
    let p = oracle.prob_up(executive, &pattern_spins(full & !coalition, m))?;
    Ok((p - all_down) / scale)
}

/// Shapley value of `z` for each decider.
pub fn shapley_value<T: Scalar>(z: &CoalitionFunction<T>) -> Vec<T> {
    let m = z.deciders();
    // weight[s] = (s-1)!(m-s)!/m! for a coalition of size s >= 1.
    let weight: Vec<T> = (0..=m)
        .map(|s| {
            if s == 0 {
                return T::zero();
            }
            let binom = (1..s).fold(1.0, |acc, j| acc * (m - j) as f64 / j as f64);
            T::lit(1.0 / (m as f64 * binom))
        })
        .collect();
    (0..m)
        .map(|lam| {
            let bit = 1usize << lam;
            (0..1usize << m)
                .filter(|k| k & bit != 0)
                .map(|k| weight[k.count_ones() as usize] * (z.value(k) - z.value(k & !bit)))
                .sum()
        })
        .collect()
}

/// Shapley payoff shares for every decider and executive of the oracle.
pub fn shapley_shares<T: Scalar>(oracle: &impl InfluenceOracle<T>) -> Result<ShareMatrix<T>> {
    let m = check_deciders(oracle)?;
    let n = oracle.executives().len();
    let mut entries = vec![vec![T::zero(); n]; m];
    for i in 0..n {
        let z = CoalitionFunction::tabulate(oracle, i)?;
        for (lam, phi) in shapley_value(&z).into_iter().enumerate() {
            entries[lam][i] = phi;
        }
    }
    ShareMatrix::new(oracle.deciders().to_vec(), oracle.executives().to_vec(), entries)
}

/// Sum over all directed paths `λ ⇝ v` of the product of edge weights, for
/// every vertex `v`.
fn path_weights<T: Scalar>(g: &HierarchyGraph<T>, order: &[VertexId], decider: VertexId) -> Vec<T> {
    let mut w = vec![T::zero(); g.vertex_count()];
    w[decider.index()] = T::one();
    for &v in order {
        if v == decider {
            continue;
        }
        w[v.index()] = g.pre(v).iter().map(|&(p, f)| w[p.index()] * f).sum();
    }
    w
}

fn topological<T: Scalar>(g: &HierarchyGraph<T>) -> Result<Vec<VertexId>> {
    g.topological_order().ok_or(Error::Cyclic("infinite path family"))
}

/// `φ_λ^(i) = Σ_{paths λ⇝i} Π f_vw`.
pub fn shares_by_paths<T: Scalar>(g: &HierarchyGraph<T>, decider: &str, executive: &str) -> Result<T> {
    let order = topological(g)?;
    let lam = g.lookup(decider)?;
    let i = g.lookup(executive)?;
    Ok(path_weights(g, &order, lam)[i.index()])
}

/// Path shares of every decider (graph order) in the given executives.
pub fn path_share_matrix<T: Scalar>(g: &HierarchyGraph<T>, executives: &[VertexId]) -> Result<ShareMatrix<T>> {
    let order = topological(g)?;
    let deciders = g.deciders().to_vec();
    let entries = deciders
        .iter()
        .map(|&lam| {
            let w = path_weights(g, &order, lam);
            executives.iter().map(|i| w[i.index()]).collect()
        })
        .collect();
    ShareMatrix::new(
        deciders.iter().map(|&v| g.id(v).to_string()).collect(),
        executives.iter().map(|&v| g.id(v).to_string()).collect(),
        entries,
    )
}
