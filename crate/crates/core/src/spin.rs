//! Binary moves and assignments of moves to vertices.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

use crate::graph::{VertexId, VertexSet};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// A ±1 value: a spin, a vote outcome, or a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn value(self) -> i8 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Spin::Up => T::one(),
            Spin::Down => -T::one(),
        }
    }

    pub fn from_value(v: i64) -> Option<Spin> {
        match v {
            1 => Some(Spin::Up),
            -1 => Some(Spin::Down),
            _ => None,
        }
    }

    /// Bit encoding used by all configuration indices: a set bit is `Down`.
    pub fn from_bit(set: bool) -> Spin {
        if set {
            Spin::Down
        } else {
            Spin::Up
        }
    }

    pub fn is_down(self) -> bool {
        self == Spin::Down
    }
}

impl Neg for Spin {
    type Output = Spin;

    fn neg(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "+1",
            Spin::Down => "-1",
        })
    }
}

/// Spins on a set of vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SpinAssignment(BTreeMap<VertexId, Spin>);

impl SpinAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn uniform(set: &VertexSet, spin: Spin) -> Self {
        set.iter().map(|v| (v, spin)).collect()
    }

    pub fn insert(&mut self, v: VertexId, s: Spin) -> Option<Spin> {
        self.0.insert(v, s)
    }

    pub fn get(&self, v: VertexId) -> Option<Spin> {
        self.0.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, Spin)> + '_ {
        self.0.iter().map(|(&v, &s)| (v, s))
    }

    pub fn domain(&self) -> VertexSet {
        self.0.keys().copied().collect()
    }

    pub fn flipped(&self) -> Self {
        self.iter().map(|(v, s)| (v, -s)).collect()
    }

    /// Fails unless the assignment is total on exactly `set`.
    pub fn check_domain(&self, set: &VertexSet) -> Result<()> {
        if self.domain() == *set {
            Ok(())
        } else {
            Err(Error::AssignmentMismatch(format!(
                "assigned {:?}, expected {:?}",
                self.domain(),
                set
            )))
        }
    }
}

impl FromIterator<(VertexId, Spin)> for SpinAssignment {
    fn from_iter<I: IntoIterator<Item = (VertexId, Spin)>>(iter: I) -> Self {
        SpinAssignment(iter.into_iter().collect())
    }
}
