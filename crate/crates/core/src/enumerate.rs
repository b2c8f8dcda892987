//! Exhaustive sums over spin configurations.
//!
//! The configuration space `0..2^bits` is cut into a fixed number of chunks
//! that do not depend on the thread pool size. Each chunk is summed in mask
//! order, then the chunk partials are combined in chunk order, so results
//! are bit-identical however rayon schedules the work.

use rayon::prelude::*;

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Default bound on the number of enumerated free spins.
pub const DEFAULT_CAP: usize = 22;

const PARALLEL_BITS: usize = 14;
const CHUNK_BITS: usize = 6;

pub(crate) fn check_cap(free: usize, cap: usize) -> Result<()> {
    if free > cap {
        Err(Error::EnumerationInfeasible { free, cap })
    } else {
        Ok(())
    }
}

/// Sums `eval(mask)` into `buckets` accumulators for every mask in
/// `0..2^bits`. `eval` returns the bucket and the weight of one configuration;
/// `init` builds per-chunk scratch state.
pub(crate) fn sum_configurations<T, S, I, F>(bits: usize, buckets: usize, init: I, eval: F) -> Vec<T>
where
    T: Scalar,
    I: Fn() -> S + Sync,
    F: Fn(&mut S, u64) -> (usize, T) + Sync,
{
    let run = |range: std::ops::Range<u64>| {
        let mut scratch = init();
        let mut acc = vec![T::zero(); buckets];
        for mask in range {
            let (bucket, w) = eval(&mut scratch, mask);
            acc[bucket] = acc[bucket] + w;
        }
        acc
    };

    let total = 1u64 << bits;
    if bits < PARALLEL_BITS {
        return run(0..total);
    }
    let chunk = total >> CHUNK_BITS;
    let partials: Vec<Vec<T>> = (0..1u64 << CHUNK_BITS)
        .into_par_iter()
        .map(|c| run(c * chunk..(c + 1) * chunk))
        .collect();
    let mut acc = vec![T::zero(); buckets];
    for p in partials {
        for (a, v) in acc.iter_mut().zip(p) {
            *a = *a + v;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_configurations() {
        let counts: Vec<f64> = sum_configurations(16, 2, || (), |_, m| ((m & 1) as usize, 1.0));
        assert_eq!(counts, vec![32768.0, 32768.0]);
    }

    #[test]
    fn parallel_sum_is_reproducible() {
        let f = |_: &mut (), m: u64| (0usize, 1.0 / (1.0 + m as f64));
        let first: Vec<f64> = sum_configurations(18, 1, || (), f);
        let second: Vec<f64> = sum_configurations(18, 1, || (), f);
        assert_eq!(first[0].to_bits(), second[0].to_bits());
    }

    #[test]
    fn cap() {
        assert!(check_cap(22, 22).is_ok());
        assert!(matches!(check_cap(23, 22), Err(Error::EnumerationInfeasible { free: 23, cap: 22 })));
    }
}
