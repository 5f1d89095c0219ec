//! Label-shuffling permutation test on the Hotelling T² statistic.
//!
//! Shuffles are split into fixed-size chunks, each with its own ChaCha
//! stream, so the p-value is identical in sequential and parallel mode.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{hotelling_t2, Point, StatsError};
use crate::exec::{map_indices, Execution};

const CHUNK: usize = 1024;

/// Relative slack when comparing shuffled statistics with the observed one,
/// so the identity arrangement counts as "at least as extreme".
const TIE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationOutcome {
    pub t2_observed: f64,
    /// `(1 + #{T²* ≥ T²}) / (1 + valid shuffles)`.
    pub p_value: f64,
    pub valid_shuffles: usize,
    /// Shuffles whose pooled covariance was singular; excluded from the count.
    pub degenerate_shuffles: usize,
}

pub fn permutation_test(
    a: &[Point],
    b: &[Point],
    shuffles: usize,
    seed: u64,
    mode: Execution,
) -> Result<PermutationOutcome, StatsError> {
    let t2_observed = hotelling_t2(a, b)?;
    let threshold = t2_observed * (1.0 - TIE_SLACK);
    let pooled: Vec<Point> = a.iter().chain(b).copied().collect();
    let n1 = a.len();

    let chunks = shuffles.div_ceil(CHUNK);
    let tallies = map_indices(chunks, mode, None, |chunk| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        let todo = CHUNK.min(shuffles - chunk * CHUNK);
        let mut work = pooled.clone();
        let (mut extreme, mut valid, mut degenerate) = (0usize, 0usize, 0usize);
        for _ in 0..todo {
            work.shuffle(&mut rng);
            match hotelling_t2(&work[..n1], &work[n1..]) {
                Ok(t2) => {
                    valid += 1;
                    if t2 >= threshold {
                        extreme += 1;
                    }
                }
                Err(StatsError::DegenerateCovariance { .. }) => degenerate += 1,
                Err(e) => return Err(e),
            }
        }
        Ok((extreme, valid, degenerate))
    });

    let (mut extreme, mut valid, mut degenerate) = (0, 0, 0);
    for t in tallies {
        let (e, v, d) = t?;
        extreme += e;
        valid += v;
        degenerate += d;
    }
    Ok(PermutationOutcome {
        t2_observed,
        p_value: (1 + extreme) as f64 / (1 + valid) as f64,
        valid_shuffles: valid,
        degenerate_shuffles: degenerate,
    })
}
