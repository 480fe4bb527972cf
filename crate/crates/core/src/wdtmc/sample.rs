//! Seeded path sampling and Monte-Carlo summaries.
//!
//! Sampling uses ChaCha12 throughout (`SAMPLER_RNG` names it in emitted
//! file headers), so identical (seed, chain) pairs yield identical paths on
//! every platform. Successors are drawn by comparing a dyadic uniform
//! `u/2^64` against exact cumulative probabilities, destinations in index
//! order.

use super::{ChainError, PathFin, Wdtmc};
use crate::exact::Rat;
use num_bigint::BigInt;
use num_traits::One;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Identifier of the pseudo-random algorithm behind every seeded draw,
/// recorded in output headers so results replicate across implementations.
pub const SAMPLER_RNG: &str = "chacha12";

/// Sampled average step weight against the exact target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloStats {
    /// number of edges averaged over
    pub steps: usize,
    /// sampled (S_sigma)_n / n in the log domain
    pub partial_average: f64,
    /// float view of the per-step log of the effective-weight product
    pub target: f64,
}

impl Wdtmc {
    /// Path of `steps` edges from the initial state, each successor drawn
    /// according to the exact edge probabilities from a deterministic
    /// seeded generator.
    pub fn sample_path(&self, steps: usize, seed: u64) -> PathFin {
        assert!(steps >= 1, "sample at least one step");
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut states = Vec::with_capacity(steps + 1);
        let mut at = self.initial;
        states.push(at);
        for _ in 0..steps {
            at = self.draw_successor(at, &mut rng);
            states.push(at);
        }
        PathFin::new(states)
    }

    pub(crate) fn draw_successor(&self, at: usize, rng: &mut ChaCha12Rng) -> usize {
        let u = Rat::new(BigInt::from(rng.next_u64()), BigInt::one() << 64u32)
            .expect("nonzero denominator");
        let mut acc = Rat::zero();
        let mut last = None;
        for e in self.outgoing(at) {
            acc = &acc + &e.prob;
            last = Some(e.dst);
            if u < acc {
                return e.dst;
            }
        }
        // row sums are exactly 1 on validated chains, so u < 1 <= acc above
        last.expect("state has outgoing edges")
    }

    /// Average log step weight of `path` against the exact effective-weight
    /// target. Fails on paths without edges, on infinite-weight edges, and
    /// when the chain has no stationary distribution to target.
    pub fn average_step_weight(&self, path: &PathFin) -> Result<MonteCarloStats, ChainError> {
        self.check_path(path.states())?;
        if path.num_edges() == 0 {
            return Err(ChainError::NoEdgesOnPath);
        }
        let mut sum = 0.0f64;
        for w in path.states().windows(2) {
            let e = self.edge_between(w[0], w[1]).expect("checked path");
            match e.weight.as_finite() {
                Some(r) => sum += r.ln_f64(),
                None => return Err(ChainError::InfiniteEdgeOnPath),
            }
        }
        let rho = self.stationary_distribution()?;
        let ew = self.effective_weight(&rho)?;
        Ok(MonteCarloStats {
            steps: path.num_edges(),
            partial_average: sum / path.num_edges() as f64,
            target: ew.float_log,
        })
    }
}
