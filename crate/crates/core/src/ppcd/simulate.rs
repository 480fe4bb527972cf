//! Concrete-semantics simulation with exact points, and the harness that
//! replays each trace on the quotient to confirm weight conservation.
//!
//! Discrete draws use ChaCha12 over the switch targets in id order, the
//! same convention as chain sampling.

use super::{FacetTag, Ppcd, PpcdError};
use crate::exact::{Rat, Scale, Vec2Q};
use crate::geom2d::{continuous_step, trajectory_hit, StepOutcome, StuckReason};
use crate::wdtmc::PathFin;
use num_bigint::BigInt;
use num_traits::One;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// One visited state of a concrete execution. The point of step `i + 1` is
/// the landing point on the guard facet of step `i`'s location; a
/// self-switch restarts the next evolution from the norm-equivalent point
/// of the entry facet.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub location: String,
    pub tag: FacetTag,
    pub point: Vec2Q,
}

/// Why a simulation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// all requested steps executed
    Completed,
    /// the trajectory stays in its invariant forever (infinite edge)
    Diverged,
    /// the trajectory left the facet-to-facet regime
    Stuck(StuckReason),
}

/// A concrete execution trace with exact per-step scaling factors:
/// `step_scales[i] = inf_norm(point_{i+1}) / inf_norm(point_i)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcretePath {
    pub steps: Vec<TraceStep>,
    pub step_scales: Vec<Scale>,
    pub termination: Termination,
}

impl ConcretePath {
    /// Exact product of all step scales.
    pub fn total_scale(&self) -> Scale {
        self.step_scales
            .iter()
            .fold(Scale::one(), |acc, s| acc.mul(s))
    }
}

/// Outcome of [`Ppcd::weight_conservation_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConservationReport {
    pub trials: usize,
    pub steps: usize,
    pub passes: usize,
    /// trial indices whose concrete product differed from the quotient
    /// path weight (must stay empty)
    pub failures: Vec<usize>,
}

impl ConservationReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty() && self.passes == self.trials
    }
}

impl Ppcd {
    /// Runs `steps` alternating continuous and seeded discrete transitions
    /// from `start`, which must be a nonzero point of the initial facet.
    /// Halts early with a marker when the trajectory diverges or gets
    /// stuck.
    pub fn simulate_concrete(
        &self,
        start: &Vec2Q,
        steps: usize,
        seed: u64,
    ) -> Result<ConcretePath, PpcdError> {
        let (mut li, mut tag) = self.initial;
        {
            let entry = self.locations[li].facet_ray(tag);
            if start.is_zero() || !entry.contains(start) {
                return Err(PpcdError::StartNotOnFacet);
            }
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut point = start.clone();
        let mut trace = vec![TraceStep {
            location: self.locations[li].id.clone(),
            tag,
            point: point.clone(),
        }];
        let mut scales = Vec::with_capacity(steps);
        let mut termination = Termination::Completed;

        for _ in 0..steps {
            let loc = &self.locations[li];
            match continuous_step(&loc.invariant, loc.facet_ray(tag), &loc.flow)? {
                StepOutcome::Hit { exit, .. } => {
                    if &exit != loc.guard_ray() {
                        return Err(PpcdError::HitNonGuardFacet {
                            loc: loc.id.clone(),
                            facet: tag,
                            hit: exit,
                        });
                    }
                    if loc.switch.is_empty() {
                        return Err(PpcdError::EmptySwitchAtGuard(loc.id.clone()));
                    }
                    // the true landing from the actual current point
                    let hit = trajectory_hit(&point, loc.flow.vec(), &exit)
                        .expect("classified as a hit from any facet point");
                    let landing = exit.dir().scaled(&hit.s);
                    scales.push(Scale::finite(hit.scale).expect("positive scale"));

                    let target = draw_switch_target(loc, &mut rng);
                    let ti = self.location_index(target).expect("validated switch");
                    if ti == li {
                        // restart at the entry facet, norm preserved
                        let entry = loc.facet_ray(tag);
                        let factor = &landing.inf_norm() / &entry.dir().inf_norm();
                        point = entry.dir().scaled(&factor);
                    } else {
                        tag = self.locations[ti]
                            .tag_of_ray(loc.guard_ray())
                            .expect("validated switch target");
                        point = landing.clone();
                        li = ti;
                    }
                    trace.push(TraceStep {
                        location: self.locations[li].id.clone(),
                        tag,
                        point: landing,
                    });
                }
                StepOutcome::Diverge => {
                    termination = Termination::Diverged;
                    break;
                }
                StepOutcome::Stuck(reason) => {
                    termination = Termination::Stuck(reason);
                    break;
                }
            }
        }
        Ok(ConcretePath {
            steps: trace,
            step_scales: scales,
            termination,
        })
    }

    /// Simulates `trials` seeded concrete paths and replays each induced
    /// (location, facet) path on the quotient: the exact product of
    /// concrete step scales must equal the exact quotient path weight on
    /// every trial. Trial `t` uses seed `seed + t`.
    pub fn weight_conservation_check(
        &self,
        steps: usize,
        trials: usize,
        seed: u64,
    ) -> Result<ConservationReport, PpcdError> {
        let quotient = self.build_quotient()?;
        let (li, tag) = self.initial;
        let start = self.locations[li].facet_ray(tag).dir();
        let mut passes = 0;
        let mut failures = Vec::new();
        for trial in 0..trials {
            let path = self.simulate_concrete(&start, steps, seed.wrapping_add(trial as u64))?;
            let indices: Vec<usize> = path
                .steps
                .iter()
                .map(|s| {
                    quotient
                        .chain
                        .state_index(&format!("{}@{}", s.location, s.tag))
                        .expect("visited states are quotient states")
                })
                .collect();
            let replayed = quotient.chain.path_weight(&PathFin::new(indices))?;
            if replayed == path.total_scale() {
                passes += 1;
            } else {
                failures.push(trial);
            }
        }
        Ok(ConservationReport {
            trials,
            steps,
            passes,
            failures,
        })
    }
}

fn draw_switch_target<'a>(loc: &'a super::Location, rng: &mut ChaCha12Rng) -> &'a str {
    let u = Rat::new(BigInt::from(rng.next_u64()), BigInt::one() << 64u32)
        .expect("nonzero denominator");
    let mut acc = Rat::zero();
    let mut last = None;
    for (target, p) in &loc.switch {
        acc = &acc + p;
        last = Some(target.as_str());
        if u < acc {
            return target;
        }
    }
    last.expect("switch is nonempty")
}
