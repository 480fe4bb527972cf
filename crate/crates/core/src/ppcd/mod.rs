//! Planar probabilistic piecewise-constant-derivative models: locations
//! with cone invariants and constant flows, probabilistic switching at
//! guard facets, and the finite facet-quotient chain their stability
//! reduces to.

mod io;
mod simulate;

pub use io::{FlowForm, LocationFile, Orientation, PpcdFile};
pub use simulate::{ConcretePath, ConservationReport, Termination, TraceStep};

use crate::exact::{Rat, Scale};
use crate::geom2d::GeomError;
use crate::geom2d::{continuous_step, FlowVec, Ray, Sector, StepOutcome, StuckReason};
use crate::wdtmc::{ChainError, Edge, Verdict, Wdtmc};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

/// Which facet of a location's invariant a rule refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FacetTag {
    Lo,
    Hi,
}

impl FacetTag {
    pub fn other(self) -> FacetTag {
        match self {
            FacetTag::Lo => FacetTag::Hi,
            FacetTag::Hi => FacetTag::Lo,
        }
    }
}

impl fmt::Display for FacetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FacetTag::Lo => write!(f, "lo"),
            FacetTag::Hi => write!(f, "hi"),
        }
    }
}

/// One mode: a cone invariant, a constant flow, the guard facet where its
/// switch distribution fires, and that distribution over target locations.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: String,
    pub invariant: Sector,
    pub flow: FlowVec,
    pub guard: FacetTag,
    /// target location id -> switch probability; at most one distribution
    /// per (location, guard) by construction
    pub switch: BTreeMap<String, Rat>,
}

impl Location {
    pub fn facet_ray(&self, tag: FacetTag) -> &Ray {
        match tag {
            FacetTag::Lo => self.invariant.lo(),
            FacetTag::Hi => self.invariant.hi(),
        }
    }

    pub fn guard_ray(&self) -> &Ray {
        self.facet_ray(self.guard)
    }

    /// The facet tag of `ray` in this location's invariant, if any.
    pub fn tag_of_ray(&self, ray: &Ray) -> Option<FacetTag> {
        if self.invariant.lo() == ray {
            Some(FacetTag::Lo)
        } else if self.invariant.hi() == ray {
            Some(FacetTag::Hi)
        } else {
            None
        }
    }
}

/// Structural violations reported by [`Ppcd::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum PpcdDefect {
    /// switch probabilities of `loc` are not positive rationals summing to 1
    BadDistribution { loc: String, sum: Rat },
    /// a switch target id that names no location
    UnknownSwitchTarget { loc: String, target: String },
    /// the guard ray of `loc` is not a facet of the target's invariant
    TargetMissingFacet { loc: String, target: String },
}

impl fmt::Display for PpcdDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PpcdDefect::BadDistribution { loc, sum } => {
                write!(f, "switch probabilities of {loc:?} sum to {sum}, not 1")
            }
            PpcdDefect::UnknownSwitchTarget { loc, target } => {
                write!(f, "switch of {loc:?} targets unknown location {target:?}")
            }
            PpcdDefect::TargetMissingFacet { loc, target } => {
                write!(
                    f,
                    "guard of {loc:?} is not a facet of the invariant of {target:?}"
                )
            }
        }
    }
}

/// Validation outcome: hard defects plus advisory warnings.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub defects: Vec<PpcdDefect>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Errors from model construction, quotient building, and simulation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PpcdError {
    #[error("duplicate location id {0:?}")]
    DuplicateLocation(String),
    #[error("unknown location {0:?}")]
    UnknownLocation(String),
    #[error("model does not validate: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<PpcdDefect>),
    #[error("trajectory of ({loc}, {facet}) is stuck: {reason}")]
    StuckTrajectory {
        loc: String,
        facet: FacetTag,
        reason: StuckReason,
    },
    #[error("trajectory of ({loc}, {facet}) reaches non-guard facet {hit}")]
    HitNonGuardFacet {
        loc: String,
        facet: FacetTag,
        hit: Ray,
    },
    #[error("location {0:?} reaches its guard but has an empty switch")]
    EmptySwitchAtGuard(String),
    #[error("start point does not lie on the initial facet (nonzero, on the ray)")]
    StartNotOnFacet,
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// A state of the facet quotient: a location entered through one of its
/// invariant's facet rays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientState {
    pub location: String,
    pub tag: FacetTag,
    pub facet: Ray,
}

/// The quotient chain together with its state decoding.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub chain: Wdtmc,
    /// aligned with the chain's state indices
    pub states: Vec<QuotientState>,
}

/// Verdict pair produced by [`Ppcd::analyze`].
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub absolute: Verdict,
    pub almost_sure: Verdict,
}

/// A planar PPCD model.
#[derive(Debug, Clone, PartialEq)]
pub struct Ppcd {
    locations: Vec<Location>,
    initial: (usize, FacetTag),
}

impl Ppcd {
    pub fn new(
        locations: Vec<Location>,
        initial_location: &str,
        initial_facet: FacetTag,
    ) -> Result<Self, PpcdError> {
        let mut seen = std::collections::BTreeSet::new();
        for l in &locations {
            if !seen.insert(l.id.clone()) {
                return Err(PpcdError::DuplicateLocation(l.id.clone()));
            }
        }
        let idx = locations
            .iter()
            .position(|l| l.id == initial_location)
            .ok_or_else(|| PpcdError::UnknownLocation(initial_location.to_string()))?;
        Ok(Ppcd {
            locations,
            initial: (idx, initial_facet),
        })
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn initial(&self) -> (usize, FacetTag) {
        self.initial
    }

    pub fn initial_location(&self) -> &Location {
        &self.locations[self.initial.0]
    }

    /// Checks every structural invariant of the model, listing violations
    /// and advisory warnings (a facet no predecessor can feed is legal but
    /// usually a modeling slip).
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for l in &self.locations {
            if !l.switch.is_empty() {
                let mut sum = Rat::zero();
                let mut positive = true;
                for p in l.switch.values() {
                    positive &= p.is_positive();
                    sum = &sum + p;
                }
                if !sum.is_one() || !positive {
                    report.defects.push(PpcdDefect::BadDistribution {
                        loc: l.id.clone(),
                        sum,
                    });
                }
            }
            for target in l.switch.keys() {
                match self.location_index(target) {
                    None => report.defects.push(PpcdDefect::UnknownSwitchTarget {
                        loc: l.id.clone(),
                        target: target.clone(),
                    }),
                    Some(t) => {
                        if self.locations[t].tag_of_ray(l.guard_ray()).is_none() {
                            report.defects.push(PpcdDefect::TargetMissingFacet {
                                loc: l.id.clone(),
                                target: target.clone(),
                            });
                        }
                    }
                }
            }
        }
        // advisory: every non-initial entry facet should be some
        // predecessor's guard ray
        for (i, l) in self.locations.iter().enumerate() {
            let entry = l.guard.other();
            if (i, entry) == self.initial {
                continue;
            }
            let fed = self
                .locations
                .iter()
                .any(|p| p.switch.contains_key(&l.id) && p.guard_ray() == l.facet_ray(entry));
            if !fed {
                report.warnings.push(format!(
                    "facet ({}, {entry}) has no predecessor guard feeding it",
                    l.id
                ));
            }
        }
        report
    }

    /// Builds the facet quotient restricted to the states reachable from
    /// the initial (location, facet) pair.
    ///
    /// Per state, one exact continuous step decides everything: a hit on
    /// the guard emits one edge per switch target carrying the step's
    /// scale; divergence emits the probability-1 infinite self-loop;
    /// anything else is an error. A self-target re-enters through the
    /// state's own entry facet, so it becomes a chain self-loop.
    pub fn build_quotient(&self) -> Result<Quotient, PpcdError> {
        let report = self.validate();
        if !report.is_ok() {
            return Err(PpcdError::Invalid(report.defects));
        }

        type StateKey = (usize, FacetTag);
        let mut discovered: Vec<StateKey> = Vec::new();
        let mut index: HashMap<StateKey, usize> = HashMap::new();
        let mut edges: Vec<(StateKey, StateKey, Rat, Scale)> = Vec::new();
        let mut queue = VecDeque::new();

        let mut discover =
            |key: StateKey, discovered: &mut Vec<StateKey>, queue: &mut VecDeque<StateKey>| {
                if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(key) {
                    slot.insert(discovered.len());
                    discovered.push(key);
                    queue.push_back(key);
                }
            };
        discover(self.initial, &mut discovered, &mut queue);

        while let Some(state @ (li, tag)) = queue.pop_front() {
            let loc = &self.locations[li];
            let entry_ray = loc.facet_ray(tag);
            match continuous_step(&loc.invariant, entry_ray, &loc.flow)? {
                StepOutcome::Hit { exit, scale, .. } => {
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
                    let weight = Scale::finite(scale).expect("hit scales are positive");
                    for (target, p) in &loc.switch {
                        let ti = self.location_index(target).expect("validated");
                        let ttag = if ti == li {
                            // robot restarts its traversal at the entry facet
                            tag
                        } else {
                            self.locations[ti]
                                .tag_of_ray(loc.guard_ray())
                                .expect("validated")
                        };
                        discover((ti, ttag), &mut discovered, &mut queue);
                        edges.push((state, (ti, ttag), p.clone(), weight.clone()));
                    }
                }
                StepOutcome::Diverge => {
                    edges.push((state, state, Rat::one(), Scale::Infinite));
                }
                StepOutcome::Stuck(reason) => {
                    return Err(PpcdError::StuckTrajectory {
                        loc: loc.id.clone(),
                        facet: tag,
                        reason,
                    });
                }
            }
        }

        // deterministic state order: by location id, then facet tag
        let mut ordered = discovered.clone();
        ordered.sort_by(|a, b| {
            (self.locations[a.0].id.as_str(), a.1).cmp(&(self.locations[b.0].id.as_str(), b.1))
        });
        let renumber: HashMap<(usize, FacetTag), usize> = ordered
            .iter()
            .enumerate()
            .map(|(new, key)| (*key, new))
            .collect();
        let states: Vec<QuotientState> = ordered
            .iter()
            .map(|&(li, tag)| QuotientState {
                location: self.locations[li].id.clone(),
                tag,
                facet: *self.locations[li].facet_ray(tag),
            })
            .collect();
        let names = states
            .iter()
            .map(|s| format!("{}@{}", s.location, s.tag))
            .collect();
        let chain_edges = edges
            .into_iter()
            .map(|(src, dst, prob, weight)| Edge {
                src: renumber[&src],
                dst: renumber[&dst],
                prob,
                weight,
            })
            .collect();
        let chain = Wdtmc::new(names, chain_edges, renumber[&self.initial])?;
        debug_assert!(chain.validate().is_empty(), "quotient rows must sum to 1");
        Ok(Quotient { chain, states })
    }

    /// Builds the quotient once and decides both stability notions on it.
    pub fn analyze(&self) -> Result<Analysis, PpcdError> {
        let quotient = self.build_quotient()?;
        let absolute = quotient.chain.check_absolute();
        let almost_sure = quotient.chain.check_almost_sure()?;
        Ok(Analysis {
            absolute,
            almost_sure,
        })
    }
}
