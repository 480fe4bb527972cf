//! Deterministic model generators: the eight-region experiment families,
//! the faulty-actuator case study, and random chains for oracle corpora.
//!
//! Every draw comes from ChaCha12 in a fixed documented order, so a config
//! with the same seed always produces byte-identical models:
//! experiments draw all flow coefficients first (region-major, slot-minor),
//! then all switch weights (region-major, slot-minor, target-minor);
//! random chains decide chord presence (source-major), then per-source
//! weights and scales.

use crate::exact::{Rat, Scale};
use crate::geom2d::{continuous_step, FlowVec, Ray, Sector, StepOutcome};
use crate::ppcd::{FacetTag, Location, Ppcd, PpcdError};
use crate::wdtmc::{Edge, Wdtmc};
use num_traits::ToPrimitive;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Recorded in emitted manifests; bump when generation rules change.
pub const GENERATOR_VERSION: &str = "1";

/// Aperiodicity self-loop mass given to every location whose traversal
/// scale does not exceed 1: the robot pauses and restarts its run with
/// probability 1/10. Expanding locations are skipped so the loop cannot
/// create a product-above-1 cycle.
fn self_mass() -> Rat {
    Rat::of(1, 10)
}

/// The eight 45-degree plane regions, counterclockwise from the positive
/// X axis; the guard of every region is its larger-angle facet.
pub fn region_sectors() -> [Sector; 8] {
    let rays = [
        Ray::of(1, 0),
        Ray::of(1, 1),
        Ray::of(0, 1),
        Ray::of(-1, 1),
        Ray::of(-1, 0),
        Ray::of(-1, -1),
        Ray::of(0, -1),
        Ray::of(1, -1),
    ];
    std::array::from_fn(|i| Sector::new(rays[i], rays[(i + 1) % 8]).unwrap())
}

/// Counterclockwise flow of `a*dx/dt + b*dy/dt = 0` for the per-region
/// coefficient assignment with drawn magnitude `k`:
/// regions 1-2 use (a, b) = (1, k), 3-4 use (-k, 1), 5-6 use (-1, -k),
/// 7-8 use (k, -1); the ccw direction is (-b, a) throughout.
fn region_flow(region: usize, k: i64) -> FlowVec {
    match region {
        0 | 1 => FlowVec::ints(-k, 1),
        2 | 3 => FlowVec::ints(-1, -k),
        4 | 5 => FlowVec::ints(k, -1),
        6 | 7 => FlowVec::ints(1, k),
        _ => unreachable!("eight regions"),
    }
}

/// Configuration of the three experiment families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// 1: all flows drawn from the family (stable); 2: one strongly
    /// expanding location; 3: one diverging location
    pub experiment: u8,
    pub locs_per_region: usize,
    /// inclusive coefficient range for the drawn magnitudes
    pub coeff_min: i64,
    pub coeff_max: i64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(experiment: u8, seed: u64) -> Self {
        ExperimentConfig {
            experiment,
            locs_per_region: 12,
            coeff_min: 1,
            coeff_max: 5,
            seed,
        }
    }
}

/// Generates one experiment model: `8 * locs_per_region` locations in the
/// eight regions, guards on the larger-angle facets, switch targets the
/// counterclockwise-adjacent region with random integer weights 1..9
/// normalized exactly, plus the aperiodicity self-loop mass on
/// non-expanding locations.
///
/// Experiment 2 overrides region 2's first location with the strongly
/// expanding flow of a=50, b=1 (quotient scale 51); experiment 3 overrides
/// region 1's first location with a=1, b=-5, whose ccw direction (5, 1)
/// never leaves the region (an infinite edge).
pub fn gen_experiment(cfg: &ExperimentConfig) -> Ppcd {
    assert!((1..=3).contains(&cfg.experiment), "experiment is 1, 2 or 3");
    assert!(
        (1..=99).contains(&cfg.locs_per_region),
        "locations per region in 1..=99"
    );
    assert!(
        cfg.coeff_min >= 1 && cfg.coeff_max >= cfg.coeff_min,
        "coefficient range must be a nonempty positive range"
    );
    let sectors = region_sectors();
    let per = cfg.locs_per_region;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    let mut flows: Vec<Vec<FlowVec>> = (0..8)
        .map(|r| {
            (0..per)
                .map(|_| region_flow(r, rng.gen_range(cfg.coeff_min..=cfg.coeff_max)))
                .collect()
        })
        .collect();
    match cfg.experiment {
        2 => flows[1][0] = FlowVec::ints(-1, 50),
        3 => flows[0][0] = FlowVec::ints(5, 1),
        _ => {}
    }

    let id_of = |region: usize, slot: usize| format!("r{}l{:02}", region + 1, slot);
    let mut locations = Vec::with_capacity(8 * per);
    for r in 0..8 {
        for j in 0..per {
            let weights: Vec<i64> = (0..per).map(|_| rng.gen_range(1..=9)).collect();
            let total: i64 = weights.iter().sum();
            let lazy = matches!(
                continuous_step(&sectors[r], sectors[r].lo(), &flows[r][j]),
                Ok(StepOutcome::Hit { scale, .. }) if scale <= Rat::one()
            );
            let keep = if lazy {
                &Rat::one() - &self_mass()
            } else {
                Rat::one()
            };
            let mut switch = BTreeMap::new();
            for (t, w) in weights.iter().enumerate() {
                switch.insert(id_of((r + 1) % 8, t), &keep * &Rat::of(*w, total));
            }
            if lazy {
                switch.insert(id_of(r, j), self_mass());
            }
            locations.push(Location {
                id: id_of(r, j),
                invariant: sectors[r].clone(),
                flow: flows[r][j].clone(),
                guard: FacetTag::Hi,
                switch,
            });
        }
    }
    Ppcd::new(locations, &id_of(0, 0), FacetTag::Lo).expect("generated ids are unique")
}

/// Configuration of the faulty-actuator case study: per quadrant `i`, the
/// robot picks heading `j` with probability `probs[i][j]` on entry.
#[derive(Debug, Clone)]
pub struct CaseStudyConfig {
    /// heading flow vectors per quadrant; `k_i = headings[i].len()`
    pub headings: [Vec<FlowVec>; 4],
    /// deviation probabilities per quadrant, each summing to exactly 1
    pub probs: [Vec<Rat>; 4],
    /// aperiodicity self-loop mass for non-expanding modes
    pub self_mass: Rat,
}

impl CaseStudyConfig {
    /// One heading per quadrant, each chosen with probability 1.
    pub fn single_headings(flows: [FlowVec; 4]) -> Self {
        CaseStudyConfig {
            headings: flows.map(|f| vec![f]),
            probs: std::array::from_fn(|_| vec![Rat::one()]),
            self_mass: self_mass(),
        }
    }
}

/// Generates the quadrant-partition case study with `k_i` modes per
/// quadrant. Headings must keep trajectories in the counterclockwise
/// facet-to-facet regime: each mode's continuous step is validated to hit
/// the quadrant's guard.
pub fn gen_case_study(cfg: &CaseStudyConfig) -> Result<Ppcd, PpcdError> {
    let quadrants = [
        Sector::new(Ray::of(1, 0), Ray::of(0, 1)).unwrap(),
        Sector::new(Ray::of(0, 1), Ray::of(-1, 0)).unwrap(),
        Sector::new(Ray::of(-1, 0), Ray::of(0, -1)).unwrap(),
        Sector::new(Ray::of(0, -1), Ray::of(1, 0)).unwrap(),
    ];
    let id_of = |quadrant: usize, mode: usize| format!("q{}m{}", quadrant + 1, mode);
    let mut locations = Vec::new();
    for (i, quadrant) in quadrants.iter().enumerate() {
        let k = cfg.headings[i].len();
        assert_eq!(
            cfg.probs[i].len(),
            k,
            "quadrant {} needs one probability per heading",
            i + 1
        );
        for (j, flow) in cfg.headings[i].iter().enumerate() {
            let id = id_of(i, j);
            let scale = match continuous_step(quadrant, quadrant.lo(), flow)? {
                StepOutcome::Hit { exit, scale, .. } if &exit == quadrant.hi() => scale,
                StepOutcome::Hit { .. } | StepOutcome::Diverge => {
                    return Err(PpcdError::HitNonGuardFacet {
                        loc: id,
                        facet: FacetTag::Lo,
                        hit: *quadrant.lo(),
                    })
                }
                StepOutcome::Stuck(reason) => {
                    return Err(PpcdError::StuckTrajectory {
                        loc: id,
                        facet: FacetTag::Lo,
                        reason,
                    })
                }
            };
            let next = (i + 1) % 4;
            let lazy = scale <= Rat::one();
            let keep = if lazy {
                &Rat::one() - &cfg.self_mass
            } else {
                Rat::one()
            };
            let mut switch = BTreeMap::new();
            for (m, p) in cfg.probs[next].iter().enumerate() {
                switch.insert(id_of(next, m), &keep * p);
            }
            if lazy {
                let entry = switch.entry(id.clone()).or_insert_with(Rat::zero);
                *entry = &*entry + &cfg.self_mass;
            }
            locations.push(Location {
                id,
                invariant: quadrant.clone(),
                flow: flow.clone(),
                guard: FacetTag::Hi,
                switch,
            });
        }
    }
    Ppcd::new(locations, "q1m0", FacetTag::Lo)
}

/// Generates an irreducible, aperiodic random chain: a Hamiltonian
/// backbone, a self-loop on every state, chords present with probability
/// `density`, integer weights 1..9 normalized to exact probabilities, and
/// finite scales a/b with a, b in 1..4.
pub fn gen_random_wdtmc(states: usize, density: &Rat, seed: u64) -> Wdtmc {
    assert!(states >= 1);
    assert!(
        density.is_positive() && *density <= Rat::one(),
        "density in (0, 1]"
    );
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let threshold: u64 = ((density.numer() << 64u32) / density.denom())
        .to_u64()
        .unwrap_or(u64::MAX);
    let n = states;

    let mut present = vec![vec![false; n]; n];
    for (i, row) in present.iter_mut().enumerate() {
        row[i] = true;
        row[(i + 1) % n] = true;
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || j == (i + 1) % n {
                continue;
            }
            if rng.next_u64() < threshold {
                present[i][j] = true;
            }
        }
    }

    let mut edges = Vec::new();
    for (i, row) in present.iter().enumerate() {
        let dsts: Vec<usize> = (0..n).filter(|&j| row[j]).collect();
        let weights: Vec<i64> = dsts.iter().map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = weights.iter().sum();
        for (&j, w) in dsts.iter().zip(&weights) {
            let num = rng.gen_range(1..=4i64);
            let den = rng.gen_range(1..=4i64);
            edges.push(Edge {
                src: i,
                dst: j,
                prob: Rat::of(*w, total),
                weight: Scale::finite(Rat::of(num, den)).expect("positive ratio"),
            });
        }
    }
    Wdtmc::new((0..n).map(|i| format!("s{i}")).collect(), edges, 0).expect("indices in range")
}
