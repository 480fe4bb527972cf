//! Exact 2D geometry of positively-scaling-invariant polyhedral cones:
//! primitive-direction rays, salient convex sectors, and the flow-line /
//! facet intersections whose scaling factors become quotient edge weights.
//!
//! Everything is decided with exact rational 2x2 solves; the scaling factor
//! of a step is independent of which point of the entry facet is probed,
//! which is what makes the facet quotient well defined.

use crate::exact::{gcd_i64, Rat, Vec2Q};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Geometry errors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error("ray direction must be nonzero")]
    ZeroDirection,
    #[error("flow vector must be nonzero")]
    ZeroFlow,
    #[error("sector facets are collinear; the cone is degenerate or reflex")]
    DegenerateSector,
    #[error("flow is parallel to the target ray with no intersection")]
    DegenerateSystem,
    #[error("entry ray is not a facet of the sector")]
    EntryNotAFacet,
}

/// Half-line `{t * dir : t > 0} ∪ {0}` with a primitive integer direction.
/// Directions keep their sign: opposite rays are distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ray {
    dx: i64,
    dy: i64,
}

impl Ray {
    pub fn new(dx: i64, dy: i64) -> Result<Self, GeomError> {
        if dx == 0 && dy == 0 {
            return Err(GeomError::ZeroDirection);
        }
        let g = gcd_i64(dx, dy);
        Ok(Ray {
            dx: dx / g,
            dy: dy / g,
        })
    }

    pub fn of(dx: i64, dy: i64) -> Self {
        Ray::new(dx, dy).expect("nonzero direction")
    }

    pub fn dx(&self) -> i64 {
        self.dx
    }

    pub fn dy(&self) -> i64 {
        self.dy
    }

    pub fn dir(&self) -> Vec2Q {
        Vec2Q::new(Rat::int(self.dx), Rat::int(self.dy))
    }

    fn cross(&self, other: &Ray) -> i128 {
        self.dx as i128 * other.dy as i128 - self.dy as i128 * other.dx as i128
    }

    /// Whether `p` lies on this ray (positive side, origin included).
    pub fn contains(&self, p: &Vec2Q) -> bool {
        p.cross(&self.dir()).is_zero() && !p.dot(&self.dir()).is_negative()
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.dx, self.dy)
    }
}

impl Serialize for Ray {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.dx, self.dy].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ray {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [dx, dy] = <[i64; 2]>::deserialize(deserializer)?;
        Ray::new(dx, dy).map_err(de::Error::custom)
    }
}

/// Salient convex cone `{a*lo + b*hi : a, b >= 0}` spanned by two
/// non-collinear facet rays; spans strictly less than pi by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sector {
    lo: Ray,
    hi: Ray,
}

impl Sector {
    pub fn new(lo: Ray, hi: Ray) -> Result<Self, GeomError> {
        if lo.cross(&hi) == 0 {
            return Err(GeomError::DegenerateSector);
        }
        Ok(Sector { lo, hi })
    }

    pub fn lo(&self) -> &Ray {
        &self.lo
    }

    pub fn hi(&self) -> &Ray {
        &self.hi
    }

    /// Exact coordinates of `p` in the (lo, hi) basis.
    fn coordinates(&self, p: &Vec2Q) -> (Rat, Rat) {
        let det = Rat::int(self.lo.cross(&self.hi));
        let alpha = &p.cross(&self.hi.dir()) / &det;
        let beta = &self.lo.dir().cross(p) / &det;
        (alpha, beta)
    }

    /// Membership in the closed cone; the apex 0 is always contained.
    pub fn contains(&self, p: &Vec2Q) -> bool {
        let (alpha, beta) = self.coordinates(p);
        !alpha.is_negative() && !beta.is_negative()
    }

    /// Membership in the interior (both coordinates strictly positive).
    pub fn contains_interior(&self, p: &Vec2Q) -> bool {
        let (alpha, beta) = self.coordinates(p);
        alpha.is_positive() && beta.is_positive()
    }
}

impl<'de> Deserialize<'de> for Sector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            lo: Ray,
            hi: Ray,
        }
        let r = Repr::deserialize(deserializer)?;
        Sector::new(r.lo, r.hi).map_err(de::Error::custom)
    }
}

/// Nonzero constant flow vector of a location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowVec(Vec2Q);

impl FlowVec {
    pub fn new(v: Vec2Q) -> Result<Self, GeomError> {
        if v.is_zero() {
            return Err(GeomError::ZeroFlow);
        }
        Ok(FlowVec(v))
    }

    pub fn of(x: (i64, i64), y: (i64, i64)) -> Self {
        FlowVec::new(Vec2Q::of(x, y)).expect("nonzero flow")
    }

    pub fn ints(x: i64, y: i64) -> Self {
        FlowVec::of((x, 1), (y, 1))
    }

    pub fn vec(&self) -> &Vec2Q {
        &self.0
    }
}

impl Serialize for FlowVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FlowVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        FlowVec::new(Vec2Q::deserialize(deserializer)?).map_err(de::Error::custom)
    }
}

/// Exact intersection data for a flow line launched from a ray.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayHit {
    /// time parameter T of the intersection, strictly positive
    pub time_ratio: Rat,
    /// ray parameter s of the landing point `s * target.dir`, strictly positive
    pub s: Rat,
    /// `inf_norm(landing) / inf_norm(start)`, the step's weight carrier
    pub scale: Rat,
}

/// Solves `point + flow * T = s * target.dir` exactly.
///
/// Returns the parameters when both `T > 0` and `s > 0`, `None` when the
/// flow line misses the positive side of the target at positive time.
pub fn trajectory_hit(point: &Vec2Q, flow: &Vec2Q, target: &Ray) -> Option<RayHit> {
    let det = target.dir().cross(flow);
    if det.is_zero() {
        return None;
    }
    let time = &point.cross(&target.dir()) / &det;
    let s = &point.cross(flow) / &det;
    if !time.is_positive() || !s.is_positive() {
        return None;
    }
    let landing = target.dir().scaled(&s);
    let scale = &landing.inf_norm() / &point.inf_norm();
    Some(RayHit {
        time_ratio: time,
        s,
        scale,
    })
}

/// [`trajectory_hit`] from the canonical point `entry.dir`. The resulting
/// scale is independent of which point of `entry` is chosen. Reports
/// `DegenerateSystem` when the flow is parallel to the target direction.
pub fn ray_hit(entry: &Ray, flow: &FlowVec, target: &Ray) -> Result<Option<RayHit>, GeomError> {
    if target.dir().cross(flow.vec()).is_zero() {
        return Err(GeomError::DegenerateSystem);
    }
    Ok(trajectory_hit(&entry.dir(), flow.vec(), target))
}

/// Why a continuous step got stuck.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StuckReason {
    /// No positive time keeps the trajectory inside the sector.
    ImmediateExit,
    /// The flow runs along the entry facet toward the apex 0.
    TowardApex,
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StuckReason::ImmediateExit => write!(f, "flow exits the sector immediately"),
            StuckReason::TowardApex => write!(f, "flow runs along the entry facet into the apex"),
        }
    }
}

/// Outcome of evolving from a facet of a sector under a constant flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    /// The trajectory reaches `exit` at the first positive hit time with a
    /// strictly positive landing parameter.
    Hit {
        exit: Ray,
        scale: Rat,
        dwell_positive: bool,
    },
    /// The trajectory stays inside the sector for all positive times: the
    /// flow is a nonnegative combination of the facet directions.
    Diverge,
    Stuck(StuckReason),
}

/// One continuous evolution step: from a point of the `entry` facet of
/// `sec`, follow `flow` until a facet of `sec` is reached.
///
/// Exactly one of Hit / Diverge / Stuck results:
/// - the earliest strictly-positive facet hit with positive landing wins
///   (the re-entry hit against `entry` itself is also checked);
/// - otherwise the flow pointing into the closed cone means divergence;
/// - otherwise the trajectory leaves immediately, or slides down the entry
///   facet into the apex.
pub fn continuous_step(
    sec: &Sector,
    entry: &Ray,
    flow: &FlowVec,
) -> Result<StepOutcome, GeomError> {
    if entry != sec.lo() && entry != sec.hi() {
        return Err(GeomError::EntryNotAFacet);
    }
    let other = if entry == sec.lo() {
        sec.hi()
    } else {
        sec.lo()
    };

    let hit_of = |target: &Ray| -> Option<(Ray, RayHit)> {
        match ray_hit(entry, flow, target) {
            Ok(Some(h)) => Some((*target, h)),
            Ok(None) | Err(GeomError::DegenerateSystem) => None,
            Err(e) => unreachable!("ray_hit only raises DegenerateSystem, got {e:?}"),
        }
    };
    let candidates = [hit_of(other), hit_of(entry)];
    let best = candidates
        .into_iter()
        .flatten()
        .min_by(|a, b| a.1.time_ratio.cmp(&b.1.time_ratio));
    if let Some((exit, hit)) = best {
        return Ok(StepOutcome::Hit {
            exit,
            scale: hit.scale,
            dwell_positive: true,
        });
    }

    let (alpha, beta) = sec.coordinates(flow.vec());
    if !alpha.is_negative() && !beta.is_negative() {
        return Ok(StepOutcome::Diverge);
    }

    // anti-parallel to the entry facet: slides into the apex
    let toward_apex =
        flow.vec().cross(&entry.dir()).is_zero() && flow.vec().dot(&entry.dir()).is_negative();
    Ok(StepOutcome::Stuck(if toward_apex {
        StuckReason::TowardApex
    } else {
        StuckReason::ImmediateExit
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn first_quadrant() -> Sector {
        Sector::new(Ray::of(1, 0), Ray::of(0, 1)).unwrap()
    }

    #[test]
    fn rays_reduce_to_primitive_keeping_sign() {
        assert_eq!(Ray::of(2, 4), Ray::of(1, 2));
        assert_ne!(Ray::of(-1, -2), Ray::of(1, 2));
        assert!(Ray::new(0, 0).is_err());
    }

    #[test]
    fn sector_rejects_collinear_facets() {
        assert!(Sector::new(Ray::of(1, 0), Ray::of(2, 0)).is_err());
        assert!(Sector::new(Ray::of(1, 0), Ray::of(-1, 0)).is_err());
    }

    #[test]
    fn sector_contains_examples() {
        let q1 = first_quadrant();
        assert!(q1.contains(&Vec2Q::of((1, 1), (1, 1))));
        assert!(!q1.contains(&Vec2Q::of((-1, 1), (1, 1))));
        // boundary counts
        assert!(q1.contains(&Vec2Q::of((3, 1), (0, 1))));
        // apex counts
        assert!(q1.contains(&Vec2Q::of((0, 1), (0, 1))));
    }

    #[test]
    fn ray_hit_unit_truths() {
        let entry = Ray::of(1, 0);
        let target = Ray::of(0, 1);

        // 45-degree symmetry: T = 1, landing (0,1), scale 1
        let h = ray_hit(&entry, &FlowVec::ints(-1, 1), &target)
            .unwrap()
            .unwrap();
        assert_eq!(h.time_ratio, Rat::one());
        assert_eq!(h.s, Rat::one());
        assert_eq!(h.scale, Rat::one());

        // steeper flow lands at (0,2): scale 2
        let h = ray_hit(&entry, &FlowVec::ints(-1, 2), &target)
            .unwrap()
            .unwrap();
        assert_eq!(h.time_ratio, Rat::one());
        assert_eq!(h.scale, Rat::of(2, 1));

        // flow pointing away: T would be negative
        assert_eq!(
            ray_hit(&entry, &FlowVec::ints(1, 1), &target).unwrap(),
            None
        );

        // flow parallel to the target ray
        assert_eq!(
            ray_hit(&entry, &FlowVec::ints(0, 1), &target),
            Err(GeomError::DegenerateSystem)
        );
    }

    #[test]
    fn continuous_step_unit_truths() {
        let q1 = first_quadrant();
        let entry = Ray::of(1, 0);

        let hit = continuous_step(&q1, &entry, &FlowVec::ints(-1, 1)).unwrap();
        assert_eq!(
            hit,
            StepOutcome::Hit {
                exit: Ray::of(0, 1),
                scale: Rat::one(),
                dwell_positive: true
            }
        );

        // interior direction lo + hi stays forever
        assert_eq!(
            continuous_step(&q1, &entry, &FlowVec::ints(1, 1)).unwrap(),
            StepOutcome::Diverge
        );

        // exits below the x-axis immediately
        assert_eq!(
            continuous_step(&q1, &entry, &FlowVec::ints(1, -1)).unwrap(),
            StepOutcome::Stuck(StuckReason::ImmediateExit)
        );

        assert_eq!(
            continuous_step(&q1, &Ray::of(1, 1), &FlowVec::ints(-1, 1)),
            Err(GeomError::EntryNotAFacet)
        );
    }

    #[test]
    fn outward_facet_flow_diverges_inward_is_stuck() {
        let q1 = first_quadrant();
        let entry = Ray::of(1, 0);
        assert_eq!(
            continuous_step(&q1, &entry, &FlowVec::ints(3, 0)).unwrap(),
            StepOutcome::Diverge
        );
        assert_eq!(
            continuous_step(&q1, &entry, &FlowVec::ints(-2, 0)).unwrap(),
            StepOutcome::Stuck(StuckReason::TowardApex)
        );
    }

    #[test]
    fn point_independence_of_the_step_scale() {
        // the scale from alpha * entry.dir matches the canonical one
        let entry = Ray::of(1, 0);
        let target = Ray::of(0, 1);
        for flow in [
            FlowVec::ints(-1, 2),
            FlowVec::ints(-2, 5),
            FlowVec::ints(-1, 1),
        ] {
            let canon = ray_hit(&entry, &flow, &target).unwrap().unwrap();
            for alpha in [Rat::of(1, 3), Rat::of(2, 1), Rat::of(7, 5)] {
                let p = entry.dir().scaled(&alpha);
                let h = trajectory_hit(&p, flow.vec(), &target).unwrap();
                assert_eq!(h.scale, canon.scale);
            }
        }
    }

    #[test]
    fn hit_midpoint_lies_in_the_interior() {
        let q1 = first_quadrant();
        let entry = Ray::of(1, 0);
        let flow = FlowVec::ints(-1, 3);
        let hit = ray_hit(&entry, &flow, &Ray::of(0, 1)).unwrap().unwrap();
        let half = &hit.time_ratio / &Rat::of(2, 1);
        let mid = entry.dir().add(&flow.vec().scaled(&half));
        assert!(q1.contains_interior(&mid));
        let landing = Ray::of(0, 1).dir().scaled(&hit.s);
        assert!(q1.contains(&landing));
        assert!(Ray::of(0, 1).contains(&landing));
    }

    #[test]
    fn diverge_iff_nonnegative_combination() {
        // non-axis sector to exercise the general solve
        let sec = Sector::new(Ray::of(2, 1), Ray::of(-1, 3)).unwrap();
        let entry = Ray::of(2, 1);
        for dx in -5..=5i64 {
            for dy in -5..=5i64 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let flow = FlowVec::ints(dx, dy);
                let outcome = continuous_step(&sec, &entry, &flow).unwrap();
                let (a, b) = (
                    // coordinates of the flow in the facet basis
                    sec.contains(flow.vec()),
                    outcome == StepOutcome::Diverge,
                );
                assert_eq!(a, b, "flow ({dx},{dy})");
                if b {
                    for t in [1i64, 10, 1000] {
                        let p = entry.dir().add(&flow.vec().scaled(&Rat::int(t)));
                        assert!(sec.contains(&p));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn sector_membership_is_positively_homogeneous(
            ldx in -4i64..=4, ldy in -4i64..=4,
            hdx in -4i64..=4, hdy in -4i64..=4,
            px in -6i64..=6, py in -6i64..=6,
            (an, ad) in (1i64..12, 1i64..12),
        ) {
            prop_assume!((ldx, ldy) != (0, 0) && (hdx, hdy) != (0, 0));
            let lo = Ray::of(ldx, ldy);
            let hi = Ray::of(hdx, hdy);
            prop_assume!(Sector::new(lo, hi).is_ok());
            let sec = Sector::new(lo, hi).unwrap();
            let p = Vec2Q::of((px, 1), (py, 1));
            let alpha = Rat::of(an, ad);
            prop_assert_eq!(sec.contains(&p), sec.contains(&p.scaled(&alpha)));
        }

        #[test]
        fn exactly_one_outcome_over_integer_sweep(
            ldx in -5i64..=5, ldy in -5i64..=5,
            hdx in -5i64..=5, hdy in -5i64..=5,
            fdx in -5i64..=5, fdy in -5i64..=5,
            from_lo in proptest::bool::ANY,
        ) {
            prop_assume!((ldx, ldy) != (0, 0) && (hdx, hdy) != (0, 0));
            prop_assume!((fdx, fdy) != (0, 0));
            let lo = Ray::of(ldx, ldy);
            let hi = Ray::of(hdx, hdy);
            prop_assume!(Sector::new(lo, hi).is_ok());
            let sec = Sector::new(lo, hi).unwrap();
            let entry = if from_lo { lo } else { hi };
            let flow = FlowVec::ints(fdx, fdy);
            // must classify without panicking, into exactly one variant
            let outcome = continuous_step(&sec, &entry, &flow).unwrap();
            match outcome {
                StepOutcome::Hit { scale, dwell_positive, .. } => {
                    prop_assert!(scale.is_positive());
                    prop_assert!(dwell_positive);
                }
                StepOutcome::Diverge => {
                    prop_assert!(sec.contains(flow.vec()));
                }
                StepOutcome::Stuck(_) => {
                    prop_assert!(!sec.contains(flow.vec()));
                }
            }
        }
    }
}
