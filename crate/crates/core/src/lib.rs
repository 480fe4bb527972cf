//! Exact stability analysis of planar probabilistic piecewise-constant-
//! derivative systems.
//!
//! A planar model of cone-invariant locations with constant flows and
//! probabilistic guard switching reduces to a finite weighted Markov chain
//! over (location, facet) states; absolute stability is decided by
//! reachability and exact positive-cycle detection on that chain, and
//! almost-sure stability by the sign of the stationary-weighted edge
//! product. All decisions use exact rational arithmetic; floats appear
//! only in reports and Monte-Carlo summaries.
//!
//! - [`exact`]: arbitrary-precision rationals, scales, vectors, the exact
//!   linear solver, and exact log-sign decisions;
//! - [`geom2d`]: rays, salient cone sectors, and flow/facet intersections;
//! - [`wdtmc`]: the weighted chain model and every chain-level analysis;
//! - [`ppcd`]: the hybrid model, its quotient construction, simulation,
//!   and the top-level analyzer;
//! - [`generators`]: deterministic experiment, case-study, and random-chain
//!   generators.

pub mod exact;
pub mod generators;
pub mod geom2d;
pub mod ppcd;
pub mod wdtmc;

pub use exact::{Rat, RatMatrix, Scale, Vec2Q};
pub use geom2d::{FlowVec, Ray, Sector, StepOutcome};
pub use ppcd::{Analysis, FacetTag, Location, Ppcd, PpcdError, PpcdFile, Quotient};
pub use wdtmc::{
    ChainError, Decision, Distribution, Edge, PathFin, Verdict, Wdtmc, WdtmcFile, Witness,
};
