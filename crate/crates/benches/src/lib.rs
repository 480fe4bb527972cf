//! Shared fixtures for the pipeline benchmarks.

use ppcd_core::generators::{gen_experiment, ExperimentConfig};
use ppcd_core::Ppcd;

/// The stable 96-location experiment model used across benchmarks.
pub fn experiment_model(experiment: u8) -> Ppcd {
    gen_experiment(&ExperimentConfig::new(experiment, 7))
}
