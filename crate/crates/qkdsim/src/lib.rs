//! Std front end for `qkdsim-core`: configuration files, CSV output, a
//! parallel mission runner and the `qkdsim` command line.

pub mod cli;
pub mod config;
pub mod output;

use qkdsim_core::sim::{step, MissionConfig, StepRecord};
use rayon::prelude::*;

/// [`qkdsim_core::sim::run_mission`] with steps spread over the rayon pool.
/// Output is identical to the sequential run.
pub fn run_mission_parallel(config: &MissionConfig) -> qkdsim_core::Result<Vec<StepRecord>> {
    config.validate()?;
    (0..config.step_count()).into_par_iter().map(|k| step(config, k)).collect()
}
