//! Path simulation: stable increments, jump-diffusion exits from `(-1, 1)`,
//! time changes and hitting-time observation series.

mod engine;
mod observations;
mod stable;
mod time_change;

pub use engine::{levy_increment, simulate_exit, ExitSimulator, HittingRecord, JumpDiffusion, StepScheme};
pub use observations::{simulate_observations, ObservationConfig, ObservationSeries, ObservationSimulator};
pub use stable::{stable_increment, StableSampler};
pub use time_change::{sample_time_change, TimeChangePath, TimeChangeSpec};
