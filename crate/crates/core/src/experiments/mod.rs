//! Disorder-averaged pipelines producing plot-ready tables.
//!
//! Every pipeline spreads its (scan point × realization) task grid over the
//! current rayon pool and reduces each point in realization order, so the
//! output does not depend on the thread count.

mod average;
mod config;
mod pipelines;

pub use average::{average_grid, disorder_average, Averaged};
pub use config::{
    ArrayConfig, DepumpConfig, DriveConfig, DriveDirection, ExperimentConfig, NumericsConfig, PositionConfig,
    PowerConfig, RamseyConfig, ScanConfig, SpacingConfig, TrapConfig, TrapModel,
};
pub use pipelines::{
    depump, fringe_detunings, position_resolved, ramsey_vs_time, shift_vs_power, shift_vs_spacing, spectrum, Pipeline,
    Spectrum,
};
