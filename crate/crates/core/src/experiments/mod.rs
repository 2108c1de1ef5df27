//! Experiment runners producing [`ResultTable`]s.

mod averaged;
mod convergence;
mod counterexample;
mod phase;
mod table;

pub use averaged::{
    averaged_table, averaged_window, pairs_table, run_averaged_convergence, run_windows, AveragedConfig, LevelPair,
    WeightPolicy, WindowResult,
};
pub use convergence::{run_redistribution_convergence, ConvergenceConfig};
pub use counterexample::{counterexample_steps, run_counterexample_check, CounterexampleParams, CounterexampleStep};
pub use phase::{run_phase_scan, PhaseConfig};
pub use table::{config_hash, Cell, OutputFormat, ResultTable};

use crate::error::{Error, Result};

/// Grids must be non-empty, positive and strictly increasing.
fn check_grid(grid: &[u64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} is empty")));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("{what} must be positive and strictly increasing")));
    }
    Ok(())
}
