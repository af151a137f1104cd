//! Underlying simulation, realized volatility, volatility alignment and the
//! Black-Scholes baseline.

mod bsm;
mod paths;
mod vol;

pub use bsm::{bsm_price, bsm_sweep, SweepMonth, SweepRow, SweepTable};
pub use paths::{paths_from_increments, simulate_paths, PathBatch};
pub use vol::{align_index, realized_vol, years_from_days, VolTrajectory, TRADING_DAYS};
