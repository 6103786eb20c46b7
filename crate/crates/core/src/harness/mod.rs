//! Experiment drivers: adversarial sweeps, scripted economies, self-checks.

pub mod economy;
pub mod selftest;
pub mod sweep;

pub use economy::{run_economy, EconomyReport, ScenarioError, SETTLEMENT_CSV_HEADER};
pub use selftest::{selftest, CheckResult};
pub use sweep::{run_sweep, sweep_csv, SweepRow, SweepSpec, SWEEP_CSV_HEADER};
