//! Simulator and library for a blockchain publication economy.
//!
//! * [`ledger`]: append-only record of accounts, papers, reviews, reader
//!   scores and blocks, with the publication validation rules.
//! * [`store`]: content-addressed blob storage for papers and comments.
//! * [`scoring`]: trimmed-mean review scores and weighted paper scores.
//! * [`tokenomics`]: per-block settlement of author, reviewer and miner rewards.
//! * [`adversary`]: honest and malicious score generators for attack studies.
//! * [`harness`]: parameter sweeps, scripted economy runs and self-checks.

pub mod adversary;
pub mod amount;
pub mod harness;
pub mod ledger;
pub mod params;
pub mod scoring;
pub mod store;
pub mod tokenomics;

pub use amount::{Amount, Ratio};
pub use ledger::{Address, Ledger, LedgerError};
pub use params::{ConfigError, EconomicParams, Phase};
