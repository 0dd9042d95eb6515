//! Tools for auditing and searching for less discriminatory alternative
//! classifiers (LDAs).
//!
//! - [`population`]: cell tallies, randomized classifiers and their metrics.
//! - [`polygon`]: the feasible disparity/utility region and its frontier.
//! - [`fullinfo`]: exact and approximate LDA solvers over known distributions,
//!   plus the Subset-Sum reduction and a random instance generator.
//! - [`bench`]: runtime and hit-rate comparison of those solvers.
//! - [`search`]: retrain-and-select search over many models with held-out evaluation.
//! - [`data`]: CSV ingestion, dataset schemas and synthetic data.

pub mod bench;
pub mod data;
pub mod error;
pub mod fullinfo;
pub mod polygon;
pub mod population;
pub mod search;
pub mod seed;

pub use error::{LdaError, Result};
