//! Willingness maximization for social groups.
//!
//! Pick a connected group of `k` people from a scored social graph so that the
//! sum of interest and mutual tightness is as large as possible.

pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod probability;
pub mod sampler;
pub mod scenario;
pub mod solution;
pub mod solver;
pub mod synth;

pub use error::{Result, WasoError};
pub use graph::{GraphBuilder, NodeId, NodeRecord, SocialGraph, WeightMode};
pub use probability::SelectionProbabilityVector;
pub use solution::{breakdown, Breakdown, Solution};
