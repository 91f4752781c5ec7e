//! Seeded graph matching and local vertex nomination.
//!
//! The pipeline: [`nomination::nominate`] finds the seeds near a vertex of
//! interest, cuts out neighborhoods of those seeds in both graphs, and
//! soft-matches them with [`soft_sgm::soft_sgm`], which averages many
//! Frank-Wolfe runs ([`sgm`]) whose linear subproblems are solved exactly by
//! [`assignment::max_assignment`]. [`models`] samples correlated graph pairs
//! with known ground truth and [`experiment`] runs Monte Carlo studies over
//! them.

pub mod assignment;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod models;
pub mod nomination;
pub mod rng;
pub mod sgm;
pub mod soft_sgm;

pub use error::{Error, Result};
pub use graph::{Graph, Hops, SeedMap, VertexSet};
pub use nomination::{evaluate_tau, nominate, Nomination, NominationList, TauResult, VnConfig};
pub use soft_sgm::{soft_sgm, SoftMatch, SoftSgmConfig};
