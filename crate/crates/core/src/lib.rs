//! Star identification by subgraph matching, and a Monte Carlo study of how
//! the camera's field of view affects it.
//!
//! The pipeline, bottom up:
//!
//! * [`catalog`] reads the Yale Bright Star Catalog (or a CSV equivalent)
//!   and builds the filtered [`StarDatabase`];
//! * [`geometry`] holds the pinhole camera model and angular helpers;
//! * [`pairdb`] stores every star pair that fits in one frame, sorted by
//!   angle, with a versioned binary file format;
//! * [`matcher`] identifies measured stars against the pair database;
//! * [`montecarlo`] simulates shipboard observations and aggregates the
//!   identification statistics;
//! * [`cli`] wires these together behind the `starid` binary.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod matcher;
pub mod montecarlo;
pub mod pairdb;

pub use catalog::{StarDatabase, StarId, StarRecord};
pub use error::{Error, Result};
pub use matcher::{match_stars, CandidateSet, MatchOutcome, MeasuredStar};
pub use pairdb::{build_pair_db, PairDatabase, PairEntry};
