//! Detection of global nodes in region-labeled directed graphs.
//!
//! A node is *global* when its label places it inside a region but its
//! connectivity is spread across many regions. Detection follows four
//! stages: fix anchor nodes per region, compute hop-distance and
//! neighbor-mix features, train a classifier on polarized samples, and flag
//! in-scope nodes the classifier assigns to the catch-all class.

pub mod classifiers;
pub mod cli;
pub mod config;
pub mod eval;
pub mod error;
pub mod features;
pub mod graph;
pub mod labels;
pub mod pipeline;
pub mod rng;
pub mod sampler;
pub mod synthgen;

pub use error::{Error, Result, Stage};
