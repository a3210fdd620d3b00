//! External-memory keyword search over relational data graphs.
//!
//! Tuples become nodes of a [`graph::DataGraph`]; a query is a list of terms,
//! each matching a set of nodes, and answers are rooted trees connecting one
//! node per term. Large graphs are partitioned into clusters that live on
//! disk: the search first runs on the small cluster-level graph, then loads
//! only the clusters its answers touch and searches again at node level.

pub mod clustering;
pub mod engine;
pub mod error;
pub mod graph;
pub mod index;
pub mod scoring;
pub mod search;
pub mod storage;

pub use error::{Error, Result};
