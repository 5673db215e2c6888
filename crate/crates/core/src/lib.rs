//! Distributed minimum-spanning-forest engine.
//!
//! The crate computes minimum spanning forests of weighted undirected graphs
//! with two distributed contraction algorithms (`boruvka` and a recursive
//! filtering variant, `filter`) running on an in-process SPMD runtime that
//! models a message-passing machine with `p` processing elements. Sequential
//! reference algorithms, seeded graph generators and a benchmark harness make
//! every distributed mechanism checkable on a single machine.

pub mod boruvka;
pub mod comm;
pub mod error;
pub mod filter;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod preproc;
pub mod report;
pub mod runner;
pub mod transport;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
