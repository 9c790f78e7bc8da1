//! Detection of collusive "follower-market" accounts in a social graph.
//!
//! The pipeline builds a heterogeneous user–tweet–topic network from line-delimited
//! JSON dumps, decomposes it into four weighted user–user subgraphs (shared followees,
//! transition users, direct follows, shared topics), learns node embeddings with a
//! two-level subgraph aggregation network trained from scratch, and classifies users
//! with a one-class hypersphere boundary fitted around the known collusive accounts.
//!
//! Modules follow the pipeline stages:
//!
//! - [`hetnet`]: typed multigraph construction and neighbor queries
//! - [`topics`]: spherical k-means topic assignment over tweet embeddings
//! - [`decompose`]: the four relationship subgraphs and their statistics
//! - [`features`]: the 18-dimensional user-metadata feature matrix
//! - [`hsa`]: hierarchical subgraph aggregation (weighted convolution + attention
//!   fusion, stacked heads) with hand-written reverse-mode gradients
//! - [`detector`]: soft-boundary hypersphere objective, Adam training loop, scoring
//! - [`evalkit`]: synthetic dataset generation, ranking metrics, cross-validation
//! - [`pipeline`]: on-disk artifact orchestration behind the CLI subcommands

pub mod decompose;
pub mod detector;
pub mod error;
pub mod evalkit;
pub mod features;
pub mod hetnet;
pub mod hsa;
pub mod pipeline;
pub mod topics;

pub(crate) mod jsonl;

pub use error::{Error, Result};
