//! Topic and community inference for social interaction networks.
//!
//! Three collapsed Gibbs samplers share one core: IPM infers
//! population-level interest patterns per document, UIPM ties topic
//! mixtures to users, and CIPM jointly infers user communities from
//! mention events alongside the topics. Model selection runs on
//! held-out perplexity; the mention graph itself is characterized with
//! standard node- and graph-level metrics plus a power-law degree fit.
//!
//! Everything stochastic draws from a seeded ChaCha8 stream, and all
//! parallel sections reduce in index order, so identical inputs and
//! seeds produce byte-identical artifacts with any thread count, with
//! or without the `parallel` feature.

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod export;
pub mod graph;
pub mod models;
pub mod parallel;
pub mod rng;
pub mod sampler;
pub mod synthgen;

pub use error::{Error, Result};
