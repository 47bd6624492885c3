//! Workbench for predicting annealer accuracy on Maximum Clique.
//!
//! The pipeline samples random graphs, builds the clique QUBO, embeds it on an
//! ideal Chimera graph, samples it with a pluggable annealer backend, labels
//! each instance against an exact solver and trains tree models on 46
//! structural features of the input, QUBO and embedded graphs.

pub mod anneal;
pub mod chimera;
pub mod error;
pub mod features;
pub mod graph;
pub mod learn;
pub mod oracle;
pub mod pipeline;
pub mod qubo;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::Graph;
