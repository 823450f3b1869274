//! Evaluation toolkit for causal representation learning experiments.
//!
//! The crate covers four layers:
//!
//! * [`model`] and [`graph`]: typed causal graphs, tables and structural checks
//!   (junctions, d-separation, confounders, graph comparison).
//! * [`independence`]: χ² audits of a graph against categorical data.
//! * [`representation`] and [`generation`]: disentanglement, reconstruction and
//!   counterfactual metrics computed from file-based artifacts.
//! * [`aggregate`]: normalization, radar and origami areas, and multi-run
//!   aggregation; [`report`] and [`svg`] render the results.
//!
//! [`scm`] provides a structural causal model simulator used as ground truth.

pub mod aggregate;
pub mod binning;
pub mod error;
pub mod generation;
pub mod graph;
pub mod independence;
pub mod model;
pub mod report;
pub mod representation;
pub mod scm;
pub mod svg;

pub use error::{Error, Result};
pub use model::{BinaryMask, CausalGraph, DataTable, RunLog, TableSchema, VariableKind, VariableSpec};
