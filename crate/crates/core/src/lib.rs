//! Desk-scale laboratory for the local-cut decision in branch-and-cut.
//!
//! A miniature deterministic MIP solver exposes the two cutting
//! strategies (LC: cuts throughout the tree, NLC: cuts only at the
//! root); instance features, speedup labels and a from-scratch random
//! forest turn paired runs into a learned per-instance decision; the
//! evaluation module reproduces the benchmark bookkeeping (shifted
//! geometric means, brackets, affected instances, oracle gaps,
//! significance tests) used to judge it.

pub mod dataset;
pub mod evaluation;
pub mod features;
pub mod forest;
pub mod instance;
pub mod solver;
