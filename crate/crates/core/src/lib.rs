//! Dynamic data structure for graphs of bounded tree-depth.
//!
//! The structure keeps an explicit compressed tree-depth decomposition under
//! edge and isolated-vertex updates and answers a fixed MSO query in constant
//! time. Every component ships with an exhaustive oracle used by the tests
//! and the trace harness.

pub mod dynamic;
pub mod graph;
pub mod harness;
pub mod minimal;
pub mod mso;
pub mod static_core;
