//! Generator and evaluation harness for randomised social-relation task
//! graphs.

pub mod cli;
pub mod engine;
pub mod generator;
pub mod graph;
pub mod naming;
pub mod oracle;
pub mod par;
pub mod render;
pub mod schema;
pub mod scoring;
