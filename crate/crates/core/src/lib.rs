//! Certified maximum-rank positive semidefinite stress matrices for
//! lateration frameworks and anchored sensor networks.

// Dense kernels read more clearly with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod anchored;
pub mod cli;
pub mod framework;
pub mod generate;
pub mod graph;
pub mod json;
pub mod numerics;
pub mod sdp;
pub mod stress;
