//! Edge-enhanced segmentation routing: edge operators, image meta-features,
//! mask quality metrics, a per-modality routing rule trained by exhaustive
//! stump search, and the paired-test / regression statistics used to analyse
//! routed pipelines.
//!
//! This crate is `no_std` (with `alloc`) and holds only the pure algorithmic
//! parts. File formats, manifests, and the command-line driver live in the
//! companion `edgeroute` crate.

#![no_std]

extern crate alloc;

pub mod edge;
pub mod edt;
pub mod features;
pub mod grid;
pub mod metrics;
pub mod predict;
pub mod report;
pub mod router;
pub mod split;
pub mod stats;
pub mod synth;

pub use grid::{Image, Mask, ProbMap};
