//! File formats, bundled fixtures and the command-line interface on top of
//! [`anytime_core`].

pub mod cli;
pub mod document;
pub mod fixtures;
pub mod render;
pub mod report;
pub mod svg;
pub mod weighting;

pub use anytime_core as core;
