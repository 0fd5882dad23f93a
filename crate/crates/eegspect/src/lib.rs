//! File formats, corpus cataloguing, configuration and the end-to-end
//! pipeline on top of `eegspect-core`.

pub use eegspect_core as core;

pub mod catalog;
pub mod config;
pub mod edf;
pub mod formats;
pub mod pipeline;
pub mod summary;
pub mod synth;
