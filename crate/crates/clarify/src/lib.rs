//! Dataset loading, model files, reports, the HTTP service and the terminal
//! chat for the clarification engine in [`clarify_core`].

pub mod chat;
pub mod experiment;
pub mod model_file;
pub mod report;
pub mod scope;
pub mod service;
pub mod synth;

pub use clarify_core as core;
