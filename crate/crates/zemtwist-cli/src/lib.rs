//! Library surface of the zemtwist CLI, kept separate from the binary so
//! the verbs and file formats are testable in process.

pub mod commands;
pub mod config;
pub mod output;
