//! Library surface of the `dgrel` command-line tool: config-file parsing
//! and report rendering, split out so integration tests can drive the same
//! paths the binary uses.

pub mod config;
pub mod report;
