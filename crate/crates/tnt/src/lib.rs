//! File formats, model persistence, evaluation and the command-line front end
//! for the `tnt-core` tagger.

pub mod cli;
mod error;
pub mod eval;
pub mod format;
pub mod store;

pub use error::{Error, Result};
pub use tnt_core;

/// Two-sentence corpus used by examples and tests.
pub const FIXTURE_A: &str =
    "the\tDT\ndog\tNN\nbarks\tVB\n.\tSENT\n\nthe\tDT\ncat\tNN\nsleeps\tVB\n.\tSENT\n";
