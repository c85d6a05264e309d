//! Library side of the `dnet` command: datasets, experiment configs and the
//! subcommand implementations.

pub mod commands;
pub mod dataset;
pub mod experiment;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
}
