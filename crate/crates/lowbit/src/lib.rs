#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Std companion to `lowbit-core`: transcript and snapshot files, CSV output,
//! the duel and scaling harness, and the `lowbit` command line tool.
//!
//! ```no_run
//! use lowbit::harness::{run_duel, AdversaryKind, DuelConfig};
//!
//! let run = run_duel(&DuelConfig::new(0, 8, AdversaryKind::Bit)).unwrap();
//! assert_eq!(run.report.certified_floor, 28);
//! assert!(run.report.ok());
//! ```

pub mod harness;
pub mod io;

/// Process exit codes of the command line tool.
pub mod exit {
    pub const OK: i32 = 0;
    /// Parse or IO failure.
    pub const FAILURE: i32 = 1;
    pub const VIOLATION: i32 = 2;
    pub const INVALID_CONFIG: i32 = 3;
}
