//! Resisting-oracle laboratory for convex feasibility under low-bandwidth
//! first-order oracles.
//!
//! The crate is `no_std` (it only needs `alloc`). It contains:
//!
//! - [`geometry`]: vectors, boxes, ℓ∞ balls, orthant labels and support functions.
//! - [`oracle`]: the query/answer contract, the bit encoding and transcripts.
//! - [`bit_adversary`]: the orthant-commitment oracle for coordinate and bit queries.
//! - [`dir_adversary`]: the batch-nullspace oracle for inner-product queries.
//! - [`mixed`]: lifting of either continuous adversary to `n` binary variables.
//! - [`solvers`]: normal reconstruction and an ellipsoid cutting-plane baseline.
//! - [`verifier`]: transcript auditing, disjointness certificates and orthant survival.
//! - [`bounds`]: per-level budgets and certified query floors.
//!
//! IO, file formats and the command line live in the `lowbit` crate.

#![cfg_attr(not(test), no_std)]
// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bit_adversary;
pub mod bounds;
pub mod dir_adversary;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mixed;
pub mod oracle;
pub mod solvers;
pub mod verifier;

pub use error::Error;

/// Default strictness slack for every separation claim.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A resisting oracle for the continuous problem on `[-R, R]^d`.
///
/// Both continuous adversaries implement this so that [`mixed::MixedAdversary`]
/// can run one instance per binary fiber.
pub trait ContinuousAdversary: oracle::SeparationOracle {
    /// Short name used in transcript headers (`"bit"` or `"dir"`).
    fn kind(&self) -> &'static str;

    /// Transcript of every query answered so far. Records may still be pending.
    fn transcript(&self) -> &oracle::Transcript;

    /// Upper bound on `‖a‖₁` over every normal this adversary can ever realize.
    fn normal_l1_bound(&self) -> f64;

    /// Forces the record at `index` to carry a realized normal now.
    fn force_resolve(&mut self, index: usize) -> Result<(), Error>;

    /// Resolves every pending record. Records answered afterwards may be pending again.
    fn finalize(&mut self) -> Result<(), Error>;

    /// Two disjoint `rho`-balls consistent with everything answered so far.
    ///
    /// Resolves pending records as a side effect.
    fn witness_balls(&mut self, rho: f64) -> Result<(geometry::InfBall, geometry::InfBall), Error>;
}
