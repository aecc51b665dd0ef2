//! Restricted sumsets in dense sets of naturals, and the dynamics used to find them.
//!
//! The crate has two halves that meet in the middle:
//!
//! * exact combinatorics: finite sets of naturals, restricted sumsets
//!   `B^{⊕i}` (sums of `i` distinct elements), shifted-containment
//!   certificates and their independent checkers, prime-residue
//!   counterexample machinery, and a greedy certificate searcher;
//! * exact dynamics: unipotent affine transformations of the torus
//!   `T^s`, simulated bit-exactly in residue arithmetic, with Birkhoff /
//!   diagonal averages, conditional expectations onto coordinate
//!   factors, Gowers–Host–Kra uniformity seminorms, progressive-measure
//!   scanners and orbit-closure manifolds.
//!
//! Start with the runnable programs under `examples/`; each demonstrates one
//! capability end to end. The `sumset-dynamics` binary exposes the same
//! operations as subcommands emitting JSON reports.

pub mod cert;
pub mod cli;
pub mod ergodic;
pub mod nil;
pub mod rat;
pub mod search;
pub mod sets;
pub mod setspec;
pub mod straus;

mod bits;

pub use cert::{CertKind, CheckReport, CheckStatus, SumsetCertificate, Violation};
pub use rat::Rat;
pub use sets::{FiniteNatSet, Limits};
pub use setspec::{FolnerWindow, SetSpec};

use thiserror::Error;

/// Unified error type for fallible operations across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("membership query at n={n} exceeds horizon {horizon}")]
    Horizon { n: u64, horizon: u64 },
    #[error("function is not exactly integrable: {0}")]
    NotExactlyIntegrable(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
