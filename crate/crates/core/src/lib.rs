//! Exact completion of nonzero rank-1 tensors from uniformly sampled entries.
//!
//! Each entry of `u_1 ⊗ ... ⊗ u_N` is a product of one coordinate per factor.
//! Splitting every value into a sign parity and a log magnitude turns the
//! sampled entries into two linear systems, one over GF(2) and one over the
//! reals, sharing a sparse 0/1 coefficient matrix. [`completion::complete`]
//! solves both and answers arbitrary entry queries; [`completion::certify`]
//! reports whether the samples pin the tensor down uniquely.
//!
//! [`experiments`] holds the seeded Monte-Carlo harness and [`oracle`] the
//! brute-force checkers used by the test suites.

pub mod cli;
pub mod completion;
pub mod error;
pub mod experiments;
pub mod f2lin;
pub mod io;
pub mod oracle;
pub mod reallin;
pub mod tensor;

pub use completion::{certify, complete, sample_uniform, CompletedTensor, SampleSet};
pub use error::{Error, Result};
pub use tensor::{EntryIndex, FactorList, ObservedEntry};
