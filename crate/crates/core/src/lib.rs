//! Variable-length locally decodable source codes for `r`-sparse binary
//! sequences.
//!
//! A length-`n` word with exactly `r` ones is mapped to a codeword whose
//! *length* already carries part of the information. Any single source bit
//! can then be recovered from the length plus at most `d` codeword bits,
//! read at positions chosen before any bit is seen.
//!
//! - [`codebook`] derives the per-length level plans from a master seed.
//! - [`codec`] encodes to the first accepting level and decodes bits locally.
//! - [`bounds`] evaluates the lower and upper bounds on expected length.
//! - [`speedlimit`] replays decoding as a two-party membership protocol.
//! - [`bench`] runs Monte Carlo, scaling and exhaustive experiments.
//! - [`container`] is the on-disk codeword format.
//!
//! Floating-point results are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.
//!
//! ```
//! use sldc::{CodeParams, Codebook, SparseSeq};
//!
//! let params = CodeParams::new(12, 2, 3, 0).unwrap();
//! let cb = Codebook::new(params);
//! let x = SparseSeq::new(12, vec![4, 9]).unwrap();
//! let c = cb.encode(&x).unwrap();
//! let (bit, trace) = cb.decode_bit(&c, 9).unwrap();
//! assert!(bit);
//! assert!(trace.probes() <= 3);
//! ```

pub mod bench;
pub mod bounds;
pub mod codebook;
pub mod codec;
pub mod combinatorics;
pub mod container;
mod error;
mod scalar;
pub mod speedlimit;

pub use codebook::{CodeParams, Codebook, LevelPlan, ProbePlan};
pub use codec::{Codeword, ProbeTrace, SparseSeq};
pub use combinatorics::{BigCount, Role, SampleKey};
pub use container::{parse_codeword, serialize_codeword, ContainerError, Header};
pub use error::{Error, Result};
pub use scalar::Real;
pub use speedlimit::Transcript;

pub type BoundsReport = bounds::BoundsReport<f64>;
pub type LymBound = bounds::LymBound<f64>;
pub type LengthStats = bench::LengthStats<f64>;
pub type ScalingFit = bench::ScalingFit<f64>;
pub type ScalingPoint = bench::ScalingPoint<f64>;
pub type ExhaustiveReport = bench::ExhaustiveReport<f64>;
pub type ProtocolCost = speedlimit::ProtocolCost<f64>;

pub type BoundsReportF32 = bounds::BoundsReport<f32>;
pub type LengthStatsF32 = bench::LengthStats<f32>;
