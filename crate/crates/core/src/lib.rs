//! Homomorphic compression of encrypted sparse vectors over SIMD-batched
//! BGV-style ciphertexts, and the private database query protocol built on it.
//!
//! Layering, bottom to top:
//!
//! * [`zp`]: cleartext arithmetic over Z_p used by the decompressor.
//! * [`he`]: the homomorphic-encryption contract, the 2 x (n/2) slot model,
//!   op counters, and an exact slot simulator backend.
//! * [`bgv`]: a small RLWE/BGV backend implementing the same contract.
//! * [`homcomp`]: the compressor (baby-step giant-step matrix-vector products
//!   over two-row packed ciphertexts) and the decompressor.
//! * [`pdq`]: Query / Answer / Recover over a key-value database.

pub mod bgv;
pub mod exec;
pub mod he;
pub mod homcomp;
pub mod pdq;
pub mod zp;

pub use exec::Execution;
