//! The homomorphic-encryption contract the compressor is written against.
//!
//! A plaintext is a [`SlotMatrix`] with two rows of `n / 2` slots. Schemes
//! provide slotwise add and multiply, left rotation of both rows
//! ([`Evaluator::rot_row`]) and the row swap ([`Evaluator::rot_col`]). Levels
//! count remaining multiplicative depth: fresh ciphertexts sit at
//! `max_level`, and both `mul` and `mul_plain` consume one level.
//!
//! Two schemes implement [`HeScheme`]: the exact slot [`Simulator`] and the
//! lattice-based [`crate::bgv::BgvMini`].

pub mod codec;
mod eval;
mod params;
mod sim;
mod slots;

use std::fmt;

use rand::RngCore;
use thiserror::Error;

pub use eval::{Evaluator, OpCounts};
pub use params::{HeParams, RotationSet};
pub use sim::{SimCiphertext, SimPublicKey, SimSecretKey, Simulator};
pub use slots::SlotMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("backend or key mismatch: {0}")]
    BackendMismatch(String),
    #[error("{op} needs a level but the input is at level {level}")]
    LevelExhausted { op: &'static str, level: u32 },
    #[error("no key for {0}")]
    MissingRotationKey(String),
    #[error("noise estimate 2^{estimate_bits:.1} exceeds the budget 2^{budget_bits:.1}")]
    NoiseOverflow {
        estimate_bits: f64,
        budget_bits: f64,
    },
    #[error("could not build a modulus chain: {0}")]
    NoNttPrimes(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed encoding: {0}")]
    Codec(String),
}

/// Wire identifier of a scheme, the byte after the envelope magic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum BackendId {
    Simulator = 0,
    BgvMini = 1,
}

impl TryFrom<u8> for BackendId {
    type Error = HeError;

    fn try_from(b: u8) -> Result<Self, HeError> {
        match b {
            0 => Ok(Self::Simulator),
            1 => Ok(Self::BgvMini),
            _ => Err(HeError::Codec(format!("unknown backend id {b}"))),
        }
    }
}

impl fmt::Display for BackendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Simulator => "simulator",
            Self::BgvMini => "bgv",
        })
    }
}

/// A leveled SIMD homomorphic encryption scheme over `Z_p^{2 x n/2}`.
///
/// The scheme type itself is a marker; state lives in the key types. Callers
/// normally go through [`Evaluator`], which adds op counting and argument
/// normalization on top of these primitives.
pub trait HeScheme: Sized + Send + Sync + 'static {
    const BACKEND: BackendId;

    type SecretKey: Send + Sync;
    /// Encryption key plus all evaluation keys (relinearization, rotations).
    type PublicKey: Send + Sync;
    type Ciphertext: Clone + Send + Sync + fmt::Debug;
    type Plaintext: Send + Sync;

    fn keygen(
        params: &HeParams,
        rotations: &RotationSet,
        seed: u64,
    ) -> Result<(Self::SecretKey, Self::PublicKey), HeError>;

    fn params(pk: &Self::PublicKey) -> &HeParams;
    fn rotations(pk: &Self::PublicKey) -> &RotationSet;
    /// Random identifier shared by a key pair and every ciphertext under it.
    fn key_id(pk: &Self::PublicKey) -> u64;
    fn secret_key_id(sk: &Self::SecretKey) -> u64;
    fn ciphertext_key_id(ct: &Self::Ciphertext) -> u64;
    fn level(ct: &Self::Ciphertext) -> u32;

    fn encode(pk: &Self::PublicKey, m: &SlotMatrix) -> Result<Self::Plaintext, HeError>;
    fn encrypt(
        pk: &Self::PublicKey,
        m: &SlotMatrix,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Ciphertext, HeError>;
    fn decrypt(sk: &Self::SecretKey, ct: &Self::Ciphertext) -> Result<SlotMatrix, HeError>;

    fn add(
        pk: &Self::PublicKey,
        a: &Self::Ciphertext,
        b: &Self::Ciphertext,
    ) -> Result<Self::Ciphertext, HeError>;
    fn sub(
        pk: &Self::PublicKey,
        a: &Self::Ciphertext,
        b: &Self::Ciphertext,
    ) -> Result<Self::Ciphertext, HeError>;
    fn neg(pk: &Self::PublicKey, a: &Self::Ciphertext) -> Result<Self::Ciphertext, HeError>;
    fn add_plain(
        pk: &Self::PublicKey,
        a: &Self::Ciphertext,
        m: &Self::Plaintext,
    ) -> Result<Self::Ciphertext, HeError>;
    fn mul(
        pk: &Self::PublicKey,
        a: &Self::Ciphertext,
        b: &Self::Ciphertext,
    ) -> Result<Self::Ciphertext, HeError>;
    fn mul_plain(
        pk: &Self::PublicKey,
        a: &Self::Ciphertext,
        m: &Self::Plaintext,
    ) -> Result<Self::Ciphertext, HeError>;
    /// Left-rotates both rows by `r`, `0 < r < n / 2`.
    fn rot_row(
        pk: &Self::PublicKey,
        a: &Self::Ciphertext,
        r: usize,
    ) -> Result<Self::Ciphertext, HeError>;
    fn rot_col(pk: &Self::PublicKey, a: &Self::Ciphertext) -> Result<Self::Ciphertext, HeError>;

    fn write_ciphertext(ct: &Self::Ciphertext) -> Vec<u8>;
    fn read_ciphertext(bytes: &[u8]) -> Result<Self::Ciphertext, HeError>;
    fn write_public_key(pk: &Self::PublicKey) -> Vec<u8>;
    fn read_public_key(bytes: &[u8]) -> Result<Self::PublicKey, HeError>;
    fn write_secret_key(sk: &Self::SecretKey) -> Vec<u8>;
    fn read_secret_key(bytes: &[u8]) -> Result<Self::SecretKey, HeError>;
}

pub(crate) fn check_same_key(a: u64, b: u64) -> Result<(), HeError> {
    if a != b {
        return Err(HeError::BackendMismatch(format!(
            "key set {a:016x} vs {b:016x}"
        )));
    }
    Ok(())
}
