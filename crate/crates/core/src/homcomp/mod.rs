//! Homomorphic compression of an encrypted s-sparse vector `d` of length `N`
//! into `2s` slots, and the matching cleartext decompression.
//!
//! The compressor evaluates `w = C v` and `e = C d`, where `v` is the index
//! (0/1) vector of `d` and `C[j][i] = i^j` for `j = 1..s`, `i = 1..N`. From
//! `w` the decompressor recovers the support of `d` as the roots of a
//! polynomial, and from `e` the values by a small Vandermonde solve.
//!
//! Encrypted vectors use the standard layout: chunks of `n` entries per
//! ciphertext, the first `n/2` in row 0 and the rest in row 1.
//!
//! Packed output layout (the default, one ciphertext): `w` in row 0 slots
//! `0..s`, `e` in row 1 slots `0..s`, every other slot zero.

mod answer;
mod bsgs;
mod comp;
mod decomp;
mod matrix;

use rand::RngCore;
use thiserror::Error;

use crate::he::{HeError, HeParams, HeScheme, SlotMatrix};
use crate::zp::ZpError;

pub use answer::{AnswerLayout, CompressedAnswer, SlotRange};
pub use bsgs::{bsgs_matvec, BsgsPlan, Diagonals, RowSource};
pub use comp::{power_fermat, power_fermat_depth, Compressor, MaskedDiagonals, Packing};
pub use decomp::{decomp, decomp_idx, decomp_slots, extract_slots};
pub use matrix::{build_vandermonde, precompute_masked_matrix, CompressionMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompError {
    #[error(transparent)]
    He(#[from] HeError),
    #[error(transparent)]
    Zp(#[from] ZpError),
    #[error("invalid compression parameters: {0}")]
    InvalidParams(String),
    #[error("malformed compressed answer: {0}")]
    Codec(String),
}

/// Vector length `N`, sparsity bound `s`, and the HE parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CompressionParams {
    len: usize,
    s: usize,
    he: HeParams,
}

impl CompressionParams {
    pub fn new(len: usize, s: usize, he: HeParams) -> Result<Self, CompError> {
        if len == 0 {
            return Err(CompError::InvalidParams(
                "vector length must be positive".into(),
            ));
        }
        if s == 0 {
            return Err(CompError::InvalidParams(
                "sparsity bound must be positive".into(),
            ));
        }
        if he.p().value() <= len as u64 {
            return Err(CompError::InvalidParams(format!(
                "plaintext modulus {} must exceed the vector length {len}",
                he.p().value()
            )));
        }
        if 2 * s > he.n() {
            return Err(CompError::InvalidParams(format!(
                "2s = {} exceeds the slot count {}",
                2 * s,
                he.n()
            )));
        }
        Ok(Self { len, s, he })
    }

    /// Vector length `N`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn he(&self) -> &HeParams {
        &self.he
    }

    /// Ciphertexts needed for a length-`N` vector in the standard layout.
    pub fn input_ciphertexts(&self) -> usize {
        self.len.div_ceil(self.he.n())
    }
}

/// Encrypts a dense vector in the standard layout.
pub fn encrypt_vector<S: HeScheme>(
    pk: &S::PublicKey,
    v: &[u64],
    rng: &mut dyn RngCore,
) -> Result<Vec<S::Ciphertext>, HeError> {
    let width = S::params(pk).width();
    SlotMatrix::chunks_from_vector(v, width)
        .iter()
        .map(|m| S::encrypt(pk, m, rng))
        .collect()
}

/// Decrypts a standard-layout vector and truncates it to `len`.
pub fn decrypt_vector<S: HeScheme>(
    sk: &S::SecretKey,
    cts: &[S::Ciphertext],
    len: usize,
) -> Result<Vec<u64>, HeError> {
    let mut out = Vec::with_capacity(len);
    for ct in cts {
        out.extend(S::decrypt(sk, ct)?.to_vector());
    }
    out.truncate(len);
    Ok(out)
}
