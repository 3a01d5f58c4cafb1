//! Exact arithmetic over Z_p and Z_p[X]: everything the decompressor runs in
//! the clear.
//!
//! The pipeline is `w -> newton_coeffs -> strip_zero_roots -> find_roots` to
//! recover an index set from power sums, followed by
//! [`solve_vandermonde_sub`] to recover the values on that index set.

mod linear;
mod modulus;
mod newton;
pub mod ops;
mod poly;
mod roots;
mod sparse;

use thiserror::Error;

pub use linear::{solve_vandermonde_sub, submatrix_rank, vandermonde_apply, vandermonde_entry};
pub use modulus::{is_prime, mod_inv, mod_pow, PrimeModulus};
pub use newton::{
    elementary_symmetric_oracle, newton_coeffs, power_sums, strip_zero_roots, NewtonSolver,
};
pub use poly::ZpPoly;
pub use roots::{
    find_roots, find_roots_seeded, reconst_idx, reconst_idx_seeded, roots_by_trial,
    DEFAULT_ROOT_SEED,
};
pub use sparse::{IndexSet, SparseVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZpError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("{0} is not a prime below 2^63")]
    NotPrime(u64),
    #[error("modulus {p} must exceed {bound}")]
    ModulusTooSmall { p: u64, bound: u64 },
    #[error("polynomial does not split into distinct linear factors in range: {0}")]
    NotFullySplit(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("inconsistent system: {0}")]
    InconsistentSystem(String),
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("invalid sparse vector: {0}")]
    InvalidSparseVector(String),
    #[error("{0}")]
    EmptyInput(&'static str),
}
