use std::sync::atomic::{AtomicU64, Ordering};

use crate::exec::Execution;

use super::{HeError, HeParams, HeScheme, SlotMatrix};

/// Snapshot of an evaluator's operation counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct OpCounts {
    /// Rotations plus ciphertext-ciphertext multiplications (relinearization).
    pub keyswitches: u64,
    pub ct_mults: u64,
    pub pt_mults: u64,
    /// Additions, subtractions, negations and plaintext additions.
    pub adds: u64,
}

impl std::ops::Sub for OpCounts {
    type Output = OpCounts;

    fn sub(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            keyswitches: self.keyswitches - rhs.keyswitches,
            ct_mults: self.ct_mults - rhs.ct_mults,
            pt_mults: self.pt_mults - rhs.pt_mults,
            adds: self.adds - rhs.adds,
        }
    }
}

#[derive(Default)]
struct Counters {
    keyswitches: AtomicU64,
    ct_mults: AtomicU64,
    pt_mults: AtomicU64,
    adds: AtomicU64,
}

fn bump(c: &AtomicU64) {
    c.fetch_add(1, Ordering::Relaxed);
}

/// An evaluation session: public key material plus monotone op counters.
///
/// Counters are atomic so a session can be shared by the parallel block
/// evaluation inside one compression call.
pub struct Evaluator<'k, S: HeScheme> {
    pk: &'k S::PublicKey,
    counters: Counters,
    exec: Execution,
}

impl<'k, S: HeScheme> Evaluator<'k, S> {
    pub fn new(pk: &'k S::PublicKey) -> Self {
        Self {
            pk,
            counters: Counters::default(),
            exec: Execution::default(),
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn public_key(&self) -> &'k S::PublicKey {
        self.pk
    }

    pub fn params(&self) -> &HeParams {
        S::params(self.pk)
    }

    pub fn counts(&self) -> OpCounts {
        OpCounts {
            keyswitches: self.counters.keyswitches.load(Ordering::Relaxed),
            ct_mults: self.counters.ct_mults.load(Ordering::Relaxed),
            pt_mults: self.counters.pt_mults.load(Ordering::Relaxed),
            adds: self.counters.adds.load(Ordering::Relaxed),
        }
    }

    pub fn encode(&self, m: &SlotMatrix) -> Result<S::Plaintext, HeError> {
        S::encode(self.pk, m)
    }

    pub fn add(&self, a: &S::Ciphertext, b: &S::Ciphertext) -> Result<S::Ciphertext, HeError> {
        bump(&self.counters.adds);
        S::add(self.pk, a, b)
    }

    pub fn sub(&self, a: &S::Ciphertext, b: &S::Ciphertext) -> Result<S::Ciphertext, HeError> {
        bump(&self.counters.adds);
        S::sub(self.pk, a, b)
    }

    pub fn neg(&self, a: &S::Ciphertext) -> Result<S::Ciphertext, HeError> {
        bump(&self.counters.adds);
        S::neg(self.pk, a)
    }

    pub fn add_plain(&self, a: &S::Ciphertext, m: &S::Plaintext) -> Result<S::Ciphertext, HeError> {
        bump(&self.counters.adds);
        S::add_plain(self.pk, a, m)
    }

    pub fn mul(&self, a: &S::Ciphertext, b: &S::Ciphertext) -> Result<S::Ciphertext, HeError> {
        bump(&self.counters.ct_mults);
        bump(&self.counters.keyswitches);
        S::mul(self.pk, a, b)
    }

    pub fn mul_plain(&self, a: &S::Ciphertext, m: &S::Plaintext) -> Result<S::Ciphertext, HeError> {
        bump(&self.counters.pt_mults);
        S::mul_plain(self.pk, a, m)
    }

    /// Left-rotates both rows by `r` slots (negative `r` rotates right).
    ///
    /// The amount is reduced mod `n / 2`; a zero amount is a free copy.
    pub fn rot_row(&self, a: &S::Ciphertext, r: i64) -> Result<S::Ciphertext, HeError> {
        let w = self.params().width() as i64;
        let r = r.rem_euclid(w) as usize;
        if r == 0 {
            return Ok(a.clone());
        }
        bump(&self.counters.keyswitches);
        S::rot_row(self.pk, a, r)
    }

    /// Swaps the two rows.
    pub fn rot_col(&self, a: &S::Ciphertext) -> Result<S::Ciphertext, HeError> {
        bump(&self.counters.keyswitches);
        S::rot_col(self.pk, a)
    }

    /// Sums a non-empty list of ciphertexts.
    pub fn add_many(&self, cts: &[S::Ciphertext]) -> Result<S::Ciphertext, HeError> {
        let (first, rest) = cts.split_first().ok_or(HeError::DimensionMismatch {
            expected: 1,
            got: 0,
        })?;
        rest.iter()
            .try_fold(first.clone(), |acc, c| self.add(&acc, c))
    }
}
