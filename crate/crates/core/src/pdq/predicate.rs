use crate::he::{Evaluator, HeError, HeScheme, SlotMatrix};
use crate::homcomp::{power_fermat, power_fermat_depth};

use super::PdqError;

/// Registered predicates, by wire id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum PredicateId {
    ExactMatch = 1,
}

impl TryFrom<u8> for PredicateId {
    type Error = PdqError;

    fn try_from(b: u8) -> Result<Self, PdqError> {
        match b {
            1 => Ok(Self::ExactMatch),
            _ => Err(PdqError::Codec(format!("unknown predicate id {b}"))),
        }
    }
}

/// Post-processing applied to matching records; only the value projection ships.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum PostFnId {
    Identity = 1,
}

impl TryFrom<u8> for PostFnId {
    type Error = PdqError;

    fn try_from(b: u8) -> Result<Self, PdqError> {
        match b {
            1 => Ok(Self::Identity),
            _ => Err(PdqError::Codec(format!("unknown post-processing id {b}"))),
        }
    }
}

/// An encrypted-condition / cleartext-record predicate evaluated slotwise.
pub trait Predicate<S: HeScheme>: Send + Sync {
    fn id(&self) -> PredicateId;

    /// Levels consumed by [`Predicate::eval`].
    fn depth(&self, p: u64) -> u32;

    /// Encrypted 0/1 slots: 1 where the condition holds for the record key in that slot.
    fn eval(
        &self,
        ev: &Evaluator<'_, S>,
        condition: &S::Ciphertext,
        keys: &SlotMatrix,
    ) -> Result<S::Ciphertext, HeError>;
}

/// `key == x`, as `1 - (x - key)^(p-1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactMatch;

impl<S: HeScheme> Predicate<S> for ExactMatch {
    fn id(&self) -> PredicateId {
        PredicateId::ExactMatch
    }

    fn depth(&self, p: u64) -> u32 {
        power_fermat_depth(p)
    }

    fn eval(
        &self,
        ev: &Evaluator<'_, S>,
        condition: &S::Ciphertext,
        keys: &SlotMatrix,
    ) -> Result<S::Ciphertext, HeError> {
        let p = ev.params().p();
        let diff = ev.add_plain(condition, &ev.encode(&keys.neg(p))?)?;
        let nonzero = power_fermat(ev, &diff)?;
        let ones = ev.encode(&SlotMatrix::constant(keys.width(), 1))?;
        ev.add_plain(&ev.neg(&nonzero)?, &ones)
    }
}

/// The predicate registered under `id`.
pub fn lookup<S: HeScheme>(id: PredicateId) -> Box<dyn Predicate<S>> {
    match id {
        PredicateId::ExactMatch => Box::new(ExactMatch),
    }
}
