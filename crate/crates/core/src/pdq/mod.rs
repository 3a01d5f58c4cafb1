//! Private database queries: the client encrypts a condition, the server
//! evaluates Match / Mask / Comp against its cleartext key-value records, and
//! the client decompresses the matching `(index, value)` pairs.

mod db;
mod predicate;
mod protocol;

use thiserror::Error;

use crate::he::HeError;
use crate::homcomp::CompError;

pub use db::{Database, Record};
pub use predicate::{ExactMatch, PostFnId, Predicate, PredicateId};
pub use protocol::{
    mask, match_exact, pdq_depth, AnswerMode, ClientState, PdqQuery, PdqResult, PdqServer,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdqError {
    #[error("invalid database: {0}")]
    Database(String),
    #[error("condition {x} is not an element of Z_{p}")]
    InvalidCondition { x: u64, p: u64 },
    #[error("more than s = {s} records matched the query")]
    QueryOverflow { s: usize },
    #[error("malformed query: {0}")]
    Codec(String),
    #[error(transparent)]
    Comp(#[from] CompError),
    #[error(transparent)]
    He(#[from] HeError),
}
