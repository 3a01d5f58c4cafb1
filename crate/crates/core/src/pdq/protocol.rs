use std::sync::OnceLock;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::he::codec::{Reader, Writer};
use crate::he::{Evaluator, HeError, HeParams, HeScheme, SlotMatrix};
use crate::homcomp::{
    decomp, BsgsPlan, CompError, CompressedAnswer, CompressionParams, Compressor, MaskedDiagonals,
};
use crate::zp::ZpError;

use super::predicate::{lookup, PostFnId, PredicateId};
use super::{Database, PdqError};

const QUERY_MAGIC: &[u8; 4] = b"HCPQ";
const QUERY_VERSION: u16 = 1;

/// How the server turns the Match output into the compressed answer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AnswerMode {
    /// Mask the index vector with the values, then compress with the index vector as hint.
    #[default]
    MaskThenComp,
    /// Skip Mask and compress the index vector against `[C; C diag(values)]`.
    CleartextDb,
}

/// Levels a fresh query needs for exact-match answering under `mode`.
pub fn pdq_depth(p: u64, mode: AnswerMode) -> u32 {
    let matched = crate::homcomp::power_fermat_depth(p);
    match mode {
        AnswerMode::MaskThenComp => matched + 1 + 3,
        AnswerMode::CleartextDb => matched + 3,
    }
}

/// The client's request: predicate, post-processing and the encrypted condition
/// (the same value in every slot).
pub struct PdqQuery<S: HeScheme> {
    predicate: PredicateId,
    post: PostFnId,
    condition: S::Ciphertext,
}

impl<S: HeScheme> Clone for PdqQuery<S> {
    fn clone(&self) -> Self {
        Self {
            predicate: self.predicate,
            post: self.post,
            condition: self.condition.clone(),
        }
    }
}

impl<S: HeScheme> PdqQuery<S> {
    pub fn predicate(&self) -> PredicateId {
        self.predicate
    }

    pub fn post(&self) -> PostFnId {
        self.post
    }

    pub fn condition(&self) -> &S::Ciphertext {
        &self.condition
    }

    /// `"HCPQ"`, `u16` version, predicate id, post id, then the ciphertext envelope behind a `u32` length.
    pub fn to_bytes(&self) -> Vec<u8> {
        let body = S::write_ciphertext(&self.condition);
        let mut w = Writer(Vec::with_capacity(12 + body.len()));
        w.bytes(QUERY_MAGIC);
        w.u16(QUERY_VERSION);
        w.u8(self.predicate as u8);
        w.u8(self.post as u8);
        w.u32(body.len() as u32);
        w.bytes(&body);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PdqError> {
        let codec = |e: HeError| match e {
            HeError::Codec(m) => PdqError::Codec(m),
            other => PdqError::He(other),
        };
        let mut r = Reader::new(bytes);
        if r.take(4).map_err(codec)? != QUERY_MAGIC {
            return Err(PdqError::Codec("bad query magic".into()));
        }
        let version = r.u16().map_err(codec)?;
        if version != QUERY_VERSION {
            return Err(PdqError::Codec(format!(
                "unsupported query version {version}"
            )));
        }
        let predicate = PredicateId::try_from(r.u8().map_err(codec)?)?;
        let post = PostFnId::try_from(r.u8().map_err(codec)?)?;
        let len = r.u32().map_err(codec)? as usize;
        let condition = S::read_ciphertext(r.take(len).map_err(codec)?).map_err(codec)?;
        r.finish().map_err(codec)?;
        Ok(Self {
            predicate,
            post,
            condition,
        })
    }
}

/// The recovered `(index, value)` pairs, 1-based indices in increasing order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdqResult {
    pub matches: Vec<(usize, u64)>,
}

/// Everything the client keeps: its keys and the agreed sparsity bound.
pub struct ClientState<S: HeScheme> {
    sk: S::SecretKey,
    pk: S::PublicKey,
    s: usize,
}

impl<S: HeScheme> ClientState<S> {
    /// Generates keys with every rotation the compressor needs for bound `s`.
    pub fn keygen(he: HeParams, s: usize, seed: u64) -> Result<Self, PdqError> {
        let plan = BsgsPlan::new(&he, s)?;
        let (sk, pk) = S::keygen(&he, &plan.rotation_set(), seed)?;
        Ok(Self { sk, pk, s })
    }

    pub fn from_keys(sk: S::SecretKey, pk: S::PublicKey, s: usize) -> Self {
        Self { sk, pk, s }
    }

    pub fn public_key(&self) -> &S::PublicKey {
        &self.pk
    }

    pub fn secret_key(&self) -> &S::SecretKey {
        &self.sk
    }

    pub fn he(&self) -> &HeParams {
        S::params(&self.pk)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Compression parameters for a database of `len` records.
    pub fn compression_params(&self, len: usize) -> Result<CompressionParams, PdqError> {
        Ok(CompressionParams::new(len, self.s, *self.he())?)
    }

    /// Encrypts the exact-match condition `x` into every slot.
    pub fn query(&self, x: u64, rng: &mut dyn RngCore) -> Result<PdqQuery<S>, PdqError> {
        let he = self.he();
        let p = he.p().value();
        if x >= p {
            return Err(PdqError::InvalidCondition { x, p });
        }
        let condition = S::encrypt(&self.pk, &SlotMatrix::constant(he.width(), x), rng)?;
        Ok(PdqQuery {
            predicate: PredicateId::ExactMatch,
            post: PostFnId::Identity,
            condition,
        })
    }

    /// Decompresses an answer over a `len`-record database.
    ///
    /// Any decoding failure means more than `s` records matched (or the
    /// answer was tampered with) and is reported as [`PdqError::QueryOverflow`].
    pub fn recover(&self, ans: &CompressedAnswer<S>, len: usize) -> Result<PdqResult, PdqError> {
        let params = self.compression_params(len)?;
        match decomp(&self.sk, ans, &params) {
            Ok(d) => Ok(PdqResult {
                matches: d.entries().to_vec(),
            }),
            Err(CompError::Zp(
                ZpError::NotFullySplit(_)
                | ZpError::InconsistentSystem(_)
                | ZpError::SingularSystem(_),
            )) => Err(PdqError::QueryOverflow { s: self.s }),
            Err(e) => Err(e.into()),
        }
    }
}

/// Match: encrypted index vector of the records whose key satisfies the query,
/// in the standard layout.
pub fn match_exact<S: HeScheme>(
    ev: &Evaluator<'_, S>,
    q: &PdqQuery<S>,
    db: &Database,
) -> Result<Vec<S::Ciphertext>, HeError> {
    let predicate = lookup::<S>(q.predicate);
    let chunks = SlotMatrix::chunks_from_vector(db.keys(), ev.params().width());
    ev.execution()
        .map(&chunks, |keys| predicate.eval(ev, &q.condition, keys))
        .into_iter()
        .collect()
}

/// Mask: `d = v ⊙ values`, chunk by chunk.
pub fn mask<S: HeScheme>(
    ev: &Evaluator<'_, S>,
    v: &[S::Ciphertext],
    db: &Database,
) -> Result<Vec<S::Ciphertext>, HeError> {
    let chunks = SlotMatrix::chunks_from_vector(db.values(), ev.params().width());
    if chunks.len() != v.len() {
        return Err(HeError::DimensionMismatch {
            expected: chunks.len(),
            got: v.len(),
        });
    }
    v.iter()
        .zip(&chunks)
        .map(|(c, m)| ev.mul_plain(c, &ev.encode(m)?))
        .collect()
}

/// The server: a read-only database and the compressor sized for it.
pub struct PdqServer {
    db: Database,
    compressor: Compressor,
    mode: AnswerMode,
    masked: OnceLock<Result<MaskedDiagonals, CompError>>,
}

impl PdqServer {
    pub fn new(db: Database, s: usize, he: HeParams) -> Result<Self, PdqError> {
        if db.modulus() != he.p() {
            return Err(PdqError::Database(format!(
                "database is over Z_{}, keys over Z_{}",
                db.modulus().value(),
                he.p().value()
            )));
        }
        let compressor = Compressor::new(CompressionParams::new(db.len(), s, he)?)?;
        Ok(Self {
            db,
            compressor,
            mode: AnswerMode::default(),
            masked: OnceLock::new(),
        })
    }

    pub fn with_mode(mut self, mode: AnswerMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.compressor = self.compressor.with_execution(exec);
        self
    }

    pub fn database(&self) -> &Database {
        &self.db
    }

    pub fn compressor(&self) -> &Compressor {
        &self.compressor
    }

    pub fn mode(&self) -> AnswerMode {
        self.mode
    }

    /// Answers `q` under the client's public key material.
    pub fn answer<S: HeScheme>(
        &self,
        pk: &S::PublicKey,
        q: &PdqQuery<S>,
    ) -> Result<CompressedAnswer<S>, PdqError> {
        self.answer_with(&Evaluator::new(pk), q)
    }

    /// As [`PdqServer::answer`], counting ops in `ev`.
    pub fn answer_with<S: HeScheme>(
        &self,
        ev: &Evaluator<'_, S>,
        q: &PdqQuery<S>,
    ) -> Result<CompressedAnswer<S>, PdqError> {
        if ev.params() != self.compressor.params().he() {
            return Err(
                CompError::InvalidParams("client keys use different HE parameters".into()).into(),
            );
        }
        let v = match_exact(ev, q, &self.db)?;
        let ans = match self.mode {
            AnswerMode::MaskThenComp => {
                let d = mask(ev, &v, &self.db)?;
                self.compressor.comp(ev, &d, Some(&v))?
            }
            AnswerMode::CleartextDb => {
                let masked = self
                    .masked
                    .get_or_init(|| self.compressor.prepare_db(self.db.values()))
                    .as_ref()
                    .map_err(Clone::clone)?;
                self.compressor.comp_cleartext_db(ev, &v, masked)?
            }
        };
        Ok(ans)
    }
}
