//! Exact cleartext backend with the same SIMD semantics, level accounting
//! and rotation-key discipline as a real scheme.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::codec::{self, ObjectKind};
use super::{check_same_key, BackendId, HeError, HeParams, HeScheme, RotationSet, SlotMatrix};

pub struct Simulator;

#[derive(Clone, Debug)]
pub struct SimSecretKey {
    key_id: u64,
    params: HeParams,
}

#[derive(Clone, Debug)]
pub struct SimPublicKey {
    key_id: u64,
    params: HeParams,
    rotations: RotationSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimCiphertext {
    key_id: u64,
    level: u32,
    slots: SlotMatrix,
}

impl SimCiphertext {
    /// The slots, readable without a key. For tests and diagnostics only.
    pub fn peek(&self) -> &SlotMatrix {
        &self.slots
    }
}

fn check_shape(params: &HeParams, m: &SlotMatrix) -> Result<(), HeError> {
    if m.width() != params.width() {
        return Err(HeError::DimensionMismatch {
            expected: params.width(),
            got: m.width(),
        });
    }
    Ok(())
}

fn consume(op: &'static str, level: u32) -> Result<u32, HeError> {
    level
        .checked_sub(1)
        .ok_or(HeError::LevelExhausted { op, level })
}

impl HeScheme for Simulator {
    const BACKEND: BackendId = BackendId::Simulator;

    type SecretKey = SimSecretKey;
    type PublicKey = SimPublicKey;
    type Ciphertext = SimCiphertext;
    type Plaintext = SlotMatrix;

    fn keygen(
        params: &HeParams,
        rotations: &RotationSet,
        seed: u64,
    ) -> Result<(SimSecretKey, SimPublicKey), HeError> {
        rotations.validate(params)?;
        let key_id = ChaCha20Rng::seed_from_u64(seed).next_u64();
        Ok((
            SimSecretKey {
                key_id,
                params: *params,
            },
            SimPublicKey {
                key_id,
                params: *params,
                rotations: rotations.clone(),
            },
        ))
    }

    fn params(pk: &SimPublicKey) -> &HeParams {
        &pk.params
    }

    fn rotations(pk: &SimPublicKey) -> &RotationSet {
        &pk.rotations
    }

    fn key_id(pk: &SimPublicKey) -> u64 {
        pk.key_id
    }

    fn secret_key_id(sk: &SimSecretKey) -> u64 {
        sk.key_id
    }

    fn ciphertext_key_id(ct: &SimCiphertext) -> u64 {
        ct.key_id
    }

    fn level(ct: &SimCiphertext) -> u32 {
        ct.level
    }

    fn encode(pk: &SimPublicKey, m: &SlotMatrix) -> Result<SlotMatrix, HeError> {
        check_shape(&pk.params, m)?;
        Ok(m.reduce(pk.params.p()))
    }

    fn encrypt(
        pk: &SimPublicKey,
        m: &SlotMatrix,
        _rng: &mut dyn RngCore,
    ) -> Result<SimCiphertext, HeError> {
        check_shape(&pk.params, m)?;
        Ok(SimCiphertext {
            key_id: pk.key_id,
            level: pk.params.max_level(),
            slots: m.reduce(pk.params.p()),
        })
    }

    fn decrypt(sk: &SimSecretKey, ct: &SimCiphertext) -> Result<SlotMatrix, HeError> {
        check_same_key(sk.key_id, ct.key_id)?;
        Ok(ct.slots.clone())
    }

    fn add(
        pk: &SimPublicKey,
        a: &SimCiphertext,
        b: &SimCiphertext,
    ) -> Result<SimCiphertext, HeError> {
        check_same_key(a.key_id, b.key_id)?;
        check_same_key(pk.key_id, a.key_id)?;
        Ok(SimCiphertext {
            key_id: a.key_id,
            level: a.level.min(b.level),
            slots: a.slots.add(&b.slots, pk.params.p()),
        })
    }

    fn sub(
        pk: &SimPublicKey,
        a: &SimCiphertext,
        b: &SimCiphertext,
    ) -> Result<SimCiphertext, HeError> {
        check_same_key(a.key_id, b.key_id)?;
        check_same_key(pk.key_id, a.key_id)?;
        Ok(SimCiphertext {
            key_id: a.key_id,
            level: a.level.min(b.level),
            slots: a.slots.sub(&b.slots, pk.params.p()),
        })
    }

    fn neg(pk: &SimPublicKey, a: &SimCiphertext) -> Result<SimCiphertext, HeError> {
        check_same_key(pk.key_id, a.key_id)?;
        Ok(SimCiphertext {
            slots: a.slots.neg(pk.params.p()),
            ..a.clone()
        })
    }

    fn add_plain(
        pk: &SimPublicKey,
        a: &SimCiphertext,
        m: &SlotMatrix,
    ) -> Result<SimCiphertext, HeError> {
        check_same_key(pk.key_id, a.key_id)?;
        check_shape(&pk.params, m)?;
        Ok(SimCiphertext {
            slots: a.slots.add(m, pk.params.p()),
            ..a.clone()
        })
    }

    fn mul(
        pk: &SimPublicKey,
        a: &SimCiphertext,
        b: &SimCiphertext,
    ) -> Result<SimCiphertext, HeError> {
        check_same_key(a.key_id, b.key_id)?;
        check_same_key(pk.key_id, a.key_id)?;
        let level = consume("mul", a.level.min(b.level))?;
        Ok(SimCiphertext {
            key_id: a.key_id,
            level,
            slots: a.slots.mul(&b.slots, pk.params.p()),
        })
    }

    fn mul_plain(
        pk: &SimPublicKey,
        a: &SimCiphertext,
        m: &SlotMatrix,
    ) -> Result<SimCiphertext, HeError> {
        check_same_key(pk.key_id, a.key_id)?;
        check_shape(&pk.params, m)?;
        let level = consume("mul_plain", a.level)?;
        Ok(SimCiphertext {
            key_id: a.key_id,
            level,
            slots: a.slots.mul(m, pk.params.p()),
        })
    }

    fn rot_row(pk: &SimPublicKey, a: &SimCiphertext, r: usize) -> Result<SimCiphertext, HeError> {
        check_same_key(pk.key_id, a.key_id)?;
        if !pk.rotations.contains_row(r) {
            return Err(HeError::MissingRotationKey(format!("row rotation by {r}")));
        }
        Ok(SimCiphertext {
            slots: a.slots.rotate_rows(r as i64),
            ..a.clone()
        })
    }

    fn rot_col(pk: &SimPublicKey, a: &SimCiphertext) -> Result<SimCiphertext, HeError> {
        check_same_key(pk.key_id, a.key_id)?;
        if !pk.rotations.has_col() {
            return Err(HeError::MissingRotationKey("row swap".into()));
        }
        Ok(SimCiphertext {
            slots: a.slots.swap_rows(),
            ..a.clone()
        })
    }

    fn write_ciphertext(ct: &SimCiphertext) -> Vec<u8> {
        let mut w = codec::begin(BackendId::Simulator, ObjectKind::Ciphertext);
        w.u64(ct.key_id);
        w.u32(ct.level);
        w.u32(ct.slots.width() as u32);
        w.u64s(ct.slots.as_flat());
        w.finish()
    }

    fn read_ciphertext(bytes: &[u8]) -> Result<SimCiphertext, HeError> {
        let mut r = codec::open(bytes, BackendId::Simulator, ObjectKind::Ciphertext)?;
        let key_id = r.u64()?;
        let level = r.u32()?;
        let width = r.u32()? as usize;
        let data = r.u64s(2 * width, u64::MAX)?;
        r.finish()?;
        Ok(SimCiphertext {
            key_id,
            level,
            slots: SlotMatrix::from_flat(width, data)?,
        })
    }

    fn write_public_key(pk: &SimPublicKey) -> Vec<u8> {
        let mut w = codec::begin(BackendId::Simulator, ObjectKind::PublicKey);
        w.u64(pk.key_id);
        w.params(&pk.params);
        let rows: Vec<usize> = pk.rotations.rows().collect();
        w.u32(rows.len() as u32);
        for r in rows {
            w.u32(r as u32);
        }
        w.u8(u8::from(pk.rotations.has_col()));
        w.finish()
    }

    fn read_public_key(bytes: &[u8]) -> Result<SimPublicKey, HeError> {
        let mut r = codec::open(bytes, BackendId::Simulator, ObjectKind::PublicKey)?;
        let key_id = r.u64()?;
        let params = r.params()?;
        let count = r.u32()?;
        let mut rows = Vec::new();
        for _ in 0..count {
            rows.push(r.u32()? as usize);
        }
        let col = r.u8()? != 0;
        r.finish()?;
        let rotations = RotationSet::from_rows(rows, col);
        rotations.validate(&params)?;
        Ok(SimPublicKey {
            key_id,
            params,
            rotations,
        })
    }

    fn write_secret_key(sk: &SimSecretKey) -> Vec<u8> {
        let mut w = codec::begin(BackendId::Simulator, ObjectKind::SecretKey);
        w.u64(sk.key_id);
        w.params(&sk.params);
        w.finish()
    }

    fn read_secret_key(bytes: &[u8]) -> Result<SimSecretKey, HeError> {
        let mut r = codec::open(bytes, BackendId::Simulator, ObjectKind::SecretKey)?;
        let key_id = r.u64()?;
        let params = r.params()?;
        r.finish()?;
        Ok(SimSecretKey { key_id, params })
    }
}
