use crate::he::{HeScheme, SlotMatrix};
use crate::zp::{
    reconst_idx_seeded, solve_vandermonde_sub, IndexSet, SparseVector, DEFAULT_ROOT_SEED,
};

use super::{AnswerLayout, CompError, CompressedAnswer, CompressionParams};

/// Reads `(w, e)` out of decrypted payload ciphertexts.
pub fn extract_slots(
    layout: &AnswerLayout,
    decrypted: &[SlotMatrix],
) -> Result<(Vec<u64>, Vec<u64>), CompError> {
    let read = |r: super::SlotRange| -> Result<Vec<u64>, CompError> {
        let m = decrypted.get(r.ct).ok_or_else(|| {
            CompError::Codec(format!("layout refers to missing ciphertext {}", r.ct))
        })?;
        m.row(r.row)
            .get(r.offset..r.offset + layout.s())
            .map(<[u64]>::to_vec)
            .ok_or_else(|| {
                CompError::Codec(format!(
                    "slots {}..{} exceed the row",
                    r.offset,
                    r.offset + layout.s()
                ))
            })
    };
    Ok((read(layout.w())?, read(layout.e())?))
}

/// Recovers `d` from its compressed form `(w, e)`, all in the clear.
///
/// `seed` drives the randomized root splitting; the result does not depend on it.
pub fn decomp_slots(
    w: &[u64],
    e: &[u64],
    params: &CompressionParams,
    seed: u64,
) -> Result<SparseVector, CompError> {
    let p = params.he().p();
    let indices = reconst_idx_seeded(w, p, params.len(), seed)?;
    Ok(solve_vandermonde_sub(e, &indices, params.len(), p)?)
}

/// Decrypts and decompresses an answer.
pub fn decomp<S: HeScheme>(
    sk: &S::SecretKey,
    ans: &CompressedAnswer<S>,
    params: &CompressionParams,
) -> Result<SparseVector, CompError> {
    if ans.layout().s() != params.s() {
        return Err(CompError::InvalidParams(format!(
            "answer was compressed with s = {}, expected {}",
            ans.layout().s(),
            params.s()
        )));
    }
    let decrypted = ans
        .ciphertexts()
        .iter()
        .map(|c| S::decrypt(sk, c))
        .collect::<Result<Vec<_>, _>>()?;
    let (w, e) = extract_slots(ans.layout(), &decrypted)?;
    decomp_slots(&w, &e, params, DEFAULT_ROOT_SEED)
}

/// Decrypts `w = C v` from row 0 slots `0..s` and recovers the index set of
/// `v`, plus `v` itself as a length-`N` 0/1 vector.
pub fn decomp_idx<S: HeScheme>(
    sk: &S::SecretKey,
    cw: &S::Ciphertext,
    params: &CompressionParams,
) -> Result<(IndexSet, Vec<u64>), CompError> {
    let m = S::decrypt(sk, cw)?;
    let w = &m.row(0)[..params.s()];
    let indices = reconst_idx_seeded(w, params.he().p(), params.len(), DEFAULT_ROOT_SEED)?;
    let dense = indices.indicator(params.len());
    Ok((indices, dense))
}
