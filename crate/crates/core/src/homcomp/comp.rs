use std::sync::OnceLock;

use crate::exec::Execution;
use crate::he::{Evaluator, HeError, HeScheme, RotationSet, SlotMatrix};

use super::answer::{AnswerLayout, CompressedAnswer};
use super::bsgs::{bsgs_matvec, BsgsPlan, Diagonals, RowSource};
use super::{
    build_vandermonde, precompute_masked_matrix, CompError, CompressionMatrix, CompressionParams,
};

/// Output shape of [`Compressor::comp`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Packing {
    /// One ciphertext: `w` in row 0, `e` in row 1.
    #[default]
    Packed,
    /// Two ciphertexts, each holding its vector in row 0.
    Separate,
}

/// Server-side compression state for one `(N, s, HE params)` triple.
///
/// Diagonal plaintexts are built on first use and cached.
pub struct Compressor {
    params: CompressionParams,
    plan: BsgsPlan,
    matrix: CompressionMatrix,
    packing: Packing,
    exec: Execution,
    paired: OnceLock<Diagonals>,
    standard: OnceLock<Diagonals>,
}

/// Diagonals of `[C; D]` with `D = C diag(DB)` for a fixed cleartext database.
pub struct MaskedDiagonals {
    diags: Diagonals,
}

impl Compressor {
    pub fn new(params: CompressionParams) -> Result<Self, CompError> {
        let plan = BsgsPlan::new(params.he(), params.s())?;
        let matrix = build_vandermonde(&params)?;
        Ok(Self {
            params,
            plan,
            matrix,
            packing: Packing::default(),
            exec: Execution::default(),
            paired: OnceLock::new(),
            standard: OnceLock::new(),
        })
    }

    pub fn with_packing(mut self, packing: Packing) -> Self {
        self.packing = packing;
        self
    }

    /// Scheduling used when building diagonal plaintexts.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn params(&self) -> &CompressionParams {
        &self.params
    }

    pub fn plan(&self) -> &BsgsPlan {
        &self.plan
    }

    pub fn packing(&self) -> Packing {
        self.packing
    }

    /// Rotation keys the compressor needs at keygen.
    pub fn rotation_set(&self) -> RotationSet {
        self.plan.rotation_set()
    }

    /// Multiplicative depth of [`Compressor::comp`] from fresh inputs.
    pub fn depth(&self, with_hint: bool) -> u32 {
        let base = match self.packing {
            Packing::Packed => 3,
            Packing::Separate => 2,
        };
        if with_hint {
            base
        } else {
            base + power_fermat_depth(self.params.he().p().value())
        }
    }

    fn paired_diagonals(&self) -> &Diagonals {
        self.paired.get_or_init(|| {
            let sources: Vec<_> = self
                .pair_offsets()
                .into_iter()
                .map(|off| {
                    [
                        self.source(&self.matrix, off),
                        self.source(&self.matrix, off),
                    ]
                })
                .collect();
            Diagonals::build(&self.plan, &sources, self.exec)
        })
    }

    fn standard_diagonals(&self) -> &Diagonals {
        self.standard.get_or_init(|| {
            let (n, w) = (self.params.he().n(), self.params.he().width());
            let sources: Vec<_> = (0..self.params.input_ciphertexts())
                .map(|m| {
                    [
                        self.source(&self.matrix, m * n),
                        self.source(&self.matrix, m * n + w),
                    ]
                })
                .collect();
            Diagonals::build(&self.plan, &sources, self.exec)
        })
    }

    fn source<'m>(&self, matrix: &'m CompressionMatrix, offset: usize) -> RowSource<'m> {
        RowSource { matrix, offset }
    }

    /// Column offsets of the half-chunks produced by [`Compressor::pack_pair`].
    fn pair_offsets(&self) -> Vec<usize> {
        let w = self.params.he().width();
        (0..2 * self.params.input_ciphertexts())
            .map(|k| k * w)
            .filter(|&off| off < self.params.len())
            .collect()
    }

    /// Precomputes `D = C diag(db)` diagonals for [`Compressor::comp_cleartext_db`].
    pub fn prepare_db(&self, db: &[u64]) -> Result<MaskedDiagonals, CompError> {
        let d = precompute_masked_matrix(db, &self.params)?;
        let sources: Vec<_> = self
            .pair_offsets()
            .into_iter()
            .map(|off| [self.source(&self.matrix, off), self.source(&d, off)])
            .collect();
        Ok(MaskedDiagonals {
            diags: Diagonals::build(&self.plan, &sources, self.exec),
        })
    }

    fn check_inputs<C>(&self, cts: &[C]) -> Result<(), HeError> {
        let expected = self.params.input_ciphertexts();
        if cts.len() != expected {
            return Err(HeError::DimensionMismatch {
                expected,
                got: cts.len(),
            });
        }
        Ok(())
    }

    fn row_mask(&self, rows: [bool; 2], upto: usize) -> SlotMatrix {
        let w = self.params.he().width();
        let mut m = SlotMatrix::zeros(w);
        for (r, keep) in rows.iter().enumerate() {
            if *keep {
                m.row_mut(r)[..upto].fill(1);
            }
        }
        m
    }

    /// Re-packs standard-layout `v` and `d` into two-row ciphertexts
    /// `[v_half; d_half]`, one per half-chunk that starts below `N`.
    ///
    /// Chunk `m` gives `[v_a; d_a] = [v_a; 0] + Rot_col([d_a; 0])` and
    /// `[v_b; d_b] = Rot_col([0; v_b]) + [0; d_b]`, where `a`/`b` are its two halves.
    pub fn pack_pair<S: HeScheme>(
        &self,
        ev: &Evaluator<'_, S>,
        v: &[S::Ciphertext],
        d: &[S::Ciphertext],
    ) -> Result<Vec<S::Ciphertext>, HeError> {
        self.check_inputs(v)?;
        self.check_inputs(d)?;
        let w = self.params.he().width();
        let top = ev.encode(&self.row_mask([true, false], w))?;
        let bottom = ev.encode(&self.row_mask([false, true], w))?;
        let n = self.params.he().n();
        let per_chunk =
            ev.execution()
                .map_range(v.len(), |m| -> Result<Vec<S::Ciphertext>, HeError> {
                    let first = ev.add(
                        &ev.mul_plain(&v[m], &top)?,
                        &ev.rot_col(&ev.mul_plain(&d[m], &top)?)?,
                    )?;
                    if m * n + w >= self.params.len() {
                        return Ok(vec![first]);
                    }
                    let second = ev.add(
                        &ev.rot_col(&ev.mul_plain(&v[m], &bottom)?)?,
                        &ev.mul_plain(&d[m], &bottom)?,
                    )?;
                    Ok(vec![first, second])
                });
        let mut out = Vec::with_capacity(2 * v.len());
        for cts in per_chunk {
            out.extend(cts?);
        }
        Ok(out)
    }

    /// `w = C v` for a standard-layout index vector, in row 0 slots `0..s`.
    pub fn comp_idx<S: HeScheme>(
        &self,
        ev: &Evaluator<'_, S>,
        v: &[S::Ciphertext],
    ) -> Result<S::Ciphertext, CompError> {
        self.check_inputs(v)?;
        let z = bsgs_matvec(ev, &self.plan, self.standard_diagonals(), v)?;
        let z = ev.add(&z, &ev.rot_col(&z)?)?;
        let mask = ev.encode(&self.row_mask([true, false], self.params.s()))?;
        Ok(ev.mul_plain(&z, &mask)?)
    }

    /// Compresses the s-sparse vector `d`.
    ///
    /// `hint` must encrypt the index vector of `d`; without it the index
    /// vector is computed as `d^(p-1)`, which costs `log2(p-1)` levels.
    pub fn comp<S: HeScheme>(
        &self,
        ev: &Evaluator<'_, S>,
        d: &[S::Ciphertext],
        hint: Option<&[S::Ciphertext]>,
    ) -> Result<CompressedAnswer<S>, CompError> {
        self.check_inputs(d)?;
        let computed;
        let v = match hint {
            Some(v) => v,
            None => {
                computed = ev
                    .execution()
                    .map(d, |c| power_fermat(ev, c))
                    .into_iter()
                    .collect::<Result<Vec<_>, _>>()?;
                &computed
            }
        };
        let s = self.params.s();
        match self.packing {
            Packing::Packed => {
                let u = self.pack_pair(ev, v, d)?;
                let out = self.finish_packed(ev, self.paired_diagonals(), &u)?;
                Ok(CompressedAnswer::new(AnswerLayout::packed(s), vec![out]))
            }
            Packing::Separate => {
                let w = self.comp_idx(ev, v)?;
                let e = self.comp_idx(ev, d)?;
                Ok(CompressedAnswer::new(AnswerLayout::separate(s), vec![w, e]))
            }
        }
    }

    /// Compresses `DB ⊙ v` for a cleartext database from the index vector
    /// alone: the packed input is `[v; v]` and the matrix `[C; D]`.
    pub fn comp_cleartext_db<S: HeScheme>(
        &self,
        ev: &Evaluator<'_, S>,
        v: &[S::Ciphertext],
        db: &MaskedDiagonals,
    ) -> Result<CompressedAnswer<S>, CompError> {
        let u = self.pack_pair(ev, v, v)?;
        let out = self.finish_packed(ev, &db.diags, &u)?;
        Ok(CompressedAnswer::new(
            AnswerLayout::packed(self.params.s()),
            vec![out],
        ))
    }

    fn finish_packed<S: HeScheme>(
        &self,
        ev: &Evaluator<'_, S>,
        diags: &Diagonals,
        u: &[S::Ciphertext],
    ) -> Result<S::Ciphertext, CompError> {
        let y = bsgs_matvec(ev, &self.plan, diags, u)?;
        let mask = ev.encode(&self.row_mask([true, true], self.params.s()))?;
        Ok(ev.mul_plain(&y, &mask)?)
    }
}

/// Levels consumed by [`power_fermat`] for modulus `p`.
pub fn power_fermat_depth(p: u64) -> u32 {
    power_depth(p - 1)
}

fn power_depth(e: u64) -> u32 {
    // mirrors the schedule in `power`, tracking depths instead of ciphertexts
    let mut terms: Vec<u32> = (0..64 - e.leading_zeros())
        .filter(|i| e >> i & 1 == 1)
        .collect();
    while terms.len() > 1 {
        terms = terms
            .chunks(2)
            .map(|c| c.iter().max().unwrap() + (c.len() as u32 - 1))
            .collect();
    }
    terms.first().copied().unwrap_or(0)
}

/// Slotwise `x^(p-1)`: 1 on nonzero slots, 0 elsewhere.
pub fn power_fermat<S: HeScheme>(
    ev: &Evaluator<'_, S>,
    ct: &S::Ciphertext,
) -> Result<S::Ciphertext, HeError> {
    power(ev, ct, ev.params().p().value() - 1)
}

/// Slotwise `x^e` for `e >= 1`: repeated squaring, then a balanced product
/// of the selected powers.
fn power<S: HeScheme>(
    ev: &Evaluator<'_, S>,
    ct: &S::Ciphertext,
    e: u64,
) -> Result<S::Ciphertext, HeError> {
    assert!(e >= 1, "exponent must be positive");
    let mut terms = Vec::new();
    let mut sq = ct.clone();
    let mut bits = e;
    loop {
        if bits & 1 == 1 {
            terms.push(sq.clone());
        }
        bits >>= 1;
        if bits == 0 {
            break;
        }
        sq = ev.mul(&sq, &sq)?;
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        for pair in terms.chunks(2) {
            next.push(match pair {
                [a, b] => ev.mul(a, b)?,
                [a] => a.clone(),
                _ => unreachable!(),
            });
        }
        terms = next;
    }
    Ok(terms.pop().expect("at least one term"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::{HeParams, Simulator};
    use crate::homcomp::{decrypt_vector, encrypt_vector};
    use crate::zp::mod_pow;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(
        len: usize,
        s: usize,
        n: usize,
        levels: u32,
    ) -> (Compressor, crate::he::SimSecretKey, crate::he::SimPublicKey) {
        let he = HeParams::new(n, 65537, levels).unwrap();
        let comp = Compressor::new(CompressionParams::new(len, s, he).unwrap()).unwrap();
        let (sk, pk) = Simulator::keygen(&he, &comp.rotation_set(), 9).unwrap();
        (comp, sk, pk)
    }

    #[test]
    fn depths() {
        assert_eq!(power_fermat_depth(65537), 16);
        // 96 = 0b1100000: 6 squarings, two terms
        assert_eq!(power_fermat_depth(97), 7);
        assert_eq!(power_depth(1), 0);
        assert_eq!(power_depth(7), 3);
    }

    #[test]
    fn pack_pair_layout() {
        let (comp, sk, pk) = setup(8, 1, 8, 3);
        let ev = Evaluator::<Simulator>::new(&pk);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = encrypt_vector::<Simulator>(&pk, &[1; 8], &mut rng).unwrap();
        let d = encrypt_vector::<Simulator>(&pk, &[2; 8], &mut rng).unwrap();
        let u = comp.pack_pair(&ev, &v, &d).unwrap();
        assert_eq!(u.len(), 2);
        for ct in &u {
            let m = Simulator::decrypt(&sk, ct).unwrap();
            assert_eq!(m.row(0), &[1, 1, 1, 1]);
            assert_eq!(m.row(1), &[2, 2, 2, 2]);
        }
        // distinct halves land in the right place; d = 0 leaves row 1 empty
        let vv: Vec<u64> = (1..=8).collect();
        let v = encrypt_vector::<Simulator>(&pk, &vv, &mut rng).unwrap();
        let d = encrypt_vector::<Simulator>(&pk, &[0; 8], &mut rng).unwrap();
        let u = comp.pack_pair(&ev, &v, &d).unwrap();
        let rows: Vec<SlotMatrix> = u
            .iter()
            .map(|c| Simulator::decrypt(&sk, c).unwrap())
            .collect();
        assert_eq!(rows[0].row(0), &[1, 2, 3, 4]);
        assert_eq!(rows[1].row(0), &[5, 6, 7, 8]);
        assert!(rows.iter().all(|m| m.row(1).iter().all(|&x| x == 0)));
    }

    #[test]
    fn odd_half_is_skipped_past_len() {
        let (comp, _, pk) = setup(3, 1, 8, 3);
        let ev = Evaluator::<Simulator>::new(&pk);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = encrypt_vector::<Simulator>(&pk, &[1, 0, 0], &mut rng).unwrap();
        assert_eq!(comp.pack_pair(&ev, &v, &v).unwrap().len(), 1);
    }

    #[test]
    fn example_two_by_two() {
        let (comp, sk, pk) = setup(10, 2, 8, 19);
        let ev = Evaluator::<Simulator>::new(&pk);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut d = vec![0u64; 10];
        d[1] = 5;
        d[2] = 7;
        let v: Vec<u64> = d.iter().map(|&x| (x != 0) as u64).collect();
        let cd = encrypt_vector::<Simulator>(&pk, &d, &mut rng).unwrap();
        let cv = encrypt_vector::<Simulator>(&pk, &v, &mut rng).unwrap();

        let w = comp.comp_idx(&ev, &cv).unwrap();
        assert_eq!(
            decrypt_vector::<Simulator>(&sk, &[w], 6).unwrap(),
            vec![5, 13, 0, 0, 0, 0]
        );

        for hint in [Some(cv.as_slice()), None] {
            let ans = comp.comp(&ev, &cd, hint).unwrap();
            assert_eq!(ans.ciphertexts().len(), 1);
            let m = Simulator::decrypt(&sk, &ans.ciphertexts()[0]).unwrap();
            assert_eq!(m.row(0), &[5, 13, 0, 0]);
            assert_eq!(m.row(1), &[31, 83, 0, 0]);
        }
    }

    #[test]
    fn separate_mode_and_cleartext_db_agree_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (len, s) = (40, 4);
        let (comp, sk, pk) = setup(len, s, 16, 3);
        let c = build_vandermonde(comp.params()).unwrap();
        let db: Vec<u64> = (0..len).map(|_| rng.gen_range(1..65537)).collect();
        let mut v = vec![0u64; len];
        for _ in 0..s {
            v[rng.gen_range(0..len)] = 1;
        }
        let d: Vec<u64> = v.iter().zip(&db).map(|(a, b)| a * b).collect();
        let cv = encrypt_vector::<Simulator>(&pk, &v, &mut rng).unwrap();
        let cd = encrypt_vector::<Simulator>(&pk, &d, &mut rng).unwrap();
        let ev = Evaluator::<Simulator>::new(&pk);

        let masked = comp.prepare_db(&db).unwrap();
        let ans = comp.comp_cleartext_db(&ev, &cv, &masked).unwrap();
        let m = Simulator::decrypt(&sk, &ans.ciphertexts()[0]).unwrap();
        assert_eq!(&m.row(0)[..s], c.apply(&v).as_slice());
        assert_eq!(&m.row(1)[..s], c.apply(&d).as_slice());

        let sep = Compressor::new(*comp.params())
            .unwrap()
            .with_packing(Packing::Separate);
        let ans = sep.comp(&ev, &cd, Some(&cv)).unwrap();
        assert_eq!(ans.ciphertexts().len(), 2);
        let w = Simulator::decrypt(&sk, &ans.ciphertexts()[0]).unwrap();
        let e = Simulator::decrypt(&sk, &ans.ciphertexts()[1]).unwrap();
        assert_eq!(&w.row(0)[..s], c.apply(&v).as_slice());
        assert_eq!(&e.row(0)[..s], c.apply(&d).as_slice());
        assert!(w.row(1).iter().chain(e.row(1)).all(|&x| x == 0));
    }

    #[test]
    fn fermat_matches_cleartext() {
        let (_, sk, pk) = setup(8, 1, 8, 16);
        let ev = Evaluator::<Simulator>::new(&pk);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = crate::zp::PrimeModulus::new(65537).unwrap();
        let mut x: Vec<u64> = (0..8).map(|_| rng.gen_range(0..65537)).collect();
        x[0] = 0;
        x[3] = 4;
        let ct = encrypt_vector::<Simulator>(&pk, &x, &mut rng).unwrap();
        let out =
            decrypt_vector::<Simulator>(&sk, &[power_fermat(&ev, &ct[0]).unwrap()], 8).unwrap();
        let want: Vec<u64> = x.iter().map(|&a| mod_pow(a, 65536, p)).collect();
        assert_eq!(out, want);
        assert_eq!(out[0], 0);
        assert_eq!(out[3], 1);
        assert_eq!(ev.counts().ct_mults, 16);
        // idempotent on 0/1 vectors, and depth 16 is exactly the budget
        let bits = encrypt_vector::<Simulator>(&pk, &out, &mut rng).unwrap();
        let again = power_fermat(&ev, &bits[0]).unwrap();
        assert_eq!(Simulator::decrypt(&sk, &again).unwrap().to_vector(), out);
        assert_eq!(Simulator::level(&again), 0);
    }

    #[test]
    fn general_power() {
        let he = HeParams::new(8, 97, 8).unwrap();
        let (sk, pk) = Simulator::keygen(&he, &RotationSet::new(), 1).unwrap();
        let ev = Evaluator::<Simulator>::new(&pk);
        let p = crate::zp::PrimeModulus::new(97).unwrap();
        let x: Vec<u64> = vec![0, 1, 2, 3, 5, 50, 96, 7];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ct = encrypt_vector::<Simulator>(&pk, &x, &mut rng).unwrap();
        for e in [1u64, 2, 7, 13, 96] {
            let out = Simulator::decrypt(&sk, &power(&ev, &ct[0], e).unwrap())
                .unwrap()
                .to_vector();
            assert_eq!(
                out,
                x.iter().map(|&a| mod_pow(a, e, p)).collect::<Vec<_>>(),
                "e = {e}"
            );
        }
    }
}
