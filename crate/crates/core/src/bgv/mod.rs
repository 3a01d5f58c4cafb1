//! A small leveled BGV scheme over `Z_q[X]/(X^n + 1)`.
//!
//! * Ciphertext modulus: a chain of primes `q_0 .. q_L` (`L = max_level`),
//!   each `= 1 mod 2n*p`, with residue-number-system arithmetic. A ciphertext
//!   at level `l` lives modulo `q_0 * .. * q_l`.
//! * Plaintext in the low bits: `c0 + c1*s = m + p*e`.
//! * `mul` and `mul_plain` finish with a modulus switch that drops `q_l`.
//! * Key switching (relinearization and rotations) uses a base-`2^w` digit
//!   gadget on each residue.
//! * A log2 noise estimate rides along every ciphertext and raises
//!   [`HeError::NoiseOverflow`] before decryption could go wrong.

mod context;
mod keys;
pub mod ntt;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::he::codec::{self, ObjectKind, Reader, Writer};
use crate::he::{check_same_key, BackendId, HeError, HeParams, HeScheme, RotationSet, SlotMatrix};

use context::log2_add;
pub use context::{modulus_chain, BgvConfig, BgvContext};
use keys::{sample_cbd, sample_ternary, sample_uniform, KsKey, Rns};
use ntt::{add_mod, apply_permutation, mul_mod, sub_mod};

pub struct BgvMini;

pub struct BgvSecretKey {
    ctx: Arc<BgvContext>,
    key_id: u64,
    s: Vec<i64>,
    s_ntt: Rns,
}

struct GaloisKey {
    perm: Vec<u32>,
    key: KsKey,
}

pub struct BgvPublicKey {
    ctx: Arc<BgvContext>,
    key_id: u64,
    rotations: RotationSet,
    b: Rns,
    a: Rns,
    relin: KsKey,
    /// Keyed by Galois element.
    galois: BTreeMap<usize, GaloisKey>,
}

impl BgvPublicKey {
    pub fn context(&self) -> &BgvContext {
        &self.ctx
    }

    /// Number of key-switching keys held (relinearization plus one per Galois element).
    pub fn keyswitch_key_count(&self) -> usize {
        1 + self.galois.len()
    }
}

impl BgvSecretKey {
    pub fn context(&self) -> &BgvContext {
        &self.ctx
    }
}

/// Representation of ciphertext residues.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    Ntt,
    /// Coefficient form, as read from the wire.
    Coeff,
}

#[derive(Clone, Debug)]
pub struct BgvCiphertext {
    key_id: u64,
    level: u32,
    noise_bits: f64,
    domain: Domain,
    /// `q_0 ..= q_level`
    moduli: Vec<u64>,
    c: [Rns; 2],
}

impl BgvCiphertext {
    /// Heuristic log2 bound on the decryption noise.
    pub fn noise_bits(&self) -> f64 {
        self.noise_bits
    }
}

/// Plaintext polynomial in NTT form over every chain prime.
pub struct BgvPlaintext {
    residues: Rns,
    norm_bits: f64,
}

impl BgvMini {
    pub fn keygen_with(
        params: &HeParams,
        config: BgvConfig,
        rotations: &RotationSet,
        seed: u64,
    ) -> Result<(BgvSecretKey, BgvPublicKey), HeError> {
        rotations.validate(params)?;
        let ctx = Arc::new(BgvContext::new(params, config)?);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let key_id = rng.next_u64();
        let count = ctx.primes.len();
        let s = sample_ternary(ctx.n(), &mut rng);
        let s_ntt = ctx.lift_signed(&s, count);

        let a = sample_uniform(&ctx, count, &mut rng);
        let e = ctx.lift_signed(&sample_cbd(ctx.n(), &mut rng), count);
        let b = (0..count)
            .map(|j| {
                let q = ctx.primes[j];
                (0..ctx.n())
                    .map(|k| {
                        sub_mod(
                            mul_mod(ctx.p(), e[j][k], q),
                            mul_mod(a[j][k], s_ntt[j][k], q),
                            q,
                        )
                    })
                    .collect()
            })
            .collect();

        let s2: Rns = (0..count)
            .map(|j| {
                s_ntt[j]
                    .iter()
                    .map(|&x| mul_mod(x, x, ctx.primes[j]))
                    .collect()
            })
            .collect();
        let relin = KsKey::generate(&ctx, &s_ntt, &s2, &mut rng);

        let mut elements: Vec<usize> = rotations
            .rows()
            .map(|r| ctx.row_galois_element(r))
            .collect();
        if rotations.has_col() {
            elements.push(ctx.col_galois_element());
        }
        let mut galois = BTreeMap::new();
        for k in elements {
            let perm = ctx.galois_permutation(k);
            let target: Rns = s_ntt.iter().map(|r| apply_permutation(r, &perm)).collect();
            let key = KsKey::generate(&ctx, &s_ntt, &target, &mut rng);
            galois.insert(k, GaloisKey { perm, key });
        }

        let sk = BgvSecretKey {
            ctx: ctx.clone(),
            key_id,
            s,
            s_ntt,
        };
        let pk = BgvPublicKey {
            ctx,
            key_id,
            rotations: rotations.clone(),
            b,
            a,
            relin,
            galois,
        };
        Ok((sk, pk))
    }
}

fn ntt_form<'a>(
    ctx: &BgvContext,
    ct: &'a BgvCiphertext,
) -> Result<std::borrow::Cow<'a, BgvCiphertext>, HeError> {
    if ct.moduli[..] != ctx.primes[..=ct.level as usize] {
        return Err(HeError::BackendMismatch(
            "ciphertext modulus chain differs from the key's".into(),
        ));
    }
    match ct.domain {
        Domain::Ntt => Ok(std::borrow::Cow::Borrowed(ct)),
        Domain::Coeff => {
            let mut out = ct.clone();
            for comp in out.c.iter_mut() {
                for (j, r) in comp.iter_mut().enumerate() {
                    ctx.tables[j].forward(r);
                }
            }
            out.domain = Domain::Ntt;
            Ok(std::borrow::Cow::Owned(out))
        }
    }
}

fn check_noise(ctx: &BgvContext, ct: &BgvCiphertext) -> Result<(), HeError> {
    let budget = ctx.budget(ct.level as usize);
    if ct.noise_bits > budget {
        return Err(HeError::NoiseOverflow {
            estimate_bits: ct.noise_bits,
            budget_bits: budget,
        });
    }
    Ok(())
}

/// Divides by the top prime, rounding so the plaintext is unchanged.
fn modswitch(ctx: &BgvContext, mut ct: BgvCiphertext) -> BgvCiphertext {
    let l = ct.level as usize;
    debug_assert!(l > 0 && ct.domain == Domain::Ntt);
    let ql = ctx.primes[l];
    let p = ctx.p() as i128;
    for comp in ct.c.iter_mut() {
        let mut top = comp.pop().expect("residue for level");
        ctx.tables[l].inverse(&mut top);
        // delta = c mod q_l, adjusted by a multiple of q_l so that delta = 0 mod p
        let delta: Vec<i128> = top
            .iter()
            .map(|&r| {
                let rc = if r > ql / 2 {
                    r as i128 - ql as i128
                } else {
                    r as i128
                };
                let mut k = (-rc).rem_euclid(p);
                if k > p / 2 {
                    k -= p;
                }
                rc + ql as i128 * k
            })
            .collect();
        for (j, r) in comp.iter_mut().enumerate() {
            let qj = ctx.primes[j];
            let mut dj: Vec<u64> = delta
                .iter()
                .map(|&d| d.rem_euclid(qj as i128) as u64)
                .collect();
            ctx.tables[j].forward(&mut dj);
            let inv = ctx.q_inv[l][j];
            for (x, &d) in r.iter_mut().zip(&dj) {
                *x = mul_mod(sub_mod(*x, d, qj), inv, qj);
            }
        }
    }
    ct.noise_bits = ctx.after_modswitch(ct.noise_bits, l);
    ct.level -= 1;
    ct.moduli.pop();
    ct
}

fn switch_to(ctx: &BgvContext, mut ct: BgvCiphertext, level: u32) -> BgvCiphertext {
    while ct.level > level {
        ct = modswitch(ctx, ct);
    }
    ct
}

/// Brings two ciphertexts to NTT form at a common level.
fn align(
    pk: &BgvPublicKey,
    a: &BgvCiphertext,
    b: &BgvCiphertext,
) -> Result<(BgvCiphertext, BgvCiphertext), HeError> {
    check_same_key(a.key_id, b.key_id)?;
    check_same_key(pk.key_id, a.key_id)?;
    let level = a.level.min(b.level);
    let a = switch_to(&pk.ctx, ntt_form(&pk.ctx, a)?.into_owned(), level);
    let b = switch_to(&pk.ctx, ntt_form(&pk.ctx, b)?.into_owned(), level);
    Ok((a, b))
}

fn zip_residues(ctx: &BgvContext, a: &Rns, b: &Rns, f: impl Fn(u64, u64, u64) -> u64) -> Rns {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(j, (x, y))| {
            let q = ctx.primes[j];
            x.iter().zip(y).map(|(&u, &v)| f(u, v, q)).collect()
        })
        .collect()
}

fn own(pk: &BgvPublicKey, a: &BgvCiphertext) -> Result<BgvCiphertext, HeError> {
    check_same_key(pk.key_id, a.key_id)?;
    Ok(ntt_form(&pk.ctx, a)?.into_owned())
}

fn apply_galois(
    pk: &BgvPublicKey,
    a: &BgvCiphertext,
    k: usize,
    what: String,
) -> Result<BgvCiphertext, HeError> {
    let gk = pk.galois.get(&k).ok_or(HeError::MissingRotationKey(what))?;
    let a = own(pk, a)?;
    let ctx = &pk.ctx;
    let level = a.level as usize;
    let c0: Rns = a.c[0]
        .iter()
        .map(|r| apply_permutation(r, &gk.perm))
        .collect();
    let c1: Rns = a.c[1]
        .iter()
        .map(|r| apply_permutation(r, &gk.perm))
        .collect();
    let (k0, k1) = gk.key.switch(ctx, &c1, level);
    let out = BgvCiphertext {
        c: [zip_residues(ctx, &c0, &k0, add_mod), k1],
        noise_bits: log2_add(a.noise_bits, ctx.keyswitch_noise(level)),
        ..a
    };
    check_noise(ctx, &out)?;
    Ok(out)
}

fn write_rns(w: &mut Writer, r: &Rns) {
    for res in r {
        w.u64s(res);
    }
}

fn read_rns(r: &mut Reader<'_>, ctx: &BgvContext, count: usize) -> Result<Rns, HeError> {
    (0..count).map(|j| r.u64s(ctx.n(), ctx.primes[j])).collect()
}

fn write_config(w: &mut Writer, ctx: &BgvContext) {
    w.params(&ctx.params);
    w.u8(ctx.config.digit_bits as u8);
    w.u8(ctx.config.prime_bits as u8);
    w.u64s(&ctx.primes);
}

fn read_config(r: &mut Reader<'_>) -> Result<Arc<BgvContext>, HeError> {
    let params = r.params()?;
    let config = BgvConfig {
        digit_bits: r.u8()? as u32,
        prime_bits: r.u8()? as u32,
    };
    let primes = r.u64s(params.max_level() as usize + 1, u64::MAX)?;
    Ok(Arc::new(BgvContext::from_primes(&params, config, primes)?))
}

fn write_ks(w: &mut Writer, k: &KsKey) {
    for per_residue in &k.parts {
        for (b, a) in per_residue {
            write_rns(w, b);
            write_rns(w, a);
        }
    }
}

fn read_ks(r: &mut Reader<'_>, ctx: &BgvContext) -> Result<KsKey, HeError> {
    let count = ctx.primes.len();
    let parts = (0..count)
        .map(|i| {
            (0..ctx.digits[i])
                .map(|_| Ok((read_rns(r, ctx, count)?, read_rns(r, ctx, count)?)))
                .collect::<Result<Vec<_>, HeError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KsKey { parts })
}

impl HeScheme for BgvMini {
    const BACKEND: BackendId = BackendId::BgvMini;

    type SecretKey = BgvSecretKey;
    type PublicKey = BgvPublicKey;
    type Ciphertext = BgvCiphertext;
    type Plaintext = BgvPlaintext;

    fn keygen(
        params: &HeParams,
        rotations: &RotationSet,
        seed: u64,
    ) -> Result<(BgvSecretKey, BgvPublicKey), HeError> {
        Self::keygen_with(params, BgvConfig::default(), rotations, seed)
    }

    fn params(pk: &BgvPublicKey) -> &HeParams {
        &pk.ctx.params
    }

    fn rotations(pk: &BgvPublicKey) -> &RotationSet {
        &pk.rotations
    }

    fn key_id(pk: &BgvPublicKey) -> u64 {
        pk.key_id
    }

    fn secret_key_id(sk: &BgvSecretKey) -> u64 {
        sk.key_id
    }

    fn ciphertext_key_id(ct: &BgvCiphertext) -> u64 {
        ct.key_id
    }

    fn level(ct: &BgvCiphertext) -> u32 {
        ct.level
    }

    fn encode(pk: &BgvPublicKey, m: &SlotMatrix) -> Result<BgvPlaintext, HeError> {
        let ctx = &pk.ctx;
        if m.width() != ctx.params.width() {
            return Err(HeError::DimensionMismatch {
                expected: ctx.params.width(),
                got: m.width(),
            });
        }
        let coeffs: Vec<i64> = ctx
            .slot_encode(m)
            .into_iter()
            .map(|c| ctx.center_p(c))
            .collect();
        let max = coeffs
            .iter()
            .map(|c| c.unsigned_abs())
            .max()
            .unwrap_or(0)
            .max(1);
        Ok(BgvPlaintext {
            residues: ctx.lift_signed(&coeffs, ctx.primes.len()),
            norm_bits: (max as f64).log2(),
        })
    }

    fn encrypt(
        pk: &BgvPublicKey,
        m: &SlotMatrix,
        rng: &mut dyn RngCore,
    ) -> Result<BgvCiphertext, HeError> {
        let ctx = &pk.ctx;
        let pt = Self::encode(pk, m)?;
        let count = ctx.primes.len();
        let n = ctx.n();
        let u = ctx.lift_signed(&sample_ternary(n, rng), count);
        let e1 = ctx.lift_signed(&sample_cbd(n, rng), count);
        let e2 = ctx.lift_signed(&sample_cbd(n, rng), count);
        let p = ctx.p();
        let mut c0 = Vec::with_capacity(count);
        let mut c1 = Vec::with_capacity(count);
        for j in 0..count {
            let q = ctx.primes[j];
            c0.push(
                (0..n)
                    .map(|k| {
                        let v =
                            add_mod(mul_mod(pk.b[j][k], u[j][k], q), mul_mod(p, e1[j][k], q), q);
                        add_mod(v, pt.residues[j][k], q)
                    })
                    .collect(),
            );
            c1.push(
                (0..n)
                    .map(|k| add_mod(mul_mod(pk.a[j][k], u[j][k], q), mul_mod(p, e2[j][k], q), q))
                    .collect(),
            );
        }
        Ok(BgvCiphertext {
            key_id: pk.key_id,
            level: ctx.params.max_level(),
            noise_bits: ctx.fresh_noise(),
            domain: Domain::Ntt,
            moduli: ctx.primes.clone(),
            c: [c0, c1],
        })
    }

    fn decrypt(sk: &BgvSecretKey, ct: &BgvCiphertext) -> Result<SlotMatrix, HeError> {
        check_same_key(sk.key_id, ct.key_id)?;
        let ctx = &sk.ctx;
        let ct = switch_to(ctx, ntt_form(ctx, ct)?.into_owned(), 0);
        check_noise(ctx, &ct)?;
        let q = ctx.primes[0];
        let mut v: Vec<u64> = ct.c[0][0]
            .iter()
            .zip(&ct.c[1][0])
            .zip(&sk.s_ntt[0])
            .map(|((&a, &b), &s)| add_mod(a, mul_mod(b, s, q), q))
            .collect();
        ctx.tables[0].inverse(&mut v);
        let p = ctx.p() as i128;
        let coeffs: Vec<u64> = v
            .into_iter()
            .map(|x| {
                let c = if x > q / 2 {
                    x as i128 - q as i128
                } else {
                    x as i128
                };
                c.rem_euclid(p) as u64
            })
            .collect();
        Ok(ctx.slot_decode(&coeffs))
    }

    fn add(
        pk: &BgvPublicKey,
        a: &BgvCiphertext,
        b: &BgvCiphertext,
    ) -> Result<BgvCiphertext, HeError> {
        let (a, b) = align(pk, a, b)?;
        let ctx = &pk.ctx;
        let out = BgvCiphertext {
            c: [
                zip_residues(ctx, &a.c[0], &b.c[0], add_mod),
                zip_residues(ctx, &a.c[1], &b.c[1], add_mod),
            ],
            noise_bits: log2_add(a.noise_bits, b.noise_bits),
            ..a
        };
        check_noise(ctx, &out)?;
        Ok(out)
    }

    fn sub(
        pk: &BgvPublicKey,
        a: &BgvCiphertext,
        b: &BgvCiphertext,
    ) -> Result<BgvCiphertext, HeError> {
        let (a, b) = align(pk, a, b)?;
        let ctx = &pk.ctx;
        let out = BgvCiphertext {
            c: [
                zip_residues(ctx, &a.c[0], &b.c[0], sub_mod),
                zip_residues(ctx, &a.c[1], &b.c[1], sub_mod),
            ],
            noise_bits: log2_add(a.noise_bits, b.noise_bits),
            ..a
        };
        check_noise(ctx, &out)?;
        Ok(out)
    }

    fn neg(pk: &BgvPublicKey, a: &BgvCiphertext) -> Result<BgvCiphertext, HeError> {
        let mut a = own(pk, a)?;
        for comp in a.c.iter_mut() {
            for (j, r) in comp.iter_mut().enumerate() {
                let q = pk.ctx.primes[j];
                r.iter_mut().for_each(|x| *x = sub_mod(0, *x, q));
            }
        }
        Ok(a)
    }

    fn add_plain(
        pk: &BgvPublicKey,
        a: &BgvCiphertext,
        m: &BgvPlaintext,
    ) -> Result<BgvCiphertext, HeError> {
        let mut a = own(pk, a)?;
        for (j, r) in a.c[0].iter_mut().enumerate() {
            let q = pk.ctx.primes[j];
            r.iter_mut()
                .zip(&m.residues[j])
                .for_each(|(x, &y)| *x = add_mod(*x, y, q));
        }
        a.noise_bits = log2_add(a.noise_bits, m.norm_bits);
        check_noise(&pk.ctx, &a)?;
        Ok(a)
    }

    fn mul(
        pk: &BgvPublicKey,
        a: &BgvCiphertext,
        b: &BgvCiphertext,
    ) -> Result<BgvCiphertext, HeError> {
        let level = a.level.min(b.level);
        if level == 0 {
            return Err(HeError::LevelExhausted { op: "mul", level });
        }
        let (a, b) = align(pk, a, b)?;
        let ctx = &pk.ctx;
        let mul = |x: u64, y: u64, q: u64| mul_mod(x, y, q);
        let d0 = zip_residues(ctx, &a.c[0], &b.c[0], mul);
        let d1 = zip_residues(
            ctx,
            &zip_residues(ctx, &a.c[0], &b.c[1], mul),
            &zip_residues(ctx, &a.c[1], &b.c[0], mul),
            add_mod,
        );
        let d2 = zip_residues(ctx, &a.c[1], &b.c[1], mul);
        let (k0, k1) = pk.relin.switch(ctx, &d2, level as usize);
        let noise = log2_add(
            ctx.product_noise(a.noise_bits, b.noise_bits),
            ctx.keyswitch_noise(level as usize),
        );
        let out = BgvCiphertext {
            c: [
                zip_residues(ctx, &d0, &k0, add_mod),
                zip_residues(ctx, &d1, &k1, add_mod),
            ],
            noise_bits: noise,
            ..a
        };
        check_noise(ctx, &out)?;
        Ok(modswitch(ctx, out))
    }

    fn mul_plain(
        pk: &BgvPublicKey,
        a: &BgvCiphertext,
        m: &BgvPlaintext,
    ) -> Result<BgvCiphertext, HeError> {
        if a.level == 0 {
            return Err(HeError::LevelExhausted {
                op: "mul_plain",
                level: 0,
            });
        }
        let mut a = own(pk, a)?;
        let ctx = &pk.ctx;
        for comp in a.c.iter_mut() {
            for (j, r) in comp.iter_mut().enumerate() {
                let q = ctx.primes[j];
                r.iter_mut()
                    .zip(&m.residues[j])
                    .for_each(|(x, &y)| *x = mul_mod(*x, y, q));
            }
        }
        a.noise_bits = ctx.product_noise(a.noise_bits, m.norm_bits);
        check_noise(ctx, &a)?;
        Ok(modswitch(ctx, a))
    }

    fn rot_row(pk: &BgvPublicKey, a: &BgvCiphertext, r: usize) -> Result<BgvCiphertext, HeError> {
        if !pk.rotations.contains_row(r) {
            return Err(HeError::MissingRotationKey(format!("row rotation by {r}")));
        }
        apply_galois(
            pk,
            a,
            pk.ctx.row_galois_element(r),
            format!("row rotation by {r}"),
        )
    }

    fn rot_col(pk: &BgvPublicKey, a: &BgvCiphertext) -> Result<BgvCiphertext, HeError> {
        if !pk.rotations.has_col() {
            return Err(HeError::MissingRotationKey("row swap".into()));
        }
        apply_galois(pk, a, pk.ctx.col_galois_element(), "row swap".into())
    }

    /// Payload: key id, level byte, noise estimate, n, the level's moduli,
    /// then both components residue by residue in coefficient form.
    fn write_ciphertext(ct: &BgvCiphertext) -> Vec<u8> {
        let mut w = codec::begin(BackendId::BgvMini, ObjectKind::Ciphertext);
        w.u64(ct.key_id);
        w.u8(ct.level as u8);
        w.f64(ct.noise_bits);
        let n = ct.c[0][0].len();
        w.u32(n as u32);
        w.u64s(&ct.moduli);
        for comp in &ct.c {
            for (r, &q) in comp.iter().zip(&ct.moduli) {
                if ct.domain == Domain::Ntt {
                    let mut x = r.clone();
                    ntt::NttTable::new(q, n)
                        .expect("chain prime")
                        .inverse(&mut x);
                    w.u64s(&x);
                } else {
                    w.u64s(r);
                }
            }
        }
        w.finish()
    }

    fn read_ciphertext(bytes: &[u8]) -> Result<BgvCiphertext, HeError> {
        let mut r = codec::open(bytes, BackendId::BgvMini, ObjectKind::Ciphertext)?;
        let key_id = r.u64()?;
        let level = r.u8()? as u32;
        let noise_bits = r.f64()?;
        let n = r.u32()? as usize;
        if !n.is_power_of_two() || n < 4 {
            return Err(HeError::Codec(format!("bad ring dimension {n}")));
        }
        let moduli = r.u64s(level as usize + 1, 1 << 62)?;
        let mut c: [Rns; 2] = [Vec::new(), Vec::new()];
        for comp in c.iter_mut() {
            for &q in &moduli {
                comp.push(r.u64s(n, q)?);
            }
        }
        r.finish()?;
        Ok(BgvCiphertext {
            key_id,
            level,
            noise_bits,
            domain: Domain::Coeff,
            moduli,
            c,
        })
    }

    fn write_public_key(pk: &BgvPublicKey) -> Vec<u8> {
        let mut w = codec::begin(BackendId::BgvMini, ObjectKind::PublicKey);
        w.u64(pk.key_id);
        write_config(&mut w, &pk.ctx);
        let rows: Vec<usize> = pk.rotations.rows().collect();
        w.u32(rows.len() as u32);
        rows.iter().for_each(|&r| w.u32(r as u32));
        w.u8(u8::from(pk.rotations.has_col()));
        write_rns(&mut w, &pk.b);
        write_rns(&mut w, &pk.a);
        write_ks(&mut w, &pk.relin);
        for gk in pk.galois.values() {
            write_ks(&mut w, &gk.key);
        }
        w.finish()
    }

    fn read_public_key(bytes: &[u8]) -> Result<BgvPublicKey, HeError> {
        let mut r = codec::open(bytes, BackendId::BgvMini, ObjectKind::PublicKey)?;
        let key_id = r.u64()?;
        let ctx = read_config(&mut r)?;
        let count = r.u32()?;
        let mut rows = Vec::new();
        for _ in 0..count {
            rows.push(r.u32()? as usize);
        }
        let rotations = RotationSet::from_rows(rows, r.u8()? != 0);
        rotations.validate(&ctx.params)?;
        let nres = ctx.primes.len();
        let b = read_rns(&mut r, &ctx, nres)?;
        let a = read_rns(&mut r, &ctx, nres)?;
        let relin = read_ks(&mut r, &ctx)?;
        let mut elements: Vec<usize> = rotations
            .rows()
            .map(|x| ctx.row_galois_element(x))
            .collect();
        if rotations.has_col() {
            elements.push(ctx.col_galois_element());
        }
        elements.sort_unstable();
        elements.dedup();
        let mut galois = BTreeMap::new();
        for k in elements {
            let key = read_ks(&mut r, &ctx)?;
            galois.insert(
                k,
                GaloisKey {
                    perm: ctx.galois_permutation(k),
                    key,
                },
            );
        }
        r.finish()?;
        Ok(BgvPublicKey {
            ctx,
            key_id,
            rotations,
            b,
            a,
            relin,
            galois,
        })
    }

    fn write_secret_key(sk: &BgvSecretKey) -> Vec<u8> {
        let mut w = codec::begin(BackendId::BgvMini, ObjectKind::SecretKey);
        w.u64(sk.key_id);
        write_config(&mut w, &sk.ctx);
        for &x in &sk.s {
            w.u8(x as i8 as u8);
        }
        w.finish()
    }

    fn read_secret_key(bytes: &[u8]) -> Result<BgvSecretKey, HeError> {
        let mut r = codec::open(bytes, BackendId::BgvMini, ObjectKind::SecretKey)?;
        let key_id = r.u64()?;
        let ctx = read_config(&mut r)?;
        let s: Vec<i64> = r.take(ctx.n())?.iter().map(|&b| b as i8 as i64).collect();
        r.finish()?;
        if s.iter().any(|x| !(-1..=1).contains(x)) {
            return Err(HeError::Codec("secret key is not ternary".into()));
        }
        let s_ntt = ctx.lift_signed(&s, ctx.primes.len());
        Ok(BgvSecretKey {
            ctx,
            key_id,
            s,
            s_ntt,
        })
    }
}
