use crate::he::{HeError, HeParams, SlotMatrix};
use crate::zp::is_prime;

use super::ntt::{eval_position, galois_permutation, inv_mod, NttTable};

/// Knobs of the lattice instantiation that the slot contract does not see.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BgvConfig {
    /// Gadget base `2^digit_bits` for key switching.
    pub digit_bits: u32,
    /// Target size of each ciphertext prime.
    pub prime_bits: u32,
}

impl Default for BgvConfig {
    fn default() -> Self {
        Self {
            digit_bits: 16,
            prime_bits: 55,
        }
    }
}

impl BgvConfig {
    fn validate(&self) -> Result<(), HeError> {
        if !(20..=60).contains(&self.prime_bits) {
            return Err(HeError::InvalidParams(format!(
                "prime_bits {} outside [20, 60]",
                self.prime_bits
            )));
        }
        if !(1..=self.prime_bits).contains(&self.digit_bits) {
            return Err(HeError::InvalidParams(format!(
                "digit_bits {} outside [1, prime_bits]",
                self.digit_bits
            )));
        }
        Ok(())
    }
}

/// `count` distinct primes `q < 2^bits` with `q = 1 mod 2n*p`, largest first.
///
/// The `mod p` congruence makes modulus switching preserve the plaintext
/// without a correction factor.
pub fn modulus_chain(n: usize, p: u64, count: usize, bits: u32) -> Result<Vec<u64>, HeError> {
    let m = (2 * n as u64)
        .checked_mul(p)
        .filter(|&m| m < 1 << bits)
        .ok_or_else(|| HeError::NoNttPrimes(format!("2n*p does not fit below 2^{bits}")))?;
    let mut k = ((1u64 << bits) - 1) / m;
    let mut out = Vec::with_capacity(count);
    while out.len() < count && k > 0 {
        let q = k * m + 1;
        if is_prime(q) {
            out.push(q);
        }
        k -= 1;
    }
    if out.len() < count {
        return Err(HeError::NoNttPrimes(format!(
            "found only {} of {count} primes below 2^{bits}",
            out.len()
        )));
    }
    Ok(out)
}

/// Error standard deviation of the centered binomial sampler with eta = 21.
pub(crate) const CBD_ETA: u32 = 21;
const ERR_BOUND: f64 = 6.0 * 3.24;

/// Precomputed tables for one parameter set and modulus chain.
#[derive(Debug)]
pub struct BgvContext {
    pub(crate) params: HeParams,
    pub(crate) config: BgvConfig,
    /// `primes[l]` is dropped when a ciphertext at level `l` switches down.
    pub(crate) primes: Vec<u64>,
    pub(crate) tables: Vec<NttTable>,
    pt_table: NttTable,
    /// NTT position (mod p) of slot `(row, j)`.
    slot_pos: [Vec<usize>; 2],
    /// `q_inv[l][j] = q_l^{-1} mod q_j` for `j < l`.
    pub(crate) q_inv: Vec<Vec<u64>>,
    /// Gadget digits per residue.
    pub(crate) digits: Vec<usize>,
    log_q: Vec<f64>,
}

impl BgvContext {
    pub fn new(params: &HeParams, config: BgvConfig) -> Result<Self, HeError> {
        config.validate()?;
        let count = params.max_level() as usize + 1;
        let mut primes = modulus_chain(params.n(), params.p().value(), count, config.prime_bits)?;
        primes.reverse();
        Self::from_primes(params, config, primes)
    }

    pub fn from_primes(
        params: &HeParams,
        config: BgvConfig,
        primes: Vec<u64>,
    ) -> Result<Self, HeError> {
        config.validate()?;
        let n = params.n();
        let p = params.p().value();
        if primes.len() != params.max_level() as usize + 1 {
            return Err(HeError::InvalidParams(format!(
                "{} primes for max_level {}",
                primes.len(),
                params.max_level()
            )));
        }
        for (i, &q) in primes.iter().enumerate() {
            if q >= 1 << 62
                || !is_prime(q)
                || q % (2 * n as u64 * p) != 1
                || primes[..i].contains(&q)
            {
                return Err(HeError::NoNttPrimes(format!(
                    "{q} is not a usable chain prime"
                )));
            }
        }
        let tables = primes
            .iter()
            .map(|&q| {
                NttTable::new(q, n)
                    .ok_or_else(|| HeError::NoNttPrimes(format!("no 2n-th root mod {q}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let pt_table = NttTable::new(p, n)
            .ok_or_else(|| HeError::InvalidParams("p is not 1 mod 2n".into()))?;

        let width = n / 2;
        let two_n = 2 * n;
        let mut slot_pos = [Vec::with_capacity(width), Vec::with_capacity(width)];
        let mut g = 1usize;
        for _ in 0..width {
            slot_pos[0].push(eval_position(g, n));
            slot_pos[1].push(eval_position(two_n - g, n));
            g = g * 3 % two_n;
        }

        let q_inv = (0..primes.len())
            .map(|l| {
                (0..l)
                    .map(|j| inv_mod(primes[l] % primes[j], primes[j]))
                    .collect()
            })
            .collect();
        let digits = primes
            .iter()
            .map(|&q| (64 - q.leading_zeros()).div_ceil(config.digit_bits) as usize)
            .collect();
        let log_q = primes.iter().map(|&q| (q as f64).log2()).collect();
        Ok(Self {
            params: *params,
            config,
            primes,
            tables,
            pt_table,
            slot_pos,
            q_inv,
            digits,
            log_q,
        })
    }

    pub fn params(&self) -> &HeParams {
        &self.params
    }

    pub fn config(&self) -> BgvConfig {
        self.config
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn p(&self) -> u64 {
        self.params.p().value()
    }

    /// Galois element realizing a left row rotation by `r`.
    pub fn row_galois_element(&self, r: usize) -> usize {
        let two_n = 2 * self.n();
        (0..r).fold(1, |g, _| g * 3 % two_n)
    }

    pub fn col_galois_element(&self) -> usize {
        2 * self.n() - 1
    }

    pub fn galois_permutation(&self, k: usize) -> Vec<u32> {
        galois_permutation(k, self.n())
    }

    /// Plaintext polynomial (coefficients mod p) whose slots are `m`.
    pub fn slot_encode(&self, m: &SlotMatrix) -> Vec<u64> {
        let mut a = vec![0u64; self.n()];
        for row in 0..2 {
            for (j, &x) in m.row(row).iter().enumerate() {
                a[self.slot_pos[row][j]] = x % self.p();
            }
        }
        self.pt_table.inverse(&mut a);
        a
    }

    pub fn slot_decode(&self, coeffs: &[u64]) -> SlotMatrix {
        let mut a = coeffs.to_vec();
        self.pt_table.forward(&mut a);
        let width = self.n() / 2;
        let mut m = SlotMatrix::zeros(width);
        for row in 0..2 {
            for j in 0..width {
                m.set(row, j, a[self.slot_pos[row][j]]);
            }
        }
        m
    }

    /// Lifts a small signed polynomial into every residue `0..count`, NTT form.
    pub(crate) fn lift_signed(&self, coeffs: &[i64], count: usize) -> Vec<Vec<u64>> {
        (0..count)
            .map(|j| {
                let q = self.primes[j];
                let mut r: Vec<u64> = coeffs
                    .iter()
                    .map(|&c| c.rem_euclid(q as i64) as u64)
                    .collect();
                self.tables[j].forward(&mut r);
                r
            })
            .collect()
    }

    /// Centered representative of a plaintext coefficient.
    pub(crate) fn center_p(&self, c: u64) -> i64 {
        let p = self.p();
        if c > p / 2 {
            c as i64 - p as i64
        } else {
            c as i64
        }
    }

    // Noise model: log2 bounds on the infinity norm of c0 + c1*s = m + p*e.

    fn expansion(&self) -> f64 {
        (2.0 * (self.n() as f64).sqrt()).log2()
    }

    pub(crate) fn fresh_noise(&self) -> f64 {
        (self.p() as f64).log2()
            + ERR_BOUND.log2()
            + (2.0 * 2f64.powf(self.expansion()) + 1.0).log2()
    }

    pub(crate) fn modswitch_floor(&self) -> f64 {
        ((self.p() as f64 / 2.0 + 1.0) * (1.0 + 2f64.powf(self.expansion()))).log2()
    }

    pub(crate) fn keyswitch_noise(&self, level: usize) -> f64 {
        let d: usize = self.digits[..=level].iter().sum();
        (self.p() as f64).log2()
            + (d as f64).log2()
            + self.config.digit_bits as f64
            + ERR_BOUND.log2()
            + self.expansion()
    }

    pub(crate) fn product_noise(&self, a: f64, b: f64) -> f64 {
        a + b + self.expansion()
    }

    pub(crate) fn after_modswitch(&self, noise: f64, level: usize) -> f64 {
        log2_add(noise - self.log_q[level], self.modswitch_floor())
    }

    /// Largest admissible noise at `level`: the decryption polynomial must stay below `Q_l / 2`.
    pub(crate) fn budget(&self, level: usize) -> f64 {
        self.log_q[..=level].iter().sum::<f64>() - 1.0
    }
}

pub(crate) fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + 2f64.powf(lo - hi)).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chain_congruences() {
        let chain = modulus_chain(1024, 12289, 4, 55).unwrap();
        assert_eq!(chain.len(), 4);
        for w in chain.windows(2) {
            assert!(w[0] > w[1]);
        }
        for &q in &chain {
            assert!(is_prime(q));
            assert_eq!(q % 2048, 1);
            assert_eq!(q % 12289, 1);
            assert!(q < 1 << 55);
        }
        assert!(matches!(
            modulus_chain(1 << 13, 65537, 3, 25),
            Err(HeError::NoNttPrimes(_))
        ));
    }

    #[test]
    fn slot_encoding_round_trip_and_products() {
        let params = HeParams::new(64, 257, 1).unwrap();
        let ctx = BgvContext::new(&params, BgvConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rand_m = |rng: &mut ChaCha8Rng| {
            SlotMatrix::from_flat(32, (0..64).map(|_| rng.gen_range(0..257)).collect()).unwrap()
        };
        let a = rand_m(&mut rng);
        let b = rand_m(&mut rng);
        let pa = ctx.slot_encode(&a);
        assert_eq!(ctx.slot_decode(&pa), a);
        let pb = ctx.slot_encode(&b);
        let prod = super::super::ntt::negacyclic_schoolbook(&pa, &pb, 257);
        assert_eq!(ctx.slot_decode(&prod), a.mul(&b, params.p()));
    }

    #[test]
    fn automorphisms_rotate_slots() {
        let params = HeParams::new(32, 193, 1).unwrap();
        let ctx = BgvContext::new(&params, BgvConfig::default()).unwrap();
        let m = SlotMatrix::from_flat(16, (1..=32).collect()).unwrap();
        let coeffs = ctx.slot_encode(&m);
        let apply = |k: usize| {
            // coefficient-domain X -> X^k over Z_p
            let n = 32;
            let mut out = vec![0u64; n];
            for (i, &c) in coeffs.iter().enumerate() {
                let j = i * k % (2 * n);
                if j < n {
                    out[j] = (out[j] + c) % 193;
                } else {
                    out[j - n] = (out[j - n] + 193 - c) % 193;
                }
            }
            ctx.slot_decode(&out)
        };
        for r in [1usize, 2, 5, 15] {
            assert_eq!(
                apply(ctx.row_galois_element(r)),
                m.rotate_rows(r as i64),
                "r = {r}"
            );
        }
        assert_eq!(apply(ctx.col_galois_element()), m.swap_rows());
    }
}
