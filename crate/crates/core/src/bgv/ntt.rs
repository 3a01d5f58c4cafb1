//! Negacyclic NTT over Z_q for `q = 1 mod 2n`, `q < 2^62`.
//!
//! The forward transform leaves evaluations in bit-reversed order: output
//! position `k` holds `a(psi^(2 * bitrev(k) + 1))`. Everything that indexes
//! evaluations (slot maps, Galois permutations) goes through [`eval_position`].

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

pub fn pow_mod(mut b: u64, mut e: u64, q: u64) -> u64 {
    let mut r = 1 % q;
    b %= q;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, q);
        }
        b = mul_mod(b, b, q);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo the prime `q`.
pub fn inv_mod(a: u64, q: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(q));
    pow_mod(a, q - 2, q)
}

#[inline]
fn shoup(w: u64, q: u64) -> u64 {
    (((w as u128) << 64) / q as u128) as u64
}

#[inline]
fn mul_shoup(a: u64, w: u64, w_shoup: u64, q: u64) -> u64 {
    let hi = ((a as u128 * w_shoup as u128) >> 64) as u64;
    let r = a.wrapping_mul(w).wrapping_sub(hi.wrapping_mul(q));
    if r >= q {
        r - q
    } else {
        r
    }
}

pub fn bit_reverse(x: usize, log_n: u32) -> usize {
    if log_n == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - log_n)
    }
}

/// NTT position holding the evaluation at `psi^e` (`e` odd, taken mod `2n`).
pub fn eval_position(e: usize, n: usize) -> usize {
    let e = e % (2 * n);
    debug_assert!(e % 2 == 1);
    bit_reverse((e - 1) / 2, n.trailing_zeros())
}

/// Smallest-generator primitive `2n`-th root of unity mod prime `q`.
pub fn primitive_root_2n(q: u64, n: usize) -> Option<u64> {
    let m = 2 * n as u64;
    if !(q - 1).is_multiple_of(m) {
        return None;
    }
    (2..q.min(1 << 20))
        .map(|g| pow_mod(g, (q - 1) / m, q))
        .find(|&psi| pow_mod(psi, n as u64, q) == q - 1)
}

#[derive(Clone, Debug)]
pub struct NttTable {
    q: u64,
    n: usize,
    psi_rev: Vec<u64>,
    psi_rev_shoup: Vec<u64>,
    psi_inv_rev: Vec<u64>,
    psi_inv_rev_shoup: Vec<u64>,
    n_inv: u64,
    n_inv_shoup: u64,
}

impl NttTable {
    pub fn new(q: u64, n: usize) -> Option<Self> {
        assert!(n.is_power_of_two() && q < 1 << 62);
        let psi = primitive_root_2n(q, n)?;
        let psi_inv = inv_mod(psi, q);
        let log_n = n.trailing_zeros();
        let mut psi_rev = vec![0; n];
        let mut psi_inv_rev = vec![0; n];
        let (mut pw, mut pw_inv) = (1u64, 1u64);
        for i in 0..n {
            let r = bit_reverse(i, log_n);
            psi_rev[r] = pw;
            psi_inv_rev[r] = pw_inv;
            pw = mul_mod(pw, psi, q);
            pw_inv = mul_mod(pw_inv, psi_inv, q);
        }
        let n_inv = inv_mod(n as u64 % q, q);
        Some(Self {
            q,
            n,
            psi_rev_shoup: psi_rev.iter().map(|&w| shoup(w, q)).collect(),
            psi_inv_rev_shoup: psi_inv_rev.iter().map(|&w| shoup(w, q)).collect(),
            psi_rev,
            psi_inv_rev,
            n_inv,
            n_inv_shoup: shoup(n_inv, q),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// In-place forward transform; input coefficients must be below `q`.
    pub fn forward(&self, a: &mut [u64]) {
        assert_eq!(a.len(), self.n);
        let q = self.q;
        let mut t = self.n;
        let mut m = 1;
        while m < self.n {
            t >>= 1;
            for i in 0..m {
                let (w, ws) = (self.psi_rev[m + i], self.psi_rev_shoup[m + i]);
                let j1 = 2 * i * t;
                let (lo, hi) = a[j1..j1 + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = *x;
                    let v = mul_shoup(*y, w, ws, q);
                    *x = add_mod(u, v, q);
                    *y = sub_mod(u, v, q);
                }
            }
            m <<= 1;
        }
    }

    /// In-place inverse transform, including the `1/n` scaling.
    pub fn inverse(&self, a: &mut [u64]) {
        assert_eq!(a.len(), self.n);
        let q = self.q;
        let mut t = 1;
        let mut m = self.n;
        while m > 1 {
            let h = m >> 1;
            for i in 0..h {
                let (w, ws) = (self.psi_inv_rev[h + i], self.psi_inv_rev_shoup[h + i]);
                let j1 = 2 * i * t;
                let (lo, hi) = a[j1..j1 + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = *x;
                    let v = *y;
                    *x = add_mod(u, v, q);
                    *y = mul_shoup(sub_mod(u, v, q), w, ws, q);
                }
            }
            t <<= 1;
            m = h;
        }
        for x in a.iter_mut() {
            *x = mul_shoup(*x, self.n_inv, self.n_inv_shoup, q);
        }
    }
}

/// Permutation of NTT positions realizing `X -> X^k` (`k` odd):
/// `out[i] = in[perm[i]]`.
pub fn galois_permutation(k: usize, n: usize) -> Vec<u32> {
    let two_n = 2 * n;
    let log_n = n.trailing_zeros();
    (0..n)
        .map(|i| {
            let e = 2 * bit_reverse(i, log_n) + 1;
            eval_position(e * k % two_n, n) as u32
        })
        .collect()
}

pub fn apply_permutation(a: &[u64], perm: &[u32]) -> Vec<u64> {
    perm.iter().map(|&j| a[j as usize]).collect()
}

/// Schoolbook product in `Z_q[X]/(X^n + 1)`; test oracle.
#[allow(clippy::needless_range_loop)]
pub fn negacyclic_schoolbook(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len();
    let mut out = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            let prod = mul_mod(a[i], b[j], q);
            let k = i + j;
            if k < n {
                out[k] = add_mod(out[k], prod, q);
            } else {
                out[k - n] = sub_mod(out[k - n], prod, q);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prime_for(n: usize, bits: u32) -> u64 {
        let m = 2 * n as u64;
        let mut q = ((1u64 << bits) / m) * m + 1;
        while !crate::zp::is_prime(q) {
            q -= m;
        }
        q
    }

    fn naive_eval(a: &[u64], x: u64, q: u64) -> u64 {
        a.iter()
            .rev()
            .fold(0, |acc, &c| add_mod(mul_mod(acc, x, q), c, q))
    }

    #[test]
    fn forward_matches_evaluation_order() {
        let n = 16;
        let q = prime_for(n, 40);
        let t = NttTable::new(q, n).unwrap();
        let psi = primitive_root_2n(q, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        let mut f = a.clone();
        t.forward(&mut f);
        for e in (1..2 * n).step_by(2) {
            assert_eq!(
                f[eval_position(e, n)],
                naive_eval(&a, pow_mod(psi, e as u64, q), q)
            );
        }
    }

    #[test]
    fn round_trip_and_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &n in &[16usize, 1024, 4096] {
            let q = prime_for(n, 55);
            let t = NttTable::new(q, n).unwrap();
            let a: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let b: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let mut fa = a.clone();
            t.forward(&mut fa);
            let mut back = fa.clone();
            t.inverse(&mut back);
            assert_eq!(back, a);
            if n <= 1024 {
                let mut fb = b.clone();
                t.forward(&mut fb);
                let mut prod: Vec<u64> = fa
                    .iter()
                    .zip(&fb)
                    .map(|(&x, &y)| mul_mod(x, y, q))
                    .collect();
                t.inverse(&mut prod);
                assert_eq!(prod, negacyclic_schoolbook(&a, &b, q));
            }
        }
    }

    #[test]
    fn small_square() {
        // (1 + X)^2 = 1 + 2X + X^2 mod X^4 + 1
        let q = 17;
        let t = NttTable::new(q, 4).unwrap();
        let mut a = vec![1, 1, 0, 0];
        t.forward(&mut a);
        let mut sq: Vec<u64> = a.iter().map(|&x| mul_mod(x, x, q)).collect();
        t.inverse(&mut sq);
        assert_eq!(sq, vec![1, 2, 1, 0]);
        assert_eq!(
            negacyclic_schoolbook(&[1, 1, 0, 0], &[1, 1, 0, 0], q),
            vec![1, 2, 1, 0]
        );
        let mut z = vec![0; 4];
        t.forward(&mut z);
        assert_eq!(z, vec![0; 4]);
    }

    #[test]
    fn galois_permutation_matches_coefficient_automorphism() {
        let n = 32;
        let q = prime_for(n, 40);
        let t = NttTable::new(q, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        for k in [3usize, 9, 2 * n - 1] {
            // X^i -> X^(ik mod 2n), with a sign flip past n
            let mut auto = vec![0u64; n];
            for (i, &c) in a.iter().enumerate() {
                let j = i * k % (2 * n);
                if j < n {
                    auto[j] = add_mod(auto[j], c, q);
                } else {
                    auto[j - n] = sub_mod(auto[j - n], c, q);
                }
            }
            let mut fa = a.clone();
            t.forward(&mut fa);
            let mut fauto = auto;
            t.forward(&mut fauto);
            assert_eq!(apply_permutation(&fa, &galois_permutation(k, n)), fauto);
        }
    }
}
