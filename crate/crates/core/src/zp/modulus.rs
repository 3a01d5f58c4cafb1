use super::{ops, ZpError};

/// A prime modulus `p < 2^63` together with a Barrett constant for the
/// common case `p < 2^32`.
///
/// Every arithmetic method tallies one operation on the calling thread's
/// counter (see [`ops`]), which is how decompression cost is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeModulus {
    p: u64,
    // floor(2^64 / p), only meaningful when p < 2^32
    barrett: u64,
}

impl PrimeModulus {
    pub const MAX_BITS: u32 = 63;

    pub fn new(p: u64) -> Result<Self, ZpError> {
        if p >= 1 << Self::MAX_BITS || !is_prime(p) {
            return Err(ZpError::NotPrime(p));
        }
        Ok(Self::new_unchecked(p))
    }

    /// Skips the primality test. The caller guarantees `p` is a prime below 2^63.
    pub fn new_unchecked(p: u64) -> Self {
        let barrett = if p < 1 << 32 {
            (u128::from(u64::MAX) / u128::from(p)) as u64
        } else {
            0
        };
        Self { p, barrett }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u64 {
        if x < self.p {
            x
        } else {
            x % self.p
        }
    }

    /// Reduces a signed integer into `[0, p)`.
    #[inline]
    pub fn reduce_i64(self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        ops::tally(1);
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        ops::tally(1);
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        ops::tally(1);
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ops::tally(1);
        self.mul_raw(a, b)
    }

    /// Multiplication without touching the operation counter.
    #[inline]
    pub(crate) fn mul_raw(self, a: u64, b: u64) -> u64 {
        if self.p < 1 << 32 {
            let x = a * b;
            let q = ((u128::from(x) * u128::from(self.barrett)) >> 64) as u64;
            let r = x - q * self.p;
            if r >= self.p {
                r - self.p
            } else {
                r
            }
        } else {
            (u128::from(a) * u128::from(b) % u128::from(self.p)) as u64
        }
    }

    /// Reduces a double-width accumulator.
    #[inline]
    pub(crate) fn reduce_u128(self, x: u128) -> u64 {
        (x % u128::from(self.p)) as u64
    }

    pub fn pow(self, base: u64, exp: u64) -> u64 {
        mod_pow(base, exp, self)
    }

    pub fn inv(self, a: u64) -> Result<u64, ZpError> {
        mod_inv(a, self)
    }
}

/// `base^exp mod p` by square-and-multiply.
pub fn mod_pow(base: u64, mut exp: u64, p: PrimeModulus) -> u64 {
    let mut result = 1 % p.p;
    let mut b = p.reduce(base);
    let mut tallied = 0;
    while exp > 0 {
        if exp & 1 == 1 {
            result = p.mul_raw(result, b);
            tallied += 1;
        }
        exp >>= 1;
        if exp > 0 {
            b = p.mul_raw(b, b);
            tallied += 1;
        }
    }
    ops::tally(tallied);
    result
}

/// Inverse by the extended Euclidean algorithm.
pub fn mod_inv(a: u64, p: PrimeModulus) -> Result<u64, ZpError> {
    let a = p.reduce(a);
    if a == 0 {
        return Err(ZpError::ZeroInverse);
    }
    ops::tally(1);
    let (mut r0, mut r1) = (i128::from(p.p), i128::from(a));
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    Ok(t0.rem_euclid(i128::from(p.p)) as u64)
}

/// Inverses of `1..=k` modulo `p` via `inv(i) = -(p / i) * inv(p mod i)`.
pub(crate) fn inverses_up_to(k: usize, p: PrimeModulus) -> Result<Vec<u64>, ZpError> {
    if (k as u64) >= p.p {
        return Err(ZpError::ModulusTooSmall {
            p: p.p,
            bound: k as u64,
        });
    }
    let mut inv = vec![0u64; k + 1];
    if k >= 1 {
        inv[1] = 1;
    }
    for i in 2..=k {
        let q = p.p / i as u64;
        let r = (p.p % i as u64) as usize;
        inv[i] = p.neg(p.mul(q % p.p, inv[r]));
    }
    Ok(inv)
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
