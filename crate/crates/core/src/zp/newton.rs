use super::modulus::inverses_up_to;
use super::{ops, PrimeModulus, ZpError, ZpPoly};

/// Recovers the monic polynomial whose roots have the given power sums.
///
/// With `w_i = sum_x x^i` over a multiset of size `s`, the elementary
/// symmetric values satisfy `k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} w_i`,
/// so `e_1..e_s` follow from `w_1..w_s` once `k` is invertible, i.e. `p > s`.
/// The solver caches `1/k` for one `(s, p)` pair so repeated calls allocate nothing.
#[derive(Clone, Debug)]
pub struct NewtonSolver {
    p: PrimeModulus,
    inv: Vec<u64>,
}

impl NewtonSolver {
    pub fn new(s: usize, p: PrimeModulus) -> Result<Self, ZpError> {
        if (s as u64) >= p.value() {
            return Err(ZpError::ModulusTooSmall {
                p: p.value(),
                bound: s as u64,
            });
        }
        Ok(Self {
            p,
            inv: inverses_up_to(s, p)?,
        })
    }

    pub fn s(&self) -> usize {
        self.inv.len() - 1
    }

    /// Writes `e_0..e_s` into `out` (length `s + 1`).
    ///
    /// Products are accumulated unreduced in 128-bit registers, one reduction per `k`.
    pub fn elementary_into(&self, w: &[u64], out: &mut [u64]) {
        let s = self.s();
        assert_eq!(w.len(), s, "expected {s} power sums");
        assert_eq!(out.len(), s + 1);
        let p = self.p;
        let pv = u128::from(p.value());
        // products of two residues below 2^32 can be summed without overflow
        let small = p.value() < 1 << 32;
        out[0] = 1;
        if p.value() < 1 << 30 && s < 16 {
            self.elementary_small(w, out);
            ops::tally((s * (s + 1) + 4 * s) as u64);
            return;
        }
        for k in 1..=s {
            let (mut pos, mut neg) = (0u128, 0u128);
            for i in 1..=k {
                let mut term = u128::from(out[k - i]) * u128::from(w[i - 1]);
                if !small {
                    term %= pv;
                }
                if i % 2 == 1 {
                    pos += term;
                } else {
                    neg += term;
                }
            }
            let pos = p.reduce_u128(pos);
            let neg = p.reduce_u128(neg);
            let diff = ((u128::from(pos) + pv - u128::from(neg)) % pv) as u64;
            out[k] = p.mul_raw(diff, self.inv[k]);
        }
        // k products, k accumulations, 3 reductions and one scaling per step
        ops::tally((s * (s + 1) + 4 * s) as u64);
    }

    /// Same recursion in u64 for `p < 2^30` and `s < 16`, where up to 16
    /// products below 2^60 fit in one word.
    fn elementary_small(&self, w: &[u64], out: &mut [u64]) {
        let pv = self.p.value();
        debug_assert!(w.iter().all(|&x| x < pv), "power sums must be reduced");
        for k in 1..out.len() {
            let (mut pos, mut neg) = (0u64, 0u64);
            for i in 1..=k {
                let term = out[k - i] * w[i - 1];
                if i % 2 == 1 {
                    pos += term;
                } else {
                    neg += term;
                }
            }
            let diff = (pos % pv + pv - neg % pv) % pv;
            out[k] = diff * self.inv[k] % pv;
        }
    }

    /// `f(X) = sum_k (-1)^k e_k X^{s-k}`.
    pub fn polynomial(&self, w: &[u64]) -> ZpPoly {
        let s = self.s();
        let mut e = vec![0u64; s + 1];
        self.elementary_into(w, &mut e);
        let coeffs = (0..=s)
            .map(|deg| {
                let k = s - deg;
                if k.is_multiple_of(2) {
                    e[k]
                } else {
                    self.p.neg(e[k])
                }
            })
            .collect();
        ZpPoly::from_coeffs(coeffs)
    }
}

/// Monic degree-`s` polynomial whose root multiset has power sums `w` (`s = w.len()`).
pub fn newton_coeffs(w: &[u64], p: PrimeModulus) -> Result<ZpPoly, ZpError> {
    if w.is_empty() {
        return Err(ZpError::EmptyInput("at least one power sum is required"));
    }
    let w: Vec<u64> = w.iter().map(|&x| p.reduce(x)).collect();
    Ok(NewtonSolver::new(w.len(), p)?.polynomial(&w))
}

/// Divides out every factor of `X` (the zero-padding roots).
pub fn strip_zero_roots(f: &ZpPoly) -> ZpPoly {
    f.strip_x_factors()
}

/// Brute-force `e_k` over all `k`-subsets of `values` (positions, not distinct values).
pub fn elementary_symmetric_oracle(values: &[u64], k: usize, p: PrimeModulus) -> u64 {
    fn go(values: &[u64], k: usize, start: usize, acc: u64, p: PrimeModulus) -> u64 {
        if k == 0 {
            return acc;
        }
        let mut total = 0;
        for i in start..=values.len() - k {
            total = p.add(
                total,
                go(values, k - 1, i + 1, p.mul(acc, p.reduce(values[i])), p),
            );
        }
        total
    }
    if k > values.len() {
        return 0;
    }
    go(values, k, 0, 1, p)
}

/// `w_j = sum_x x^j` for `j = 1..=s`.
pub fn power_sums(values: &[u64], s: usize, p: PrimeModulus) -> Vec<u64> {
    let mut w = vec![0u64; s];
    for &x in values {
        let x = p.reduce(x);
        let mut pw = 1;
        for wj in w.iter_mut() {
            pw = p.mul(pw, x);
            *wj = p.add(*wj, pw);
        }
    }
    w
}
