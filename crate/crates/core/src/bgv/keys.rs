use rand::{Rng, RngCore};

use super::context::{BgvContext, CBD_ETA};
use super::ntt::{mul_mod, sub_mod};

pub(crate) type Rns = Vec<Vec<u64>>;

pub(crate) fn sample_ternary(n: usize, rng: &mut dyn RngCore) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(-1i64..=1)).collect()
}

/// Centered binomial: popcount difference of two `CBD_ETA`-bit words.
pub(crate) fn sample_cbd(n: usize, rng: &mut dyn RngCore) -> Vec<i64> {
    let mask = (1u64 << CBD_ETA) - 1;
    (0..n)
        .map(|_| {
            let x = rng.next_u64();
            (x & mask).count_ones() as i64 - ((x >> 32) & mask).count_ones() as i64
        })
        .collect()
}

pub(crate) fn sample_uniform(ctx: &BgvContext, count: usize, rng: &mut dyn RngCore) -> Rns {
    (0..count)
        .map(|j| {
            (0..ctx.n())
                .map(|_| rng.gen_range(0..ctx.primes[j]))
                .collect()
        })
        .collect()
}

/// Key-switching key from `target` to the secret `s`, one RLWE sample per
/// (residue, digit): `b = -a*s + p*e + g * target` where the gadget `g` is
/// `2^(w*t)` in residue `i` and 0 in all others.
#[derive(Clone, Debug)]
pub(crate) struct KsKey {
    /// `parts[i][t] = (b, a)`, every residue, NTT form.
    pub(crate) parts: Vec<Vec<(Rns, Rns)>>,
}

impl KsKey {
    pub(crate) fn generate(ctx: &BgvContext, s: &Rns, target: &Rns, rng: &mut dyn RngCore) -> Self {
        let count = ctx.primes.len();
        let p = ctx.p();
        let parts = (0..count)
            .map(|i| {
                (0..ctx.digits[i])
                    .map(|t| {
                        let a = sample_uniform(ctx, count, rng);
                        let e = ctx.lift_signed(&sample_cbd(ctx.n(), rng), count);
                        let gadget = if ctx.config.digit_bits as usize * t >= 64 {
                            0
                        } else {
                            (1u128 << (ctx.config.digit_bits as usize * t)) as u64 % ctx.primes[i]
                        };
                        let b = (0..count)
                            .map(|j| {
                                let q = ctx.primes[j];
                                (0..ctx.n())
                                    .map(|k| {
                                        let mut v = sub_mod(
                                            mul_mod(p, e[j][k], q),
                                            mul_mod(a[j][k], s[j][k], q),
                                            q,
                                        );
                                        if j == i {
                                            v = (v + mul_mod(gadget, target[j][k], q)) % q;
                                        }
                                        v
                                    })
                                    .collect()
                            })
                            .collect();
                        (b, a)
                    })
                    .collect()
            })
            .collect();
        Self { parts }
    }

    /// Returns `(k0, k1)` with `k0 + k1*s = c*target + p*e` over residues `0..=level`.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn switch(&self, ctx: &BgvContext, c: &[Vec<u64>], level: usize) -> (Rns, Rns) {
        let n = ctx.n();
        let w = ctx.config.digit_bits;
        let mask = if w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
        let mut acc0 = vec![vec![0u128; n]; level + 1];
        let mut acc1 = vec![vec![0u128; n]; level + 1];
        // products are below 2^(2*62); fold every `limit` accumulations
        let bits = 2 * ctx.config.prime_bits + 1;
        let limit = if bits >= 127 {
            1
        } else {
            1usize << (127 - bits)
        };
        let mut pending = 0usize;
        let mut digit = vec![0u64; n];
        let mut d = vec![0u64; n];
        for i in 0..=level {
            let mut coeff = c[i].clone();
            ctx.tables[i].inverse(&mut coeff);
            for t in 0..ctx.digits[i] {
                let shift = w as usize * t;
                let mut any = false;
                for (x, &y) in digit.iter_mut().zip(&coeff) {
                    *x = if shift >= 64 { 0 } else { (y >> shift) & mask };
                    any |= *x != 0;
                }
                if !any {
                    continue;
                }
                let (b, a) = &self.parts[i][t];
                for j in 0..=level {
                    let q = ctx.primes[j];
                    d.iter_mut().zip(&digit).for_each(|(x, &y)| *x = y % q);
                    ctx.tables[j].forward(&mut d);
                    for k in 0..n {
                        acc0[j][k] += d[k] as u128 * b[j][k] as u128;
                        acc1[j][k] += d[k] as u128 * a[j][k] as u128;
                    }
                }
                pending += 1;
                if pending >= limit {
                    fold(&mut acc0, &ctx.primes);
                    fold(&mut acc1, &ctx.primes);
                    pending = 0;
                }
            }
        }
        (reduce(acc0, &ctx.primes), reduce(acc1, &ctx.primes))
    }
}

fn fold(acc: &mut [Vec<u128>], primes: &[u64]) {
    for (row, &q) in acc.iter_mut().zip(primes) {
        row.iter_mut().for_each(|x| *x %= q as u128);
    }
}

fn reduce(acc: Vec<Vec<u128>>, primes: &[u64]) -> Rns {
    acc.into_iter()
        .zip(primes)
        .map(|(row, &q)| row.into_iter().map(|x| (x % q as u128) as u64).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cbd_is_centered_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = sample_cbd(100_000, &mut rng);
        assert!(e.iter().all(|&x| x.abs() <= CBD_ETA as i64));
        let mean = e.iter().sum::<i64>() as f64 / e.len() as f64;
        let var = e.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / e.len() as f64;
        assert!(mean.abs() < 0.05);
        assert!((var - CBD_ETA as f64 / 2.0).abs() < 0.3, "variance {var}");
        let t = sample_ternary(30_000, &mut rng);
        assert!(t.iter().all(|&x| (-1..=1).contains(&x)));
        assert!(t.contains(&-1) && t.contains(&1));
    }
}
