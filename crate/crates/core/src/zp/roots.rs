use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{IndexSet, NewtonSolver, PrimeModulus, ZpError, ZpPoly};

/// Seed used when the caller does not supply one, so decompression is reproducible.
pub const DEFAULT_ROOT_SEED: u64 = 0x5eed_c0de;

/// Roots of `g` in `[1, range]`, requiring `g` to split into distinct linear factors.
pub fn find_roots(g: &ZpPoly, p: PrimeModulus, range: usize) -> Result<IndexSet, ZpError> {
    find_roots_seeded(g, p, range, DEFAULT_ROOT_SEED)
}

/// Cantor-Zassenhaus root finding restricted to the split-into-linears case.
///
/// First `gcd(g, X^p - X)` isolates the product of distinct linear factors; if
/// that loses degree, `g` has a repeated root or an irreducible factor of higher
/// degree and the call fails. The product is then split recursively with
/// `gcd(f, (X + a)^((p-1)/2) - 1)` for random shifts `a`.
pub fn find_roots_seeded(
    g: &ZpPoly,
    p: PrimeModulus,
    range: usize,
    seed: u64,
) -> Result<IndexSet, ZpError> {
    let Some(deg) = g.degree() else {
        return Err(ZpError::NotFullySplit(
            "the zero polynomial has every element as a root".into(),
        ));
    };
    if deg == 0 {
        return IndexSet::new(Vec::new(), range);
    }
    if p.value() < 3 {
        return Err(ZpError::ModulusTooSmall {
            p: p.value(),
            bound: 2,
        });
    }
    let g = g.monic(p);
    let x = ZpPoly::x();
    let frobenius = x.pow_mod(p.value(), &g, p);
    let linear_part = g.gcd(&frobenius.sub(&x, p), p);
    if linear_part.degree() != Some(deg) {
        return Err(ZpError::NotFullySplit(format!(
            "only {} of {deg} roots are distinct elements of Z_p",
            linear_part.degree().unwrap_or(0)
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roots = Vec::with_capacity(deg);
    let mut pending = vec![g];
    let half = (p.value() - 1) / 2;
    while let Some(f) = pending.pop() {
        match f.degree() {
            Some(0) | None => {}
            Some(1) => roots.push(p.neg(f.coeff(0))),
            Some(d) => loop {
                let shift = ZpPoly::from_coeffs(vec![rng.gen_range(0..p.value()), 1]);
                let t = shift.pow_mod(half, &f, p).sub(&ZpPoly::one(), p);
                let factor = f.gcd(&t, p);
                match factor.degree() {
                    Some(k) if k > 0 && k < d => {
                        let (cofactor, _) = f.div_rem(&factor, p);
                        pending.push(factor);
                        pending.push(cofactor);
                        break;
                    }
                    _ => continue,
                }
            },
        }
    }

    let mut indices = Vec::with_capacity(roots.len());
    for r in roots {
        if r == 0 || r as usize > range {
            return Err(ZpError::NotFullySplit(format!(
                "root {r} lies outside [1, {range}]"
            )));
        }
        indices.push(r as usize);
    }
    indices.sort_unstable();
    IndexSet::new(indices, range)
}

/// Recovers the index set of an s-sparse 0/1 vector `v` from `w = C v`.
pub fn reconst_idx(w: &[u64], p: PrimeModulus, range: usize) -> Result<IndexSet, ZpError> {
    reconst_idx_seeded(w, p, range, DEFAULT_ROOT_SEED)
}

pub fn reconst_idx_seeded(
    w: &[u64],
    p: PrimeModulus,
    range: usize,
    seed: u64,
) -> Result<IndexSet, ZpError> {
    if (range as u64) >= p.value() {
        return Err(ZpError::ModulusTooSmall {
            p: p.value(),
            bound: range as u64,
        });
    }
    if w.is_empty() {
        return IndexSet::new(Vec::new(), range);
    }
    let w: Vec<u64> = w.iter().map(|&x| p.reduce(x)).collect();
    let f = NewtonSolver::new(w.len(), p)?.polynomial(&w);
    let g = f.strip_x_factors();
    find_roots_seeded(&g, p, range, seed)
}

/// Test oracle: roots by trial evaluation over `[1, range]`.
pub fn roots_by_trial(g: &ZpPoly, p: PrimeModulus, range: usize) -> Vec<usize> {
    (1..=range).filter(|&x| g.eval(x as u64, p) == 0).collect()
}
