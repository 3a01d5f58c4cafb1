use super::{IndexSet, PrimeModulus, SparseVector, ZpError};

/// Entry `(j, i)` of the power-sum matrix: `i^j mod p`, both 1-based.
pub fn vandermonde_entry(j: usize, i: usize, p: PrimeModulus) -> u64 {
    p.pow(i as u64 % p.value(), j as u64)
}

/// Solves `C_I x = e` where `C_I` keeps the columns of the `s x N` power-sum
/// matrix listed in `indices` (`s = e.len()`).
///
/// The solution is returned as a sparse vector of length `length`. Gaussian
/// elimination over Z_p; a zero entry in the solution contradicts `indices`
/// being the support and is reported as an inconsistent system.
pub fn solve_vandermonde_sub(
    e: &[u64],
    indices: &IndexSet,
    length: usize,
    p: PrimeModulus,
) -> Result<SparseVector, ZpError> {
    let s = e.len();
    let cols = indices.as_slice();
    let l = cols.len();
    if l == 0 {
        return if e.iter().all(|&x| p.reduce(x) == 0) {
            Ok(SparseVector::zero(length))
        } else {
            Err(ZpError::InconsistentSystem(
                "empty support but nonzero right-hand side".into(),
            ))
        };
    }
    if l > s {
        return Err(ZpError::SingularSystem(format!(
            "{l} unknowns but only {s} equations"
        )));
    }

    // augmented s x (l + 1), row j holds i^(j+1)
    let width = l + 1;
    let mut m = vec![0u64; s * width];
    for (c, &i) in cols.iter().enumerate() {
        let x = i as u64 % p.value();
        let mut pw = 1;
        for j in 0..s {
            pw = p.mul(pw, x);
            m[j * width + c] = pw;
        }
    }
    for j in 0..s {
        m[j * width + l] = p.reduce(e[j]);
    }

    for c in 0..l {
        let Some(pivot) = (c..s).find(|&r| m[r * width + c] != 0) else {
            return Err(ZpError::SingularSystem(format!("no pivot in column {c}")));
        };
        if pivot != c {
            for k in 0..width {
                m.swap(pivot * width + k, c * width + k);
            }
        }
        let inv = p.inv(m[c * width + c])?;
        for k in c..width {
            m[c * width + k] = p.mul(m[c * width + k], inv);
        }
        for r in 0..s {
            if r == c {
                continue;
            }
            let f = m[r * width + c];
            if f == 0 {
                continue;
            }
            for k in c..width {
                let sub = p.mul(f, m[c * width + k]);
                m[r * width + k] = p.sub(m[r * width + k], sub);
            }
        }
    }
    if let Some(r) = (l..s).find(|&r| m[r * width + l] != 0) {
        return Err(ZpError::InconsistentSystem(format!(
            "equation {} is not satisfied",
            r + 1
        )));
    }

    let mut entries = Vec::with_capacity(l);
    for (c, &i) in cols.iter().enumerate() {
        let x = m[c * width + l];
        if x == 0 {
            return Err(ZpError::InconsistentSystem(format!(
                "solution vanishes at index {i}"
            )));
        }
        entries.push((i, x));
    }
    SparseVector::new(length, entries)
}

/// Forward product `C d` (first `s` power sums weighted by `d`), used as the oracle.
pub fn vandermonde_apply(d: &SparseVector, s: usize, p: PrimeModulus) -> Vec<u64> {
    let mut out = vec![0u64; s];
    for &(i, v) in d.entries() {
        let x = i as u64 % p.value();
        let mut pw = 1;
        for o in out.iter_mut() {
            pw = p.mul(pw, x);
            *o = p.add(*o, p.mul(pw, p.reduce(v)));
        }
    }
    out
}

/// Rank of the `s x s` matrix formed by columns `cols` of `C`.
#[allow(clippy::needless_range_loop)]
pub fn submatrix_rank(cols: &[usize], s: usize, p: PrimeModulus) -> usize {
    let n = cols.len();
    let mut m: Vec<Vec<u64>> = (1..=s)
        .map(|j| cols.iter().map(|&i| vandermonde_entry(j, i, p)).collect())
        .collect();
    let mut rank = 0;
    for c in 0..n {
        let Some(pivot) = (rank..s).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = p.inv(m[rank][c]).expect("nonzero pivot");
        for r in 0..s {
            if r != rank && m[r][c] != 0 {
                let f = p.mul(m[r][c], inv);
                for k in c..n {
                    let sub = p.mul(f, m[rank][k]);
                    m[r][k] = p.sub(m[r][k], sub);
                }
            }
        }
        rank += 1;
    }
    rank
}
