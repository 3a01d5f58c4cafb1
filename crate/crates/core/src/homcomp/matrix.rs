use crate::zp::{PrimeModulus, ZpError};

use super::CompressionParams;

/// The `s x N` power-sum matrix `C[j][i] = i^j` (1-based), optionally with
/// every column scaled by a cleartext weight: `D = C * diag(weights)`.
///
/// Entries are produced on demand; indices here are 0-based and everything
/// outside `s x N` reads as zero, which is how the BSGS engine pads.
#[derive(Clone, Debug)]
pub struct CompressionMatrix {
    s: usize,
    len: usize,
    p: PrimeModulus,
    weights: Option<Vec<u64>>,
}

/// The plain power-sum matrix for `params`.
pub fn build_vandermonde(params: &CompressionParams) -> Result<CompressionMatrix, ZpError> {
    let p = params.he().p();
    if p.value() <= params.len() as u64 {
        return Err(ZpError::ModulusTooSmall {
            p: p.value(),
            bound: params.len() as u64,
        });
    }
    Ok(CompressionMatrix {
        s: params.s(),
        len: params.len(),
        p,
        weights: None,
    })
}

/// `D = C * diag(db)`, so that `D v = C (db ⊙ v)` for a cleartext database.
pub fn precompute_masked_matrix(
    db: &[u64],
    params: &CompressionParams,
) -> Result<CompressionMatrix, ZpError> {
    let mut m = build_vandermonde(params)?;
    if db.len() != params.len() {
        return Err(ZpError::InvalidSparseVector(format!(
            "database has {} values, expected {}",
            db.len(),
            params.len()
        )));
    }
    m.weights = Some(db.iter().map(|&x| m.p.reduce(x)).collect());
    Ok(m)
}

impl CompressionMatrix {
    pub fn rows(&self) -> usize {
        self.s
    }

    pub fn cols(&self) -> usize {
        self.len
    }

    /// Entry at 0-based `(row, col)`: `(col + 1)^(row + 1) * weight(col)`.
    pub fn entry(&self, row: usize, col: usize) -> u64 {
        if row >= self.s || col >= self.len {
            return 0;
        }
        let x = self.p.reduce(col as u64 + 1);
        let v = crate::zp::mod_pow(x, row as u64 + 1, self.p);
        match &self.weights {
            Some(w) => self.p.mul_raw(v, w[col]),
            None => v,
        }
    }

    /// Column `col` restricted to the first `rows` rows, zero-padded past `s`.
    pub(crate) fn column_prefix(&self, col: usize, rows: usize, out: &mut [u64]) {
        out[..rows].fill(0);
        if col >= self.len {
            return;
        }
        let p = self.p;
        let x = p.reduce(col as u64 + 1);
        let w = self.weights.as_ref().map_or(1, |w| w[col]);
        let mut pw = p.mul_raw(x, w);
        for slot in out.iter_mut().take(rows.min(self.s)) {
            *slot = pw;
            pw = p.mul_raw(pw, x);
        }
    }

    /// Cleartext product `M v` (length `s`); the test oracle for the homomorphic path.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.s];
        let mut col = vec![0u64; self.s];
        for (i, &x) in v.iter().enumerate().take(self.len) {
            if x == 0 {
                continue;
            }
            self.column_prefix(i, self.s, &mut col);
            for (o, &c) in out.iter_mut().zip(&col) {
                *o = (*o + self.p.mul_raw(c, x)) % self.p.value();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::HeParams;

    fn params(len: usize, s: usize) -> CompressionParams {
        CompressionParams::new(len, s, HeParams::new(16, 65537, 3).unwrap()).unwrap()
    }

    #[test]
    fn small_matrix() {
        let c = build_vandermonde(&params(3, 2)).unwrap();
        let rows: Vec<Vec<u64>> = (0..2)
            .map(|j| (0..3).map(|i| c.entry(j, i)).collect())
            .collect();
        assert_eq!(rows, vec![vec![1, 2, 3], vec![1, 4, 9]]);
        assert_eq!(c.entry(2, 0), 0);
        assert_eq!(c.entry(0, 3), 0);
    }

    #[test]
    fn first_column_is_all_ones_and_entries_match_pow() {
        let c = build_vandermonde(&params(16, 8)).unwrap();
        let p = PrimeModulus::new(65537).unwrap();
        for j in 0..8 {
            assert_eq!(c.entry(j, 0), 1);
            for i in 0..16 {
                assert_eq!(c.entry(j, i), crate::zp::vandermonde_entry(j + 1, i + 1, p));
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn masked_matrix() {
        let prm = params(5, 3);
        let c = build_vandermonde(&prm).unwrap();
        let ones = precompute_masked_matrix(&[1; 5], &prm).unwrap();
        let db = [3, 0, 7, 11, 2];
        let d = precompute_masked_matrix(&db, &prm).unwrap();
        for j in 0..3 {
            for i in 0..5 {
                assert_eq!(ones.entry(j, i), c.entry(j, i));
                assert_eq!(d.entry(j, i), c.entry(j, i) * db[i] % 65537);
            }
        }
        // D v = C (db ⊙ v)
        let v = [1, 1, 0, 1, 0];
        let dbv: Vec<u64> = v.iter().zip(&db).map(|(a, b)| a * b).collect();
        assert_eq!(d.apply(&v), c.apply(&dbv));
    }

    #[test]
    fn requires_p_above_len() {
        let he = HeParams::new(16, 97, 1).unwrap();
        assert!(CompressionParams::new(97, 2, he).is_err());
    }
}
