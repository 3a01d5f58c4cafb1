use crate::zp::PrimeModulus;

use super::HeError;

/// A 2 x `width` matrix over Z_p: the slot view of one plaintext.
///
/// Rows are 0 and 1, columns `0..width`, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SlotMatrix {
    width: usize,
    data: Vec<u64>,
}

impl SlotMatrix {
    pub fn zeros(width: usize) -> Self {
        Self {
            width,
            data: vec![0; 2 * width],
        }
    }

    pub fn constant(width: usize, value: u64) -> Self {
        Self {
            width,
            data: vec![value; 2 * width],
        }
    }

    pub fn from_rows(row0: Vec<u64>, row1: Vec<u64>) -> Result<Self, HeError> {
        if row0.len() != row1.len() {
            return Err(HeError::DimensionMismatch {
                expected: row0.len(),
                got: row1.len(),
            });
        }
        let width = row0.len();
        let mut data = row0;
        data.extend(row1);
        Ok(Self { width, data })
    }

    /// Row-major data of length `2 * width`.
    pub fn from_flat(width: usize, data: Vec<u64>) -> Result<Self, HeError> {
        if data.len() != 2 * width {
            return Err(HeError::DimensionMismatch {
                expected: 2 * width,
                got: data.len(),
            });
        }
        Ok(Self { width, data })
    }

    /// Lays out a vector of length at most `2 * width`: the first `width`
    /// entries go to row 0, the rest to row 1, zero padded.
    pub fn from_vector(v: &[u64], width: usize) -> Result<Self, HeError> {
        if v.len() > 2 * width {
            return Err(HeError::DimensionMismatch {
                expected: 2 * width,
                got: v.len(),
            });
        }
        let mut data = v.to_vec();
        data.resize(2 * width, 0);
        Ok(Self { width, data })
    }

    /// Splits a long vector into as many slot matrices as needed, `2 * width` entries each.
    pub fn chunks_from_vector(v: &[u64], width: usize) -> Vec<SlotMatrix> {
        if v.is_empty() {
            return vec![Self::zeros(width)];
        }
        v.chunks(2 * width)
            .map(|c| Self::from_vector(c, width).expect("chunk fits"))
            .collect()
    }

    /// Inverse of [`SlotMatrix::from_vector`]: row 0 followed by row 1.
    pub fn to_vector(&self) -> Vec<u64> {
        self.data.clone()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn as_flat(&self) -> &[u64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        assert!(row < 2 && col < self.width);
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u64) {
        assert!(row < 2 && col < self.width);
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [u64] {
        &mut self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn reduce(&self, p: PrimeModulus) -> Self {
        Self {
            width: self.width,
            data: self.data.iter().map(|&x| p.reduce(x)).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.width, other.width, "slot matrices of different widths");
        Self {
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    // Slot arithmetic uses the raw reductions so cleartext HE bookkeeping does
    // not show up in the decompression op counter.
    pub fn add(&self, other: &Self, p: PrimeModulus) -> Self {
        let q = p.value();
        self.zip(other, |a, b| {
            let s = a + b;
            if s >= q {
                s - q
            } else {
                s
            }
        })
    }

    pub fn sub(&self, other: &Self, p: PrimeModulus) -> Self {
        let q = p.value();
        self.zip(other, |a, b| if a >= b { a - b } else { a + q - b })
    }

    pub fn neg(&self, p: PrimeModulus) -> Self {
        let q = p.value();
        Self {
            width: self.width,
            data: self
                .data
                .iter()
                .map(|&a| if a == 0 { 0 } else { q - a })
                .collect(),
        }
    }

    /// Slotwise (Hadamard) product.
    pub fn mul(&self, other: &Self, p: PrimeModulus) -> Self {
        self.zip(other, |a, b| p.mul_raw(a, b))
    }

    /// Left-rotates both rows by `r` (taken mod `width`).
    pub fn rotate_rows(&self, r: i64) -> Self {
        let w = self.width;
        let r = r.rem_euclid(w as i64) as usize;
        let mut data = Vec::with_capacity(2 * w);
        for row in 0..2 {
            let src = self.row(row);
            data.extend_from_slice(&src[r..]);
            data.extend_from_slice(&src[..r]);
        }
        Self { width: w, data }
    }

    pub fn swap_rows(&self) -> Self {
        let mut data = self.row(1).to_vec();
        data.extend_from_slice(self.row(0));
        Self {
            width: self.width,
            data,
        }
    }

    /// Keeps row `row` and zeroes the other.
    pub fn select_row(&self, row: usize) -> Self {
        let mut out = Self::zeros(self.width);
        out.row_mut(row).copy_from_slice(self.row(row));
        out
    }
}

impl std::fmt::Debug for SlotMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        const SHOW: usize = 8;
        let fmt_row = |r: &[u64]| {
            let head: Vec<String> = r.iter().take(SHOW).map(|x| x.to_string()).collect();
            if r.len() > SHOW {
                format!("[{}, ...]", head.join(", "))
            } else {
                format!("[{}]", head.join(", "))
            }
        };
        write!(
            f,
            "SlotMatrix(2x{}; {}; {})",
            self.width,
            fmt_row(self.row(0)),
            fmt_row(self.row(1))
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_examples() {
        let m = SlotMatrix::from_rows(vec![1, 2, 3, 4], vec![5, 6, 7, 8]).unwrap();
        let r = m.rotate_rows(1);
        assert_eq!(r.row(0), &[2, 3, 4, 1]);
        assert_eq!(r.row(1), &[6, 7, 8, 5]);
        assert_eq!(m.rotate_rows(0), m);
        assert_eq!(m.rotate_rows(4), m);
        assert_eq!(m.rotate_rows(-1), m.rotate_rows(3));
        assert_eq!(m.rotate_rows(1).rotate_rows(2), m.rotate_rows(3));
    }

    #[test]
    fn swap_rows_is_an_involution() {
        let m = SlotMatrix::from_rows(vec![1, 2], vec![3, 4]).unwrap();
        assert_eq!(
            m.swap_rows(),
            SlotMatrix::from_rows(vec![3, 4], vec![1, 2]).unwrap()
        );
        assert_eq!(m.swap_rows().swap_rows(), m);
    }

    #[test]
    fn vector_layout() {
        let m = SlotMatrix::from_vector(&[1, 2, 3, 4, 5], 4).unwrap();
        assert_eq!(m.row(0), &[1, 2, 3, 4]);
        assert_eq!(m.row(1), &[5, 0, 0, 0]);
        let chunks = SlotMatrix::chunks_from_vector(&(1..=20).collect::<Vec<_>>(), 4);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[2].row(0), &[17, 18, 19, 20]);
        assert!(SlotMatrix::from_vector(&[0; 9], 4).is_err());
    }

    #[test]
    fn arithmetic() {
        let p = PrimeModulus::new(17).unwrap();
        let a = SlotMatrix::from_rows(vec![16, 3], vec![0, 5]).unwrap();
        let b = SlotMatrix::from_rows(vec![2, 6], vec![4, 0]).unwrap();
        assert_eq!(
            a.add(&b, p),
            SlotMatrix::from_rows(vec![1, 9], vec![4, 5]).unwrap()
        );
        assert_eq!(
            a.sub(&b, p),
            SlotMatrix::from_rows(vec![14, 14], vec![13, 5]).unwrap()
        );
        assert_eq!(
            a.mul(&b, p),
            SlotMatrix::from_rows(vec![15, 1], vec![0, 0]).unwrap()
        );
        assert_eq!(a.neg(p).add(&a, p), SlotMatrix::zeros(2));
    }
}
