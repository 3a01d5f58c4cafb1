use std::collections::BTreeSet;

use crate::zp::PrimeModulus;

use super::HeError;

/// Ring dimension, plaintext modulus and multiplicative depth budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HeParams {
    n: usize,
    p: PrimeModulus,
    max_level: u32,
}

impl HeParams {
    pub fn new(n: usize, p: u64, max_level: u32) -> Result<Self, HeError> {
        if n < 4 || !n.is_power_of_two() {
            return Err(HeError::InvalidParams(format!(
                "ring dimension {n} is not a power of two >= 4"
            )));
        }
        let p = PrimeModulus::new(p)
            .map_err(|_| HeError::InvalidParams(format!("plaintext modulus {p} is not prime")))?;
        if p.value() % (2 * n as u64) != 1 {
            return Err(HeError::InvalidParams(format!(
                "plaintext modulus {} is not 1 mod 2n = {}",
                p.value(),
                2 * n
            )));
        }
        if max_level == 0 {
            return Err(HeError::InvalidParams(
                "max_level must be at least 1".into(),
            ));
        }
        Ok(Self { n, p, max_level })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Slots per row, `n / 2`.
    pub fn width(&self) -> usize {
        self.n / 2
    }

    pub fn p(&self) -> PrimeModulus {
        self.p
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn with_max_level(self, max_level: u32) -> Result<Self, HeError> {
        Self::new(self.n, self.p.value(), max_level)
    }
}

/// The rotations a key set supports: row rotations by fixed amounts and
/// optionally the row swap.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RotationSet {
    rows: BTreeSet<usize>,
    col: bool,
}

impl RotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: impl IntoIterator<Item = usize>, col: bool) -> Self {
        let mut r = Self {
            rows: BTreeSet::new(),
            col,
        };
        for a in rows {
            r.insert_row(a);
        }
        r
    }

    /// Declares a left row rotation. Zero is the identity and needs no key.
    pub fn insert_row(&mut self, amount: usize) {
        if amount != 0 {
            self.rows.insert(amount);
        }
    }

    pub fn set_col(&mut self, col: bool) {
        self.col = col;
    }

    pub fn extend(&mut self, other: &RotationSet) {
        self.rows.extend(other.rows.iter().copied());
        self.col |= other.col;
    }

    pub fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().copied()
    }

    pub fn contains_row(&self, amount: usize) -> bool {
        self.rows.contains(&amount)
    }

    pub fn has_col(&self) -> bool {
        self.col
    }

    /// Number of key-switching keys this set requires.
    pub fn key_count(&self) -> usize {
        self.rows.len() + usize::from(self.col)
    }

    pub(crate) fn validate(&self, params: &HeParams) -> Result<(), HeError> {
        match self.rows.iter().find(|&&r| r >= params.width()) {
            Some(r) => Err(HeError::InvalidParams(format!(
                "rotation amount {r} is outside [0, {})",
                params.width()
            ))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_invariants() {
        assert!(HeParams::new(8, 17, 1).is_ok());
        assert!(HeParams::new(8192, 65537, 3).is_ok());
        // 40961 = 5 * 2^13 + 1 is 1 mod 2^13 but not mod 2^14
        assert!(HeParams::new(4096, 40961, 3).is_ok());
        assert!(matches!(
            HeParams::new(8192, 40961, 3),
            Err(HeError::InvalidParams(_))
        ));
        assert!(matches!(
            HeParams::new(6, 13, 1),
            Err(HeError::InvalidParams(_))
        ));
        assert!(matches!(
            HeParams::new(8, 65536, 1),
            Err(HeError::InvalidParams(_))
        ));
        // 97 is prime but not 1 mod 64
        assert!(matches!(
            HeParams::new(32, 97, 1),
            Err(HeError::InvalidParams(_))
        ));
        assert!(matches!(
            HeParams::new(8, 17, 0),
            Err(HeError::InvalidParams(_))
        ));
    }

    #[test]
    fn rotation_set() {
        let r = RotationSet::from_rows([0, 1, 2, 2], true);
        assert_eq!(r.rows().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(r.key_count(), 3);
        let params = HeParams::new(8, 17, 1).unwrap();
        assert!(r.validate(&params).is_ok());
        assert!(RotationSet::from_rows([4], false)
            .validate(&params)
            .is_err());
    }
}
