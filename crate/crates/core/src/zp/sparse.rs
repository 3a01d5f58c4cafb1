use serde::{Deserialize, Serialize};

use super::ZpError;

/// Strictly increasing 1-based positions in `[1, N]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>, range: usize) -> Result<Self, ZpError> {
        if let Some(&first) = indices.first() {
            if first == 0 {
                return Err(ZpError::InvalidIndexSet("indices are 1-based".into()));
            }
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ZpError::InvalidIndexSet(
                "indices must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = indices.last() {
            if last > range {
                return Err(ZpError::InvalidIndexSet(format!(
                    "index {last} exceeds length {range}"
                )));
            }
        }
        Ok(Self(indices))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Dense 0/1 vector of length `n`.
    pub fn indicator(&self, n: usize) -> Vec<u64> {
        let mut v = vec![0; n];
        for &i in &self.0 {
            v[i - 1] = 1;
        }
        v
    }
}

/// A length-`N` vector over Z_p stored as sorted `(index, nonzero value)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SparseVectorRepr", into = "SparseVectorRepr")]
pub struct SparseVector {
    length: usize,
    entries: Vec<(usize, u64)>,
}

#[derive(Serialize, Deserialize)]
struct SparseVectorRepr {
    length: usize,
    entries: Vec<(usize, u64)>,
}

impl TryFrom<SparseVectorRepr> for SparseVector {
    type Error = ZpError;

    fn try_from(r: SparseVectorRepr) -> Result<Self, ZpError> {
        SparseVector::new(r.length, r.entries)
    }
}

impl From<SparseVector> for SparseVectorRepr {
    fn from(v: SparseVector) -> Self {
        SparseVectorRepr {
            length: v.length,
            entries: v.entries,
        }
    }
}

impl SparseVector {
    /// Validates and stores the entries; they need not be pre-sorted.
    pub fn new(length: usize, mut entries: Vec<(usize, u64)>) -> Result<Self, ZpError> {
        entries.sort_unstable_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ZpError::InvalidSparseVector(format!(
                    "duplicate index {}",
                    w[0].0
                )));
            }
        }
        for &(i, v) in &entries {
            if i == 0 || i > length {
                return Err(ZpError::InvalidSparseVector(format!(
                    "index {i} outside [1, {length}]"
                )));
            }
            if v == 0 {
                return Err(ZpError::InvalidSparseVector(format!(
                    "explicit zero stored at index {i}"
                )));
            }
        }
        Ok(Self { length, entries })
    }

    pub fn zero(length: usize) -> Self {
        Self {
            length,
            entries: Vec::new(),
        }
    }

    /// Keeps the nonzero positions of a dense vector.
    pub fn from_dense(values: &[u64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (i + 1, v))
            .collect();
        Self {
            length: values.len(),
            entries,
        }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn entries(&self) -> &[(usize, u64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn index_set(&self) -> IndexSet {
        IndexSet(self.entries.iter().map(|e| e.0).collect())
    }

    pub fn to_dense(&self) -> Vec<u64> {
        let mut v = vec![0; self.length];
        for &(i, x) in &self.entries {
            v[i - 1] = x;
        }
        v
    }

    /// Re-labels the vector with a new length; fails if an index would fall outside it.
    pub fn with_length(&self, length: usize) -> Result<Self, ZpError> {
        Self::new(length, self.entries.clone())
    }
}
