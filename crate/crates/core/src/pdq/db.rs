use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::he::codec::{Reader, Writer};
use crate::zp::PrimeModulus;

use super::PdqError;

const MAGIC: &[u8; 4] = b"HCDB";
const VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Record {
    pub key: u64,
    pub value: u64,
}

/// A cleartext key-value table over Z_p. Record `i` (0-based) is vector index `i + 1`.
///
/// Values are restricted to `[1, p - 1]`: a zero value would make a matching
/// record indistinguishable from a non-match after masking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Database {
    p: PrimeModulus,
    keys: Vec<u64>,
    values: Vec<u64>,
}

impl Database {
    pub fn new(records: &[Record], p: PrimeModulus) -> Result<Self, PdqError> {
        if records.is_empty() {
            return Err(PdqError::Database("no records".into()));
        }
        if records.len() as u64 >= p.value() {
            return Err(PdqError::Database(format!(
                "{} records need p > {}",
                records.len(),
                records.len()
            )));
        }
        for (i, r) in records.iter().enumerate() {
            if r.key >= p.value() {
                return Err(PdqError::Database(format!(
                    "record {}: key {} is not below p = {}",
                    i + 1,
                    r.key,
                    p.value()
                )));
            }
            if r.value == 0 || r.value >= p.value() {
                return Err(PdqError::Database(format!(
                    "record {}: value {} outside [1, {}]",
                    i + 1,
                    r.value,
                    p.value() - 1
                )));
            }
        }
        Ok(Self {
            p,
            keys: records.iter().map(|r| r.key).collect(),
            values: records.iter().map(|r| r.value).collect(),
        })
    }

    /// One `{"key": k, "value": v}` object per line; blank lines are skipped.
    pub fn from_jsonl(input: impl BufRead, p: PrimeModulus) -> Result<Self, PdqError> {
        let mut records = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| PdqError::Database(format!("line {}: {e}", n + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: Record = serde_json::from_str(&line)
                .map_err(|e| PdqError::Database(format!("line {}: {e}", n + 1)))?;
            records.push(r);
        }
        Self::new(&records, p)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in self.records() {
            out.push_str(&serde_json::to_string(&r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// `"HCDB"`, `u16` version, `u64` record count, then all keys and all values as `u64`, little-endian.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut w = Writer(Vec::with_capacity(14 + 16 * self.len()));
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u64(self.len() as u64);
        w.u64s(&self.keys);
        w.u64s(&self.values);
        w.finish()
    }

    pub fn from_binary(bytes: &[u8], p: PrimeModulus) -> Result<Self, PdqError> {
        let bad = |e: crate::he::HeError| PdqError::Database(e.to_string());
        let mut r = Reader::new(bytes);
        if r.take(4).map_err(bad)? != MAGIC {
            return Err(PdqError::Database("bad database magic".into()));
        }
        let version = r.u16().map_err(bad)?;
        if version != VERSION {
            return Err(PdqError::Database(format!(
                "unsupported database version {version}"
            )));
        }
        let n = r.u64().map_err(bad)?;
        if n.saturating_mul(16) > bytes.len() as u64 {
            return Err(PdqError::Database(format!(
                "record count {n} exceeds the input size"
            )));
        }
        let keys = r.u64s(n as usize, u64::MAX).map_err(bad)?;
        let values = r.u64s(n as usize, u64::MAX).map_err(bad)?;
        r.finish().map_err(bad)?;
        let records: Vec<Record> = keys
            .into_iter()
            .zip(values)
            .map(|(key, value)| Record { key, value })
            .collect();
        Self::new(&records, p)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn records(&self) -> impl Iterator<Item = Record> + '_ {
        self.keys
            .iter()
            .zip(&self.values)
            .map(|(&key, &value)| Record { key, value })
    }

    /// Cleartext evaluation of an exact-match query: `(index, value)` for every `key == x`.
    pub fn lookup(&self, x: u64) -> Vec<(usize, u64)> {
        self.records()
            .enumerate()
            .filter(|(_, r)| r.key == x)
            .map(|(i, r)| (i + 1, r.value))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PrimeModulus {
        PrimeModulus::new(65537).unwrap()
    }

    fn toy() -> Database {
        let recs = [(10, 7), (20, 8), (20, 9), (30, 3)].map(|(key, value)| Record { key, value });
        Database::new(&recs, p()).unwrap()
    }

    #[test]
    fn formats_round_trip() {
        let db = toy();
        let text = db.to_jsonl();
        assert_eq!(text.lines().next(), Some(r#"{"key":10,"value":7}"#));
        assert_eq!(Database::from_jsonl(text.as_bytes(), p()).unwrap(), db);
        let bin = db.to_binary();
        assert_eq!(&bin[..4], b"HCDB");
        assert_eq!(bin.len(), 4 + 2 + 8 + 64);
        assert_eq!(Database::from_binary(&bin, p()).unwrap(), db);
        assert!(Database::from_binary(&bin[..bin.len() - 8], p()).is_err());
        assert_eq!(db.lookup(20), vec![(2, 8), (3, 9)]);
        assert!(db.lookup(99).is_empty());
    }

    #[test]
    fn rejects_bad_records() {
        let zero = [Record { key: 1, value: 0 }];
        assert!(matches!(
            Database::new(&zero, p()),
            Err(PdqError::Database(_))
        ));
        let big = [Record {
            key: 65537,
            value: 1,
        }];
        assert!(Database::new(&big, p()).is_err());
        assert!(Database::new(&[], p()).is_err());
        assert!(Database::from_jsonl("{\"key\": 1}\n".as_bytes(), p()).is_err());
        let small = PrimeModulus::new(5).unwrap();
        let five: Vec<Record> = (0..5).map(|k| Record { key: k, value: 1 }).collect();
        assert!(Database::new(&five, small).is_err());
        assert!(Database::new(&five[..4], small).is_ok());
    }
}
