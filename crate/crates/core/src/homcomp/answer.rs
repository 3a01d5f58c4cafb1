use std::fmt;

use crate::he::codec::{Reader, Writer};
use crate::he::{HeError, HeScheme};

use super::CompError;

const MAGIC: &[u8; 4] = b"HCCA";
const VERSION: u16 = 1;

/// Where `s` consecutive payload slots live: ciphertext index, slot row, first slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotRange {
    pub ct: usize,
    pub row: usize,
    pub offset: usize,
}

/// Slot layout of a compressed answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnswerLayout {
    s: usize,
    w: SlotRange,
    e: SlotRange,
}

impl AnswerLayout {
    /// One ciphertext, `w` in row 0 and `e` in row 1, both from slot 0.
    pub fn packed(s: usize) -> Self {
        Self {
            s,
            w: SlotRange {
                ct: 0,
                row: 0,
                offset: 0,
            },
            e: SlotRange {
                ct: 0,
                row: 1,
                offset: 0,
            },
        }
    }

    /// Two ciphertexts, each vector in row 0 of its own ciphertext.
    pub fn separate(s: usize) -> Self {
        Self {
            s,
            w: SlotRange {
                ct: 0,
                row: 0,
                offset: 0,
            },
            e: SlotRange {
                ct: 1,
                row: 0,
                offset: 0,
            },
        }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Range holding the compressed index vector `w = C v`.
    pub fn w(&self) -> SlotRange {
        self.w
    }

    /// Range holding the compressed values `e = C d`.
    pub fn e(&self) -> SlotRange {
        self.e
    }

    pub fn ciphertext_count(&self) -> usize {
        self.w.ct.max(self.e.ct) + 1
    }

    /// Meaningful slots in the payload.
    pub fn used_slots(&self) -> usize {
        2 * self.s
    }
}

/// The compressor's output: ciphertexts plus their slot layout.
pub struct CompressedAnswer<S: HeScheme> {
    layout: AnswerLayout,
    cts: Vec<S::Ciphertext>,
}

impl<S: HeScheme> Clone for CompressedAnswer<S> {
    fn clone(&self) -> Self {
        Self {
            layout: self.layout,
            cts: self.cts.clone(),
        }
    }
}

impl<S: HeScheme> fmt::Debug for CompressedAnswer<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompressedAnswer")
            .field("layout", &self.layout)
            .field("ciphertexts", &self.cts.len())
            .finish()
    }
}

impl<S: HeScheme> CompressedAnswer<S> {
    pub(crate) fn new(layout: AnswerLayout, cts: Vec<S::Ciphertext>) -> Self {
        debug_assert_eq!(layout.ciphertext_count(), cts.len());
        Self { layout, cts }
    }

    pub fn layout(&self) -> &AnswerLayout {
        &self.layout
    }

    pub fn ciphertexts(&self) -> &[S::Ciphertext] {
        &self.cts
    }

    /// `"HCCA"`, version, `s`, ciphertext count, the two slot ranges, then
    /// each ciphertext envelope behind a `u32` length. Little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u32(self.layout.s as u32);
        w.u8(self.cts.len() as u8);
        for r in [self.layout.w, self.layout.e] {
            w.u8(r.ct as u8);
            w.u8(r.row as u8);
            w.u32(r.offset as u32);
        }
        for ct in &self.cts {
            let body = S::write_ciphertext(ct);
            w.u32(body.len() as u32);
            w.bytes(&body);
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CompError> {
        Self::parse(bytes).map_err(|e| match e {
            HeError::Codec(msg) => CompError::Codec(msg),
            other => CompError::He(other),
        })
    }

    fn parse(bytes: &[u8]) -> Result<Self, HeError> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(HeError::Codec("bad compressed-answer magic".into()));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(HeError::Codec(format!(
                "unsupported compressed-answer version {version}"
            )));
        }
        let s = r.u32()? as usize;
        let count = r.u8()? as usize;
        let mut ranges = [SlotRange {
            ct: 0,
            row: 0,
            offset: 0,
        }; 2];
        for range in &mut ranges {
            *range = SlotRange {
                ct: r.u8()? as usize,
                row: r.u8()? as usize,
                offset: r.u32()? as usize,
            };
            if range.ct >= count || range.row > 1 {
                return Err(HeError::Codec(format!(
                    "slot range {range:?} outside a {count}-ciphertext payload"
                )));
            }
        }
        let layout = AnswerLayout {
            s,
            w: ranges[0],
            e: ranges[1],
        };
        if s == 0 || layout.ciphertext_count() != count {
            return Err(HeError::Codec(
                "layout does not match the ciphertext count".into(),
            ));
        }
        let mut cts = Vec::with_capacity(count);
        for _ in 0..count {
            let len = r.u32()? as usize;
            cts.push(S::read_ciphertext(r.take(len)?)?);
        }
        r.finish()?;
        Ok(Self { layout, cts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::{HeParams, RotationSet, Simulator, SlotMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_and_rejects() {
        let he = HeParams::new(8, 17, 2).unwrap();
        let (sk, pk) = Simulator::keygen(&he, &RotationSet::new(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = SlotMatrix::from_rows(vec![1, 2, 0, 0], vec![3, 4, 0, 0]).unwrap();
        let ans = CompressedAnswer::<Simulator>::new(
            AnswerLayout::packed(2),
            vec![Simulator::encrypt(&pk, &m, &mut rng).unwrap()],
        );
        let bytes = ans.to_bytes();
        assert_eq!(&bytes[..4], b"HCCA");
        let back = CompressedAnswer::<Simulator>::from_bytes(&bytes).unwrap();
        assert_eq!(back.layout(), ans.layout());
        assert_eq!(Simulator::decrypt(&sk, &back.ciphertexts()[0]).unwrap(), m);
        assert_eq!(back.to_bytes(), bytes);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            CompressedAnswer::<Simulator>::from_bytes(&bad),
            Err(CompError::Codec(_))
        ));
        assert!(CompressedAnswer::<Simulator>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(CompressedAnswer::<Simulator>::from_bytes(&extra).is_err());
        // e pointing at a second ciphertext that is not there
        let mut bad = bytes;
        bad[17] = 1;
        assert!(CompressedAnswer::<Simulator>::from_bytes(&bad).is_err());
    }

    #[test]
    fn layouts() {
        assert_eq!(AnswerLayout::packed(16).ciphertext_count(), 1);
        assert_eq!(AnswerLayout::separate(16).ciphertext_count(), 2);
        assert_eq!(AnswerLayout::packed(16).used_slots(), 32);
    }
}
