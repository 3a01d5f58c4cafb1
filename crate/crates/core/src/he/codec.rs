//! Binary envelope shared by every serialized HE object.
//!
//! ```text
//! "HCV1" | backend: u8 | version: u16 LE | kind: u8 | payload
//! ```
//!
//! All integers are little-endian.

use super::{BackendId, HeError, HeParams};

pub const MAGIC: &[u8; 4] = b"HCV1";
pub const FORMAT_VERSION: u16 = 1;

/// What an envelope contains; the first payload byte.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ObjectKind {
    Ciphertext = 1,
    PublicKey = 2,
    SecretKey = 3,
}

impl ObjectKind {
    fn from_u8(b: u8) -> Result<Self, HeError> {
        match b {
            1 => Ok(Self::Ciphertext),
            2 => Ok(Self::PublicKey),
            3 => Ok(Self::SecretKey),
            _ => Err(HeError::Codec(format!("unknown object kind {b}"))),
        }
    }
}

pub fn begin(backend: BackendId, kind: ObjectKind) -> Writer {
    let mut w = Writer(Vec::new());
    w.bytes(MAGIC);
    w.u8(backend as u8);
    w.u16(FORMAT_VERSION);
    w.u8(kind as u8);
    w
}

/// Validates the envelope header and returns a reader positioned at the payload.
pub fn open(bytes: &[u8], backend: BackendId, kind: ObjectKind) -> Result<Reader<'_>, HeError> {
    let (found_backend, found_kind, r) = peek(bytes)?;
    if found_backend != backend {
        return Err(HeError::BackendMismatch(format!(
            "expected a {backend} object, found {found_backend}"
        )));
    }
    if found_kind != kind {
        return Err(HeError::Codec(format!(
            "expected {kind:?}, found {found_kind:?}"
        )));
    }
    Ok(r)
}

/// Reads only the header.
pub fn peek(bytes: &[u8]) -> Result<(BackendId, ObjectKind, Reader<'_>), HeError> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != MAGIC {
        return Err(HeError::Codec("bad magic".into()));
    }
    let backend = BackendId::try_from(r.u8()?)?;
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(HeError::Codec(format!(
            "unsupported format version {version}"
        )));
    }
    let kind = ObjectKind::from_u8(r.u8()?)?;
    Ok((backend, kind, r))
}

#[derive(Default)]
pub struct Writer(pub Vec<u8>);

impl Writer {
    pub fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    pub fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    pub fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    pub fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    pub fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    pub fn bytes(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }
    pub fn u64s(&mut self, vs: &[u64]) {
        self.0.reserve(8 * vs.len());
        for &v in vs {
            self.u64(v);
        }
    }
    pub fn params(&mut self, p: &HeParams) {
        self.u32(p.n() as u32);
        self.u64(p.p().value());
        self.u32(p.max_level());
    }
    pub fn finish(self) -> Vec<u8> {
        self.0
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], HeError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(HeError::Codec(format!(
                "truncated input at byte {}",
                self.pos
            )));
        };
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, HeError> {
        Ok(self.take(1)?[0])
    }
    pub fn u16(&mut self) -> Result<u16, HeError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    pub fn u32(&mut self) -> Result<u32, HeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    pub fn u64(&mut self) -> Result<u64, HeError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn f64(&mut self) -> Result<f64, HeError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Reads `n` words, each required to be below `bound`.
    pub fn u64s(&mut self, n: usize, bound: u64) -> Result<Vec<u64>, HeError> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| HeError::Codec("length overflow".into()))?,
        )?;
        let out: Vec<u64> = raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if out.iter().any(|&x| x >= bound) {
            return Err(HeError::Codec(format!(
                "value out of range (bound {bound})"
            )));
        }
        Ok(out)
    }

    pub fn params(&mut self) -> Result<HeParams, HeError> {
        let n = self.u32()? as usize;
        let p = self.u64()?;
        let max_level = self.u32()?;
        HeParams::new(n, p, max_level)
    }

    pub fn finish(self) -> Result<(), HeError> {
        if self.pos != self.buf.len() {
            return Err(HeError::Codec(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}
