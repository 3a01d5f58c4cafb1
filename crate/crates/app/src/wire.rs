//! Length-prefixed frames: 1-byte type, 4-byte big-endian length, payload.

use std::io::{self, Read, Write};

use thiserror::Error;

/// Upper bound on a frame payload; public keys for the larger BGV chains are the biggest frames.
pub const MAX_PAYLOAD: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MsgType {
    Hello = 0x01,
    Query = 0x02,
    Answer = 0x03,
    Error = 0x04,
}

impl TryFrom<u8> for MsgType {
    type Error = WireError;

    fn try_from(b: u8) -> Result<Self, WireError> {
        match b {
            0x01 => Ok(Self::Hello),
            0x02 => Ok(Self::Query),
            0x03 => Ok(Self::Answer),
            0x04 => Ok(Self::Error),
            _ => Err(WireError::UnknownType(b)),
        }
    }
}

/// Codes carried by ERROR frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ErrorCode {
    MalformedFrame = 1,
    UnknownType = 2,
    VersionMismatch = 3,
    BadHello = 4,
    BadQuery = 5,
    AnswerFailed = 6,
    Unexpected = 7,
}

impl ErrorCode {
    pub fn from_u8(b: u8) -> Option<Self> {
        use ErrorCode::*;
        [
            MalformedFrame,
            UnknownType,
            VersionMismatch,
            BadHello,
            BadQuery,
            AnswerFailed,
            Unexpected,
        ]
        .into_iter()
        .find(|c| *c as u8 == b)
    }
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    #[error("frame payload of {0} bytes exceeds the limit")]
    TooLarge(u64),
    #[error("frame ended after {got} of {expected} bytes")]
    Truncated { expected: usize, got: usize },
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("peer reported error {code:?}: {message}")]
    Remote {
        code: Option<ErrorCode>,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireFrame {
    pub msg_type: MsgType,
    pub payload: Vec<u8>,
}

impl WireFrame {
    pub fn new(msg_type: MsgType, payload: Vec<u8>) -> Self {
        Self { msg_type, payload }
    }

    pub fn error(code: ErrorCode, message: &str) -> Self {
        let mut payload = Vec::with_capacity(1 + message.len());
        payload.push(code as u8);
        payload.extend_from_slice(message.as_bytes());
        Self::new(MsgType::Error, payload)
    }

    /// Code and message of an ERROR frame.
    pub fn error_parts(&self) -> Option<(Option<ErrorCode>, String)> {
        if self.msg_type != MsgType::Error {
            return None;
        }
        let (code, msg) = self.payload.split_first()?;
        Some((
            ErrorCode::from_u8(*code),
            String::from_utf8_lossy(msg).into_owned(),
        ))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.push(self.msg_type as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses exactly one frame occupying all of `bytes`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let mut cursor = bytes;
        let frame = Self::read_from(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(WireError::Malformed(format!(
                "{} trailing bytes after frame",
                cursor.len()
            )));
        }
        Ok(frame)
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(&self.to_bytes())?;
        w.flush()
    }

    /// Reads one frame. A clean end of stream before the header is
    /// `Io(UnexpectedEof)`; a short payload is `Truncated`.
    pub fn read_from(r: &mut impl Read) -> Result<Self, WireError> {
        let mut header = [0u8; 5];
        r.read_exact(&mut header)?;
        let len = u32::from_be_bytes(header[1..].try_into().unwrap()) as usize;
        let msg_type = MsgType::try_from(header[0])?;
        if len > MAX_PAYLOAD {
            return Err(WireError::TooLarge(len as u64));
        }
        let mut payload = Vec::with_capacity(len.min(1 << 20));
        let got = r.take(len as u64).read_to_end(&mut payload)?;
        if got != len {
            return Err(WireError::Truncated { expected: len, got });
        }
        Ok(Self { msg_type, payload })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let f = WireFrame::new(MsgType::Query, vec![9, 8, 7]);
        assert_eq!(f.to_bytes(), vec![0x02, 0, 0, 0, 3, 9, 8, 7]);
        assert_eq!(WireFrame::from_bytes(&f.to_bytes()).unwrap(), f);
        let e = WireFrame::error(ErrorCode::BadQuery, "nope");
        assert_eq!(
            e.error_parts(),
            Some((Some(ErrorCode::BadQuery), "nope".to_string()))
        );
    }

    #[test]
    fn rejects() {
        assert!(matches!(
            WireFrame::from_bytes(&[0x09, 0, 0, 0, 0]),
            Err(WireError::UnknownType(9))
        ));
        assert!(matches!(
            WireFrame::from_bytes(&[0x01, 0, 0, 0, 4, 1]),
            Err(WireError::Truncated { .. })
        ));
        assert!(matches!(
            WireFrame::from_bytes(&[0x01, 0xff, 0xff, 0xff, 0xff]),
            Err(WireError::TooLarge(_))
        ));
        assert!(WireFrame::from_bytes(&[0x01, 0, 0, 0, 0, 5]).is_err());
    }
}
