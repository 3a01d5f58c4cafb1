//! PDQ over TCP: one HELLO exchange per connection, then any number of
//! QUERY / ANSWER round trips.
//!
//! Client HELLO: `u16` protocol version, `u32` s, `u32` length + public key
//! envelope. Server HELLO: `u16` protocol version, `u64` record count.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::thread;

use hcpdq_core::bgv::BgvMini;
use hcpdq_core::he::codec::peek;
use hcpdq_core::he::{BackendId, HeScheme, Simulator};
use hcpdq_core::homcomp::CompressedAnswer;
use hcpdq_core::pdq::{
    AnswerMode, ClientState, Database, PdqError, PdqQuery, PdqResult, PdqServer,
};
use hcpdq_core::Execution;
use rand::RngCore;

use crate::wire::{ErrorCode, MsgType, WireError, WireFrame};

pub const PROTOCOL_VERSION: u16 = 1;

/// Appends every frame sent or received to a file: one direction byte
/// (`>` outgoing, `<` incoming) followed by the raw frame.
#[derive(Clone)]
pub struct Recorder(Arc<Mutex<BufWriter<File>>>);

impl Recorder {
    pub fn create(path: &Path) -> io::Result<Self> {
        Ok(Self(Arc::new(Mutex::new(BufWriter::new(File::create(
            path,
        )?)))))
    }

    fn log(&self, outgoing: bool, frame: &WireFrame) {
        let mut w = self.0.lock().expect("recorder lock");
        let _ = w.write_all(&[if outgoing { b'>' } else { b'<' }]);
        let _ = w.write_all(&frame.to_bytes());
        let _ = w.flush();
    }
}

/// Splits a recording back into `(outgoing, frame)` pairs.
pub fn read_recording(bytes: &[u8]) -> Result<Vec<(bool, WireFrame)>, WireError> {
    let mut out = Vec::new();
    let mut rest = bytes;
    while let Some((&dir, tail)) = rest.split_first() {
        rest = tail;
        let frame = WireFrame::read_from(&mut rest)?;
        out.push((dir == b'>', frame));
    }
    Ok(out)
}

struct Conn {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    recorder: Option<Recorder>,
}

impl Conn {
    fn new(stream: TcpStream, recorder: Option<Recorder>) -> io::Result<Self> {
        stream.set_nodelay(true)?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
            recorder,
        })
    }

    fn send(&mut self, frame: &WireFrame) -> io::Result<()> {
        if let Some(r) = &self.recorder {
            r.log(true, frame);
        }
        frame.write_to(&mut self.writer)
    }

    fn recv(&mut self) -> Result<WireFrame, WireError> {
        let frame = WireFrame::read_from(&mut self.reader)?;
        if let Some(r) = &self.recorder {
            r.log(false, &frame);
        }
        Ok(frame)
    }

    /// Receives a frame of type `want`, turning ERROR frames into `WireError::Remote`.
    fn expect(&mut self, want: MsgType) -> Result<Vec<u8>, WireError> {
        let frame = self.recv()?;
        if let Some((code, message)) = frame.error_parts() {
            return Err(WireError::Remote { code, message });
        }
        if frame.msg_type != want {
            return Err(WireError::Malformed(format!(
                "expected {want:?}, got {:?}",
                frame.msg_type
            )));
        }
        Ok(frame.payload)
    }
}

/// Server settings shared read-only by all sessions.
pub struct ServerConfig {
    pub db: Database,
    pub mode: AnswerMode,
    pub execution: Execution,
    pub recorder: Option<Recorder>,
}

/// Accepts connections until the listener fails, one thread per session.
pub fn serve(listener: TcpListener, config: Arc<ServerConfig>) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let config = Arc::clone(&config);
        thread::spawn(move || {
            let _ = handle_connection(stream, &config);
        });
    }
    Ok(())
}

/// Runs one session to completion.
pub fn handle_connection(stream: TcpStream, config: &ServerConfig) -> io::Result<()> {
    let mut conn = Conn::new(stream, config.recorder.clone())?;
    let hello = match next_frame(&mut conn)? {
        Some(f) if f.msg_type == MsgType::Hello => f,
        Some(_) => return conn.send(&WireFrame::error(ErrorCode::Unexpected, "expected HELLO")),
        None => return Ok(()),
    };
    let Some(parsed) = parse_hello(&hello.payload) else {
        return conn.send(&WireFrame::error(ErrorCode::BadHello, "malformed HELLO"));
    };
    let (version, s, key) = parsed;
    if version != PROTOCOL_VERSION {
        let msg = format!("protocol version {version}, server speaks {PROTOCOL_VERSION}");
        return conn.send(&WireFrame::error(ErrorCode::VersionMismatch, &msg));
    }
    match peek(key).map(|(backend, ..)| backend) {
        Ok(BackendId::Simulator) => session::<Simulator>(&mut conn, config, s, key),
        Ok(BackendId::BgvMini) => session::<BgvMini>(&mut conn, config, s, key),
        Err(e) => conn.send(&WireFrame::error(ErrorCode::BadHello, &e.to_string())),
    }
}

/// Reads the next frame, answering protocol violations with ERROR.
/// `None` means the session is over.
fn next_frame(conn: &mut Conn) -> io::Result<Option<WireFrame>> {
    match conn.recv() {
        Ok(f) => Ok(Some(f)),
        Err(WireError::Io(e)) if e.kind() == io::ErrorKind::UnexpectedEof => Ok(None),
        Err(WireError::Io(e)) => Err(e),
        Err(e @ WireError::UnknownType(_)) => {
            conn.send(&WireFrame::error(ErrorCode::UnknownType, &e.to_string()))?;
            Ok(None)
        }
        Err(e) => {
            conn.send(&WireFrame::error(ErrorCode::MalformedFrame, &e.to_string()))?;
            Ok(None)
        }
    }
}

fn parse_hello(p: &[u8]) -> Option<(u16, usize, &[u8])> {
    let version = u16::from_be_bytes(p.get(0..2)?.try_into().ok()?);
    let s = u32::from_be_bytes(p.get(2..6)?.try_into().ok()?) as usize;
    let len = u32::from_be_bytes(p.get(6..10)?.try_into().ok()?) as usize;
    let key = p.get(10..)?;
    (key.len() == len).then_some((version, s, key))
}

fn session<S: HeScheme>(
    conn: &mut Conn,
    config: &ServerConfig,
    s: usize,
    key: &[u8],
) -> io::Result<()> {
    let setup = S::read_public_key(key)
        .map_err(|e| e.to_string())
        .and_then(|pk| {
            let server =
                PdqServer::new(config.db.clone(), s, *S::params(&pk)).map_err(|e| e.to_string())?;
            Ok((
                pk,
                server
                    .with_mode(config.mode)
                    .with_execution(config.execution),
            ))
        });
    let (pk, server) = match setup {
        Ok(x) => x,
        Err(msg) => return conn.send(&WireFrame::error(ErrorCode::BadHello, &msg)),
    };
    let mut reply = PROTOCOL_VERSION.to_be_bytes().to_vec();
    reply.extend_from_slice(&(config.db.len() as u64).to_be_bytes());
    conn.send(&WireFrame::new(MsgType::Hello, reply))?;

    while let Some(frame) = next_frame(conn)? {
        if frame.msg_type != MsgType::Query {
            conn.send(&WireFrame::error(
                ErrorCode::Unexpected,
                &format!("unexpected {:?}", frame.msg_type),
            ))?;
            return Ok(());
        }
        let q = match PdqQuery::<S>::from_bytes(&frame.payload) {
            Ok(q) => q,
            Err(e) => {
                conn.send(&WireFrame::error(ErrorCode::BadQuery, &e.to_string()))?;
                continue;
            }
        };
        match server.answer(&pk, &q) {
            Ok(ans) => conn.send(&WireFrame::new(MsgType::Answer, ans.to_bytes()))?,
            Err(e) => conn.send(&WireFrame::error(ErrorCode::AnswerFailed, &e.to_string()))?,
        }
    }
    Ok(())
}

/// Client end of a session.
pub struct RemoteClient {
    conn: Conn,
    records: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Pdq(#[from] PdqError),
    #[error("server speaks protocol version {0}")]
    Version(u16),
}

impl From<io::Error> for ClientError {
    fn from(e: io::Error) -> Self {
        ClientError::Wire(e.into())
    }
}

impl RemoteClient {
    pub fn connect<S: HeScheme>(
        addr: impl ToSocketAddrs,
        client: &ClientState<S>,
        recorder: Option<Recorder>,
    ) -> Result<Self, ClientError> {
        let mut conn = Conn::new(TcpStream::connect(addr)?, recorder)?;
        let key = S::write_public_key(client.public_key());
        let mut hello = PROTOCOL_VERSION.to_be_bytes().to_vec();
        hello.extend_from_slice(&(client.s() as u32).to_be_bytes());
        hello.extend_from_slice(&(key.len() as u32).to_be_bytes());
        hello.extend_from_slice(&key);
        conn.send(&WireFrame::new(MsgType::Hello, hello))?;
        let reply = conn.expect(MsgType::Hello)?;
        if reply.len() != 10 {
            return Err(WireError::Malformed("server HELLO must be 10 bytes".into()).into());
        }
        let version = u16::from_be_bytes([reply[0], reply[1]]);
        if version != PROTOCOL_VERSION {
            return Err(ClientError::Version(version));
        }
        let records = u64::from_be_bytes(reply[2..].try_into().unwrap()) as usize;
        Ok(Self { conn, records })
    }

    /// Record count announced by the server.
    pub fn records(&self) -> usize {
        self.records
    }

    /// Sends one query and returns the raw ANSWER payload.
    pub fn fetch<S: HeScheme>(&mut self, q: &PdqQuery<S>) -> Result<Vec<u8>, ClientError> {
        self.conn
            .send(&WireFrame::new(MsgType::Query, q.to_bytes()))?;
        Ok(self.conn.expect(MsgType::Answer)?)
    }

    /// Query, answer and recover for condition `x`.
    pub fn query<S: HeScheme>(
        &mut self,
        client: &ClientState<S>,
        x: u64,
        rng: &mut dyn RngCore,
    ) -> Result<PdqResult, ClientError> {
        let q = client.query(x, rng)?;
        let bytes = self.fetch(&q)?;
        let ans = CompressedAnswer::<S>::from_bytes(&bytes).map_err(PdqError::from)?;
        Ok(client.recover(&ans, self.records)?)
    }
}
