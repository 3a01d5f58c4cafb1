use std::fs;
use std::io::BufReader;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use hcpdq_core::bgv::BgvMini;
use hcpdq_core::he::codec::peek;
use hcpdq_core::he::{BackendId, Evaluator, HeParams, HeScheme, RotationSet, Simulator};
use hcpdq_core::homcomp::{
    decomp, encrypt_vector, BsgsPlan, CompError, CompressedAnswer, CompressionParams, Compressor,
};
use hcpdq_core::pdq::{pdq_depth, AnswerMode, ClientState, Database, PdqError, PdqResult};
use hcpdq_core::zp::{PrimeModulus, SparseVector, ZpError};
use hcpdq_core::Execution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::service::{serve, Recorder, RemoteClient, ServerConfig};
use crate::Backend;

pub const SECRET_KEY_FILE: &str = "secret.key";
pub const PUBLIC_KEY_FILE: &str = "public.key";

/// Exit status for answers that do not decode (more than `s` nonzeros).
pub const EXIT_DECODE: i32 = 3;
/// Exit status for file and network failures.
pub const EXIT_IO: i32 = 2;

/// Maps an error to the process exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let decode = |z: &ZpError| {
        matches!(
            z,
            ZpError::NotFullySplit(_) | ZpError::InconsistentSystem(_) | ZpError::SingularSystem(_)
        )
    };
    for cause in err.chain() {
        if let Some(z) = cause.downcast_ref::<ZpError>() {
            if decode(z) {
                return EXIT_DECODE;
            }
        }
        if let Some(CompError::Zp(z)) = cause.downcast_ref::<CompError>() {
            if decode(z) {
                return EXIT_DECODE;
            }
        }
        if let Some(PdqError::QueryOverflow { .. }) = cause.downcast_ref::<PdqError>() {
            return EXIT_DECODE;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    1
}

/// Default multiplicative depth: enough for PDQ on the simulator, and for
/// hinted compression on BGV.
pub fn default_levels(backend: Backend, p: u64) -> u32 {
    match backend {
        Backend::Sim => pdq_depth(p, AnswerMode::MaskThenComp),
        Backend::Bgv => 3,
    }
}

pub struct KeygenArgs {
    pub backend: Backend,
    pub n: usize,
    pub p: u64,
    pub levels: Option<u32>,
    pub s: usize,
    pub out: PathBuf,
    pub seed: u64,
}

pub fn keygen(a: &KeygenArgs) -> Result<RotationSet> {
    let levels = a.levels.unwrap_or_else(|| default_levels(a.backend, a.p));
    let he = HeParams::new(a.n, a.p, levels)?;
    let rotations = BsgsPlan::new(&he, a.s)?.rotation_set();
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let (sk, pk) = match a.backend {
        Backend::Sim => key_bytes::<Simulator>(&he, &rotations, a.seed)?,
        Backend::Bgv => key_bytes::<BgvMini>(&he, &rotations, a.seed)?,
    };
    write(&a.out.join(SECRET_KEY_FILE), &sk)?;
    write(&a.out.join(PUBLIC_KEY_FILE), &pk)?;
    Ok(rotations)
}

fn key_bytes<S: HeScheme>(
    he: &HeParams,
    rot: &RotationSet,
    seed: u64,
) -> Result<(Vec<u8>, Vec<u8>)> {
    let (sk, pk) = S::keygen(he, rot, seed)?;
    Ok((S::write_secret_key(&sk), S::write_public_key(&pk)))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn backend_of(key_dir: &Path) -> Result<BackendId> {
    let pk = read(&key_dir.join(PUBLIC_KEY_FILE))?;
    Ok(peek(&pk)?.0)
}

fn load_public<S: HeScheme>(key_dir: &Path) -> Result<S::PublicKey> {
    Ok(S::read_public_key(&read(&key_dir.join(PUBLIC_KEY_FILE))?)?)
}

fn load_secret<S: HeScheme>(key_dir: &Path) -> Result<S::SecretKey> {
    Ok(S::read_secret_key(&read(&key_dir.join(SECRET_KEY_FILE))?)?)
}

/// Canonical JSON form of a sparse vector, with a trailing newline.
pub fn sparse_to_json(v: &SparseVector) -> String {
    let mut s = serde_json::to_string(v).expect("sparse vectors serialize");
    s.push('\n');
    s
}

pub struct CompressArgs {
    pub keys: PathBuf,
    pub input: PathBuf,
    pub s: usize,
    pub out: PathBuf,
    pub seed: u64,
}

/// Encrypts the vector (and its index vector) and compresses it; returns an op summary.
pub fn compress(a: &CompressArgs) -> Result<String> {
    let v: SparseVector =
        serde_json::from_slice(&read(&a.input)?).context("parsing the input vector")?;
    match backend_of(&a.keys)? {
        BackendId::Simulator => compress_with::<Simulator>(a, &v),
        BackendId::BgvMini => compress_with::<BgvMini>(a, &v),
    }
}

fn compress_with<S: HeScheme>(a: &CompressArgs, v: &SparseVector) -> Result<String> {
    let pk = load_public::<S>(&a.keys)?;
    let params = CompressionParams::new(v.length(), a.s, *S::params(&pk))?;
    let comp = Compressor::new(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let cd = encrypt_vector::<S>(&pk, &v.to_dense(), &mut rng)?;
    let cv = encrypt_vector::<S>(&pk, &v.index_set().indicator(v.length()), &mut rng)?;
    let ev = Evaluator::<S>::new(&pk);
    let ans = comp.comp(&ev, &cd, Some(&cv))?;
    let bytes = ans.to_bytes();
    write(&a.out, &bytes)?;
    let c = ev.counts();
    Ok(format!(
        "keyswitches={} ct_mults={} pt_mults={} adds={} payload_bytes={}",
        c.keyswitches,
        c.ct_mults,
        c.pt_mults,
        c.adds,
        bytes.len()
    ))
}

pub struct DecompressArgs {
    pub keys: PathBuf,
    pub input: PathBuf,
    pub len: usize,
    pub s: usize,
    pub out: PathBuf,
}

pub fn decompress(a: &DecompressArgs) -> Result<SparseVector> {
    let v = match backend_of(&a.keys)? {
        BackendId::Simulator => decompress_with::<Simulator>(a)?,
        BackendId::BgvMini => decompress_with::<BgvMini>(a)?,
    };
    write(&a.out, sparse_to_json(&v).as_bytes())?;
    Ok(v)
}

fn decompress_with<S: HeScheme>(a: &DecompressArgs) -> Result<SparseVector> {
    let sk = load_secret::<S>(&a.keys)?;
    let pk = load_public::<S>(&a.keys)?;
    let ans = CompressedAnswer::<S>::from_bytes(&read(&a.input)?)?;
    let params = CompressionParams::new(a.len, a.s, *S::params(&pk))?;
    Ok(decomp(&sk, &ans, &params)?)
}

/// Loads a database, detecting the binary format by its magic.
pub fn load_database(path: &Path, p: u64) -> Result<Database> {
    let p = PrimeModulus::new(p)?;
    let bytes = read(path)?;
    Ok(if bytes.starts_with(b"HCDB") {
        Database::from_binary(&bytes, p)?
    } else {
        Database::from_jsonl(BufReader::new(bytes.as_slice()), p)?
    })
}

pub struct ServeArgs {
    pub bind: String,
    pub db: PathBuf,
    pub p: u64,
    pub mode: AnswerMode,
    pub record: Option<PathBuf>,
}

pub fn run_server(a: &ServeArgs) -> Result<()> {
    let db = load_database(&a.db, a.p)?;
    let listener = TcpListener::bind(&a.bind).with_context(|| format!("binding {}", a.bind))?;
    eprintln!("serving {} records on {}", db.len(), listener.local_addr()?);
    let recorder = a.record.as_deref().map(Recorder::create).transpose()?;
    let config = ServerConfig {
        db,
        mode: a.mode,
        execution: Execution::default(),
        recorder,
    };
    serve(listener, Arc::new(config))?;
    Ok(())
}

pub struct QueryArgs {
    pub addr: String,
    pub keys: PathBuf,
    pub s: usize,
    pub conditions: Vec<u64>,
    pub record: Option<PathBuf>,
    pub seed: u64,
}

/// Runs each condition over one connection; one result per condition.
pub fn run_query(a: &QueryArgs) -> Result<Vec<PdqResult>> {
    match backend_of(&a.keys)? {
        BackendId::Simulator => query_with::<Simulator>(a),
        BackendId::BgvMini => query_with::<BgvMini>(a),
    }
}

fn query_with<S: HeScheme>(a: &QueryArgs) -> Result<Vec<PdqResult>> {
    if a.conditions.is_empty() {
        bail!("no query condition given");
    }
    let client =
        ClientState::<S>::from_keys(load_secret::<S>(&a.keys)?, load_public::<S>(&a.keys)?, a.s);
    let recorder = a.record.as_deref().map(Recorder::create).transpose()?;
    let mut remote = RemoteClient::connect(a.addr.as_str(), &client, recorder)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    a.conditions
        .iter()
        .map(|&x| Ok(remote.query(&client, x, &mut rng)?))
        .collect()
}
