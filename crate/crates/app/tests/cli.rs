use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

use hcpdq_core::zp::SparseVector;
use tempfile::TempDir;

fn hcpdq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcpdq"))
        .args(args)
        .env_remove("HCPDQ_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = hcpdq(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn canonical(v: &SparseVector) -> String {
    format!("{}\n", serde_json::to_string(v).unwrap())
}

/// keygen -> compress -> decompress; returns the exit status and the output file.
fn round_trip(
    dir: &TempDir,
    backend: &str,
    n: &str,
    v: &SparseVector,
    s: usize,
) -> (Output, Option<String>) {
    let keys = dir.path().join(format!("keys-{backend}"));
    let input = dir.path().join("in.json");
    let ans = dir.path().join("answer.bin");
    let back = dir.path().join("out.json");
    let s = s.to_string();
    std::fs::write(&input, canonical(v)).unwrap();
    ok(&[
        "keygen",
        "--backend",
        backend,
        "--n",
        n,
        "--levels",
        "3",
        "--s",
        &s,
        "--out",
        p(&keys),
    ]);
    ok(&[
        "compress",
        "--keys",
        p(&keys),
        "--input",
        p(&input),
        "--s",
        &s,
        "--out",
        p(&ans),
    ]);
    let len = v.length().to_string();
    let out = hcpdq(&[
        "decompress",
        "--keys",
        p(&keys),
        "--input",
        p(&ans),
        "--len",
        &len,
        "--s",
        &s,
        "--out",
        p(&back),
    ]);
    let text = out
        .status
        .success()
        .then(|| std::fs::read_to_string(&back).unwrap());
    (out, text)
}

#[test]
fn keygen_with_defaults_writes_both_keys() {
    let dir = TempDir::new().unwrap();
    let keys = dir.path().join("k");
    ok(&["keygen", "--out", p(&keys)]);
    assert!(keys.join("secret.key").metadata().unwrap().len() > 0);
    assert!(keys.join("public.key").metadata().unwrap().len() > 0);
}

#[test]
fn keygen_rejects_invalid_parameters() {
    let dir = TempDir::new().unwrap();
    let keys = dir.path().join("k");
    let out = hcpdq(&["keygen", "--p", "65536", "--out", p(&keys)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prime"));

    // 40961 = 5 * 2^13 + 1 is 1 mod 2n only for n <= 2^12
    let out = hcpdq(&["keygen", "--n", "8192", "--p", "40961", "--out", p(&keys)]);
    assert_eq!(out.status.code(), Some(1));
    ok(&["keygen", "--n", "4096", "--p", "40961", "--out", p(&keys)]);
}

#[test]
fn compress_decompress_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let v = SparseVector::new(3000, vec![(1, 5), (700, 65536), (2048, 2), (2999, 77)]).unwrap();
    let (_, text) = round_trip(&dir, "sim", "1024", &v, 6);
    assert_eq!(text.unwrap(), canonical(&v));
}

#[test]
fn compress_decompress_on_bgv() {
    let dir = TempDir::new().unwrap();
    let v = SparseVector::new(5000, vec![(3, 1), (4096, 9), (5000, 12345)]).unwrap();
    let (_, text) = round_trip(&dir, "bgv", "4096", &v, 4);
    assert_eq!(text.unwrap(), canonical(&v));
}

#[test]
fn empty_vector_round_trips() {
    let dir = TempDir::new().unwrap();
    let v = SparseVector::zero(100);
    let (_, text) = round_trip(&dir, "sim", "64", &v, 3);
    assert_eq!(text.unwrap(), canonical(&v));
}

#[test]
fn too_many_nonzeros_exit_with_decode_status() {
    let dir = TempDir::new().unwrap();
    let v = SparseVector::new(400, vec![(10, 1), (20, 2), (30, 3), (40, 4)]).unwrap();
    let (out, text) = round_trip(&dir, "sim", "64", &v, 3);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(text.is_none());
}

#[test]
fn missing_key_file_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.json");
    std::fs::write(&input, canonical(&SparseVector::zero(5))).unwrap();
    let out = hcpdq(&[
        "compress",
        "--keys",
        p(&dir.path().join("none")),
        "--input",
        p(&input),
        "--out",
        p(&dir.path().join("a")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_csv_is_reproducible_without_timing() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let args = [
            "--seed", "9", "bench", "--vary", "n", "--values", "512,1024", "--fixed", "4", "--n",
            "256",
        ];
        ok(&[&args[..], &["--omit-timing", "--out", p(&path)]].concat());
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert_eq!(a.lines().count(), 3);
    let header: Vec<&str> = a.lines().next().unwrap().split(',').collect();
    assert!(header.contains(&"s") && header.contains(&"N"), "{header:?}");
}

#[test]
fn bench_single_point_gives_one_row() {
    let out = ok(&[
        "bench", "--vary", "s", "--values", "4", "--fixed", "512", "--n", "256",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("512,4,simulator,"));
}

#[test]
fn serve_and_query_over_loopback() {
    let dir = TempDir::new().unwrap();
    let db = dir.path().join("db.jsonl");
    std::fs::write(
        &db,
        "{\"key\":4,\"value\":10}\n{\"key\":7,\"value\":11}\n{\"key\":4,\"value\":12}\n",
    )
    .unwrap();
    let keys = dir.path().join("k");
    ok(&["keygen", "--n", "64", "--s", "2", "--out", p(&keys)]);

    let mut server = Command::new(env!("CARGO_BIN_EXE_hcpdq"))
        .args(["serve", "--port", "0", "--db", p(&db)])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line.trim().rsplit(' ').next().unwrap().to_string();

    let out = hcpdq(&[
        "query",
        "--addr",
        &addr,
        "--keys",
        p(&keys),
        "--s",
        "2",
        "--x",
        "4",
        "--x",
        "5",
    ]);
    server.kill().unwrap();
    server.wait().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines, ["{\"matches\":[[1,10],[3,12]]}", "{\"matches\":[]}"]);
}
