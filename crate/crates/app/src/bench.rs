//! Compression / decompression measurements over an `(N, s)` grid, as CSV.

use std::fmt::Write as _;
use std::time::Instant;

use hcpdq_core::bgv::BgvMini;
use hcpdq_core::he::{Evaluator, HeParams, HeScheme, Simulator};
use hcpdq_core::homcomp::{
    decomp_slots, encrypt_vector, extract_slots, CompressionParams, Compressor,
};
use hcpdq_core::zp::{ops, SparseVector, DEFAULT_ROOT_SEED};
use hcpdq_core::Execution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Backend;

pub const CSV_HEADER: &str =
    "N,s,backend,comp_keyswitches,comp_pt_mults,comp_wall_ms,decomp_zp_ops,decomp_wall_ms,payload_bytes";

/// Test vectors draw their support from `[1, INDEX_SPAN]` (or `[1, N]` if
/// smaller), so runs with the same seed and `s` compress the same vector for
/// every `N >= INDEX_SPAN`.
pub const INDEX_SPAN: usize = 1 << 13;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub len: usize,
    pub s: usize,
    pub backend: Backend,
    pub comp_keyswitches: u64,
    pub comp_pt_mults: u64,
    pub comp_wall_ms: f64,
    pub decomp_zp_ops: u64,
    pub decomp_wall_ms: f64,
    pub payload_bytes: usize,
}

impl BenchRow {
    pub fn csv_line(&self, omit_timing: bool) -> String {
        let ms = |x: f64| {
            if omit_timing {
                "0".to_string()
            } else {
                format!("{x:.3}")
            }
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.len,
            self.s,
            self.backend.name(),
            self.comp_keyswitches,
            self.comp_pt_mults,
            ms(self.comp_wall_ms),
            self.decomp_zp_ops,
            ms(self.decomp_wall_ms),
            self.payload_bytes
        )
    }
}

pub fn to_csv(rows: &[BenchRow], omit_timing: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line(omit_timing));
        out.push('\n');
    }
    out
}

/// A random `s`-sparse vector, deterministic in `(seed, s, min(len, INDEX_SPAN))`.
pub fn sample_vector(len: usize, s: usize, p: u64, seed: u64) -> SparseVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (s as u64).rotate_left(32));
    let span = len.min(INDEX_SPAN);
    let idx = sample(&mut rng, span, s.min(span));
    let entries = idx
        .into_iter()
        .map(|i| (i + 1, rng.gen_range(1..p)))
        .collect();
    SparseVector::new(len, entries).expect("distinct in-range indices")
}

/// Compresses and decompresses one sample vector, checking the round trip.
pub fn run_point(
    backend: Backend,
    len: usize,
    s: usize,
    he: HeParams,
    seed: u64,
    exec: Execution,
) -> anyhow::Result<BenchRow> {
    match backend {
        Backend::Sim => run_point_with::<Simulator>(backend, len, s, he, seed, exec),
        Backend::Bgv => run_point_with::<BgvMini>(backend, len, s, he, seed, exec),
    }
}

fn run_point_with<S: HeScheme>(
    backend: Backend,
    len: usize,
    s: usize,
    he: HeParams,
    seed: u64,
    exec: Execution,
) -> anyhow::Result<BenchRow> {
    let params = CompressionParams::new(len, s, he)?;
    let comp = Compressor::new(params)?.with_execution(exec);
    let (sk, pk) = S::keygen(&he, &comp.rotation_set(), seed)?;
    let d = sample_vector(len, s, he.p().value(), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let cd = encrypt_vector::<S>(&pk, &d.to_dense(), &mut rng)?;
    let cv = encrypt_vector::<S>(&pk, &d.index_set().indicator(len), &mut rng)?;

    // build the cached diagonals outside the timed region
    let warm = Evaluator::<S>::new(&pk).with_execution(exec);
    comp.comp(&warm, &cd, Some(&cv))?;

    let ev = Evaluator::<S>::new(&pk).with_execution(exec);
    let start = Instant::now();
    let ans = comp.comp(&ev, &cd, Some(&cv))?;
    let comp_wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let counts = ev.counts();

    let decrypted = ans
        .ciphertexts()
        .iter()
        .map(|c| S::decrypt(&sk, c))
        .collect::<Result<Vec<_>, _>>()?;
    let (w, e) = extract_slots(ans.layout(), &decrypted)?;
    let start = Instant::now();
    let (out, zp_ops) = ops::measure(|| decomp_slots(&w, &e, &params, DEFAULT_ROOT_SEED));
    let decomp_wall_ms = start.elapsed().as_secs_f64() * 1e3;
    anyhow::ensure!(out? == d, "round trip failed at N = {len}, s = {s}");

    Ok(BenchRow {
        len,
        s,
        backend,
        comp_keyswitches: counts.keyswitches,
        comp_pt_mults: counts.pt_mults,
        comp_wall_ms,
        decomp_zp_ops: zp_ops,
        decomp_wall_ms,
        payload_bytes: ans.to_bytes().len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Scaling checks over whatever grid `rows` covers.
///
/// * key switches grow monotonically in `s` and by at most `1.5 sqrt(s_max / s_min)`
///   (6 for `s = 8 .. 128`);
/// * decompression Z_p op counts and payload sizes do not depend on `N`.
pub fn verdicts(rows: &[BenchRow]) -> Vec<Verdict> {
    let mut out = Vec::new();
    for (backend, len) in groups(rows, |r| (r.backend, r.len)) {
        let mut pts: Vec<&BenchRow> = rows
            .iter()
            .filter(|r| r.backend == backend && r.len == len)
            .collect();
        if pts.len() < 2 {
            continue;
        }
        pts.sort_by_key(|r| r.s);
        let (lo, hi) = (pts[0], pts[pts.len() - 1]);
        let monotone = pts
            .windows(2)
            .all(|w| w[0].comp_keyswitches <= w[1].comp_keyswitches);
        let ratio = hi.comp_keyswitches as f64 / lo.comp_keyswitches.max(1) as f64;
        let bound = 1.5 * (hi.s as f64 / lo.s as f64).sqrt();
        let mut detail = String::new();
        let _ = write!(
            detail,
            "{} N={len}: K({})/K({}) = {}/{} = {ratio:.3} (bound {bound:.2}), monotone: {monotone}",
            backend.name(),
            hi.s,
            lo.s,
            hi.comp_keyswitches,
            lo.comp_keyswitches
        );
        out.push(Verdict {
            name: "keyswitch-sublinear",
            pass: monotone && ratio <= bound,
            detail,
        });
    }
    for (backend, s) in groups(rows, |r| (r.backend, r.s)) {
        let pts: Vec<&BenchRow> = rows
            .iter()
            .filter(|r| r.backend == backend && r.s == s)
            .collect();
        if pts.len() < 2 {
            continue;
        }
        let ops: Vec<u64> = pts.iter().map(|r| r.decomp_zp_ops).collect();
        let bytes: Vec<usize> = pts.iter().map(|r| r.payload_bytes).collect();
        out.push(Verdict {
            name: "decomp-n-independent",
            pass: ops.iter().all(|&x| x == ops[0]),
            detail: format!("{} s={s}: decomp_zp_ops {ops:?}", backend.name()),
        });
        out.push(Verdict {
            name: "payload-n-independent",
            pass: bytes.iter().all(|&x| x == bytes[0]),
            detail: format!("{} s={s}: payload_bytes {bytes:?}", backend.name()),
        });
    }
    out
}

fn groups<K: PartialEq + Copy>(rows: &[BenchRow], key: impl Fn(&BenchRow) -> K) -> Vec<K> {
    let mut out: Vec<K> = Vec::new();
    for r in rows {
        let k = key(r);
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_is_stable_across_lengths() {
        let a = sample_vector(1 << 13, 16, 147457, 7);
        let b = sample_vector(1 << 17, 16, 147457, 7);
        assert_eq!(a.entries(), b.entries());
        assert_eq!(a.nnz(), 16);
        assert_ne!(sample_vector(1 << 13, 16, 147457, 8), a);
    }

    #[test]
    fn small_grid() {
        let he = HeParams::new(256, 65537, 3).unwrap();
        let rows: Vec<BenchRow> = [(8192, 2), (8192, 8), (16384, 2)]
            .iter()
            .map(|&(len, s)| run_point(Backend::Sim, len, s, he, 1, Execution::Sequential).unwrap())
            .collect();
        let csv = to_csv(&rows, true);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().nth(1).unwrap().split(',').nth(5), Some("0"));
        assert_eq!(csv.lines().count(), 4);
        let v = verdicts(&rows);
        assert_eq!(v.len(), 3);
        assert!(v.iter().all(|v| v.pass), "{v:?}");
    }
}
