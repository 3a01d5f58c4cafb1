use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hcpdq_core::he::{Evaluator, HeParams, HeScheme, Simulator};
use hcpdq_core::homcomp::{encrypt_vector, CompressionParams, Compressor};
use hcpdq_core::pdq::{pdq_depth, AnswerMode, ClientState, Database, PdqServer, Record};
use hcpdq_core::zp::PrimeModulus;
use hcpdq_core::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: u64 = 65537;
const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn compression(c: &mut Criterion) {
    let he = HeParams::new(1 << 13, P, 3).unwrap();
    let len = 1 << 15;
    let mut group = c.benchmark_group("comp");
    group.sample_size(10);
    for s in [16, 64] {
        let params = CompressionParams::new(len, s, he).unwrap();
        let rot = Compressor::new(params).unwrap().rotation_set();
        let (_, pk) = Simulator::keygen(&he, &rot, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut d = vec![0u64; len];
        for _ in 0..s {
            d[rng.gen_range(0..len)] = rng.gen_range(1..P);
        }
        let v: Vec<u64> = d.iter().map(|&x| u64::from(x != 0)).collect();
        let dc = encrypt_vector::<Simulator>(&pk, &d, &mut rng).unwrap();
        let vc = encrypt_vector::<Simulator>(&pk, &v, &mut rng).unwrap();
        for (name, exec) in MODES {
            // diagonals are cached per compressor, so build them outside the timed loop
            let comp = Compressor::new(params).unwrap().with_execution(exec);
            let ev = Evaluator::<Simulator>::new(&pk).with_execution(exec);
            comp.comp(&ev, &dc, Some(&vc)).unwrap();
            group.bench_with_input(BenchmarkId::new(name, s), &s, |b, _| {
                b.iter(|| black_box(comp.comp(&ev, &dc, Some(&vc)).unwrap()))
            });
        }
    }
    group.finish();
}

fn pdq_answer(c: &mut Criterion) {
    let he = HeParams::new(1 << 12, P, pdq_depth(P, AnswerMode::MaskThenComp)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let recs: Vec<Record> = (0..16384)
        .map(|_| Record {
            key: rng.gen_range(0..4096),
            value: rng.gen_range(1..P),
        })
        .collect();
    let db = Database::new(&recs, PrimeModulus::new(P).unwrap()).unwrap();
    let client = ClientState::<Simulator>::keygen(he, 16, 4).unwrap();
    let q = client.query(7, &mut rng).unwrap();
    let mut group = c.benchmark_group("pdq_answer");
    group.sample_size(10);
    for (name, exec) in MODES {
        let server = PdqServer::new(db.clone(), 16, he)
            .unwrap()
            .with_execution(exec);
        let ev = Evaluator::<Simulator>::new(client.public_key()).with_execution(exec);
        group.bench_function(name, |b| {
            b.iter(|| black_box(server.answer_with(&ev, &q).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, compression, pdq_answer);
criterion_main!(benches);
