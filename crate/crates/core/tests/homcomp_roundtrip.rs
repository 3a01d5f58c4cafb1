use hcpdq_core::he::{Evaluator, HeParams, HeScheme, Simulator, SlotMatrix};
use hcpdq_core::homcomp::{
    bsgs_matvec, build_vandermonde, decomp, decomp_idx, decrypt_vector, encrypt_vector, BsgsPlan,
    CompError, CompressedAnswer, CompressionParams, Compressor, Diagonals, Packing, RowSource,
};
use hcpdq_core::zp::{vandermonde_apply, PrimeModulus, SparseVector};
use hcpdq_core::Execution;
use proptest::collection::btree_map;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const P: u64 = 65537;

fn setup(
    n: usize,
    len: usize,
    s: usize,
    levels: u32,
) -> (
    Compressor,
    <Simulator as HeScheme>::SecretKey,
    <Simulator as HeScheme>::PublicKey,
) {
    let he = HeParams::new(n, P, levels).unwrap();
    let comp = Compressor::new(CompressionParams::new(len, s, he).unwrap()).unwrap();
    let (sk, pk) = Simulator::keygen(&he, &comp.rotation_set(), 5).unwrap();
    (comp, sk, pk)
}

fn sparse(len: usize, entries: Vec<(usize, u64)>) -> SparseVector {
    SparseVector::new(len, entries).unwrap()
}

fn indicator(d: &SparseVector) -> Vec<u64> {
    d.index_set().indicator(d.length())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn packed_round_trip(entries in btree_map(1usize..=300, 1u64..P, 0..=6)) {
        let (comp, sk, pk) = setup(64, 300, 6, 3);
        let d = sparse(300, entries.into_iter().collect());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ev = Evaluator::<Simulator>::new(&pk);
        let dc = encrypt_vector::<Simulator>(&pk, &d.to_dense(), &mut rng).unwrap();
        let vc = encrypt_vector::<Simulator>(&pk, &indicator(&d), &mut rng).unwrap();
        let ans = comp.comp(&ev, &dc, Some(&vc)).unwrap();
        prop_assert_eq!(ans.ciphertexts().len(), 1);
        prop_assert_eq!(decomp::<Simulator>(&sk, &ans, comp.params()).unwrap(), d);
    }

    #[test]
    fn bsgs_matches_cleartext_product(v in proptest::collection::vec(0u64..P, 200), s in 1usize..=16) {
        let he = HeParams::new(64, P, 2).unwrap();
        let params = CompressionParams::new(200, s, he).unwrap();
        let plan = BsgsPlan::new(&he, s).unwrap();
        let (sk, pk) = Simulator::keygen(&he, &plan.rotation_set(), 2).unwrap();
        let matrix = build_vandermonde(&params).unwrap();
        let width = he.width();
        // standard layout: chunk k holds entries k*n .. (k+1)*n, row 0 first
        let sources: Vec<[RowSource<'_>; 2]> = (0..params.input_ciphertexts())
            .map(|k| {
                [
                    RowSource { matrix: &matrix, offset: k * he.n() },
                    RowSource { matrix: &matrix, offset: k * he.n() + width },
                ]
            })
            .collect();
        let diags = Diagonals::build(&plan, &sources, Execution::Sequential);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = encrypt_vector::<Simulator>(&pk, &v, &mut rng).unwrap();
        let ev = Evaluator::<Simulator>::new(&pk);
        let y = Simulator::decrypt(&sk, &bsgs_matvec(&ev, &plan, &diags, &x).unwrap()).unwrap();
        let pm = PrimeModulus::new(P).unwrap();
        let got: Vec<u64> = (0..s).map(|j| pm.add(y.get(0, j), y.get(1, j))).collect();
        prop_assert_eq!(got, matrix.apply(&v));
    }
}

#[test]
fn hint_and_hintless_paths_agree() {
    let (comp, sk, pk) = setup(64, 150, 4, 19);
    let d = sparse(150, vec![(3, 11), (64, 2), (65, 65536), (150, 9)]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ev = Evaluator::<Simulator>::new(&pk);
    let dc = encrypt_vector::<Simulator>(&pk, &d.to_dense(), &mut rng).unwrap();
    let vc = encrypt_vector::<Simulator>(&pk, &indicator(&d), &mut rng).unwrap();
    let with = comp.comp(&ev, &dc, Some(&vc)).unwrap();
    let without = comp.comp(&ev, &dc, None).unwrap();
    let a = Simulator::decrypt(&sk, &with.ciphertexts()[0]).unwrap();
    let b = Simulator::decrypt(&sk, &without.ciphertexts()[0]).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        decomp::<Simulator>(&sk, &without, comp.params()).unwrap(),
        d
    );
    assert!(Simulator::level(&without.ciphertexts()[0]) < Simulator::level(&with.ciphertexts()[0]));
}

#[test]
fn packed_and_separate_layouts_decode_alike() {
    let (comp, sk, pk) = setup(128, 500, 5, 3);
    let separate = Compressor::new(*comp.params())
        .unwrap()
        .with_packing(Packing::Separate);
    let d = sparse(
        500,
        vec![(1, 1), (77, 40000), (128, 5), (129, 6), (500, 65536)],
    );
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ev = Evaluator::<Simulator>::new(&pk);
    let dc = encrypt_vector::<Simulator>(&pk, &d.to_dense(), &mut rng).unwrap();
    let vc = encrypt_vector::<Simulator>(&pk, &indicator(&d), &mut rng).unwrap();
    let packed = comp.comp(&ev, &dc, Some(&vc)).unwrap();
    let split = separate.comp(&ev, &dc, Some(&vc)).unwrap();
    assert_eq!(packed.layout().ciphertext_count(), 1);
    assert_eq!(split.layout().ciphertext_count(), 2);
    assert_eq!(decomp::<Simulator>(&sk, &packed, comp.params()).unwrap(), d);
    assert_eq!(decomp::<Simulator>(&sk, &split, comp.params()).unwrap(), d);

    // packed answer: w in row 0 and e in row 1, everything else zero
    let m = Simulator::decrypt(&sk, &packed.ciphertexts()[0]).unwrap();
    let pm = PrimeModulus::new(P).unwrap();
    let ones = SparseVector::new(500, d.entries().iter().map(|&(i, _)| (i, 1)).collect()).unwrap();
    assert_eq!(&m.row(0)[..5], &vandermonde_apply(&ones, 5, pm)[..]);
    assert_eq!(&m.row(1)[..5], &vandermonde_apply(&d, 5, pm)[..]);
    assert!(m.row(0)[5..].iter().chain(&m.row(1)[5..]).all(|&x| x == 0));
}

#[test]
fn index_only_compression() {
    let (comp, sk, pk) = setup(64, 200, 4, 3);
    let v: Vec<u64> = (1..=200).map(|i| u64::from(i % 50 == 0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ev = Evaluator::<Simulator>::new(&pk);
    let vc = encrypt_vector::<Simulator>(&pk, &v, &mut rng).unwrap();
    let cw = comp.comp_idx(&ev, &vc).unwrap();
    let (idx, dense) = decomp_idx::<Simulator>(&sk, &cw, comp.params()).unwrap();
    assert_eq!(idx.as_slice(), &[50, 100, 150, 200]);
    assert_eq!(dense, v);
}

#[test]
fn answer_bytes_round_trip_and_reject_garbage() {
    let (comp, sk, pk) = setup(64, 100, 3, 3);
    let d = sparse(100, vec![(10, 3), (90, 4)]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ev = Evaluator::<Simulator>::new(&pk);
    let dc = encrypt_vector::<Simulator>(&pk, &d.to_dense(), &mut rng).unwrap();
    let ans = comp.comp(&ev, &dc, None).unwrap_err();
    assert!(
        matches!(ans, CompError::He(_)),
        "3 levels cannot afford the Fermat power: {ans:?}"
    );

    let vc = encrypt_vector::<Simulator>(&pk, &indicator(&d), &mut rng).unwrap();
    let ans = comp.comp(&ev, &dc, Some(&vc)).unwrap();
    let bytes = ans.to_bytes();
    let back = CompressedAnswer::<Simulator>::from_bytes(&bytes).unwrap();
    assert_eq!(back.to_bytes(), bytes);
    assert_eq!(decomp::<Simulator>(&sk, &back, comp.params()).unwrap(), d);
    assert!(CompressedAnswer::<Simulator>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    assert!(CompressedAnswer::<Simulator>::from_bytes(b"HCCA").is_err());
}

#[test]
fn overflow_is_reported_not_misdecoded() {
    let (comp, sk, pk) = setup(64, 100, 2, 3);
    // three nonzeros with s = 2
    let d = vec![(5usize, 7u64), (40, 8), (77, 9)];
    let dense = sparse(100, d).to_dense();
    let v: Vec<u64> = dense.iter().map(|&x| u64::from(x != 0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ev = Evaluator::<Simulator>::new(&pk);
    let dc = encrypt_vector::<Simulator>(&pk, &dense, &mut rng).unwrap();
    let vc = encrypt_vector::<Simulator>(&pk, &v, &mut rng).unwrap();
    let ans = comp.comp(&ev, &dc, Some(&vc)).unwrap();
    assert!(decomp::<Simulator>(&sk, &ans, comp.params()).is_err());
}

#[test]
fn sequential_and_parallel_answers_match() {
    let (comp, _sk, pk) = setup(64, 640, 8, 3);
    let d = sparse(640, vec![(1, 2), (100, 3), (200, 4), (639, 5)]);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let dc = encrypt_vector::<Simulator>(&pk, &d.to_dense(), &mut rng).unwrap();
    let vc = encrypt_vector::<Simulator>(&pk, &indicator(&d), &mut rng).unwrap();
    let answers: Vec<Vec<u8>> = [Execution::Sequential, Execution::Parallel]
        .into_iter()
        .map(|exec| {
            let ev = Evaluator::<Simulator>::new(&pk).with_execution(exec);
            Compressor::new(*comp.params())
                .unwrap()
                .with_execution(exec)
                .comp(&ev, &dc, Some(&vc))
                .unwrap()
                .to_bytes()
        })
        .collect();
    assert_eq!(answers[0], answers[1]);
}

#[test]
fn fresh_vector_round_trips_through_layout() {
    let he = HeParams::new(16, P, 1).unwrap();
    let (sk, pk) = Simulator::keygen(&he, &Default::default(), 1).unwrap();
    let v: Vec<u64> = (0..40).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let cts = encrypt_vector::<Simulator>(&pk, &v, &mut rng).unwrap();
    assert_eq!(cts.len(), 3);
    assert_eq!(decrypt_vector::<Simulator>(&sk, &cts, 40).unwrap(), v);
    let first = Simulator::decrypt(&sk, &cts[0]).unwrap();
    assert_eq!(
        first,
        SlotMatrix::from_rows((0..8).collect(), (8..16).collect()).unwrap()
    );
}
