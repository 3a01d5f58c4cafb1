use hcpdq_core::he::{HeParams, Simulator};
use hcpdq_core::homcomp::CompressedAnswer;
use hcpdq_core::pdq::{
    pdq_depth, AnswerMode, ClientState, Database, PdqError, PdqQuery, PdqServer, Record,
};
use hcpdq_core::zp::PrimeModulus;
use proptest::collection::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const P: u64 = 65537;

fn he(mode: AnswerMode) -> HeParams {
    HeParams::new(64, P, pdq_depth(P, mode)).unwrap()
}

fn database(pairs: &[(u64, u64)]) -> Database {
    let recs: Vec<Record> = pairs
        .iter()
        .map(|&(key, value)| Record { key, value })
        .collect();
    Database::new(&recs, PrimeModulus::new(P).unwrap()).unwrap()
}

fn run(db: &Database, s: usize, mode: AnswerMode, x: u64) -> Result<Vec<(usize, u64)>, PdqError> {
    let he = he(mode);
    let client = ClientState::<Simulator>::keygen(he, s, 3)?;
    let server = PdqServer::new(db.clone(), s, he)?.with_mode(mode);
    let mut rng = ChaCha8Rng::seed_from_u64(x);
    let q = client.query(x, &mut rng)?;
    let q = PdqQuery::<Simulator>::from_bytes(&q.to_bytes())?;
    let ans = server.answer(client.public_key(), &q)?;
    let ans = CompressedAnswer::<Simulator>::from_bytes(&ans.to_bytes())?;
    Ok(client.recover(&ans, db.len())?.matches)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn both_modes_agree_with_cleartext_lookup(
        pairs in vec((0u64..12, 1u64..P), 1..150),
        x in 0u64..14,
    ) {
        let db = database(&pairs);
        let want = db.lookup(x);
        prop_assume!(want.len() <= 6);
        for mode in [AnswerMode::MaskThenComp, AnswerMode::CleartextDb] {
            prop_assert_eq!(run(&db, 6, mode, x).unwrap(), want.clone());
        }
    }
}

#[test]
fn records_beyond_one_ciphertext() {
    // 200 records over four 64-slot ciphertexts; key 5 sits in each chunk
    let pairs: Vec<(u64, u64)> = (1..=200)
        .map(|i| (if i % 60 == 0 { 5 } else { 1000 + i }, i * 7))
        .collect();
    let db = database(&pairs);
    assert_eq!(
        run(&db, 4, AnswerMode::default(), 5).unwrap(),
        vec![(60, 420), (120, 840), (180, 1260)]
    );
    assert_eq!(run(&db, 4, AnswerMode::default(), 6).unwrap(), vec![]);
}

#[test]
fn too_many_matches_is_an_overflow() {
    let pairs: Vec<(u64, u64)> = (1..=40).map(|i| (i % 4, i)).collect();
    let db = database(&pairs);
    let err = run(&db, 3, AnswerMode::default(), 2).unwrap_err();
    assert!(matches!(err, PdqError::QueryOverflow { s: 3 }), "{err:?}");
}

#[test]
fn invalid_inputs_are_rejected() {
    let p = PrimeModulus::new(P).unwrap();
    assert!(Database::new(&[], p).is_err());
    assert!(Database::new(&[Record { key: P, value: 1 }], p).is_err());
    assert!(Database::new(&[Record { key: 1, value: 0 }], p).is_err());

    let client = ClientState::<Simulator>::keygen(he(AnswerMode::default()), 2, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(
        client.query(P, &mut rng),
        Err(PdqError::InvalidCondition { .. })
    ));
    assert!(PdqQuery::<Simulator>::from_bytes(b"HCPQ").is_err());
}

#[test]
fn database_files_round_trip() {
    let db = database(&[(3, 4), (5, 6), (3, 9)]);
    let p = db.modulus();
    let jsonl = db.to_jsonl();
    assert_eq!(
        Database::from_jsonl(jsonl.as_bytes(), p)
            .unwrap()
            .records()
            .collect::<Vec<_>>(),
        db.records().collect::<Vec<_>>()
    );
    let bin = db.to_binary();
    let back = Database::from_binary(&bin, p).unwrap();
    assert_eq!(back.keys(), db.keys());
    assert_eq!(back.values(), db.values());
    assert!(Database::from_binary(&bin[..bin.len() - 3], p).is_err());
}
