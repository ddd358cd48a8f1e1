//! Fixtures for the criterion benches.

use std::collections::BTreeMap;

use lpcq_core::bench::default_tree;
use lpcq_core::lang::{parse_program, Program};
use lpcq_core::pipeline::Trees;
use lpcq_core::relcore::Database;
use lpcq_core::synth::random::{random_instance, RandomConfig};
use lpcq_core::synth::{delivery_database, GenSpec, DELIVERY_BENCH_PROGRAM};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub program: Program,
    pub db: Database,
    /// Trees for factorized runs; natural runs ignore them.
    pub trees: Trees,
}

/// The delivery program over generated data of `m` tuples per table, with
/// the shipped tree for its query.
pub fn delivery(m: usize, seed: u64) -> Fixture {
    Fixture {
        program: parse_program(DELIVERY_BENCH_PROGRAM).expect("shipped program parses"),
        db: delivery_database(&GenSpec::new(m, seed)).expect("valid spec"),
        trees: Trees::Given(BTreeMap::from([("dlr".to_string(), default_tree())])),
    }
}

/// `n` small random programs with min-fill trees.
pub fn random_suite(n: usize, seed: u64) -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let inst = random_instance(&mut rng, &RandomConfig::default());
            Fixture {
                program: parse_program(&inst.program).expect("generated program parses"),
                db: inst.db,
                trees: Trees::Heuristic,
            }
        })
        .collect()
}
