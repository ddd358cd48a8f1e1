//! Seeded instance generators: delivery databases for benchmarking and small
//! random queries, databases and programs for differential testing.

pub mod random;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::relcore::{Database, RelError, Relation, Value};

pub const DELIVERY_PROGRAM: &str = include_str!("../../../../data/delivery/delivery.lpcq");
/// Orders capped rather than mandatory, so that random data stays feasible.
pub const DELIVERY_BENCH_PROGRAM: &str = include_str!("../../../../data/delivery/delivery_bench.lpcq");
/// Two bags, each holding all four output columns.
pub const DELIVERY_TREE: &str = include_str!("../../../../data/delivery/dlr_tree.json");
/// Bags split along the shared factory/buyer pair.
pub const DELIVERY_SPLIT_TREE: &str = include_str!("../../../../data/delivery/dlr_tree_split.json");

/// Cents in [1.00, 100.00].
const NUMERIC_CHOICES: usize = 9901;

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("table {table}: {m} tuples requested but only {capacity} exist (domain {n}, arity {arity})")]
    InfeasibleSpec {
        table: &'static str,
        m: usize,
        n: usize,
        arity: usize,
        capacity: u128,
    },
    #[error("selectivity must lie in (0, 1], got {0}")]
    BadRatio(f64),
    #[error("table {table}: domain of {n} exceeds the {NUMERIC_CHOICES} distinct numeric values")]
    NumericRange { table: &'static str, n: usize },
    #[error(transparent)]
    Rel(#[from] RelError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    /// Tuples per table.
    pub m: usize,
    pub seed: u64,
    /// Fraction `m / n^k` of the possible tuples that each table holds.
    pub rho: f64,
}

impl GenSpec {
    pub fn new(m: usize, seed: u64) -> GenSpec {
        GenSpec { m, seed, rho: 0.01 }
    }

    /// `ceil((m/ρ)^(1/k))`, nudged so that float error never drops a whole unit.
    pub fn domain_size(&self, arity: usize) -> usize {
        let target = self.m as f64 / self.rho;
        let mut n = target.powf(1.0 / arity as f64).ceil().max(1.0) as usize;
        while n > 1 && ((n - 1) as f64).powi(arity as i32) >= target * (1.0 - 1e-12) {
            n -= 1;
        }
        n
    }
}

/// (name, arity, numeric column)
const DELIVERY_TABLES: [(&str, usize, usize); 4] = [("prod", 3, 2), ("order", 3, 2), ("store", 2, 1), ("route", 3, 2)];

/// prod(factory, object, capacity), order(buyer, object, quantity),
/// store(warehouse, limit), route(from, to, cost). Entities are `d<i>`.
pub fn delivery_database(spec: &GenSpec) -> Result<Database, GenError> {
    if !(spec.rho > 0.0 && spec.rho <= 1.0) {
        return Err(GenError::BadRatio(spec.rho));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut db = Database::new();
    for (table, arity, numeric) in DELIVERY_TABLES {
        let n = spec.domain_size(arity);
        let capacity = (n as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
        if (spec.m as u128) > capacity {
            return Err(GenError::InfeasibleSpec {
                table,
                m: spec.m,
                n,
                arity,
                capacity,
            });
        }
        if n > NUMERIC_CHOICES {
            return Err(GenError::NumericRange { table, n });
        }
        let cents: Vec<usize> = index::sample(&mut rng, NUMERIC_CHOICES, n).into_iter().collect();
        let capacity = usize::try_from(capacity).map_err(|_| GenError::InfeasibleSpec {
            table,
            m: spec.m,
            n,
            arity,
            capacity,
        })?;
        let tuples = index::sample(&mut rng, capacity, spec.m)
            .into_iter()
            .map(|mut code| {
                let mut digits = vec![0; arity];
                for d in digits.iter_mut().rev() {
                    *d = code % n;
                    code /= n;
                }
                digits
                    .iter()
                    .enumerate()
                    .map(|(col, &i)| {
                        if col == numeric {
                            let c = cents[i] + 100;
                            Value::new(&format!("{}.{:02}", c / 100, c % 100))
                        } else {
                            Value::new(&format!("d{i}"))
                        }
                    })
                    .collect()
            })
            .collect();
        db.add_relation(Relation::new(table, arity, tuples)?)?;
    }
    Ok(db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::trees_from_json;
    use crate::lang::parse_program;

    #[test]
    fn sizes_and_determinism() {
        let spec = GenSpec::new(10, 1);
        let a = delivery_database(&spec).unwrap();
        for (table, _, _) in DELIVERY_TABLES {
            assert_eq!(a.relation(table).unwrap().len(), 10);
        }
        assert_eq!(a, delivery_database(&spec).unwrap());
        assert_ne!(a, delivery_database(&GenSpec::new(10, 2)).unwrap());
    }

    #[test]
    fn domain_sizes() {
        let spec = GenSpec::new(1000, 1);
        assert_eq!(spec.domain_size(3), 47);
        assert_eq!(spec.domain_size(2), 317);
        assert_eq!(GenSpec { m: 8, seed: 0, rho: 1.0 }.domain_size(3), 2);
        assert_eq!(GenSpec::new(1, 0).domain_size(2), 10);
    }

    #[test]
    fn full_and_singleton_tables() {
        let full = delivery_database(&GenSpec { m: 8, seed: 3, rho: 1.0 }).unwrap();
        let route = full.relation("route").unwrap();
        assert_eq!(route.len(), 8);
        let firsts: std::collections::BTreeSet<_> = route.tuples().iter().map(|t| t[0].clone()).collect();
        assert_eq!(firsts.len(), 2);
        let one = delivery_database(&GenSpec { m: 1, seed: 3, rho: 1.0 }).unwrap();
        assert!(one.relations().all(|r| r.len() == 1));
    }

    #[test]
    fn numeric_columns_in_range() {
        let db = delivery_database(&GenSpec::new(200, 7)).unwrap();
        for r in db.relations() {
            for t in r.tuples() {
                let x = t[r.arity() - 1].numeric().unwrap();
                assert!((1.0..=100.0).contains(&x));
                assert!(t[r.arity() - 1].text().split('.').nth(1).is_some_and(|d| d.len() == 2));
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(delivery_database(&GenSpec { m: 9, seed: 0, rho: 0.0 }), Err(GenError::BadRatio(_))));
    }

    #[test]
    fn shipped_files_load() {
        parse_program(DELIVERY_PROGRAM).unwrap();
        parse_program(DELIVERY_BENCH_PROGRAM).unwrap();
        trees_from_json(DELIVERY_TREE).unwrap()[0].to_tree().unwrap();
        trees_from_json(DELIVERY_SPLIT_TREE).unwrap()[0].to_tree().unwrap();
    }
}
