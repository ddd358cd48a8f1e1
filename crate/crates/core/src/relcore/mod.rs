//! Domain values, relations, databases and CSV ingestion.

mod assignment;
mod csvio;
mod value;

use std::collections::{BTreeMap, BTreeSet};

pub use assignment::{join_assignment_sets, AnswerSet, Assignment};
pub use csvio::{load_database, save_database};
pub use value::{lex_decimal, Value, Var};

#[derive(Debug, thiserror::Error)]
pub enum RelError {
    #[error("{file}: row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        file: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("no relation files in {0}")]
    EmptyDir(String),
    #[error("relation {0} defined twice")]
    DuplicateRelation(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("tuple of length {found} in relation {name} of arity {arity}")]
    ArityMismatch {
        name: String,
        arity: usize,
        found: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    name: String,
    arity: usize,
    tuples: Vec<Vec<Value>>,
}

impl Relation {
    /// Tuples are sorted and deduplicated.
    pub fn new(name: &str, arity: usize, mut tuples: Vec<Vec<Value>>) -> Result<Relation, RelError> {
        if let Some(t) = tuples.iter().find(|t| t.len() != arity) {
            return Err(RelError::ArityMismatch {
                name: name.to_string(),
                arity,
                found: t.len(),
            });
        }
        tuples.sort_unstable();
        tuples.dedup();
        Ok(Relation {
            name: name.to_string(),
            arity,
            tuples,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Vec<Value>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[Value]) -> bool {
        self.tuples
            .binary_search_by(|t| t.as_slice().cmp(tuple))
            .is_ok()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Database {
    relations: BTreeMap<String, Relation>,
    domain: BTreeSet<Value>,
}

impl Database {
    pub fn new() -> Database {
        Database::default()
    }

    pub fn add_relation(&mut self, rel: Relation) -> Result<(), RelError> {
        if self.relations.contains_key(&rel.name) {
            return Err(RelError::DuplicateRelation(rel.name));
        }
        for t in &rel.tuples {
            self.domain.extend(t.iter().cloned());
        }
        self.relations.insert(rel.name.clone(), rel);
        Ok(())
    }

    /// Convenience for tests and fixtures: string cells, arity from the first row.
    pub fn with_relation(mut self, name: &str, arity: usize, rows: &[&[&str]]) -> Result<Database, RelError> {
        let tuples = rows
            .iter()
            .map(|r| r.iter().map(|s| Value::new(s)).collect())
            .collect();
        self.add_relation(Relation::new(name, arity, tuples)?)?;
        Ok(self)
    }

    pub fn add_constant(&mut self, value: Value) {
        self.domain.insert(value);
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn domain(&self) -> &BTreeSet<Value> {
        &self.domain
    }

    /// |D|: the total number of tuples.
    pub fn size(&self) -> usize {
        self.relations.values().map(Relation::len).sum()
    }
}
