//! Small random instances. Every generated program is feasible-or-not by
//! chance but always bounded: a cap on the total weight of each query is
//! part of the constraint.

use std::collections::BTreeSet;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::relcore::{Database, Relation, Value};

#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub max_atoms: usize,
    pub max_relations: usize,
    pub max_tuples: usize,
    pub max_weights: usize,
    /// Existential variables per query, drawn from this inclusive range.
    pub existentials: (usize, usize),
    pub max_vars: usize,
    pub domain: usize,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            max_atoms: 4,
            max_relations: 4,
            max_tuples: 50,
            max_weights: 6,
            existentials: (0, 0),
            max_vars: 5,
            domain: 4,
        }
    }
}

/// A query over relations `R0..`, kept as text so that it can be spliced
/// into a program prelude.
#[derive(Clone, Debug)]
pub struct RandomQuery {
    /// `(name, arity)`
    pub schema: Vec<(String, usize)>,
    pub params: Vec<String>,
    pub existentials: Vec<String>,
    pub body: String,
}

impl RandomQuery {
    pub fn prelude(&self, name: &str) -> String {
        let body = if self.existentials.is_empty() {
            self.body.clone()
        } else {
            format!("exists {}. {}", self.existentials.join(" "), self.body)
        };
        format!("let {name}({}) = {body}\n", self.params.join(", "))
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub query: RandomQuery,
    pub program: String,
    pub db: Database,
}

fn value(rng: &mut impl Rng, cfg: &RandomConfig) -> String {
    rng.gen_range(0..cfg.domain).to_string()
}

pub fn random_query(rng: &mut impl Rng, cfg: &RandomConfig) -> RandomQuery {
    let schema: Vec<(String, usize)> = (0..rng.gen_range(1..=cfg.max_relations))
        .map(|i| (format!("R{i}"), rng.gen_range(1..=3)))
        .collect();
    let (lo, hi) = cfg.existentials;
    let wanted_exists = rng.gen_range(lo..=hi);
    let min_vars = (wanted_exists + 1).max(2);
    let pool: Vec<String> = (0..rng.gen_range(min_vars..=cfg.max_vars.max(min_vars)))
        .map(|i| format!("x{i}"))
        .collect();
    loop {
        let mut used = BTreeSet::new();
        let mut atoms = Vec::new();
        for _ in 0..rng.gen_range(1..=cfg.max_atoms) {
            let (rel, arity) = schema.choose(rng).unwrap();
            let args: Vec<String> = (0..*arity)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        value(rng, cfg)
                    } else {
                        let v = pool.choose(rng).unwrap().clone();
                        used.insert(v.clone());
                        v
                    }
                })
                .collect();
            atoms.push(format!("{rel}({})", args.join(", ")));
        }
        if used.len() <= wanted_exists {
            continue;
        }
        let mut vars: Vec<String> = used.into_iter().collect();
        vars.shuffle(rng);
        let existentials: Vec<String> = vars.drain(..wanted_exists).collect();
        vars.sort();
        return RandomQuery {
            schema,
            params: vars,
            existentials,
            body: atoms.join(" /\\ "),
        };
    }
}

/// At most `cfg.max_tuples` tuples in total over the query's schema.
pub fn random_database(rng: &mut impl Rng, schema: &[(String, usize)], cfg: &RandomConfig) -> Database {
    let share = (cfg.max_tuples / schema.len().max(1)).max(1);
    let mut db = Database::new();
    for (name, arity) in schema {
        let tuples = (0..rng.gen_range(1..=share))
            .map(|_| (0..*arity).map(|_| Value::new(&value(rng, cfg))).collect())
            .collect();
        db.add_relation(Relation::new(name, *arity, tuples).expect("fixed arity"))
            .expect("distinct names");
    }
    db
}

fn weight_text(rng: &mut impl Rng, q: &RandomQuery, cfg: &RandomConfig) -> String {
    let scope: Vec<String> = (0..q.params.len()).map(|i| format!("s{i}")).collect();
    let targets: Vec<String> = scope
        .iter()
        .filter_map(|s| rng.gen_bool(0.4).then(|| format!("{s} == {}", value(rng, cfg))))
        .collect();
    let cond = if targets.is_empty() { "true".to_string() } else { targets.join(" /\\ ") };
    format!("weight[({}): {cond}](Q)", scope.join(", "))
}

fn linear(terms: &[(i64, String)]) -> String {
    let mut out = String::new();
    for (i, (c, w)) in terms.iter().enumerate() {
        match (i, *c < 0) {
            (0, false) => write!(out, "{c} * {w}"),
            (0, true) => write!(out, "-{} * {w}", -c),
            (_, false) => write!(out, " + {c} * {w}"),
            (_, true) => write!(out, " - {} * {w}", -c),
        }
        .unwrap();
    }
    out
}

/// `maximize` a signed combination of up to `max_weights` weight expressions
/// under a cap on the total weight plus a few random rows.
pub fn random_instance(rng: &mut impl Rng, cfg: &RandomConfig) -> Instance {
    let query = random_query(rng, cfg);
    let db = random_database(rng, &query.schema, cfg);
    let weights: Vec<String> = (0..rng.gen_range(1..=cfg.max_weights)).map(|_| weight_text(rng, &query, cfg)).collect();
    let objective: Vec<(i64, String)> = weights
        .iter()
        .map(|w| {
            let c = if rng.gen_bool(0.2) { -rng.gen_range(1..=3) } else { rng.gen_range(1..=5) };
            (c, w.clone())
        })
        .collect();
    let scope: Vec<String> = (0..query.params.len()).map(|i| format!("s{i}")).collect();
    let mut rows = vec![format!("weight[({}): true](Q) <= {}", scope.join(", "), rng.gen_range(1..=10))];
    for _ in 0..rng.gen_range(0..=3) {
        let terms: Vec<(i64, String)> = weights
            .iter()
            .filter_map(|w| rng.gen_bool(0.5).then(|| (rng.gen_range(1..=3), w.clone())))
            .collect();
        if terms.is_empty() {
            continue;
        }
        if rng.gen_bool(0.15) {
            rows.push(format!("{} >= {}", linear(&terms), rng.gen_range(0..=2)));
        } else {
            rows.push(format!("{} <= {}", linear(&terms), rng.gen_range(0..=5)));
        }
    }
    let program = format!(
        "{}maximize {}\nsubject to {}\n",
        query.prelude("Q"),
        linear(&objective),
        rows.join("\n  /\\ ")
    );
    Instance { query, program, db }
}

/// Maximizes the total weight with every single answer capped at 1, so the
/// optimum is the number of answers.
pub fn counting_program(q: &RandomQuery) -> String {
    let scope: Vec<String> = (0..q.params.len()).map(|i| format!("s{i}")).collect();
    let binders: Vec<String> = (0..q.params.len()).map(|i| format!("z{i}")).collect();
    let pins: Vec<String> = scope.iter().zip(&binders).map(|(s, z)| format!("{s} == {z}")).collect();
    let pins = if pins.is_empty() { "true".to_string() } else { pins.join(" /\\ ") };
    format!(
        "{}maximize weight[({s}): true](Q)\nsubject to forall ({b}): Q({b}) . weight[({s}): {pins}](Q) <= 1\n",
        q.prelude("Q"),
        s = scope.join(", "),
        b = binders.join(", "),
    )
}

/// Nested `forall`/`sum` programs over `A/1`, `E/2` and `Q(a, b) = R(a, b)`
/// with numeric domain values, nesting at most `depth` binders deep.
pub fn random_nested_program(rng: &mut impl Rng, depth: usize) -> (String, Database) {
    let mut db = Database::new();
    for (name, arity, count) in [("A", 1, 3), ("E", 2, 6), ("R", 2, 8)] {
        let tuples = (0..count)
            .map(|_| (0..arity).map(|_| Value::from(rng.gen_range(0..3i64))).collect())
            .collect();
        db.add_relation(Relation::new(name, arity, tuples).unwrap()).unwrap();
    }
    let mut scope = Vec::new();
    let objective = nested_sum(rng, depth, &mut scope);
    let constraint = nested_constraint(rng, depth, &mut scope);
    let program = format!("let Q(a, b) = R(a, b)\nmaximize {objective}\nsubject to {constraint}\n");
    (program, db)
}

fn binder_query(rng: &mut impl Rng, v: &str, scope: &[String]) -> String {
    match (rng.gen_range(0..3), scope.choose(rng)) {
        (0, _) | (_, None) => format!("A({v})"),
        (1, Some(u)) => format!("E({u}, {v})"),
        (_, _) => format!("E({v}, {})", rng.gen_range(0..3)),
    }
}

fn nested_weight(rng: &mut impl Rng, scope: &[String]) -> String {
    let mut targets = Vec::new();
    for t in ["a", "b"] {
        if rng.gen_bool(0.5) {
            let val = scope.choose(rng).cloned().unwrap_or_else(|| rng.gen_range(0..3).to_string());
            targets.push(format!("{t} == {val}"));
        }
    }
    let cond = if targets.is_empty() { "true".to_string() } else { targets.join(" /\\ ") };
    format!("weight[(a, b): {cond}](Q)")
}

fn nested_sum(rng: &mut impl Rng, depth: usize, scope: &mut Vec<String>) -> String {
    let pick = rng.gen_range(0..if depth == 0 { 3 } else { 5 });
    match pick {
        0 => nested_weight(rng, scope),
        1 => match scope.choose(rng) {
            Some(v) => format!("num({v}) * {}", nested_weight(rng, scope)),
            None => format!("2 * {}", nested_weight(rng, scope)),
        },
        2 => format!("{} + {}", nested_weight(rng, scope), nested_weight(rng, scope)),
        3 => format!("({} - {})", nested_sum(rng, depth - 1, scope), nested_sum(rng, depth - 1, scope)),
        _ => {
            let v = format!("v{}", scope.len());
            let query = binder_query(rng, &v, scope);
            scope.push(v.clone());
            let body = nested_sum(rng, depth - 1, scope);
            scope.pop();
            format!("sum{{{v}: {query}}}({body})")
        }
    }
}

fn nested_constraint(rng: &mut impl Rng, depth: usize, scope: &mut Vec<String>) -> String {
    let pick = rng.gen_range(0..if depth == 0 { 1 } else { 3 });
    match pick {
        0 => format!("{} <= {}", nested_sum(rng, depth, scope), rng.gen_range(1..=9)),
        1 => format!(
            "({}) /\\ ({})",
            nested_constraint(rng, depth - 1, scope),
            nested_constraint(rng, depth - 1, scope)
        ),
        _ => {
            let v = format!("v{}", scope.len());
            let query = binder_query(rng, &v, scope);
            scope.push(v.clone());
            let body = nested_constraint(rng, depth - 1, scope);
            scope.pop();
            format!("forall {v}: {query} . ({body})")
        }
    }
}
