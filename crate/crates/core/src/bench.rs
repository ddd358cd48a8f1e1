//! Natural against factorized interpretation on generated delivery data.

use std::fmt::Write;
use std::time::Duration;

use crate::decomp::{trees_from_json, DecompError, DecompTree};
use crate::lang::parse_program;
use crate::lpcore::{SolverOptions, REPORT_TOL};
use crate::pipeline::{run, Mode, PipelineError, RunReport, Trees};
use crate::synth::{delivery_database, GenError, GenSpec, DELIVERY_BENCH_PROGRAM, DELIVERY_SPLIT_TREE};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub variables: usize,
    pub constraints: usize,
    /// Evaluation plus interpretation.
    pub build: Duration,
    pub solve: Duration,
    pub value: Option<f64>,
}

impl From<&RunReport> for RunSummary {
    fn from(r: &RunReport) -> RunSummary {
        RunSummary {
            variables: r.counts.variables(),
            constraints: r.counts.constraints(),
            build: r.phases.evaluate + r.phases.interpret,
            solve: r.phases.solve,
            value: r.value,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub m: usize,
    pub rep: usize,
    pub seed: u64,
    pub natural: RunSummary,
    pub factorized: RunSummary,
}

impl BenchRow {
    /// Both optimal and `|a − b| ≤ tol·max(1, |a|)`.
    pub fn agrees(&self, tol: f64) -> bool {
        match (self.natural.value, self.factorized.value) {
            (Some(a), Some(b)) => (a - b).abs() <= tol * a.abs().max(1.0),
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub reps: usize,
    pub rho: f64,
    pub tree: DecompTree,
    pub solver: SolverOptions,
}

impl BenchConfig {
    pub fn new(sizes: Vec<usize>, seed: u64, reps: usize) -> BenchConfig {
        BenchConfig {
            sizes,
            seed,
            reps,
            rho: 0.01,
            tree: default_tree(),
            solver: SolverOptions::default(),
        }
    }
}

pub fn default_tree() -> DecompTree {
    trees_from_json(DELIVERY_SPLIT_TREE)
        .and_then(|t| t[0].to_tree())
        .expect("shipped tree is valid")
}

/// One instance: repetition `rep` uses seed `seed + rep`.
pub fn bench_instance(cfg: &BenchConfig, m: usize, rep: usize) -> Result<BenchRow, BenchError> {
    let seed = cfg.seed + rep as u64;
    let db = delivery_database(&GenSpec { m, seed, rho: cfg.rho })?;
    let program = parse_program(DELIVERY_BENCH_PROGRAM).expect("shipped program parses");
    let natural = run(&program, &db, Mode::Natural, &Trees::Heuristic, &cfg.solver)?;
    let trees = Trees::Given([("dlr".to_string(), cfg.tree.clone())].into());
    let factorized = run(&program, &db, Mode::Factorized, &trees, &cfg.solver)?;
    Ok(BenchRow {
        m,
        rep,
        seed,
        natural: (&natural).into(),
        factorized: (&factorized).into(),
    })
}

/// Rows ordered by `(size, rep)`.
pub fn bench_delivery(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &m in &cfg.sizes {
        for rep in 0..cfg.reps {
            rows.push(bench_instance(cfg, m, rep)?);
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "m,rep,seed,natural_vars,factorized_vars,natural_constraints,factorized_constraints,\
natural_build_s,factorized_build_s,natural_solve_s,factorized_solve_s,natural_opt,factorized_opt,agree";

pub fn bench_csv(rows: &[BenchRow], tol: f64) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        let (n, f) = (&r.natural, &r.factorized);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            r.m,
            r.rep,
            r.seed,
            n.variables,
            f.variables,
            n.constraints,
            f.constraints,
            n.build.as_secs_f64(),
            f.build.as_secs_f64(),
            n.solve.as_secs_f64(),
            f.solve.as_secs_f64(),
            opt(n.value),
            opt(f.value),
            r.agrees(tol)
        )
        .unwrap();
    }
    out
}

/// Reporting tolerance, overridable through `LPCQ_TOL`.
pub fn report_tol() -> f64 {
    std::env::var("LPCQ_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(REPORT_TOL)
}
