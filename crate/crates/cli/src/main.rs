//! `lpcq`: solve, generate, benchmark and inspect programs over conjunctive queries.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lpcq_core::bench::{bench_csv, bench_delivery, report_tol, BenchConfig};
use lpcq_core::cq::ConjQuery;
use lpcq_core::decomp::{compatible_decomposition, fractional_bag_width, read_tree_file, DecompTree};
use lpcq_core::lang::{parse_program, Program};
use lpcq_core::lpcore::{export_lp, Backend, SolverOptions, Status};
use lpcq_core::pipeline::{self, Mode, Trees};
use lpcq_core::relcore::{load_database, save_database};
use lpcq_core::synth::{delivery_database, GenSpec};
use lpcq_core::weighting::solution_to_weights;

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_UNBOUNDED: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "lpcq", version, about = "Linear programs over conjunctive-query answers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a program over a directory of CSV relations.
    Solve(SolveArgs),
    /// Write a synthetic delivery database.
    Gen(GenArgs),
    /// Compare natural and factorized interpretations on delivery data.
    Bench(BenchArgs),
    /// Print fractional widths of each bag.
    Width(TreeArgs),
    /// Validate decompositions against a program's queries.
    CheckDecomp(TreeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Natural,
    Replacement,
    Factorized,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Natural => Mode::Natural,
            ModeArg::Replacement => Mode::Replacement,
            ModeArg::Factorized => Mode::Factorized,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Dense,
    Sparse,
}

#[derive(Args)]
struct SolveArgs {
    program: PathBuf,
    /// Directory holding one `<Relation>.csv` per relation.
    db: PathBuf,
    #[arg(long, value_enum, default_value = "natural")]
    mode: ModeArg,
    /// JSON decomposition trees, one per weighted query.
    #[arg(long, conflicts_with = "heuristic_decomp")]
    decomp: Option<PathBuf>,
    /// Build min-fill decompositions instead of reading them.
    #[arg(long)]
    heuristic_decomp: bool,
    /// Write the interpreted LP in CPLEX LP format.
    #[arg(long)]
    emit_lp: Option<PathBuf>,
    /// Write one `<query>.csv` of answer weights per weighted query.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Print every LP row with the construct it came from.
    #[arg(long)]
    explain: bool,
    #[arg(long, value_enum, default_value = "auto")]
    backend: BackendArg,
}

#[derive(Args)]
struct GenArgs {
    /// Tuples per table.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fraction of all possible tuples each table holds.
    #[arg(long, default_value_t = 0.01)]
    rho: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated table sizes.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0.01)]
    rho: f64,
    /// Tree for the delivery query; defaults to the shipped one.
    #[arg(long)]
    decomp: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TreeArgs {
    program: PathBuf,
    #[arg(long, conflicts_with = "heuristic_decomp")]
    decomp: Option<PathBuf>,
    #[arg(long)]
    heuristic_decomp: bool,
}

/// Stdout writes; a closed pipe (`lpcq solve .. | head`) ends the process quietly.
fn emit(args: std::fmt::Arguments) {
    if let Err(e) = io::stdout().write_fmt(args) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("writing to stdout: {e}");
    }
}

macro_rules! out {
    ($($t:tt)*) => { emit(format_args!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { emit(format_args!("{}\n", format_args!($($t)*))) };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Gen(a) => gen(a).map(|_| ExitCode::SUCCESS),
        Command::Bench(a) => bench(a),
        Command::Width(a) => width(a).map(|_| ExitCode::SUCCESS),
        Command::CheckDecomp(a) => check_decomp(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_INPUT)
    })
}

fn read_program(path: &Path) -> Result<Program> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&text).map_err(|e| anyhow!("{}:{e}", path.display()))
}

fn read_trees(path: &Path) -> Result<BTreeMap<String, DecompTree>> {
    read_tree_file(path)?
        .into_iter()
        .map(|f| Ok((f.query.clone(), f.to_tree().with_context(|| format!("tree for {}", f.query))?)))
        .collect()
}

fn qf_body(p: &Program, name: &str) -> Result<ConjQuery> {
    let def = p.queries.get(name).ok_or_else(|| anyhow!("no query named `{name}` in the program"))?;
    Ok(def.body.qf())
}

/// Within `tol` of an integer prints as that integer.
fn show(v: f64, tol: f64) -> String {
    if (v - v.round()).abs() <= tol {
        format!("{}", v.round())
    } else {
        format!("{v}")
    }
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let program = read_program(&a.program)?;
    let db = load_database(&a.db)?;
    let mode = Mode::from(a.mode);
    let trees = match (&a.decomp, a.heuristic_decomp) {
        (Some(path), _) => Trees::Given(read_trees(path)?),
        (None, true) => Trees::Heuristic,
        (None, false) if matches!(mode, Mode::Factorized) => {
            bail!("factorized mode needs --decomp or --heuristic-decomp")
        }
        (None, false) => Trees::Heuristic,
    };
    let solver = SolverOptions {
        backend: match a.backend {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Dense => Backend::Dense,
            BackendArg::Sparse => Backend::Sparse,
        },
        ..SolverOptions::default()
    };
    let report = pipeline::run(&program, &db, mode, &trees, &solver)?;
    let tol = report_tol();
    if let Some(path) = &a.emit_lp {
        export_lp(&report.interpreted.lp, path)?;
    }
    if let Some(dir) = &a.weights {
        if report.status == Status::Optimal {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for q in report.interpreted.layouts.keys() {
                let w = solution_to_weights(&report.interpreted, &report.solution, q)?;
                let path = dir.join(format!("{q}.csv"));
                let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                w.write_csv(file)?;
            }
        }
    }
    if a.explain {
        let lp = &report.interpreted.lp;
        // Minimization is stored as maximizing the negated objective.
        outln!("maximize {}", lp.objective);
        for (c, origin) in lp.constraints.iter().zip(&report.interpreted.origins) {
            outln!("{origin}: {c}");
        }
    }
    match report.value {
        Some(v) => outln!("optimal value: {}", show(v, tol)),
        None => outln!("status: {}", status_word(report.status)),
    }
    let mut body = report.to_string();
    body = body.lines().skip(1).map(|l| format!("{l}\n")).collect();
    out!("{body}");
    Ok(match report.status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
        Status::Unbounded => ExitCode::from(EXIT_UNBOUNDED),
    })
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Unbounded => "unbounded",
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let db = delivery_database(&GenSpec {
        m: a.m,
        seed: a.seed,
        rho: a.rho,
    })?;
    save_database(&db, &a.out)?;
    Ok(())
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    let mut cfg = BenchConfig::new(a.sizes, a.seed, a.reps);
    cfg.rho = a.rho;
    if let Some(path) = &a.decomp {
        cfg.tree = read_trees(path)?
            .remove("dlr")
            .ok_or_else(|| anyhow!("{} has no tree for `dlr`", path.display()))?;
    }
    let tol = report_tol();
    let rows = bench_delivery(&cfg)?;
    let csv = bench_csv(&rows, tol);
    match &a.out {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => out!("{csv}"),
    }
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.agrees(tol))
        .map(|r| format!("m={} rep={}", r.m, r.rep))
        .collect();
    if bad.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("optima differ: {}", bad.join(", "));
        Ok(ExitCode::from(EXIT_INFEASIBLE))
    }
}

fn trees_for(a: &TreeArgs, p: &Program) -> Result<BTreeMap<String, DecompTree>> {
    match (&a.decomp, a.heuristic_decomp) {
        (Some(path), _) => read_trees(path),
        (None, true) => {
            let targets = p.weight_targets();
            p.queries
                .keys()
                .map(|name| {
                    let sets = targets.get(name).cloned().unwrap_or_default();
                    Ok((name.clone(), compatible_decomposition(&qf_body(p, name)?, &sets)?))
                })
                .collect()
        }
        (None, false) => bail!("pass --decomp or --heuristic-decomp"),
    }
}

fn width(a: TreeArgs) -> Result<()> {
    let p = read_program(&a.program)?;
    for (name, tree) in trees_for(&a, &p)? {
        let q = qf_body(&p, &name)?;
        let mut worst = 0.0f64;
        let mut lines = Vec::new();
        for u in tree.nodes() {
            let w = fractional_bag_width(tree.bag(u), &q)?;
            worst = worst.max(w);
            let bag: Vec<&str> = tree.bag(u).iter().map(|v| v.name()).collect();
            lines.push(format!("  n{u} {{{}}}: {}", bag.join(", "), show(w, 1e-9)));
        }
        outln!("query {name}: width {}", show(worst, 1e-9));
        for l in lines {
            outln!("{l}");
        }
    }
    Ok(())
}

fn check_decomp(a: TreeArgs) -> Result<ExitCode> {
    let p = read_program(&a.program)?;
    let targets = p.weight_targets();
    let mut ok = true;
    for (name, tree) in trees_for(&a, &p)? {
        let q = qf_body(&p, &name)?;
        match tree.validate(&q) {
            Ok(()) => outln!("query {name}: valid, {} nodes", tree.len()),
            Err(e) => {
                outln!("query {name}: invalid: {e}");
                ok = false;
                continue;
            }
        }
        outln!("  normalized: {}", if tree.is_normalized() { "yes" } else { "no" });
        for set in targets.get(&name).into_iter().flatten() {
            let vars: Vec<&str> = set.iter().map(|v| v.name()).collect();
            let exact = tree.nodes().find(|&u| tree.bag(u) == set);
            let host = tree.nodes().find(|&u| set.is_subset(tree.bag(u)));
            match (exact, host) {
                (Some(u), _) => outln!("  target {{{}}}: bag n{u}", vars.join(", ")),
                (None, Some(u)) => outln!("  target {{{}}}: inside n{u}, a leaf will be added", vars.join(", ")),
                (None, None) => {
                    outln!("  target {{{}}}: in no bag", vars.join(", "));
                    ok = false;
                }
            }
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_INPUT) })
}
