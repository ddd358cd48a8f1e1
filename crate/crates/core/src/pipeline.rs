//! Program text to solved LP: normal form, closure, quantifier elimination,
//! interpretation and simplex, with counts and phase timings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use crate::decomp::{attach_target_leaves, compatible_decomposition, DecompError, DecompTree, NodeId};
use crate::interp::{factorized, natural, quantifier_eliminate, replacement, Counts, InterpError, InterpretedLp, QueryLayout};
use crate::lang::{close, normal_form, ClosedProgram, LangError, Program};
use crate::lpcore::{solve_with, LpError, LpSolution, SolverOptions, Status};
use crate::relcore::{Database, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Natural,
    Replacement,
    Factorized,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "natural" => Ok(Mode::Natural),
            "replacement" => Ok(Mode::Replacement),
            "factorized" => Ok(Mode::Factorized),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Natural => "natural",
            Mode::Replacement => "replacement",
            Mode::Factorized => "factorized",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("query `{0}`: {1}")]
    Decomp(String, DecompError),
}

/// Where factorized mode gets its trees.
#[derive(Clone, Debug, Default)]
pub enum Trees {
    /// Min-fill trees with a leaf per target set.
    #[default]
    Heuristic,
    /// User trees, extended by a leaf per target set.
    Given(BTreeMap<String, DecompTree>),
}

#[derive(Clone, Debug, Default)]
pub struct Phases {
    pub evaluate: Duration,
    pub interpret: Duration,
    pub solve: Duration,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub mode: Mode,
    pub status: Status,
    /// Objective of the source program, sign restored for `minimize`.
    pub value: Option<f64>,
    pub counts: Counts,
    pub phases: Phases,
    /// Per weight-bearing query: bag-projection sizes, or the answer count
    /// under node 0 in the natural modes.
    pub bag_sizes: BTreeMap<String, BTreeMap<NodeId, usize>>,
    pub interpreted: InterpretedLp,
    pub solution: LpSolution,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            Some(v) => writeln!(f, "optimal value: {v}")?,
            None => writeln!(f, "status: {:?}", self.status)?,
        }
        let c = &self.counts;
        writeln!(f, "mode: {}", self.mode)?;
        writeln!(
            f,
            "variables: {} (theta {}, xi {}, nu {})",
            c.variables(),
            c.theta,
            c.xi,
            c.nu
        )?;
        writeln!(
            f,
            "constraints: {} (user {}, weight {}, soundness {})",
            c.constraints(),
            c.user,
            c.weight,
            c.soundness
        )?;
        writeln!(
            f,
            "time: evaluate {:.3}s, interpret {:.3}s, solve {:.3}s",
            self.phases.evaluate.as_secs_f64(),
            self.phases.interpret.as_secs_f64(),
            self.phases.solve.as_secs_f64()
        )?;
        for (q, sizes) in &self.bag_sizes {
            let parts: Vec<String> = sizes.iter().map(|(u, n)| format!("n{u}={n}")).collect();
            writeln!(f, "query {q}: {}", parts.join(" "))?;
        }
        Ok(())
    }
}

/// Normal form, closure and quantifier elimination.
pub fn prepare(p: &Program, db: &Database) -> Result<ClosedProgram, LangError> {
    Ok(quantifier_eliminate(&close(&normal_form(p), db)?))
}

/// Target variable sets of each weight-bearing query.
pub fn target_sets(cp: &ClosedProgram) -> BTreeMap<String, Vec<BTreeSet<Var>>> {
    let mut out: BTreeMap<String, Vec<BTreeSet<Var>>> = cp.queries.keys().map(|k| (k.clone(), Vec::new())).collect();
    for w in cp.weights() {
        let set: BTreeSet<Var> = w.target_vars().into_iter().collect();
        let list = out.get_mut(&w.query).expect("weights name known queries");
        if !list.contains(&set) {
            list.push(set);
        }
    }
    out
}

/// Min-fill trees compatible with every weight of each query.
pub fn heuristic_trees(cp: &ClosedProgram) -> Result<BTreeMap<String, DecompTree>, PipelineError> {
    target_sets(cp)
        .into_iter()
        .map(|(name, targets)| {
            let t = compatible_decomposition(&cp.queries[&name], &targets)
                .map_err(|e| PipelineError::Decomp(name.clone(), e))?;
            Ok((name, t))
        })
        .collect()
}

/// Extends each given tree with a leaf per weight target set. The result is
/// not normalized: normalization adds a chain of near-full projections per
/// edge, which costs far more variables than it saves.
pub fn extend_trees(
    cp: &ClosedProgram,
    given: &BTreeMap<String, DecompTree>,
) -> Result<BTreeMap<String, DecompTree>, PipelineError> {
    let targets = target_sets(cp);
    given
        .iter()
        .map(|(name, t)| {
            let sets = targets.get(name).map(Vec::as_slice).unwrap_or_default();
            let extended = attach_target_leaves(t, sets).map_err(|e| PipelineError::Decomp(name.clone(), e))?;
            Ok((name.clone(), extended))
        })
        .collect()
}

/// Interprets a closed, quantifier-free program.
pub fn interpret(cp: &ClosedProgram, db: &Database, mode: Mode, trees: &Trees) -> Result<InterpretedLp, PipelineError> {
    Ok(match mode {
        Mode::Natural => natural(cp, db)?,
        Mode::Replacement => replacement(cp, db)?,
        Mode::Factorized => match trees {
            Trees::Given(t) => factorized(cp, &extend_trees(cp, t)?, db)?,
            Trees::Heuristic => factorized(cp, &heuristic_trees(cp)?, db)?,
        },
    })
}

/// Solves an interpretation and assembles the report.
pub fn solve_interpreted(
    interpreted: InterpretedLp,
    mode: Mode,
    mut phases: Phases,
    opts: &SolverOptions,
) -> Result<RunReport, PipelineError> {
    let t = Instant::now();
    let solution = solve_with(&interpreted.lp, opts)?;
    phases.solve = t.elapsed();
    let bag_sizes = interpreted
        .layouts
        .iter()
        .map(|(q, layout)| {
            let sizes = match layout {
                QueryLayout::Natural { answers } => BTreeMap::from([(0, answers.len())]),
                QueryLayout::Factorized { projections, .. } => {
                    projections.iter().map(|(&u, p)| (u, p.len())).collect()
                }
            };
            (q.clone(), sizes)
        })
        .collect();
    Ok(RunReport {
        mode,
        status: solution.status,
        value: solution.is_optimal().then(|| interpreted.reported_value(solution.value)),
        counts: interpreted.counts(),
        phases,
        bag_sizes,
        interpreted,
        solution,
    })
}

/// The whole pipeline on a parsed program.
pub fn run(p: &Program, db: &Database, mode: Mode, trees: &Trees, opts: &SolverOptions) -> Result<RunReport, PipelineError> {
    let mut phases = Phases::default();
    let t = Instant::now();
    let cp = prepare(p, db)?;
    phases.evaluate = t.elapsed();
    let t = Instant::now();
    let interpreted = interpret(&cp, db, mode, trees)?;
    phases.interpret = t.elapsed();
    solve_interpreted(interpreted, mode, phases, opts)
}
