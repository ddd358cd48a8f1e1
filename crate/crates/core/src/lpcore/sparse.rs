//! Large programs go to `microlp`, a sparse revised simplex with bounded
//! variables. It reports no duals.

use std::collections::BTreeMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{LinearProgram, LpError, LpSolution, Relation, Sense, Status};

pub(crate) fn solve_sparse(lp: &LinearProgram, feas_tol: f64) -> Result<LpSolution, LpError> {
    let names: Vec<&str> = lp.variables().into_iter().collect();
    let direction = match lp.sense {
        Sense::Maximize => OptimizationDirection::Maximize,
        Sense::Minimize => OptimizationDirection::Minimize,
    };
    let mut problem = Problem::new(direction);
    let vars: BTreeMap<&str, microlp::Variable> = names
        .iter()
        .map(|&n| (n, problem.add_var(lp.objective.coef(n), (0.0, f64::INFINITY))))
        .collect();
    for c in &lp.constraints {
        let (row, rel, b) = c.canonical();
        let terms: Vec<(microlp::Variable, f64)> = row.terms().iter().map(|(n, &a)| (vars[n.as_str()], a)).collect();
        let op = match rel {
            Relation::Le => ComparisonOp::Le,
            Relation::Eq => ComparisonOp::Eq,
        };
        problem.add_constraint(terms.as_slice(), op, b);
    }
    let flip = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let done = |status, value| LpSolution {
        status,
        value,
        assignment: BTreeMap::new(),
        duals: Vec::new(),
        iterations: 0,
    };
    let solution = match problem.solve() {
        Ok(outcome) => outcome
            .into_solution()
            .map_err(|e| LpError::NumericalFailure(format!("sparse solve interrupted: {:?}", e.termination_reason())))?,
        Err(microlp::Error::Infeasible) => return Ok(done(Status::Infeasible, f64::NAN)),
        Err(microlp::Error::Unbounded) => return Ok(done(Status::Unbounded, f64::INFINITY * flip)),
        Err(e) => return Err(LpError::NumericalFailure(e.to_string())),
    };
    let assignment: BTreeMap<String, f64> = names
        .iter()
        .map(|&n| (n.to_string(), solution.var_value(vars[n]).max(0.0)))
        .collect();
    let scale = 1.0 + lp.constraints.iter().fold(0.0f64, |a, c| a.max(c.canonical().2.abs()));
    for (i, c) in lp.constraints.iter().enumerate() {
        if !c.holds(&assignment, feas_tol * 10.0 * scale)? {
            return Err(LpError::NumericalFailure(format!(
                "row {i} violated by {} after sparse solve",
                -c.slack(&assignment)?
            )));
        }
    }
    Ok(LpSolution {
        status: Status::Optimal,
        value: lp.objective.eval(&assignment)?,
        assignment,
        duals: Vec::new(),
        iterations: solution.stats().lp_iterations as usize,
    })
}
