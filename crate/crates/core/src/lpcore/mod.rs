//! Concrete linear programs over nonnegative variables, a simplex solver, and
//! CPLEX LP text export.

mod lpformat;
mod simplex;
mod sparse;

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Sub};

pub use lpformat::{export_lp, parse_lp, write_lp, LpExport};
pub use simplex::{solve, solve_with, Backend, SolverOptions, DENSE_LIMIT};

/// Feasibility and optimality tolerance used by the solver.
pub const FEAS_TOL: f64 = 1e-7;
/// Smallest magnitude accepted as a pivot.
pub const PIVOT_TOL: f64 = 1e-9;
/// Tolerance for reported equalities between optima.
pub const REPORT_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("variable {0} has no value")]
    UnboundVariable(String),
    #[error("simplex gave up: {0}")]
    NumericalFailure(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("LP text line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// `constant + Σ coef·var`, never storing a zero coefficient.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinSum {
    constant: f64,
    terms: BTreeMap<String, f64>,
}

impl LinSum {
    pub fn zero() -> LinSum {
        LinSum::default()
    }

    pub fn constant(c: f64) -> LinSum {
        LinSum {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn var(name: impl Into<String>) -> LinSum {
        LinSum::term(name, 1.0)
    }

    pub fn term(name: impl Into<String>, coef: f64) -> LinSum {
        let mut s = LinSum::zero();
        s.add_term(name, coef);
        s
    }

    pub fn add_term(&mut self, name: impl Into<String>, coef: f64) {
        match self.terms.entry(name.into()) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if coef != 0.0 {
                    e.insert(coef);
                }
            }
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_scaled(&mut self, other: &LinSum, k: f64) {
        self.constant += k * other.constant;
        for (name, c) in &other.terms {
            self.add_term(name.clone(), k * c);
        }
    }

    pub fn scaled(&self, k: f64) -> LinSum {
        let mut out = LinSum::zero();
        out.add_scaled(self, k);
        out
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &BTreeMap<String, f64> {
        &self.terms
    }

    pub fn coef(&self, name: &str) -> f64 {
        self.terms.get(name).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, w: &BTreeMap<String, f64>) -> Result<f64, LpError> {
        let mut total = self.constant;
        for (name, c) in &self.terms {
            let v = w
                .get(name)
                .ok_or_else(|| LpError::UnboundVariable(name.clone()))?;
            total += c * v;
        }
        Ok(total)
    }
}

impl Add for LinSum {
    type Output = LinSum;
    fn add(mut self, rhs: LinSum) -> LinSum {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Sub for LinSum {
    type Output = LinSum;
    fn sub(mut self, rhs: LinSum) -> LinSum {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Mul<LinSum> for f64 {
    type Output = LinSum;
    fn mul(self, rhs: LinSum) -> LinSum {
        rhs.scaled(self)
    }
}

impl fmt::Display for LinSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, c) in &self.terms {
            if first {
                if *c == -1.0 {
                    f.write_str("-")?;
                } else if *c != 1.0 {
                    write!(f, "{c} ")?;
                }
            } else if *c < 0.0 {
                if *c == -1.0 {
                    f.write_str(" - ")?;
                } else {
                    write!(f, " - {} ", -c)?;
                }
            } else if *c == 1.0 {
                f.write_str(" + ")?;
            } else {
                write!(f, " + {c} ")?;
            }
            f.write_str(name)?;
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant > 0.0 {
            write!(f, " + {}", self.constant)
        } else if self.constant < 0.0 {
            write!(f, " - {}", -self.constant)
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinConstraint {
    pub lhs: LinSum,
    pub relation: Relation,
    pub rhs: LinSum,
}

impl LinConstraint {
    pub fn le(lhs: LinSum, rhs: LinSum) -> LinConstraint {
        LinConstraint {
            lhs,
            relation: Relation::Le,
            rhs,
        }
    }

    pub fn eq(lhs: LinSum, rhs: LinSum) -> LinConstraint {
        LinConstraint {
            lhs,
            relation: Relation::Eq,
            rhs,
        }
    }

    /// `(Σ a·x, rel, b)` with all variables moved left and constants right.
    pub fn canonical(&self) -> (LinSum, Relation, f64) {
        let mut row = self.lhs.clone() - self.rhs.clone();
        let b = -row.constant;
        row.constant = 0.0;
        (row, self.relation, b)
    }

    pub fn slack(&self, w: &BTreeMap<String, f64>) -> Result<f64, LpError> {
        Ok(self.rhs.eval(w)? - self.lhs.eval(w)?)
    }

    pub fn holds(&self, w: &BTreeMap<String, f64>, tol: f64) -> Result<bool, LpError> {
        let s = self.slack(w)?;
        let scale = 1.0 + self.lhs.constant.abs().max(self.rhs.constant.abs());
        Ok(match self.relation {
            Relation::Le => s >= -tol * scale,
            Relation::Eq => s.abs() <= tol * scale,
        })
    }
}

impl fmt::Display for LinConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: LinSum,
    pub constraints: Vec<LinConstraint>,
}

impl LinearProgram {
    pub fn maximize(objective: LinSum) -> LinearProgram {
        LinearProgram {
            sense: Sense::Maximize,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn minimize(objective: LinSum) -> LinearProgram {
        LinearProgram {
            sense: Sense::Minimize,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn subject_to(mut self, c: LinConstraint) -> LinearProgram {
        self.constraints.push(c);
        self
    }

    /// The variable universe: every name in the objective or a constraint.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.objective.terms.keys().map(String::as_str).collect();
        for c in &self.constraints {
            out.extend(c.lhs.terms.keys().map(String::as_str));
            out.extend(c.rhs.terms.keys().map(String::as_str));
        }
        out
    }

    pub fn is_feasible(&self, w: &BTreeMap<String, f64>, tol: f64) -> Result<bool, LpError> {
        if w.values().any(|v| *v < -tol) {
            return Ok(false);
        }
        for c in &self.constraints {
            if !c.holds(w, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sense = match self.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        writeln!(f, "{sense} {}", self.objective)?;
        f.write_str("subject to")?;
        if self.constraints.is_empty() {
            f.write_str(" true")?;
        }
        for c in &self.constraints {
            write!(f, "\n  {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    /// Objective value in the program's own sense; meaningful when optimal.
    pub value: f64,
    pub assignment: BTreeMap<String, f64>,
    /// One multiplier per constraint, for the maximization form; empty unless optimal.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn eval_examples() {
        let s = LinSum::constant(2.0) + LinSum::term("xi", 3.0);
        assert_eq!(s.eval(&w(&[("xi", 1.0)])).unwrap(), 5.0);
        assert_eq!(LinSum::constant(7.0).eval(&w(&[])).unwrap(), 7.0);
        let t = LinSum::var("a") + LinSum::var("b");
        assert_eq!(t.eval(&w(&[("a", 0.5), ("b", 0.5)])).unwrap(), 1.0);
        assert!(matches!(t.eval(&w(&[("a", 1.0)])), Err(LpError::UnboundVariable(_))));
    }

    #[test]
    fn zero_terms_dropped() {
        let s = LinSum::var("a") - LinSum::var("a");
        assert!(s.terms().is_empty());
        let t = 0.0 * LinSum::var("b");
        assert!(t.terms().is_empty());
    }

    #[test]
    fn canonical_moves_constants() {
        let c = LinConstraint::le(LinSum::var("x") + LinSum::constant(1.0), LinSum::var("y") + LinSum::constant(4.0));
        let (row, rel, b) = c.canonical();
        assert_eq!(row.coef("x"), 1.0);
        assert_eq!(row.coef("y"), -1.0);
        assert_eq!(rel, Relation::Le);
        assert_eq!(b, 3.0);
    }
}
