//! Dense two-phase primal simplex over `x ≥ 0`.
//!
//! Dantzig pricing, switching to Bland's rule after `2·(m+n)` consecutive
//! degenerate pivots until a pivot makes progress again.

use std::collections::BTreeMap;

use super::sparse::solve_sparse;
use super::{LinearProgram, LpError, LpSolution, Relation, Sense, Status, FEAS_TOL, PIVOT_TOL};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub pivot_tol: f64,
    /// Pivot budget; `None` picks `50·(m+n) + 1000`.
    pub max_pivots: Option<usize>,
    pub backend: Backend,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    /// Dense tableau up to [`DENSE_LIMIT`] cells, sparse beyond.
    #[default]
    Auto,
    Dense,
    Sparse,
}

/// Rows times columns above which `Auto` leaves the dense tableau.
pub const DENSE_LIMIT: usize = 4_000_000;

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: FEAS_TOL,
            pivot_tol: PIVOT_TOL,
            max_pivots: None,
            backend: Backend::Auto,
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with(lp, &SolverOptions::default())
}

#[derive(Clone, Copy, PartialEq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Reduced costs `c_j − z_j` for phase 1 and phase 2, kept in step.
    d1: Vec<f64>,
    d2: Vec<f64>,
    z1: f64,
    pivots: usize,
    degenerate_run: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        let inv = 1.0 / p;
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        self.rows[r][c] = 1.0;
        self.rhs[r] *= inv;
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r];
        let nz: Vec<usize> = (0..prow.len()).filter(|&j| prow[j] != 0.0).collect();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.rows[i];
            for &j in &nz {
                row[j] -= f * prow[j];
            }
            row[c] = 0.0;
            self.rhs[i] -= f * prhs;
            if self.rhs[i] < 0.0 && self.rhs[i] > -1e-11 {
                self.rhs[i] = 0.0;
            }
        }
        for (d, z) in [(&mut self.d1, Some(&mut self.z1)), (&mut self.d2, None)] {
            let f = d[c];
            if f != 0.0 {
                for &j in &nz {
                    d[j] -= f * prow[j];
                }
                d[c] = 0.0;
                if let Some(z) = z {
                    *z += f * prhs;
                }
            }
        }
        self.rows[r] = prow;
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn run(&mut self, phase_one: bool, opts: &SolverOptions, budget: usize) -> Result<Outcome, LpError> {
        let m = self.rows.len();
        let ncols = self.kinds.len();
        let bland_after = 2 * (m + ncols);
        loop {
            if self.pivots > budget {
                return Err(LpError::NumericalFailure(format!(
                    "pivot budget {budget} exhausted"
                )));
            }
            let d = if phase_one { &self.d1 } else { &self.d2 };
            let bland = self.degenerate_run > bland_after;
            let allowed = |j: usize| self.kinds[j] != ColKind::Artificial;
            let mut enter = None;
            let mut best = opts.feas_tol;
            for (j, &dj) in d.iter().enumerate() {
                if dj > best && allowed(j) {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = dj;
                }
            }
            let Some(c) = enter else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.rows[i][c];
                if a <= opts.pivot_tol {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[k]
                            } else {
                                a > self.rows[k][c]
                            }
                        } else {
                            ratio < best
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            if ratio <= 1e-12 {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(r, c);
        }
    }
}

pub fn solve_with(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    let cells = lp.constraints.len().saturating_mul(lp.variables().len() + lp.constraints.len());
    match opts.backend {
        Backend::Sparse => solve_sparse(lp, opts.feas_tol),
        Backend::Auto if cells > DENSE_LIMIT => solve_sparse(lp, opts.feas_tol),
        _ => solve_dense(lp, opts),
    }
}

fn solve_dense(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    let names: Vec<String> = lp.variables().into_iter().map(str::to_string).collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let n = names.len();
    let m = lp.constraints.len();

    // Row i: σ_i·(a_i x) (rel) σ_i·b_i with σ_i chosen so the right side is ≥ 0.
    let mut kinds = vec![ColKind::Structural; n];
    let mut signs = Vec::with_capacity(m);
    let mut unit_col = Vec::with_capacity(m);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut extra: Vec<(usize, f64)> = Vec::new();
    let mut basis = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let (row, rel, b) = c.canonical();
        let sigma = if b < 0.0 { -1.0 } else { 1.0 };
        let mut dense = vec![0.0; n];
        for (name, coef) in row.terms() {
            dense[index[name.as_str()]] = sigma * coef;
        }
        rows.push(dense);
        rhs.push(sigma * b);
        signs.push(sigma);
        if rel == Relation::Le {
            let col = kinds.len();
            kinds.push(ColKind::Slack);
            extra.push((i, sigma));
            if sigma > 0.0 {
                basis.push(col);
                unit_col.push(col);
                continue;
            }
        }
        let col = kinds.len();
        kinds.push(ColKind::Artificial);
        extra.push((i, 1.0));
        basis.push(col);
        unit_col.push(col);
    }
    let ncols = kinds.len();
    for row in rows.iter_mut() {
        row.resize(ncols, 0.0);
    }
    for (k, &(i, v)) in extra.iter().enumerate() {
        rows[i][n + k] = v;
    }

    let flip = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut cost2 = vec![0.0; ncols];
    for (name, coef) in lp.objective.terms() {
        cost2[index[name.as_str()]] = flip * coef;
    }
    let cost1: Vec<f64> = kinds
        .iter()
        .map(|k| if *k == ColKind::Artificial { -1.0 } else { 0.0 })
        .collect();
    let reduced = |cost: &[f64]| -> (Vec<f64>, f64) {
        let mut d = cost.to_vec();
        let mut z = 0.0;
        for (i, &b) in basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (j, a) in rows[i].iter().enumerate() {
                    d[j] -= cb * a;
                }
                z += cb * rhs[i];
            }
        }
        (d, z)
    };
    let (d1, z1) = reduced(&cost1);
    let (d2, _) = reduced(&cost2);
    let mut t = Tableau {
        rows,
        rhs,
        basis,
        kinds,
        d1,
        d2,
        z1,
        pivots: 0,
        degenerate_run: 0,
    };
    let budget = opts.max_pivots.unwrap_or(50 * (m + ncols) + 1000);

    let scale = 1.0 + t.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let infeasible = || LpSolution {
        status: Status::Infeasible,
        value: f64::NAN,
        assignment: BTreeMap::new(),
        duals: Vec::new(),
        iterations: 0,
    };
    if t.kinds.contains(&ColKind::Artificial) {
        // Phase 1 maximizes −Σ artificials; artificials never re-enter.
        t.run(true, opts, budget)?;
        let residual: f64 = (0..m)
            .filter(|&i| t.kinds[t.basis[i]] == ColKind::Artificial)
            .map(|i| t.rhs[i])
            .sum();
        if residual > opts.feas_tol * scale {
            return Ok(LpSolution {
                iterations: t.pivots,
                ..infeasible()
            });
        }
        for i in 0..m {
            if t.kinds[t.basis[i]] != ColKind::Artificial {
                continue;
            }
            let pick = (0..ncols)
                .filter(|&j| t.kinds[j] != ColKind::Artificial)
                .filter(|&j| t.rows[i][j].abs() > opts.pivot_tol)
                .max_by(|&a, &b| t.rows[i][a].abs().total_cmp(&t.rows[i][b].abs()));
            if let Some(j) = pick {
                t.rhs[i] = 0.0;
                t.pivot(i, j);
            }
        }
    }
    t.degenerate_run = 0;
    let outcome = t.run(false, opts, budget)?;
    if let Outcome::Unbounded = outcome {
        return Ok(LpSolution {
            status: Status::Unbounded,
            value: f64::INFINITY * flip,
            assignment: BTreeMap::new(),
            duals: Vec::new(),
            iterations: t.pivots,
        });
    }

    let mut x = vec![0.0; ncols];
    for (i, &b) in t.basis.iter().enumerate() {
        x[b] = t.rhs[i].max(0.0);
    }
    let assignment: BTreeMap<String, f64> = names.iter().cloned().zip(x.iter().copied()).collect();
    let duals = (0..m).map(|i| -signs[i] * t.d2[unit_col[i]]).collect();
    let value = lp.objective.eval(&assignment)?;
    let tol = opts.feas_tol * 10.0;
    for (i, c) in lp.constraints.iter().enumerate() {
        if !c.holds(&assignment, tol * scale)? {
            return Err(LpError::NumericalFailure(format!(
                "row {i} violated by {} after pivoting",
                -c.slack(&assignment)?
            )));
        }
    }
    Ok(LpSolution {
        status: Status::Optimal,
        value,
        assignment,
        duals,
        iterations: t.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{LinConstraint, LinSum};
    use super::*;

    fn var(n: &str) -> LinSum {
        LinSum::var(n)
    }
    fn k(c: f64) -> LinSum {
        LinSum::constant(c)
    }

    #[test]
    fn worked_example_natural_lp() {
        let th = |a: &str| var(&format!("th_{a}"));
        let lp = LinearProgram::maximize(th("00") + th("01") + th("10") + th("11"))
            .subject_to(LinConstraint::le(th("00") + th("01"), k(1.0)))
            .subject_to(LinConstraint::le(th("10") + th("11"), k(1.0)));
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_and_infeasible() {
        let s = solve(&LinearProgram::maximize(var("xi"))).unwrap();
        assert_eq!(s.status, Status::Unbounded);
        let lp = LinearProgram::maximize(k(0.0)).subject_to(LinConstraint::le(var("xi"), k(-1.0)));
        assert_eq!(solve(&lp).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn minimize_and_equalities() {
        // min x + 2y s.t. x + y = 3, y ≥ 1 (as −y ≤ −1)
        let lp = LinearProgram::minimize(var("x") + 2.0 * var("y"))
            .subject_to(LinConstraint::eq(var("x") + var("y"), k(3.0)))
            .subject_to(LinConstraint::le(k(1.0), var("y")));
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.value - 4.0).abs() < 1e-9);
        assert!((s.assignment["y"] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let lp = LinearProgram::maximize(var("x"))
            .subject_to(LinConstraint::eq(var("x") + var("y"), k(2.0)))
            .subject_to(LinConstraint::eq(2.0 * var("x") + 2.0 * var("y"), k(4.0)))
            .subject_to(LinConstraint::le(var("x"), k(1.5)));
        let s = solve(&lp).unwrap();
        assert!((s.value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn constant_rows() {
        let ok = LinearProgram::maximize(k(3.0)).subject_to(LinConstraint::le(k(1.0), k(2.0)));
        let s = solve(&ok).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.value, 3.0);
        let bad = LinearProgram::maximize(k(3.0)).subject_to(LinConstraint::le(k(2.0), k(1.0)));
        assert_eq!(solve(&bad).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn cycling_prone_program() {
        // Beale's example, which cycles under naive Dantzig pricing.
        let lp = LinearProgram::maximize(0.75 * var("x4") - 20.0 * var("x5") + 0.5 * var("x6") - 6.0 * var("x7"))
            .subject_to(LinConstraint::le(
                0.25 * var("x4") - 8.0 * var("x5") - var("x6") + 9.0 * var("x7"),
                k(0.0),
            ))
            .subject_to(LinConstraint::le(
                0.5 * var("x4") - 12.0 * var("x5") - 0.5 * var("x6") + 3.0 * var("x7"),
                k(0.0),
            ))
            .subject_to(LinConstraint::le(var("x6"), k(1.0)));
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.value - 1.25).abs() < 1e-9);
    }
}
