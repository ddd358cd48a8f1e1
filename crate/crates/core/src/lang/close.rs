use std::collections::BTreeMap;

use super::ast::{ClosedConstraint, ClosedProgram, ClosedSum, Coef, Constraint, Program, Rel, Sum, WeightClosed, WeightOpen};
use super::LangError;
use crate::cq::{evaluate, ConjQuery, Expr};
use crate::relcore::{Database, Value, Var};

type Env = BTreeMap<Var, Value>;

/// Elaborates quantifiers, aggregations and `num` over `db`.
pub fn close(p: &Program, db: &Database) -> Result<ClosedProgram, LangError> {
    let env = Env::new();
    let objective = close_sum(p, &p.objective, db, &env)?;
    let mut constraints = Vec::new();
    close_constraint(p, &p.constraint, db, &env, &mut constraints)?;
    let queries = p
        .weighted_queries()
        .into_iter()
        .map(|name| {
            let body = p.queries[&name].body.clone();
            (name, body)
        })
        .collect();
    Ok(ClosedProgram {
        queries,
        objective,
        constraints,
        minimize: p.minimize,
    })
}

/// The environments `γ̃ ∪ γ'` for `γ' ∈ ⟦ext_x(subs_γ̃(Q))⟧`.
fn unfold(vars: &[Var], query: &ConjQuery, db: &Database, env: &Env) -> Result<Vec<Env>, LangError> {
    let mut outer = env.clone();
    outer.retain(|v, _| !vars.contains(v));
    let fv = query.free_vars();
    let map: Vec<(Var, Expr)> = fv
        .iter()
        .filter(|v| !vars.contains(v))
        .map(|v| match outer.get(v) {
            Some(c) => Ok((v.clone(), Expr::Const(c.clone()))),
            None => Err(LangError::InternalFreeVariable(v.clone())),
        })
        .collect::<Result<_, _>>()?;
    let q = query.rename(&map).extend(vars);
    let answers = evaluate(&q, db, vars)?;
    Ok(answers
        .assignments()
        .map(|a| {
            let mut e = outer.clone();
            for (v, c) in a.iter() {
                e.insert(v.clone(), c.clone());
            }
            e
        })
        .collect())
}

fn close_coef(c: &Coef, env: &Env) -> Result<f64, LangError> {
    let value = match c {
        Coef::Real(r) => return Ok(*r),
        Coef::Num(Expr::Const(c), _) => c.clone(),
        Coef::Num(Expr::Var(v), _) => env
            .get(v)
            .cloned()
            .ok_or_else(|| LangError::InternalFreeVariable(v.clone()))?,
    };
    value.numeric().ok_or(LangError::NumUndefined(value))
}

fn close_weight(p: &Program, w: &WeightOpen, env: &Env) -> Result<WeightClosed, LangError> {
    let params = &p.queries[&w.query].params;
    let mut targets = Vec::with_capacity(w.targets.len());
    for (x, y) in w.targets.iter().zip(&w.values) {
        let i = w.scope.iter().position(|z| z == x).expect("target within scope");
        let c = match y {
            Expr::Const(c) => c.clone(),
            Expr::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| LangError::InternalFreeVariable(v.clone()))?,
        };
        targets.push((params[i].clone(), c));
    }
    Ok(WeightClosed::new(&w.query, targets))
}

fn close_sum(p: &Program, s: &Sum, db: &Database, env: &Env) -> Result<ClosedSum, LangError> {
    let mut out = ClosedSum::default();
    match s {
        Sum::Weight(w) => out.terms.push((1.0, close_weight(p, w, env)?)),
        Sum::Coef(c) => out.constant = close_coef(c, env)?,
        Sum::Scale(c, s) => {
            let k = close_coef(c, env)?;
            out.add_scaled(close_sum(p, s, db, env)?, k);
        }
        Sum::Add(a, b) => {
            out = close_sum(p, a, db, env)?;
            out.add_scaled(close_sum(p, b, db, env)?, 1.0);
        }
        Sum::Agg { vars, query, body, .. } => {
            for e in unfold(vars, query, db, env)? {
                out.add_scaled(close_sum(p, body, db, &e)?, 1.0);
            }
        }
    }
    Ok(out)
}

fn close_constraint(
    p: &Program,
    c: &Constraint,
    db: &Database,
    env: &Env,
    out: &mut Vec<ClosedConstraint>,
) -> Result<(), LangError> {
    match c {
        Constraint::Le(a, b) | Constraint::Eq(a, b) => {
            let rel = if matches!(c, Constraint::Le(..)) { Rel::Le } else { Rel::Eq };
            out.push(ClosedConstraint {
                lhs: close_sum(p, a, db, env)?,
                rel,
                rhs: close_sum(p, b, db, env)?,
            });
        }
        Constraint::And(a, b) => {
            close_constraint(p, a, db, env, out)?;
            close_constraint(p, b, db, env, out)?;
        }
        Constraint::True => {}
        Constraint::Forall { vars, query, body, .. } => {
            for e in unfold(vars, query, db, env)? {
                close_constraint(p, body, db, &e, out)?;
            }
        }
    }
    Ok(())
}
