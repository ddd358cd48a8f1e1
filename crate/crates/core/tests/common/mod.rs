//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lpcq_core::cq::{ConjQuery, Expr};
use lpcq_core::lpcore::{LinearProgram, Relation, Sense};
use lpcq_core::relcore::{Database, Value, Var};

pub fn choose(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..n {
        cur.push(i);
        choose(n, k, i + 1, cur, f);
        cur.pop();
    }
}

/// Solves the square system `rows`; `None` if singular.
pub fn gauss(mut m: Vec<(Vec<f64>, f64)>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let p = (col..n).max_by(|&a, &b| m[a].0[col].abs().total_cmp(&m[b].0[col].abs()))?;
        if m[p].0[col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = m[r].0[col] / m[col].0[col];
                if f != 0.0 {
                    for j in 0..n {
                        let v = m[col].0[j];
                        m[r].0[j] -= f * v;
                    }
                    let b = m[col].1;
                    m[r].1 -= f * b;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i].1 / m[i].0[i]).collect())
}

/// Best objective over all basic feasible points of a bounded program with
/// `x ≥ 0`; `None` if infeasible. Exponential: keep programs tiny.
pub fn vertex_optimum(lp: &LinearProgram) -> Option<f64> {
    let vars: Vec<String> = lp.variables().into_iter().map(str::to_string).collect();
    let n = vars.len();
    let dense = |s: &lpcq_core::lpcore::LinSum| vars.iter().map(|v| s.coef(v)).collect::<Vec<f64>>();
    let rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            let (row, rel, b) = c.canonical();
            (dense(&row), rel, b)
        })
        .collect();
    let sign = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let c = dense(&lp.objective);
    let feasible = |x: &[f64]| {
        x.iter().all(|v| *v >= -1e-9)
            && rows.iter().all(|(a, rel, b)| {
                let lhs: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                match rel {
                    Relation::Eq => (lhs - b).abs() <= 1e-9,
                    _ => lhs <= b + 1e-9,
                }
            })
    };
    if n == 0 {
        return feasible(&[]).then(|| lp.objective.constant_part());
    }
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    choose(planes.len(), n, 0, &mut Vec::new(), &mut |idx| {
        if let Some(x) = gauss(idx.iter().map(|&i| planes[i].clone()).collect()) {
            if feasible(&x) {
                let v: f64 = sign * c.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>();
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
    });
    best.map(|v| sign * v + lp.objective.constant_part())
}

fn term(e: &Expr, env: &BTreeMap<Var, Value>) -> Value {
    match e {
        Expr::Var(v) => env[v].clone(),
        Expr::Const(c) => c.clone(),
    }
}

fn holds(q: &ConjQuery, db: &Database, dom: &[Value], env: &mut BTreeMap<Var, Value>) -> bool {
    match q {
        ConjQuery::True => true,
        ConjQuery::Equal(a, b) => term(a, env) == term(b, env),
        ConjQuery::Atom(r, args) => {
            let tuple: Vec<Value> = args.iter().map(|a| term(a, env)).collect();
            db.relation(r).is_some_and(|rel| rel.contains(&tuple))
        }
        ConjQuery::And(a, b) => holds(a, db, dom, env) && holds(b, db, dom, env),
        ConjQuery::Exists(v, body) => {
            let saved = env.remove(v);
            let found = dom.iter().any(|c| {
                env.insert(v.clone(), c.clone());
                holds(body, db, dom, env)
            });
            env.remove(v);
            if let Some(s) = saved {
                env.insert(v.clone(), s);
            }
            found
        }
    }
}

fn constants(q: &ConjQuery, out: &mut BTreeSet<Value>) {
    match q {
        ConjQuery::True => {}
        ConjQuery::Equal(a, b) => {
            for e in [a, b] {
                if let Expr::Const(c) = e {
                    out.insert(c.clone());
                }
            }
        }
        ConjQuery::Atom(_, args) => out.extend(args.iter().filter_map(|a| match a {
            Expr::Const(c) => Some(c.clone()),
            Expr::Var(_) => None,
        })),
        ConjQuery::And(a, b) => {
            constants(a, out);
            constants(b, out);
        }
        ConjQuery::Exists(_, body) => constants(body, out),
    }
}

/// `⟦q⟧` over `xs` by trying every assignment over the active domain and the
/// query's constants. Rows follow the order of `xs`.
pub fn brute_answers(q: &ConjQuery, db: &Database, xs: &[Var]) -> BTreeSet<Vec<Value>> {
    let mut dom: BTreeSet<Value> = db.domain().clone();
    constants(q, &mut dom);
    let dom: Vec<Value> = dom.into_iter().collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; xs.len()];
    if !xs.is_empty() && dom.is_empty() {
        return out;
    }
    loop {
        let mut env: BTreeMap<Var, Value> = xs.iter().cloned().zip(idx.iter().map(|&i| dom[i].clone())).collect();
        if holds(q, db, &dom, &mut env) {
            out.insert(idx.iter().map(|&i| dom[i].clone()).collect());
        }
        let mut k = 0;
        loop {
            if k == xs.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < dom.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
