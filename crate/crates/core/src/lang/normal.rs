use std::collections::BTreeSet;

use super::ast::{visit_constraint_sums, visit_sums, Coef, Constraint, Loc, Program, Sum, WeightOpen};
use crate::cq::{fresh_var, ConjQuery, Expr};
use crate::relcore::Var;

/// Normal form: each constraint is at most one quantifier over a merged query
/// guarding a comparison; each sum is a sum of atomic sums, each at most one
/// aggregation over a merged query guarding a product of coefficients.
pub fn normal_form(p: &Program) -> Program {
    let p = rename_apart(p);
    let mut parts = Vec::new();
    nf_constraint(&p.constraint, &mut Prefix::default(), &mut parts);
    let constraint = parts
        .into_iter()
        .reduce(Constraint::and)
        .unwrap_or(Constraint::True);
    Program {
        queries: p.queries,
        objective: nf_sum(&p.objective),
        constraint,
        minimize: p.minimize,
    }
}

#[derive(Clone, Default)]
struct Prefix {
    vars: Vec<Var>,
    queries: Vec<ConjQuery>,
    loc: Loc,
}

impl Prefix {
    fn push(&mut self, vars: &[Var], query: &ConjQuery, loc: Loc) -> usize {
        if self.vars.is_empty() {
            self.loc = loc;
        }
        let n = self.vars.len();
        self.vars.extend(vars.iter().cloned());
        self.queries.push(query.clone());
        n
    }

    fn pop(&mut self, n: usize) {
        self.vars.truncate(n);
        self.queries.pop();
    }

    fn query(&self) -> ConjQuery {
        ConjQuery::and_all(self.queries.iter().cloned())
    }
}

fn nf_constraint(c: &Constraint, prefix: &mut Prefix, out: &mut Vec<Constraint>) {
    let wrap = |body: Constraint, prefix: &Prefix| {
        if prefix.vars.is_empty() {
            body
        } else {
            Constraint::Forall {
                vars: prefix.vars.clone(),
                query: prefix.query(),
                body: Box::new(body),
                loc: prefix.loc,
            }
        }
    };
    match c {
        Constraint::True => {}
        Constraint::And(a, b) => {
            nf_constraint(a, prefix, out);
            nf_constraint(b, prefix, out);
        }
        Constraint::Forall { vars, query, body, loc } => {
            let n = prefix.push(vars, query, *loc);
            nf_constraint(body, prefix, out);
            prefix.pop(n);
        }
        Constraint::Le(a, b) => out.push(wrap(Constraint::Le(nf_sum(a), nf_sum(b)), prefix)),
        Constraint::Eq(a, b) => out.push(wrap(Constraint::Eq(nf_sum(a), nf_sum(b)), prefix)),
    }
}

struct Atomic {
    prefix: Prefix,
    coefs: Vec<Coef>,
    base: Option<WeightOpen>,
}

fn nf_sum(s: &Sum) -> Sum {
    let mut atoms = Vec::new();
    flatten(s, &mut Prefix::default(), &mut Vec::new(), &mut atoms);
    atoms
        .into_iter()
        .map(rebuild)
        .reduce(Sum::add)
        .expect("every sum has an atomic summand")
}

fn flatten(s: &Sum, prefix: &mut Prefix, coefs: &mut Vec<Coef>, out: &mut Vec<Atomic>) {
    match s {
        Sum::Weight(w) => out.push(Atomic {
            prefix: prefix.clone(),
            coefs: coefs.clone(),
            base: Some(w.clone()),
        }),
        Sum::Coef(c) => {
            let mut coefs = coefs.clone();
            coefs.push(c.clone());
            out.push(Atomic {
                prefix: prefix.clone(),
                coefs,
                base: None,
            });
        }
        Sum::Scale(c, s) => {
            coefs.push(c.clone());
            flatten(s, prefix, coefs, out);
            coefs.pop();
        }
        Sum::Add(a, b) => {
            flatten(a, prefix, coefs, out);
            flatten(b, prefix, coefs, out);
        }
        Sum::Agg { vars, query, body, loc } => {
            let n = prefix.push(vars, query, *loc);
            flatten(body, prefix, coefs, out);
            prefix.pop(n);
        }
    }
}

fn rebuild(a: Atomic) -> Sum {
    let mut coefs = a.coefs;
    let mut s = match a.base {
        Some(w) => Sum::Weight(w),
        None => Sum::Coef(coefs.pop().expect("a coefficient summand")),
    };
    while let Some(c) = coefs.pop() {
        s = Sum::scale(c, s);
    }
    if a.prefix.vars.is_empty() {
        return s;
    }
    Sum::Agg {
        vars: a.prefix.vars.clone(),
        query: a.prefix.query(),
        body: Box::new(s),
        loc: a.prefix.loc,
    }
}

/// Renames binders so that no binder shares a name with an enclosing one; a
/// renamed binder gets a name unused anywhere in the program.
pub fn rename_apart(p: &Program) -> Program {
    let mut r = Renamer {
        used: program_vars(p),
        taken: Vec::new(),
        env: Vec::new(),
    };
    Program {
        queries: p.queries.clone(),
        objective: r.sum(&p.objective),
        constraint: r.constraint(&p.constraint),
        minimize: p.minimize,
    }
}

fn program_vars(p: &Program) -> BTreeSet<Var> {
    let mut used = BTreeSet::new();
    let mut weight = |w: &WeightOpen| {
        used.extend(w.scope.iter().cloned());
        used.extend(w.values.iter().filter_map(Expr::as_var).cloned());
    };
    visit_sums(&p.objective, &mut weight);
    visit_constraint_sums(&p.constraint, &mut weight);
    collect_binder_vars(&p.objective, &p.constraint, &mut used);
    used
}

fn collect_binder_vars(obj: &Sum, c: &Constraint, used: &mut BTreeSet<Var>) {
    fn sum(s: &Sum, used: &mut BTreeSet<Var>) {
        match s {
            Sum::Weight(_) => {}
            Sum::Coef(c) => used.extend(c.free_vars()),
            Sum::Scale(c, s) => {
                used.extend(c.free_vars());
                sum(s, used);
            }
            Sum::Add(a, b) => {
                sum(a, used);
                sum(b, used);
            }
            Sum::Agg { vars, query, body, .. } => {
                used.extend(vars.iter().cloned());
                used.extend(query.all_vars());
                sum(body, used);
            }
        }
    }
    fn constraint(c: &Constraint, used: &mut BTreeSet<Var>) {
        match c {
            Constraint::Le(a, b) | Constraint::Eq(a, b) => {
                sum(a, used);
                sum(b, used);
            }
            Constraint::And(a, b) => {
                constraint(a, used);
                constraint(b, used);
            }
            Constraint::True => {}
            Constraint::Forall { vars, query, body, .. } => {
                used.extend(vars.iter().cloned());
                used.extend(query.all_vars());
                constraint(body, used);
            }
        }
    }
    sum(obj, used);
    constraint(c, used);
}

struct Renamer {
    used: BTreeSet<Var>,
    taken: Vec<Var>,
    env: Vec<(Var, Var)>,
}

impl Renamer {
    fn lookup(&self, v: &Var) -> Var {
        self.env
            .iter()
            .rev()
            .find(|(old, _)| old == v)
            .map(|(_, new)| new.clone())
            .unwrap_or_else(|| v.clone())
    }

    fn expr(&self, e: &Expr) -> Expr {
        match e {
            Expr::Var(v) => Expr::Var(self.lookup(v)),
            Expr::Const(_) => e.clone(),
        }
    }

    fn coef(&self, c: &Coef) -> Coef {
        match c {
            Coef::Real(_) => c.clone(),
            Coef::Num(e, loc) => Coef::Num(self.expr(e), *loc),
        }
    }

    /// Binds `vars`, returning the renamed binders, the renamed query and the
    /// depth to restore with [`Renamer::unbind`].
    fn bind(&mut self, vars: &[Var], query: &ConjQuery) -> (Vec<Var>, ConjQuery, usize) {
        let depth = self.env.len();
        debug_assert_eq!(depth, self.taken.len());
        let outer: Vec<(Var, Expr)> = query
            .free_vars()
            .into_iter()
            .filter(|v| !vars.contains(v))
            .map(|v| {
                let new = self.lookup(&v);
                (v, Expr::Var(new))
            })
            .collect();
        let mut renamed = Vec::new();
        let mut own = Vec::new();
        for v in vars {
            let new = if self.taken.contains(v) {
                let f = fresh_var(v, &self.used);
                self.used.insert(f.clone());
                f
            } else {
                v.clone()
            };
            self.taken.push(new.clone());
            own.push((v.clone(), Expr::Var(new.clone())));
            self.env.push((v.clone(), new.clone()));
            renamed.push(new);
        }
        let mut map = outer;
        map.extend(own);
        (renamed, query.rename(&map), depth)
    }

    fn unbind(&mut self, depth: usize) {
        self.env.truncate(depth);
        self.taken.truncate(depth);
    }

    fn sum(&mut self, s: &Sum) -> Sum {
        match s {
            Sum::Weight(w) => Sum::Weight(WeightOpen {
                values: w.values.iter().map(|e| self.expr(e)).collect(),
                ..w.clone()
            }),
            Sum::Coef(c) => Sum::Coef(self.coef(c)),
            Sum::Scale(c, s) => Sum::scale(self.coef(c), self.sum(s)),
            Sum::Add(a, b) => self.sum(a).add(self.sum(b)),
            Sum::Agg { vars, query, body, loc } => {
                let (vars, query, depth) = self.bind(vars, query);
                let body = self.sum(body);
                self.unbind(depth);
                Sum::Agg {
                    vars,
                    query,
                    body: Box::new(body),
                    loc: *loc,
                }
            }
        }
    }

    fn constraint(&mut self, c: &Constraint) -> Constraint {
        match c {
            Constraint::Le(a, b) => Constraint::Le(self.sum(a), self.sum(b)),
            Constraint::Eq(a, b) => Constraint::Eq(self.sum(a), self.sum(b)),
            Constraint::And(a, b) => self.constraint(a).and(self.constraint(b)),
            Constraint::True => Constraint::True,
            Constraint::Forall { vars, query, body, loc } => {
                let (vars, query, depth) = self.bind(vars, query);
                let body = self.constraint(body);
                self.unbind(depth);
                Constraint::Forall {
                    vars,
                    query,
                    body: Box::new(body),
                    loc: *loc,
                }
            }
        }
    }
}
