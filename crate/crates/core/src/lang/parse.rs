use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Coef, Constraint, Loc, Program, QueryDef, Sum, WeightOpen};
use super::LangError;
use crate::cq::parse::{parse_binders, parse_expr, parse_query_tokens};
use crate::cq::syntax::{Span, SyntaxError, Tok, Tokens};
use crate::cq::{fresh_var, ConjQuery, Expr};
use crate::relcore::Var;

/// Parses and checks a program: prelude, objective, constraint.
///
/// An atom naming a prelude query is expanded in place, its bound variables
/// renamed fresh. A `minimize` objective is stored negated.
pub fn parse_program(src: &str) -> Result<Program, LangError> {
    let mut toks = Tokens::new(src)?;
    let mut queries: BTreeMap<String, QueryDef> = BTreeMap::new();
    while toks.eat_keyword("let") {
        let span = toks.span();
        let name = toks.ident()?;
        if queries.contains_key(&name) {
            return Err(LangError::DuplicateQuery { name, span });
        }
        toks.expect_punct("(")?;
        let mut params = Vec::new();
        if !toks.eat_punct(")") {
            loop {
                params.push(Var::new(&toks.ident()?));
                if toks.eat_punct(")") {
                    break;
                }
                toks.expect_punct(",")?;
            }
        }
        check_distinct(&params, span)?;
        toks.expect_punct("=")?;
        let body = expand(&parse_query_tokens(&mut toks)?, &queries);
        let fv = body.free_vars();
        let declared: BTreeSet<Var> = params.iter().cloned().collect();
        if fv != declared {
            return Err(LangError::QueryParams { name, span });
        }
        toks.eat_punct(";");
        queries.insert(name.clone(), QueryDef { name, params, body });
    }
    let mut p = Parser { toks, queries };
    let minimize = if p.toks.eat_keyword("minimize") {
        true
    } else {
        p.toks.expect_keyword("maximize")?;
        false
    };
    let mut objective = p.sum()?;
    if minimize {
        objective = Sum::scale(Coef::Real(-1.0), objective);
    }
    p.toks.expect_keyword("subject")?;
    p.toks.expect_keyword("to")?;
    let constraint = p.constraint()?;
    p.toks.eat_punct(";");
    p.toks.expect_eof()?;
    let program = Program {
        queries: p.queries,
        objective,
        constraint,
        minimize,
    };
    check_closed(&program)?;
    Ok(program)
}

fn check_distinct(vars: &[Var], span: Span) -> Result<(), LangError> {
    let mut seen = BTreeSet::new();
    for v in vars {
        if !seen.insert(v) {
            return Err(LangError::Shadowing {
                name: v.name().to_string(),
                span,
            });
        }
    }
    Ok(())
}

/// Replaces atoms that name prelude queries by their renamed bodies.
pub(crate) fn expand(q: &ConjQuery, defs: &BTreeMap<String, QueryDef>) -> ConjQuery {
    match q {
        ConjQuery::Atom(name, args) => match defs.get(name) {
            Some(def) if def.params.len() == args.len() => {
                let mut avoid: BTreeSet<Var> = args.iter().filter_map(|e| e.as_var().cloned()).collect();
                avoid.extend(def.params.iter().cloned());
                let (bound, body) = def.body.prenex(&avoid);
                // Bound names must also dodge every variable the caller might use.
                let mut used = avoid.clone();
                used.extend(def.body.all_vars());
                let mut renames = Vec::new();
                let mut fresh = Vec::new();
                for y in bound {
                    let z = fresh_var(&Var::new(&format!("{}_{}", name, y.name())), &used);
                    used.insert(z.clone());
                    renames.push((y, Expr::Var(z.clone())));
                    fresh.push(z);
                }
                let body = body.rename(&renames);
                let map: Vec<(Var, Expr)> = def.params.iter().cloned().zip(args.iter().cloned()).collect();
                let body = body.rename(&map);
                fresh
                    .into_iter()
                    .rev()
                    .fold(body, |b, z| ConjQuery::Exists(z, Box::new(b)))
            }
            _ => q.clone(),
        },
        ConjQuery::And(a, b) => expand(a, defs).and(expand(b, defs)),
        ConjQuery::Exists(x, body) => ConjQuery::Exists(x.clone(), Box::new(expand(body, defs))),
        other => other.clone(),
    }
}

struct Parser {
    toks: Tokens,
    queries: BTreeMap<String, QueryDef>,
}

impl Parser {
    fn query(&mut self) -> Result<ConjQuery, LangError> {
        let q = parse_query_tokens(&mut self.toks)?;
        Ok(expand(&q, &self.queries))
    }

    fn binders(&mut self) -> Result<(Vec<Var>, Span), LangError> {
        let span = self.toks.span();
        let vars = parse_binders(&mut self.toks)?;
        check_distinct(&vars, span)?;
        Ok((vars, span))
    }

    /// `sum := term (('+' | '-') term)*`
    fn sum(&mut self) -> Result<Sum, LangError> {
        let mut s = self.term()?;
        loop {
            if self.toks.eat_punct("+") {
                s = s.add(self.term()?);
            } else if self.toks.eat_punct("-") {
                let t = self.term()?;
                s = s.add(Sum::scale(Coef::Real(-1.0), t));
            } else {
                return Ok(s);
            }
        }
    }

    fn term(&mut self) -> Result<Sum, LangError> {
        if self.toks.eat_punct("-") {
            let t = self.term()?;
            return Ok(Sum::scale(Coef::Real(-1.0), t));
        }
        if let Some(c) = self.coef()? {
            if self.toks.eat_punct("*") {
                let t = self.term()?;
                return Ok(Sum::scale(c, t));
            }
            return Ok(Sum::Coef(c));
        }
        if self.toks.is_keyword("weight") {
            return self.weight().map(Sum::Weight);
        }
        if self.toks.eat_keyword("sum") {
            self.toks.expect_punct("{")?;
            let (vars, span) = self.binders()?;
            self.toks.expect_punct(":")?;
            let query = self.query()?;
            self.toks.expect_punct("}")?;
            self.toks.expect_punct("(")?;
            let body = self.sum()?;
            self.toks.expect_punct(")")?;
            return Ok(Sum::Agg {
                vars,
                query,
                body: Box::new(body),
                loc: Loc(span),
            });
        }
        if self.toks.eat_punct("(") {
            let s = self.sum()?;
            self.toks.expect_punct(")")?;
            return Ok(s);
        }
        Ok(self.toks.unexpected("a sum")?)
    }

    fn coef(&mut self) -> Result<Option<Coef>, LangError> {
        if let Tok::Num(n) = self.toks.peek().clone() {
            self.toks.next();
            let r: f64 = n.parse().map_err(|_| SyntaxError {
                msg: format!("bad number {n}"),
                span: self.toks.span(),
            })?;
            return Ok(Some(Coef::Real(r)));
        }
        if self.toks.is_keyword("num") {
            let span = self.toks.span();
            self.toks.next();
            self.toks.expect_punct("(")?;
            let e = parse_expr(&mut self.toks)?;
            self.toks.expect_punct(")")?;
            return Ok(Some(Coef::Num(e, Loc(span))));
        }
        Ok(None)
    }

    /// `weight[(z..): x == y /\ ..](Q)`; `: true` or nothing for no targets.
    fn weight(&mut self) -> Result<WeightOpen, LangError> {
        let span = self.toks.span();
        self.toks.expect_keyword("weight")?;
        self.toks.expect_punct("[")?;
        let (scope, _) = self.binders()?;
        let mut targets = Vec::new();
        let mut values = Vec::new();
        if self.toks.eat_punct(":") && !self.toks.eat_keyword("true") {
            loop {
                let tspan = self.toks.span();
                let x = Var::new(&self.toks.ident()?);
                if !scope.contains(&x) {
                    return Err(LangError::TargetNotInScope {
                        name: x.name().to_string(),
                        span: tspan,
                    });
                }
                self.toks.expect_punct("==")?;
                let y = parse_expr(&mut self.toks)?;
                if y.as_var().is_some_and(|v| scope.contains(v)) {
                    return Err(LangError::ValueInScope {
                        name: y.to_string(),
                        span: tspan,
                    });
                }
                if targets.contains(&x) {
                    return Err(LangError::Shadowing {
                        name: x.name().to_string(),
                        span: tspan,
                    });
                }
                targets.push(x);
                values.push(y);
                if !self.toks.eat_punct("/\\") {
                    break;
                }
            }
        }
        self.toks.expect_punct("]")?;
        self.toks.expect_punct("(")?;
        let qspan = self.toks.span();
        let query = self.toks.ident()?;
        self.toks.expect_punct(")")?;
        let Some(def) = self.queries.get(&query) else {
            return Err(LangError::UnknownQuery { name: query, span: qspan });
        };
        if def.params.len() != scope.len() {
            return Err(LangError::ScopeArity {
                query,
                expected: def.params.len(),
                found: scope.len(),
                span,
            });
        }
        Ok(WeightOpen {
            query,
            scope,
            targets,
            values,
            loc: Loc(span),
        })
    }

    /// `constraint := atom ('/\' atom)*`; `forall` scopes right.
    fn constraint(&mut self) -> Result<Constraint, LangError> {
        let mut c = self.catom()?;
        while self.toks.eat_punct("/\\") {
            c = c.and(self.catom()?);
        }
        Ok(c)
    }

    fn catom(&mut self) -> Result<Constraint, LangError> {
        if self.toks.eat_keyword("true") {
            return Ok(Constraint::True);
        }
        if self.toks.eat_keyword("forall") {
            let (vars, span) = self.binders()?;
            self.toks.expect_punct(":")?;
            let query = self.query()?;
            self.toks.expect_punct(".")?;
            let body = self.constraint()?;
            return Ok(Constraint::Forall {
                vars,
                query,
                body: Box::new(body),
                loc: Loc(span),
            });
        }
        if self.toks.is_punct("(") {
            // `(` opens either a constraint or a sum; try the constraint first.
            let save = self.toks.save();
            self.toks.next();
            if let Ok(c) = self.constraint() {
                if self.toks.eat_punct(")") && !self.at_comparison() {
                    return Ok(c);
                }
            }
            self.toks.restore(save);
        }
        let lhs = self.sum()?;
        if self.toks.eat_punct("<=") {
            Ok(Constraint::Le(lhs, self.sum()?))
        } else if self.toks.eat_punct(">=") {
            let rhs = self.sum()?;
            Ok(Constraint::Le(rhs, lhs))
        } else if self.toks.eat_punct("==") {
            Ok(Constraint::Eq(lhs, self.sum()?))
        } else {
            Ok(self.toks.unexpected("`<=`, `>=` or `==`")?)
        }
    }

    fn at_comparison(&self) -> bool {
        ["<=", ">=", "==", "+", "-", "*"].iter().any(|p| self.toks.is_punct(p))
    }
}

/// Rejects free variables, reporting the innermost enclosing position.
fn check_closed(p: &Program) -> Result<(), LangError> {
    let mut bound = Vec::new();
    check_sum(&p.objective, &mut bound)?;
    check_constraint(&p.constraint, &mut bound)
}

fn free_error(v: &Var, span: Span) -> LangError {
    LangError::FreeVariable {
        name: v.name().to_string(),
        span,
    }
}

fn check_vars<'a>(vs: impl IntoIterator<Item = &'a Var>, bound: &[Var], span: Span) -> Result<(), LangError> {
    for v in vs {
        if !bound.contains(v) {
            return Err(free_error(v, span));
        }
    }
    Ok(())
}

fn check_coef(c: &Coef, bound: &[Var]) -> Result<(), LangError> {
    if let Coef::Num(e, loc) = c {
        check_vars(e.as_var(), bound, loc.0)?;
    }
    Ok(())
}

fn check_sum(s: &Sum, bound: &mut Vec<Var>) -> Result<(), LangError> {
    match s {
        Sum::Weight(w) => {
            let vs: Vec<&Var> = w.values.iter().filter_map(Expr::as_var).collect();
            check_vars(vs, bound, w.loc.0)
        }
        Sum::Coef(c) => check_coef(c, bound),
        Sum::Scale(c, s) => {
            check_coef(c, bound)?;
            check_sum(s, bound)
        }
        Sum::Add(a, b) => {
            check_sum(a, bound)?;
            check_sum(b, bound)
        }
        Sum::Agg { vars, query, body, loc } => {
            let n = enter(vars, query, bound, loc.0)?;
            let r = check_sum(body, bound);
            bound.truncate(n);
            r
        }
    }
}

fn check_constraint(c: &Constraint, bound: &mut Vec<Var>) -> Result<(), LangError> {
    match c {
        Constraint::Le(a, b) | Constraint::Eq(a, b) => {
            check_sum(a, bound)?;
            check_sum(b, bound)
        }
        Constraint::And(a, b) => {
            check_constraint(a, bound)?;
            check_constraint(b, bound)
        }
        Constraint::True => Ok(()),
        Constraint::Forall { vars, query, body, loc } => {
            let n = enter(vars, query, bound, loc.0)?;
            let r = check_constraint(body, bound);
            bound.truncate(n);
            r
        }
    }
}

/// Checks the binder's query and pushes its variables; returns the old depth.
fn enter(vars: &[Var], query: &ConjQuery, bound: &mut Vec<Var>, span: Span) -> Result<usize, LangError> {
    let fv = query.free_vars();
    check_vars(fv.iter().filter(|v| !vars.contains(v)), bound, span)?;
    let n = bound.len();
    bound.extend(vars.iter().cloned());
    Ok(n)
}
