//! Conjunctive queries: syntax, answer sets, and the `subs`/`ext`/`qf` operators.

mod eval;
pub(crate) mod parse;
pub mod syntax;

use std::collections::BTreeSet;
use std::fmt;

pub use crate::relcore::AnswerSet;
use crate::relcore::{Value, Var};
pub use eval::evaluate;
pub use parse::{parse_query, parse_query_tokens};

#[derive(Debug, thiserror::Error)]
pub enum CqError {
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("relation {name} has arity {expected}, used with {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("free variable {0} missing from the evaluation variables")]
    XMissingFreeVar(Var),
    #[error("substitution of {vars} variables by {values} values")]
    LengthMismatch { vars: usize, values: usize },
    #[error(transparent)]
    Syntax(#[from] syntax::SyntaxError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(Var),
    Const(Value),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Var::new(name))
    }

    pub fn constant(text: &str) -> Expr {
        Expr::Const(Value::new(text))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Expr::Var(v) => Some(v),
            Expr::Const(_) => None,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Const(c) => f.write_str(&syntax::render_value(c)),
        }
    }
}

/// Identity is structural: renaming a bound variable yields a different query.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConjQuery {
    True,
    Equal(Expr, Expr),
    Atom(String, Vec<Expr>),
    And(Box<ConjQuery>, Box<ConjQuery>),
    Exists(Var, Box<ConjQuery>),
}

impl ConjQuery {
    pub fn atom(rel: &str, args: &[&str]) -> ConjQuery {
        ConjQuery::Atom(rel.to_string(), args.iter().map(|a| Expr::var(a)).collect())
    }

    pub fn eq(a: Expr, b: Expr) -> ConjQuery {
        ConjQuery::Equal(a, b)
    }

    pub fn and(self, other: ConjQuery) -> ConjQuery {
        ConjQuery::And(Box::new(self), Box::new(other))
    }

    pub fn exists(var: &str, body: ConjQuery) -> ConjQuery {
        ConjQuery::Exists(Var::new(var), Box::new(body))
    }

    /// Left-nested conjunction; `true` for an empty list.
    pub fn and_all<I: IntoIterator<Item = ConjQuery>>(parts: I) -> ConjQuery {
        parts
            .into_iter()
            .reduce(ConjQuery::and)
            .unwrap_or(ConjQuery::True)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut add = |e: &Expr, bound: &Vec<Var>| {
            if let Expr::Var(v) = e {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            ConjQuery::True => {}
            ConjQuery::Equal(a, b) => {
                add(a, bound);
                add(b, bound);
            }
            ConjQuery::Atom(_, args) => args.iter().for_each(|a| add(a, bound)),
            ConjQuery::And(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            ConjQuery::Exists(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |q| match q {
            ConjQuery::Equal(a, b) => {
                out.extend(a.as_var().cloned());
                out.extend(b.as_var().cloned());
            }
            ConjQuery::Atom(_, args) => out.extend(args.iter().filter_map(|a| a.as_var().cloned())),
            ConjQuery::Exists(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&ConjQuery)) {
        f(self);
        match self {
            ConjQuery::And(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            ConjQuery::Exists(_, body) => body.visit(f),
            _ => {}
        }
    }

    /// `(relation, args)` of every atom, in syntactic order.
    pub fn atoms(&self) -> Vec<(&str, &[Expr])> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a str, &'a [Expr])>) {
        match self {
            ConjQuery::Atom(r, args) => out.push((r, args)),
            ConjQuery::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            ConjQuery::Exists(_, body) => body.collect_atoms(out),
            _ => {}
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        let mut found = false;
        self.visit(&mut |q| found |= matches!(q, ConjQuery::Exists(..)));
        !found
    }

    /// AST node count.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// `subs_[xs/cs]`: replaces free occurrences only.
    pub fn substitute(&self, xs: &[Var], cs: &[Value]) -> Result<ConjQuery, CqError> {
        if xs.len() != cs.len() {
            return Err(CqError::LengthMismatch {
                vars: xs.len(),
                values: cs.len(),
            });
        }
        let map: Vec<(Var, Expr)> = xs
            .iter()
            .cloned()
            .zip(cs.iter().cloned().map(Expr::Const))
            .collect();
        Ok(self.rename(&map))
    }

    /// Capture-naive replacement of free variables by expressions.
    ///
    /// Callers guarantee that no replacement variable is bound inside `self`.
    pub fn rename(&self, map: &[(Var, Expr)]) -> ConjQuery {
        let sub = |e: &Expr| match e {
            Expr::Var(v) => map
                .iter()
                .find(|(x, _)| x == v)
                .map(|(_, r)| r.clone())
                .unwrap_or_else(|| e.clone()),
            Expr::Const(_) => e.clone(),
        };
        match self {
            ConjQuery::True => ConjQuery::True,
            ConjQuery::Equal(a, b) => ConjQuery::Equal(sub(a), sub(b)),
            ConjQuery::Atom(r, args) => ConjQuery::Atom(r.clone(), args.iter().map(sub).collect()),
            ConjQuery::And(a, b) => a.rename(map).and(b.rename(map)),
            ConjQuery::Exists(x, body) => {
                let inner: Vec<(Var, Expr)> = map.iter().filter(|(v, _)| v != x).cloned().collect();
                ConjQuery::Exists(x.clone(), Box::new(body.rename(&inner)))
            }
        }
    }

    /// `ext_xs`: prefixes `x == x` for each listed variable not free here.
    pub fn extend(&self, xs: &[Var]) -> ConjQuery {
        let fv = self.free_vars();
        let mut seen = BTreeSet::new();
        let pads: Vec<ConjQuery> = xs
            .iter()
            .filter(|x| !fv.contains(*x) && seen.insert((*x).clone()))
            .map(|x| ConjQuery::Equal(Expr::Var(x.clone()), Expr::Var(x.clone())))
            .collect();
        if pads.is_empty() {
            return self.clone();
        }
        ConjQuery::and_all(pads).and(self.clone())
    }

    /// Prenex form `∃ys. body`, renaming a bound variable only when it clashes
    /// with `avoid`, a free variable, or an earlier bound variable.
    pub fn prenex(&self, avoid: &BTreeSet<Var>) -> (Vec<Var>, ConjQuery) {
        let mut used: BTreeSet<Var> = self.all_vars();
        used.extend(avoid.iter().cloned());
        let mut taken: BTreeSet<Var> = self.free_vars();
        taken.extend(avoid.iter().cloned());
        let mut quantified = Vec::new();
        let body = self.hoist(&mut taken, &mut used, &mut quantified);
        (quantified, body)
    }

    fn hoist(&self, taken: &mut BTreeSet<Var>, used: &mut BTreeSet<Var>, out: &mut Vec<Var>) -> ConjQuery {
        match self {
            ConjQuery::And(a, b) => {
                let a = a.hoist(taken, used, out);
                let b = b.hoist(taken, used, out);
                a.and(b)
            }
            ConjQuery::Exists(x, body) => {
                let (name, body) = if taken.contains(x) {
                    let fresh = fresh_var(x, used);
                    used.insert(fresh.clone());
                    let renamed = body.rename(&[(x.clone(), Expr::Var(fresh.clone()))]);
                    (fresh, renamed)
                } else {
                    (x.clone(), (**body).clone())
                };
                taken.insert(name.clone());
                out.push(name);
                body.hoist(taken, used, out)
            }
            other => other.clone(),
        }
    }

    /// `qf(∃ys. body) = body ∧ y1==y1 ∧ … ∧ yk==yk`.
    pub fn qf(&self) -> ConjQuery {
        let (ys, body) = self.prenex(&BTreeSet::new());
        ys.into_iter().fold(body, |q, y| {
            q.and(ConjQuery::Equal(Expr::Var(y.clone()), Expr::Var(y)))
        })
    }

    /// Top-level conjuncts, flattening `And`.
    pub fn conjuncts(&self) -> Vec<&ConjQuery> {
        match self {
            ConjQuery::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            other => vec![other],
        }
    }
}

/// `x'`, `x''`, … until unused.
pub fn fresh_var(base: &Var, used: &BTreeSet<Var>) -> Var {
    let mut name = base.name().to_string();
    loop {
        name.push('\'');
        let v = Var::new(&name);
        if !used.contains(&v) {
            return v;
        }
    }
}

impl fmt::Display for ConjQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConjQuery::True => f.write_str("true"),
            ConjQuery::Equal(a, b) => write!(f, "{a} == {b}"),
            ConjQuery::Atom(r, args) => {
                write!(f, "{r}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            ConjQuery::And(a, b) => {
                let side = |q: &ConjQuery, f: &mut fmt::Formatter<'_>| match q {
                    ConjQuery::Exists(..) => write!(f, "({q})"),
                    _ => write!(f, "{q}"),
                };
                side(a, f)?;
                f.write_str(" /\\ ")?;
                match **b {
                    ConjQuery::And(..) => write!(f, "({b})"),
                    _ => side(b, f),
                }
            }
            ConjQuery::Exists(x, body) => write!(f, "exists {x}. {body}"),
        }
    }
}
