use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cq::syntax::{render_value, Span};
use crate::cq::{ConjQuery, Expr};
use crate::relcore::{Value, Var};

/// A source position that never affects equality or hashing.
#[derive(Clone, Copy, Debug, Default)]
pub struct Loc(pub Span);

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Loc {}

/// `let name(params) = body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryDef {
    pub name: String,
    pub params: Vec<Var>,
    pub body: ConjQuery,
}

/// `weight[(scope): targets == values](query)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightOpen {
    pub query: String,
    pub scope: Vec<Var>,
    pub targets: Vec<Var>,
    pub values: Vec<Expr>,
    pub loc: Loc,
}

impl WeightOpen {
    /// Free variables: the variables among the values.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        self.values.iter().filter_map(|e| e.as_var().cloned()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coef {
    Real(f64),
    Num(Expr, Loc),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sum {
    Weight(WeightOpen),
    Coef(Coef),
    Scale(Coef, Box<Sum>),
    Add(Box<Sum>, Box<Sum>),
    /// `sum{(vars): query}(body)`
    Agg {
        vars: Vec<Var>,
        query: ConjQuery,
        body: Box<Sum>,
        loc: Loc,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    Le(Sum, Sum),
    Eq(Sum, Sum),
    And(Box<Constraint>, Box<Constraint>),
    True,
    Forall {
        vars: Vec<Var>,
        query: ConjQuery,
        body: Box<Constraint>,
        loc: Loc,
    },
}

/// `maximize objective subject to constraint`; a source `minimize` is stored
/// negated with `minimize` set.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub queries: BTreeMap<String, QueryDef>,
    pub objective: Sum,
    pub constraint: Constraint,
    pub minimize: bool,
}

impl Coef {
    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            Coef::Real(_) => BTreeSet::new(),
            Coef::Num(e, _) => e.as_var().cloned().into_iter().collect(),
        }
    }
}

impl Sum {
    pub fn add(self, other: Sum) -> Sum {
        Sum::Add(Box::new(self), Box::new(other))
    }

    pub fn scale(k: Coef, s: Sum) -> Sum {
        Sum::Scale(k, Box::new(s))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            Sum::Weight(w) => w.free_vars(),
            Sum::Coef(c) => c.free_vars(),
            Sum::Scale(c, s) => {
                let mut out = c.free_vars();
                out.extend(s.free_vars());
                out
            }
            Sum::Add(a, b) => {
                let mut out = a.free_vars();
                out.extend(b.free_vars());
                out
            }
            Sum::Agg { vars, query, body, .. } => {
                let mut out = query.free_vars();
                out.extend(body.free_vars());
                for v in vars {
                    out.remove(v);
                }
                out
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Sum::Weight(w) => 1 + w.targets.len(),
            Sum::Coef(_) => 1,
            Sum::Scale(_, s) => 2 + s.size(),
            Sum::Add(a, b) => 1 + a.size() + b.size(),
            Sum::Agg { vars, query, body, .. } => 1 + vars.len() + query.size() + body.size(),
        }
    }
}

impl Constraint {
    pub fn and(self, other: Constraint) -> Constraint {
        Constraint::And(Box::new(self), Box::new(other))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            Constraint::Le(a, b) | Constraint::Eq(a, b) => {
                let mut out = a.free_vars();
                out.extend(b.free_vars());
                out
            }
            Constraint::And(a, b) => {
                let mut out = a.free_vars();
                out.extend(b.free_vars());
                out
            }
            Constraint::True => BTreeSet::new(),
            Constraint::Forall { vars, query, body, .. } => {
                let mut out = query.free_vars();
                out.extend(body.free_vars());
                for v in vars {
                    out.remove(v);
                }
                out
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Constraint::Le(a, b) | Constraint::Eq(a, b) => 1 + a.size() + b.size(),
            Constraint::And(a, b) => 1 + a.size() + b.size(),
            Constraint::True => 1,
            Constraint::Forall { vars, query, body, .. } => 1 + vars.len() + query.size() + body.size(),
        }
    }
}

impl Program {
    /// Free variables of objective and constraint; a checked program has none.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = self.objective.free_vars();
        out.extend(self.constraint.free_vars());
        out
    }

    /// Node count of the program, its queries included.
    pub fn size(&self) -> usize {
        let defs: usize = self
            .queries
            .values()
            .map(|d| 1 + d.params.len() + d.body.size())
            .sum();
        1 + defs + self.objective.size() + self.constraint.size()
    }

    /// Names of prelude queries some weight expression refers to.
    pub fn weighted_queries(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        visit_sums(&self.objective, &mut |w| {
            out.insert(w.query.clone());
        });
        visit_constraint_sums(&self.constraint, &mut |w| {
            out.insert(w.query.clone());
        });
        out
    }

    /// Target variable sets of every weight expression, renamed to the
    /// parameters of the query it weights, without duplicates.
    pub fn weight_targets(&self) -> BTreeMap<String, Vec<BTreeSet<Var>>> {
        let mut out: BTreeMap<String, Vec<BTreeSet<Var>>> = BTreeMap::new();
        let mut add = |w: &WeightOpen| {
            let Some(def) = self.queries.get(&w.query) else { return };
            let set: BTreeSet<Var> = w
                .targets
                .iter()
                .filter_map(|t| w.scope.iter().position(|s| s == t).map(|i| def.params[i].clone()))
                .collect();
            let list = out.entry(w.query.clone()).or_default();
            if !list.contains(&set) {
                list.push(set);
            }
        };
        visit_sums(&self.objective, &mut add);
        visit_constraint_sums(&self.constraint, &mut add);
        out
    }
}

pub(crate) fn visit_sums(s: &Sum, f: &mut impl FnMut(&WeightOpen)) {
    match s {
        Sum::Weight(w) => f(w),
        Sum::Coef(_) => {}
        Sum::Scale(_, s) => visit_sums(s, f),
        Sum::Add(a, b) => {
            visit_sums(a, f);
            visit_sums(b, f);
        }
        Sum::Agg { body, .. } => visit_sums(body, f),
    }
}

pub(crate) fn visit_constraint_sums(c: &Constraint, f: &mut impl FnMut(&WeightOpen)) {
    match c {
        Constraint::Le(a, b) | Constraint::Eq(a, b) => {
            visit_sums(a, f);
            visit_sums(b, f);
        }
        Constraint::And(a, b) => {
            visit_constraint_sums(a, f);
            visit_constraint_sums(b, f);
        }
        Constraint::True => {}
        Constraint::Forall { body, .. } => visit_constraint_sums(body, f),
    }
}

fn binders(vs: &[Var]) -> String {
    let names: Vec<&str> = vs.iter().map(Var::name).collect();
    format!("({})", names.join(", "))
}

/// Negative reals print bare: `-1 * w` parses through unary minus.
fn real(r: f64) -> String {
    format!("{r}")
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coef::Real(r) => f.write_str(&real(*r)),
            Coef::Num(e, _) => write!(f, "num({e})"),
        }
    }
}

impl fmt::Display for WeightOpen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "weight[{}: ", binders(&self.scope))?;
        if self.targets.is_empty() {
            f.write_str("true")?;
        }
        for (i, (x, y)) in self.targets.iter().zip(&self.values).enumerate() {
            if i > 0 {
                f.write_str(" /\\ ")?;
            }
            write!(f, "{x} == {y}")?;
        }
        write!(f, "]({})", self.query)
    }
}

impl fmt::Display for Sum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sum::Weight(w) => write!(f, "{w}"),
            Sum::Coef(c) => write!(f, "{c}"),
            Sum::Scale(c, s) => match **s {
                Sum::Add(..) => write!(f, "{c} * ({s})"),
                _ => write!(f, "{c} * {s}"),
            },
            Sum::Add(a, b) => match **b {
                Sum::Add(..) => write!(f, "{a} + ({b})"),
                _ => write!(f, "{a} + {b}"),
            },
            Sum::Agg { vars, query, body, .. } => {
                write!(f, "sum{{{}: {query}}}({body})", binders(vars))
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Le(a, b) => write!(f, "{a} <= {b}"),
            Constraint::Eq(a, b) => write!(f, "{a} == {b}"),
            Constraint::True => f.write_str("true"),
            Constraint::And(a, b) => {
                let side = |c: &Constraint, f: &mut fmt::Formatter<'_>| match c {
                    Constraint::Forall { .. } | Constraint::And(..) => write!(f, "({c})"),
                    _ => write!(f, "{c}"),
                };
                match **a {
                    Constraint::And(..) => write!(f, "{a}")?,
                    _ => side(a, f)?,
                }
                f.write_str("\n  /\\ ")?;
                side(b, f)
            }
            Constraint::Forall { vars, query, body, .. } => {
                write!(f, "forall {}: {query} . {body}", binders(vars))
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.queries.values() {
            writeln!(f, "let {}{} = {}", d.name, binders(&d.params), d.body)?;
        }
        if self.minimize {
            let shown = match &self.objective {
                Sum::Scale(Coef::Real(r), s) if *r == -1.0 => s.to_string(),
                other => format!("(-1) * ({other})"),
            };
            writeln!(f, "minimize {shown}")?;
        } else {
            writeln!(f, "maximize {}", self.objective)?;
        }
        write!(f, "subject to\n  {}", self.constraint)
    }
}

/// A closed weight expression `weight[x == c](Q)`; targets sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightClosed {
    pub query: String,
    pub targets: Vec<(Var, Value)>,
}

impl WeightClosed {
    pub fn new(query: &str, mut targets: Vec<(Var, Value)>) -> WeightClosed {
        targets.sort();
        WeightClosed {
            query: query.to_string(),
            targets,
        }
    }

    pub fn target_vars(&self) -> Vec<Var> {
        self.targets.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn target_values(&self) -> Vec<Value> {
        self.targets.iter().map(|(_, c)| c.clone()).collect()
    }
}

impl fmt::Display for WeightClosed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("weight[")?;
        if self.targets.is_empty() {
            f.write_str("true")?;
        }
        for (i, (x, c)) in self.targets.iter().enumerate() {
            if i > 0 {
                f.write_str(" /\\ ")?;
            }
            write!(f, "{x} == {}", render_value(c))?;
        }
        write!(f, "]({})", self.query)
    }
}

/// `constant + Σ coef·weight`, in closure order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClosedSum {
    pub constant: f64,
    pub terms: Vec<(f64, WeightClosed)>,
}

impl ClosedSum {
    pub fn add_scaled(&mut self, other: ClosedSum, k: f64) {
        self.constant += k * other.constant;
        self.terms.extend(other.terms.into_iter().map(|(c, w)| (k * c, w)));
    }

    /// Like terms merged, zero coefficients dropped, sorted by weight.
    pub fn canonical(&self) -> ClosedSum {
        let mut merged: BTreeMap<&WeightClosed, f64> = BTreeMap::new();
        for (c, w) in &self.terms {
            *merged.entry(w).or_insert(0.0) += c;
        }
        ClosedSum {
            constant: self.constant,
            terms: merged
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|(w, c)| (c, w.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for ClosedSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, w) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            if *c != 1.0 {
                write!(f, "{} * ", real(*c))?;
            }
            write!(f, "{w}")?;
            first = false;
        }
        if first {
            write!(f, "{}", real(self.constant))
        } else if self.constant != 0.0 {
            write!(f, " + {}", real(self.constant))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedConstraint {
    pub lhs: ClosedSum,
    pub rel: Rel,
    pub rhs: ClosedSum,
}

impl ClosedConstraint {
    /// `(Σ c·w, rel, bound)` with weights left and the constant right.
    pub fn canonical(&self) -> (ClosedSum, Rel, f64) {
        let mut row = self.lhs.clone();
        row.add_scaled(self.rhs.clone(), -1.0);
        let mut row = row.canonical();
        let b = -row.constant;
        row.constant = 0.0;
        (row, self.rel, b)
    }
}

impl fmt::Display for ClosedConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.rel {
            Rel::Le => "<=",
            Rel::Eq => "==",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

/// A program whose weight expressions are all closed.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedProgram {
    /// Weight-bearing queries by name; answers range over the free variables.
    pub queries: BTreeMap<String, ConjQuery>,
    pub objective: ClosedSum,
    pub constraints: Vec<ClosedConstraint>,
    pub minimize: bool,
}

impl ClosedProgram {
    /// Distinct weight expressions in first-occurrence order.
    pub fn weights(&self) -> Vec<&WeightClosed> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let sums = std::iter::once(&self.objective)
            .chain(self.constraints.iter().flat_map(|c| [&c.lhs, &c.rhs]));
        for s in sums {
            for (_, w) in &s.terms {
                if seen.insert(w) {
                    out.push(w);
                }
            }
        }
        out
    }
}

impl fmt::Display for ClosedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "maximize {}", self.objective)?;
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
