//! Linear programs that interpret closed weight expressions.

mod factorized;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::cq::syntax::render_value;
use crate::cq::{evaluate, CqError};
use crate::decomp::{BagProjections, DecompError, DecompTree, NodeId};
use crate::lang::{ClosedProgram, ClosedSum, Rel, WeightClosed};
use crate::lpcore::{LinConstraint, LinSum, LinearProgram};
use crate::relcore::{AnswerSet, Assignment, Database, Value, Var};

pub use factorized::factorized;

#[derive(Debug, thiserror::Error)]
pub enum InterpError {
    #[error(transparent)]
    Eval(#[from] CqError),
    #[error("query `{0}`: {1}")]
    Decomp(String, DecompError),
    #[error("no decomposition for query `{0}`")]
    MissingDecomposition(String),
    #[error("query `{0}` has no definition")]
    UnknownQuery(String),
}

/// Where a constraint of an interpretation comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum Origin {
    /// The closed constraint at this index.
    User(usize),
    /// `ν(W) = ⟨W⟩`.
    Weight(WeightClosed),
    /// Equal mass on both sides of a tree edge for one shared assignment.
    Soundness {
        query: String,
        edge: (NodeId, NodeId),
        shared: Assignment,
    },
}

impl Origin {
    pub fn tag(&self) -> &'static str {
        match self {
            Origin::User(_) => "user",
            Origin::Weight(_) => "weight",
            Origin::Soundness { .. } => "soundness",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::User(i) => write!(f, "user #{i}"),
            Origin::Weight(w) => write!(f, "weight {w}"),
            Origin::Soundness { query, edge, shared } => {
                write!(f, "soundness {query} edge ({}, {}) at {shared}", edge.0, edge.1)
            }
        }
    }
}

/// The LP variables standing for one query's weighting.
#[derive(Clone, Debug)]
pub enum QueryLayout {
    /// One variable per answer.
    Natural { answers: AnswerSet },
    /// One variable per bag-projection row.
    Factorized { tree: DecompTree, projections: BagProjections },
}

#[derive(Clone, Debug)]
pub struct InterpretedLp {
    pub lp: LinearProgram,
    /// Parallel to `lp.constraints`.
    pub origins: Vec<Origin>,
    pub layouts: BTreeMap<String, QueryLayout>,
    pub nus: BTreeMap<WeightClosed, String>,
    /// The objective is the negation of a source `minimize`.
    pub minimize: bool,
}

/// Variable and constraint counts by family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub theta: usize,
    pub xi: usize,
    pub nu: usize,
    pub user: usize,
    pub weight: usize,
    pub soundness: usize,
}

impl Counts {
    pub fn variables(&self) -> usize {
        self.theta + self.xi + self.nu
    }

    pub fn constraints(&self) -> usize {
        self.user + self.weight + self.soundness
    }
}

impl InterpretedLp {
    pub fn counts(&self) -> Counts {
        let mut c = Counts {
            nu: self.nus.len(),
            ..Counts::default()
        };
        for layout in self.layouts.values() {
            match layout {
                QueryLayout::Natural { answers } => c.theta += answers.len(),
                QueryLayout::Factorized { projections, .. } => {
                    c.xi += projections.values().map(AnswerSet::len).sum::<usize>()
                }
            }
        }
        for o in &self.origins {
            match o {
                Origin::User(_) => c.user += 1,
                Origin::Weight(_) => c.weight += 1,
                Origin::Soundness { .. } => c.soundness += 1,
            }
        }
        c
    }

    /// The source objective value for an LP optimum.
    pub fn reported_value(&self, lp_value: f64) -> f64 {
        if self.minimize {
            -lp_value
        } else {
            lp_value
        }
    }
}

fn render_row(row: &[Value]) -> String {
    let parts: Vec<String> = row.iter().map(render_value).collect();
    format!("({})", parts.join(","))
}

/// `th_<qid>_(v1,..)`, values in sorted-variable order.
pub fn theta_name(qid: &str, row: &[Value]) -> String {
    format!("th_{qid}_{}", render_row(row))
}

/// `xi_<qid>_n<node>_(v1,..)`.
pub fn xi_name(qid: &str, node: NodeId, row: &[Value]) -> String {
    format!("xi_{qid}_n{node}_{}", render_row(row))
}

/// `nu_<qid>_(x=c,..)`.
pub fn nu_name(w: &WeightClosed) -> String {
    let parts: Vec<String> = w
        .targets
        .iter()
        .map(|(x, c)| format!("{x}={}", render_value(c)))
        .collect();
    format!("nu_{}_({})", w.query, parts.join(","))
}

/// `qf(L)`: each weight-bearing query replaced by its quantifier-free form.
pub fn quantifier_eliminate(cp: &ClosedProgram) -> ClosedProgram {
    ClosedProgram {
        queries: cp.queries.iter().map(|(k, q)| (k.clone(), q.qf())).collect(),
        ..cp.clone()
    }
}

/// Answer rows grouped by their values on a target list.
struct TargetIndex {
    groups: HashMap<Vec<Value>, Vec<usize>>,
}

impl TargetIndex {
    fn new(answers: &AnswerSet, targets: &[Var]) -> TargetIndex {
        let cols: Vec<usize> = targets
            .iter()
            .map(|x| answers.position(x).expect("target among the free variables"))
            .collect();
        let mut groups: HashMap<Vec<Value>, Vec<usize>> = HashMap::new();
        for (i, row) in answers.rows().iter().enumerate() {
            groups.entry(cols.iter().map(|&c| row[c].clone()).collect()).or_default().push(i);
        }
        TargetIndex { groups }
    }
}

/// `⟨W⟩` per query: sums of θ variables over matching answers.
struct NaturalSums<'a> {
    answers: &'a BTreeMap<String, AnswerSet>,
    indexes: HashMap<(String, Vec<Var>), TargetIndex>,
}

impl NaturalSums<'_> {
    fn sum(&mut self, w: &WeightClosed) -> LinSum {
        let answers = &self.answers[&w.query];
        let key = (w.query.clone(), w.target_vars());
        let index = self
            .indexes
            .entry(key)
            .or_insert_with(|| TargetIndex::new(answers, &w.target_vars()));
        let mut s = LinSum::zero();
        if let Some(rows) = index.groups.get(&w.target_values()) {
            for &i in rows {
                s.add_term(theta_name(&w.query, &answers.rows()[i]), 1.0);
            }
        }
        s
    }
}

pub(crate) fn answers_of(cp: &ClosedProgram, db: &Database) -> Result<BTreeMap<String, AnswerSet>, InterpError> {
    cp.queries
        .iter()
        .map(|(name, q)| {
            let fv: Vec<Var> = q.free_vars().into_iter().collect();
            Ok((name.clone(), evaluate(q, db, &fv)?))
        })
        .collect()
}

pub(crate) fn check_weights(cp: &ClosedProgram) -> Result<(), InterpError> {
    for w in cp.weights() {
        if !cp.queries.contains_key(&w.query) {
            return Err(InterpError::UnknownQuery(w.query.clone()));
        }
    }
    Ok(())
}

fn linear(s: &ClosedSum, weight: &mut impl FnMut(&WeightClosed) -> LinSum) -> LinSum {
    let mut out = LinSum::constant(s.constant);
    for (c, w) in &s.terms {
        out.add_scaled(&weight(w), *c);
    }
    out
}

/// The user objective and constraints with each weight mapped by `weight`.
pub(crate) fn user_part(
    cp: &ClosedProgram,
    mut weight: impl FnMut(&WeightClosed) -> LinSum,
) -> (LinearProgram, Vec<Origin>) {
    let mut lp = LinearProgram::maximize(linear(&cp.objective, &mut weight));
    let mut origins = Vec::new();
    for (i, c) in cp.constraints.iter().enumerate() {
        let lhs = linear(&c.lhs, &mut weight);
        let rhs = linear(&c.rhs, &mut weight);
        lp = lp.subject_to(match c.rel {
            Rel::Le => LinConstraint::le(lhs, rhs),
            Rel::Eq => LinConstraint::eq(lhs, rhs),
        });
        origins.push(Origin::User(i));
    }
    (lp, origins)
}

/// One θ variable per query answer, each weight replaced by its defining sum.
pub fn natural(cp: &ClosedProgram, db: &Database) -> Result<InterpretedLp, InterpError> {
    check_weights(cp)?;
    let answers = answers_of(cp, db)?;
    let mut sums = NaturalSums {
        answers: &answers,
        indexes: HashMap::new(),
    };
    let (lp, origins) = user_part(cp, |w| sums.sum(w));
    Ok(InterpretedLp {
        lp,
        origins,
        layouts: answers
            .into_iter()
            .map(|(k, answers)| (k, QueryLayout::Natural { answers }))
            .collect(),
        nus: BTreeMap::new(),
        minimize: cp.minimize,
    })
}

/// Natural interpretation with one fresh variable per distinct weight and
/// its defining equality.
pub fn replacement(cp: &ClosedProgram, db: &Database) -> Result<InterpretedLp, InterpError> {
    check_weights(cp)?;
    let answers = answers_of(cp, db)?;
    let nus: BTreeMap<WeightClosed, String> = cp.weights().into_iter().map(|w| (w.clone(), nu_name(w))).collect();
    let (mut lp, mut origins) = user_part(cp, |w| LinSum::var(nus[w].clone()));
    let mut sums = NaturalSums {
        answers: &answers,
        indexes: HashMap::new(),
    };
    for w in cp.weights() {
        lp = lp.subject_to(LinConstraint::eq(LinSum::var(nus[w].clone()), sums.sum(w)));
        origins.push(Origin::Weight(w.clone()));
    }
    Ok(InterpretedLp {
        lp,
        origins,
        layouts: answers
            .into_iter()
            .map(|(k, answers)| (k, QueryLayout::Natural { answers }))
            .collect(),
        nus,
        minimize: cp.minimize,
    })
}
