use std::collections::{BTreeMap, BTreeSet};

use super::{DecompError, DecompTree, NodeId};
use crate::cq::{evaluate, ConjQuery, Expr};
use crate::relcore::{AnswerSet, Database, Var};

/// `⟦q⟧^D` restricted to each bag.
pub type BagProjections = BTreeMap<NodeId, AnswerSet>;

/// Local join of atom projections per bag, then a bottom-up and a top-down
/// semi-join pass.
pub fn bag_projections(q: &ConjQuery, t: &DecompTree, db: &Database) -> Result<BagProjections, DecompError> {
    t.validate(q)?;
    let mut proj = BagProjections::new();
    for u in t.nodes() {
        proj.insert(u, local_relation(q, t.bag(u), db)?);
    }
    for u in t.post_order() {
        if let Some(p) = t.parent(u) {
            let reduced = proj[&p].semijoin(&proj[&u]);
            proj.insert(p, reduced);
        }
    }
    for u in t.bfs() {
        if let Some(p) = t.parent(u) {
            let reduced = proj[&u].semijoin(&proj[&p]);
            proj.insert(u, reduced);
        }
    }
    Ok(proj)
}

/// Join over all conjuncts of their projections onto `bag`.
fn local_relation(q: &ConjQuery, bag: &BTreeSet<Var>, db: &Database) -> Result<AnswerSet, DecompError> {
    let mut pieces: Vec<AnswerSet> = Vec::new();
    let mut filters: Vec<ConjQuery> = Vec::new();
    for c in q.conjuncts() {
        match c {
            ConjQuery::Atom(_, args) => {
                let vars: BTreeSet<Var> = args.iter().filter_map(|a| a.as_var().cloned()).collect();
                let keep: Vec<Var> = vars.intersection(bag).cloned().collect();
                let hidden = vars.iter().filter(|v| !bag.contains(*v)).rev().fold(c.clone(), |acc, v| {
                    ConjQuery::Exists(v.clone(), Box::new(acc))
                });
                pieces.push(evaluate(&hidden, db, &keep)?);
            }
            ConjQuery::Equal(a, b) => {
                let inside = |e: &Expr| e.as_var().is_none_or(|v| bag.contains(v));
                if inside(a) && inside(b) {
                    filters.push(c.clone());
                }
            }
            ConjQuery::True => {}
            ConjQuery::And(..) | ConjQuery::Exists(..) => unreachable!("conjuncts of a quantifier-free query"),
        }
    }
    pieces.sort_by_key(AnswerSet::len);
    let mut acc = AnswerSet::unit();
    let mut rest = pieces;
    while !rest.is_empty() {
        let next = rest
            .iter()
            .position(|p| p.vars().iter().any(|v| acc.position(v).is_some()))
            .unwrap_or(0);
        acc = acc.join(&rest.remove(next));
        if acc.is_empty() {
            return Ok(AnswerSet::empty(bag.iter().cloned().collect()));
        }
    }
    let missing: Vec<Var> = bag.iter().filter(|v| acc.position(v).is_none()).cloned().collect();
    if !filters.is_empty() || !missing.is_empty() {
        // Equalities and atom-free variables, joined in as one more piece.
        let mut cond = ConjQuery::and_all(filters);
        for v in &missing {
            cond = cond.and(ConjQuery::Equal(Expr::Var(v.clone()), Expr::Var(v.clone())));
        }
        let cond_vars: Vec<Var> = cond.free_vars().into_iter().collect();
        acc = acc.join(&evaluate(&cond, db, &cond_vars)?);
    }
    Ok(acc)
}
