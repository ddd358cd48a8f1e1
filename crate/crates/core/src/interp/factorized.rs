use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{check_weights, nu_name, user_part, xi_name, InterpError, InterpretedLp, Origin, QueryLayout};
use crate::decomp::{bag_projections, DecompTree};
use crate::lang::{ClosedProgram, WeightClosed};
use crate::lpcore::{LinConstraint, LinSum};
use crate::relcore::{AnswerSet, Assignment, Database, Value, Var};

/// Bag-projection variables per query plus edge soundness equalities.
///
/// Weight queries must be quantifier free and each tree valid and compatible
/// with every target set used on its query.
pub fn factorized(
    cp: &ClosedProgram,
    trees: &BTreeMap<String, DecompTree>,
    db: &Database,
) -> Result<InterpretedLp, InterpError> {
    check_weights(cp)?;
    let weights = cp.weights();
    let nus: BTreeMap<WeightClosed, String> = weights.iter().map(|w| ((*w).clone(), nu_name(w))).collect();
    let (mut lp, mut origins) = user_part(cp, |w| LinSum::var(nus[w].clone()));
    let mut layouts = BTreeMap::new();
    for (name, q) in &cp.queries {
        let tree = trees
            .get(name)
            .ok_or_else(|| InterpError::MissingDecomposition(name.clone()))?;
        let err = |e| InterpError::Decomp(name.clone(), e);
        let projections = bag_projections(q, tree, db).map_err(err)?;

        let mine: Vec<&WeightClosed> = weights.iter().copied().filter(|w| &w.query == name).collect();
        let targets: Vec<BTreeSet<Var>> = mine.iter().map(|w| w.target_vars().into_iter().collect()).collect();
        let witnesses = tree.check_compatible(&targets).map_err(err)?;
        for (w, u) in mine.iter().zip(witnesses) {
            // Witness bag equals the target set, so the row is the target values.
            let row = w.target_values();
            let mut rho = LinSum::zero();
            if projections[&u].index_of_row(&row).is_some() {
                rho.add_term(xi_name(name, u, &row), 1.0);
            }
            lp = lp.subject_to(LinConstraint::eq(LinSum::var(nus[*w].clone()), rho));
            origins.push(Origin::Weight((*w).clone()));
        }

        for (u, v) in tree.edges() {
            let shared: Vec<Var> = tree.bag(u).intersection(tree.bag(v)).cloned().collect();
            let up = marginals(name, u, &projections[&u], &shared);
            let down = marginals(name, v, &projections[&v], &shared);
            let keys: BTreeSet<&Vec<Value>> = up.keys().chain(down.keys()).collect();
            for key in keys {
                let lhs = up.get(key).cloned().unwrap_or_else(LinSum::zero);
                let rhs = down.get(key).cloned().unwrap_or_else(LinSum::zero);
                lp = lp.subject_to(LinConstraint::eq(lhs, rhs));
                origins.push(Origin::Soundness {
                    query: name.clone(),
                    edge: (u, v),
                    shared: Assignment::from_pairs(shared.iter().cloned().zip(key.iter().cloned())),
                });
            }
        }
        layouts.insert(
            name.clone(),
            QueryLayout::Factorized {
                tree: tree.clone(),
                projections,
            },
        );
    }
    Ok(InterpretedLp {
        lp,
        origins,
        layouts,
        nus,
        minimize: cp.minimize,
    })
}

/// Sum of ξ variables of node `u` grouped by their values on `shared`.
fn marginals(qid: &str, u: usize, proj: &AnswerSet, shared: &[Var]) -> HashMap<Vec<Value>, LinSum> {
    let cols = proj.columns(shared).expect("shared variables lie in the bag");
    let mut out: HashMap<Vec<Value>, LinSum> = HashMap::new();
    for row in proj.rows() {
        let key = cols.iter().map(|&c| row[c].clone()).collect();
        out.entry(key).or_insert_with(LinSum::zero).add_term(xi_name(qid, u, row), 1.0);
    }
    out
}
