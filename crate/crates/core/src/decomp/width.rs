use std::collections::BTreeSet;

use super::{DecompError, DecompTree};
use crate::cq::ConjQuery;
use crate::lpcore::{solve, LinConstraint, LinSum, LinearProgram, Status};
use crate::relcore::Var;

/// Minimal total weight on the query's atoms covering every bag variable.
pub fn fractional_bag_width(bag: &BTreeSet<Var>, q: &ConjQuery) -> Result<f64, DecompError> {
    if bag.is_empty() {
        return Ok(0.0);
    }
    let atoms: Vec<BTreeSet<Var>> = q
        .atoms()
        .iter()
        .map(|(_, args)| args.iter().filter_map(|a| a.as_var().cloned()).collect())
        .collect();
    let mut lp = LinearProgram::minimize(LinSum::zero());
    for i in 0..atoms.len() {
        lp.objective.add_term(format!("c{i}"), 1.0);
    }
    for x in bag {
        let mut cover = LinSum::zero();
        for (i, a) in atoms.iter().enumerate() {
            if a.contains(x) {
                cover.add_term(format!("c{i}"), 1.0);
            }
        }
        if cover.terms().is_empty() {
            return Err(DecompError::UncoverableVariable(x.clone()));
        }
        lp.constraints.push(LinConstraint::le(LinSum::constant(1.0), cover));
    }
    let sol = solve(&lp)?;
    debug_assert_eq!(sol.status, Status::Optimal);
    Ok(sol.value)
}

/// Largest fractional bag width over the tree.
pub fn fractional_width(t: &DecompTree, q: &ConjQuery) -> Result<f64, DecompError> {
    let mut w: f64 = 0.0;
    for u in t.nodes() {
        w = w.max(fractional_bag_width(t.bag(u), q)?);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::parse_query;

    fn bag(names: &[&str]) -> BTreeSet<Var> {
        names.iter().map(|n| Var::new(n)).collect()
    }

    #[test]
    fn examples() {
        let tri = parse_query("R(x, y) /\\ S(y, z) /\\ T(z, x)").unwrap();
        assert!((fractional_bag_width(&bag(&["x", "y", "z"]), &tri).unwrap() - 1.5).abs() < 1e-9);
        assert_eq!(fractional_bag_width(&bag(&[]), &tri).unwrap(), 0.0);
        let q = parse_query("R(x, y) /\\ S(y)").unwrap();
        assert!((fractional_bag_width(&bag(&["x", "y"]), &q).unwrap() - 1.0).abs() < 1e-9);
        let pad = parse_query("R(x) /\\ y == y").unwrap();
        assert!(matches!(
            fractional_bag_width(&bag(&["y"]), &pad),
            Err(DecompError::UncoverableVariable(_))
        ));
    }
}
