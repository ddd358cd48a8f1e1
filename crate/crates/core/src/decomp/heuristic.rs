use std::collections::{BTreeMap, BTreeSet};

use super::{hyperedges, normalize, DecompError, DecompTree, NodeId};
use crate::cq::{ConjQuery, Expr};
use crate::relcore::Var;

/// Min-fill elimination ordering; bags that are subsets of a neighbour are merged away.
pub fn heuristic_decompose(q: &ConjQuery) -> DecompTree {
    let vars: Vec<Var> = q.free_vars().into_iter().collect();
    if vars.is_empty() {
        return DecompTree::single([]);
    }
    let mut adj: BTreeMap<Var, BTreeSet<Var>> = vars.iter().map(|v| (v.clone(), BTreeSet::new())).collect();
    for (_, edge) in hyperedges(q) {
        for a in &edge {
            for b in &edge {
                if a != b {
                    adj.get_mut(a).unwrap().insert(b.clone());
                }
            }
        }
    }
    let fill = |adj: &BTreeMap<Var, BTreeSet<Var>>, v: &Var| {
        let ns: Vec<&Var> = adj[v].iter().collect();
        let mut missing = 0;
        for i in 0..ns.len() {
            for j in i + 1..ns.len() {
                if !adj[ns[i]].contains(ns[j]) {
                    missing += 1;
                }
            }
        }
        missing
    };
    let mut order: Vec<Var> = Vec::new();
    let mut bag_of: BTreeMap<Var, BTreeSet<Var>> = BTreeMap::new();
    while !adj.is_empty() {
        let v = adj
            .keys()
            .min_by_key(|v| (fill(&adj, v), adj[*v].len(), (*v).clone()))
            .cloned()
            .unwrap();
        let ns = adj.remove(&v).unwrap();
        for a in &ns {
            let row = adj.get_mut(a).unwrap();
            row.remove(&v);
            row.extend(ns.iter().filter(|b| *b != a).cloned());
        }
        let mut bag = ns;
        bag.insert(v.clone());
        bag_of.insert(v.clone(), bag);
        order.push(v);
    }
    // Parent of v's bag: the earliest-eliminated neighbour after v.
    let pos: BTreeMap<&Var, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut parent: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for (i, v) in order.iter().enumerate() {
        if let Some(p) = bag_of[v].iter().filter(|w| *w != v).map(|w| pos[w]).min() {
            parent.insert(i, p);
        }
    }
    let mut bags: BTreeMap<NodeId, BTreeSet<Var>> = order.iter().enumerate().map(|(i, v)| (i, bag_of[v].clone())).collect();
    // Components hang under the last node.
    let last = order.len() - 1;
    for i in 0..last {
        parent.entry(i).or_insert(last);
    }
    // Contract edges whose bags are nested.
    while let Some((&c, &p)) = parent
        .iter()
        .find(|(c, p)| bags[*c].is_subset(&bags[*p]) || bags[*p].is_subset(&bags[*c]))
    {
        let merged = if bags[&c].len() >= bags[&p].len() { bags[&c].clone() } else { bags[&p].clone() };
        bags.insert(p, merged);
        bags.remove(&c);
        parent.remove(&c);
        for q in parent.values_mut() {
            if *q == c {
                *q = p;
            }
        }
    }
    let root = *bags.keys().find(|k| !parent.contains_key(k)).unwrap();
    let edges: Vec<(NodeId, NodeId)> = parent.iter().map(|(&c, &p)| (p, c)).collect();
    let nodes: Vec<(NodeId, Vec<Var>)> = bags.into_iter().map(|(k, b)| (k, b.into_iter().collect())).collect();
    DecompTree::new(root, nodes, &edges).expect("elimination tree").renumbered()
}

/// Adds a leaf with bag exactly `target` under the shallowest node whose bag
/// contains it, for each target set that is not already a bag.
pub fn attach_target_leaves(t: &DecompTree, targets: &[BTreeSet<Var>]) -> Result<DecompTree, DecompError> {
    let mut bags: BTreeMap<NodeId, BTreeSet<Var>> = t.nodes().map(|u| (u, t.bag(u).clone())).collect();
    let mut edges = t.edges();
    let mut next = t.nodes().max().map_or(0, |m| m + 1);
    for target in targets {
        if bags.values().any(|b| b == target) {
            continue;
        }
        let host = t
            .bfs()
            .into_iter()
            .filter(|&u| target.is_subset(t.bag(u)))
            .min_by_key(|&u| (t.depth(u), u))
            .ok_or_else(|| DecompError::IncompatibleTarget(target.iter().cloned().collect()))?;
        bags.insert(next, target.clone());
        edges.push((host, next));
        next += 1;
    }
    DecompTree::new(t.root(), bags, &edges)
}

/// A normalized min-fill decomposition of `q` compatible with `targets`:
/// each target set is treated as an extra hyperedge, then given its own leaf.
pub fn compatible_decomposition(q: &ConjQuery, targets: &[BTreeSet<Var>]) -> Result<DecompTree, DecompError> {
    let padded = targets.iter().enumerate().fold(q.clone(), |acc, (i, target)| {
        let args = target.iter().cloned().map(Expr::Var).collect();
        acc.and(ConjQuery::Atom(format!(" target{i}"), args))
    });
    let t = heuristic_decompose(&padded);
    Ok(normalize(&attach_target_leaves(&t, targets)?))
}

#[cfg(test)]
mod tests {
    use super::super::fractional_width;
    use super::*;
    use crate::cq::parse_query;

    #[test]
    fn path_has_width_one() {
        let q = parse_query("R(x, y) /\\ R(y, z)").unwrap();
        let t = heuristic_decompose(&q);
        t.validate(&q).unwrap();
        assert!(t.nodes().all(|u| t.bag(u).len() <= 2));
        assert!((fractional_width(&t, &q).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_atom_single_bag() {
        let q = parse_query("R(x, y)").unwrap();
        let t = heuristic_decompose(&q);
        assert_eq!(t.len(), 1);
        assert_eq!(t.bag(t.root()).len(), 2);
    }

    #[test]
    fn triangle_one_bag() {
        let q = parse_query("R(x, y) /\\ S(y, z) /\\ T(z, x)").unwrap();
        let t = heuristic_decompose(&q);
        assert_eq!(t.len(), 1);
        assert!((fractional_width(&t, &q).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn disconnected_and_padded() {
        let q = parse_query("R(x) /\\ S(y) /\\ z == z /\\ T(y, w)").unwrap();
        let t = heuristic_decompose(&q);
        t.validate(&q).unwrap();
        assert!(heuristic_decompose(&ConjQuery::True).validate(&ConjQuery::True).is_ok());
    }

    #[test]
    fn compatible_with_targets() {
        let q = parse_query("R(x, y) /\\ S(y, z)").unwrap();
        let set = |vs: &[&str]| vs.iter().map(|v| Var::new(v)).collect::<BTreeSet<Var>>();
        let targets = vec![set(&["x"]), set(&["x", "z"]), BTreeSet::new()];
        let t = compatible_decomposition(&q, &targets).unwrap();
        t.validate(&q).unwrap();
        assert!(t.is_normalized());
        assert_eq!(t.check_compatible(&targets).unwrap().len(), 3);
    }
}
