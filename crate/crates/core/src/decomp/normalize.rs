use std::collections::{BTreeMap, BTreeSet};

use super::{DecompTree, NodeId};
use crate::relcore::Var;

struct Builder {
    bags: Vec<(NodeId, Vec<Var>)>,
    edges: Vec<(NodeId, NodeId)>,
    origin: BTreeMap<NodeId, NodeId>,
}

impl Builder {
    fn node(&mut self, bag: &BTreeSet<Var>, origin: NodeId) -> NodeId {
        let id = self.bags.len();
        self.bags.push((id, bag.iter().cloned().collect()));
        self.origin.insert(id, origin);
        id
    }

    /// Walks from `bottom` (bag `from`) to a node with bag `to`: project, then extend.
    fn chain(&mut self, mut bottom: NodeId, from: &BTreeSet<Var>, to: &BTreeSet<Var>, low: NodeId, high: NodeId) -> NodeId {
        let mut bag = from.clone();
        for x in from.difference(to) {
            bag.remove(x);
            let n = self.node(&bag, low);
            self.edges.push((n, bottom));
            bottom = n;
        }
        for x in to.difference(from) {
            bag.insert(x.clone());
            let n = self.node(&bag, high);
            self.edges.push((n, bottom));
            bottom = n;
        }
        bottom
    }

    fn build(&mut self, t: &DecompTree, u: NodeId) -> NodeId {
        let bag = t.bag(u);
        let kids = t.children(u);
        if kids.is_empty() {
            return self.node(bag, u);
        }
        let tops: Vec<NodeId> = kids
            .iter()
            .map(|&v| {
                let n = self.build(t, v);
                self.chain(n, t.bag(v), bag, v, u)
            })
            .collect();
        if tops.len() == 1 {
            return tops[0];
        }
        let j = self.node(bag, u);
        self.edges.extend(tops.iter().map(|&c| (j, c)));
        j
    }
}

/// Extend/project/join/leaf form with an empty root bag; joins are not binarized.
pub fn normalize(t: &DecompTree) -> DecompTree {
    normalize_with_origin(t).0
}

/// Also maps each new node to an input node whose bag contains the new bag.
pub fn normalize_with_origin(t: &DecompTree) -> (DecompTree, BTreeMap<NodeId, NodeId>) {
    let mut b = Builder {
        bags: Vec::new(),
        edges: Vec::new(),
        origin: BTreeMap::new(),
    };
    let top = b.build(t, t.root());
    let root = b.chain(top, t.bag(t.root()), &BTreeSet::new(), t.root(), t.root());
    let tree = DecompTree::new(root, b.bags, &b.edges).expect("normalization yields a tree");
    (tree, b.origin)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{path_tree, vs};
    use super::super::{fractional_width, NodeKind};
    use super::*;
    use crate::cq::parse_query;

    #[test]
    fn trivial_tree_becomes_project_chain() {
        let q = parse_query("R1(x) /\\ R2(y)").unwrap();
        let n = normalize(&DecompTree::single(vs(&["x", "y"])));
        assert!(n.is_normalized());
        assert_eq!(n.len(), 3);
        assert!(n.bag(n.root()).is_empty());
        assert!(matches!(n.kind(n.root()), Some(NodeKind::Project(_))));
        n.validate(&q).unwrap();
    }

    #[test]
    fn path_tree_joins_under_project() {
        let q = parse_query("R(x, y) /\\ R(y, z)").unwrap();
        let n = normalize(&path_tree());
        n.validate(&q).unwrap();
        assert!(n.is_normalized());
        let root_kind = n.kind(n.root()).unwrap();
        assert_eq!(root_kind, NodeKind::Project(Var::new("y")));
        let below = n.children(n.root())[0];
        assert_eq!(n.kind(below), Some(NodeKind::Join(2)));
        assert_eq!(fractional_width(&n, &q).unwrap(), fractional_width(&path_tree(), &q).unwrap());
    }

    #[test]
    fn idempotent_up_to_ids() {
        let once = normalize(&path_tree());
        let twice = normalize(&once);
        let bags = |t: &DecompTree| {
            let mut v: Vec<_> = t.nodes().map(|u| t.bag_vec(u)).collect();
            v.sort();
            v
        };
        assert!(twice.is_normalized());
        assert_eq!(bags(&once), bags(&twice));
    }

    #[test]
    fn origins_contain_new_bags() {
        let (n, origin) = normalize_with_origin(&path_tree());
        for u in n.nodes() {
            assert!(n.bag(u).is_subset(path_tree().bag(origin[&u])));
        }
    }
}
