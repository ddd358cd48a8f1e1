//! Decomposition trees of quantifier-free conjunctive queries.

mod heuristic;
mod json;
mod normalize;
mod project;
mod width;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::cq::{ConjQuery, CqError, Expr};
use crate::lpcore::LpError;
use crate::relcore::Var;
pub use heuristic::{attach_target_leaves, compatible_decomposition, heuristic_decompose};
pub use json::{read_tree_file, trees_from_json, trees_to_json, TreeFile};
pub use normalize::{normalize, normalize_with_origin};
pub use project::{bag_projections, BagProjections};
pub use width::{fractional_bag_width, fractional_width};

pub type NodeId = usize;

#[derive(Debug, thiserror::Error)]
pub enum DecompError {
    #[error("not a rooted tree: {0}")]
    NotATree(String),
    #[error("nodes containing {0} are not connected")]
    DisconnectedVariable(Var),
    #[error("no bag covers {0}")]
    UncoveredAtom(String),
    #[error("free variable {0} appears in no bag")]
    UncoveredVariable(Var),
    #[error("bag variable {0} is not free in the query")]
    ForeignVariable(Var),
    #[error("variable {0} occurs in no relational atom")]
    UncoverableVariable(Var),
    #[error("no bag equals the weight target {{{}}}", fmt_vars(.0))]
    IncompatibleTarget(Vec<Var>),
    #[error("decompositions apply to quantifier-free queries")]
    NotQuantifierFree,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Eval(#[from] CqError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn fmt_vars(vs: &[Var]) -> String {
    vs.iter().map(Var::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Extend(Var),
    Project(Var),
    Join(usize),
}

/// A rooted tree with a variable bag per node; edges point away from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompTree {
    root: NodeId,
    bags: BTreeMap<NodeId, BTreeSet<Var>>,
    children: BTreeMap<NodeId, Vec<NodeId>>,
    parent: BTreeMap<NodeId, NodeId>,
}

impl DecompTree {
    pub fn new<B, V>(root: NodeId, bags: B, edges: &[(NodeId, NodeId)]) -> Result<DecompTree, DecompError>
    where
        B: IntoIterator<Item = (NodeId, V)>,
        V: IntoIterator<Item = Var>,
    {
        let mut bag_map = BTreeMap::new();
        for (id, vars) in bags {
            if bag_map.insert(id, vars.into_iter().collect()).is_some() {
                return Err(DecompError::NotATree(format!("node {id} listed twice")));
            }
        }
        if !bag_map.contains_key(&root) {
            return Err(DecompError::NotATree(format!("root {root} is not a node")));
        }
        let mut children: BTreeMap<NodeId, Vec<NodeId>> = bag_map.keys().map(|&k| (k, Vec::new())).collect();
        let mut parent = BTreeMap::new();
        for &(p, c) in edges {
            if !bag_map.contains_key(&p) || !bag_map.contains_key(&c) {
                return Err(DecompError::NotATree(format!("edge ({p}, {c}) names an unknown node")));
            }
            if c == root {
                return Err(DecompError::NotATree(format!("edge ({p}, {c}) enters the root")));
            }
            if parent.insert(c, p).is_some() {
                return Err(DecompError::NotATree(format!("node {c} has two parents")));
            }
            children.get_mut(&p).unwrap().push(c);
        }
        for list in children.values_mut() {
            list.sort_unstable();
        }
        let t = DecompTree {
            root,
            bags: bag_map,
            children,
            parent,
        };
        let reached = t.bfs().len();
        if reached != t.bags.len() {
            return Err(DecompError::NotATree(format!(
                "{} of {} nodes unreachable from the root",
                t.bags.len() - reached,
                t.bags.len()
            )));
        }
        Ok(t)
    }

    /// One node holding `vars`.
    pub fn single(vars: impl IntoIterator<Item = Var>) -> DecompTree {
        DecompTree::new(0, [(0, vars.into_iter().collect::<Vec<_>>())], &[]).expect("one node is a tree")
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn bag(&self, u: NodeId) -> &BTreeSet<Var> {
        &self.bags[&u]
    }

    pub fn bag_vec(&self, u: NodeId) -> Vec<Var> {
        self.bags[&u].iter().cloned().collect()
    }

    pub fn children(&self, u: NodeId) -> &[NodeId] {
        &self.children[&u]
    }

    pub fn parent(&self, u: NodeId) -> Option<NodeId> {
        self.parent.get(&u).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.bags.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    /// `(parent, child)` pairs in BFS order of the child.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.bfs()
            .into_iter()
            .filter_map(|c| self.parent(c).map(|p| (p, c)))
            .collect()
    }

    /// Nodes by increasing depth, children in id order.
    pub fn bfs(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.bags.len());
        let mut queue = VecDeque::from([self.root]);
        let mut seen = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            if !seen.insert(u) {
                continue;
            }
            out.push(u);
            queue.extend(self.children[&u].iter().copied());
        }
        out
    }

    /// Children before parents.
    pub fn post_order(&self) -> Vec<NodeId> {
        let mut order = self.bfs();
        order.reverse();
        order
    }

    pub fn depth(&self, mut u: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent(u) {
            u = p;
            d += 1;
        }
        d
    }

    /// Union of bags in the subtree rooted at `u`.
    pub fn subtree_vars(&self, u: NodeId) -> BTreeSet<Var> {
        let mut out = self.bags[&u].clone();
        for &c in &self.children[&u] {
            out.extend(self.subtree_vars(c));
        }
        out
    }

    pub fn all_vars(&self) -> BTreeSet<Var> {
        self.bags.values().flatten().cloned().collect()
    }

    pub fn kind(&self, u: NodeId) -> Option<NodeKind> {
        let bag = &self.bags[&u];
        let kids = &self.children[&u];
        match kids.len() {
            0 => Some(NodeKind::Leaf),
            1 => {
                let cb = &self.bags[&kids[0]];
                if cb == bag {
                    Some(NodeKind::Join(1))
                } else if bag.len() == cb.len() + 1 && cb.is_subset(bag) {
                    bag.difference(cb).next().cloned().map(NodeKind::Extend)
                } else if cb.len() == bag.len() + 1 && bag.is_subset(cb) {
                    cb.difference(bag).next().cloned().map(NodeKind::Project)
                } else {
                    None
                }
            }
            k => kids
                .iter()
                .all(|c| &self.bags[c] == bag)
                .then_some(NodeKind::Join(k)),
        }
    }

    /// Every node classifies and the root bag is empty.
    pub fn is_normalized(&self) -> bool {
        self.bags[&self.root].is_empty() && self.nodes().all(|u| self.kind(u).is_some())
    }

    pub fn validate(&self, q: &ConjQuery) -> Result<(), DecompError> {
        if !q.is_quantifier_free() {
            return Err(DecompError::NotQuantifierFree);
        }
        for x in self.all_vars() {
            let tops = self
                .nodes()
                .filter(|&u| self.bags[&u].contains(&x))
                .filter(|&u| self.parent(u).is_none_or(|p| !self.bags[&p].contains(&x)))
                .count();
            if tops != 1 {
                return Err(DecompError::DisconnectedVariable(x));
            }
        }
        let fv = q.free_vars();
        let covered = self.all_vars();
        if let Some(x) = fv.difference(&covered).next() {
            return Err(DecompError::UncoveredVariable(x.clone()));
        }
        if let Some(x) = covered.difference(&fv).next() {
            return Err(DecompError::ForeignVariable(x.clone()));
        }
        for (label, vars) in hyperedges(q) {
            if !self.bags.values().any(|b| vars.is_subset(b)) {
                return Err(DecompError::UncoveredAtom(label));
            }
        }
        Ok(())
    }

    /// The witness node per target: the shallowest bag equal to it, ties to the smaller id.
    pub fn check_compatible(&self, targets: &[BTreeSet<Var>]) -> Result<Vec<NodeId>, DecompError> {
        let order = self.bfs();
        targets
            .iter()
            .map(|t| {
                order
                    .iter()
                    .filter(|&&u| &self.bags[&u] == t)
                    .min_by_key(|&&u| (self.depth(u), u))
                    .copied()
                    .ok_or_else(|| DecompError::IncompatibleTarget(t.iter().cloned().collect()))
            })
            .collect()
    }

    /// Same shape with node ids renumbered in BFS order from 0.
    pub fn renumbered(&self) -> DecompTree {
        let order = self.bfs();
        let id: BTreeMap<NodeId, NodeId> = order.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let bags: Vec<(NodeId, Vec<Var>)> = order.iter().map(|u| (id[u], self.bag_vec(*u))).collect();
        let edges: Vec<(NodeId, NodeId)> = self.edges().iter().map(|(p, c)| (id[p], id[c])).collect();
        DecompTree::new(0, bags, &edges).expect("renumbering keeps the tree")
    }
}

/// Variable sets that some bag must contain: relational atoms and
/// variable-to-variable equalities.
pub(crate) fn hyperedges(q: &ConjQuery) -> Vec<(String, BTreeSet<Var>)> {
    q.conjuncts()
        .into_iter()
        .filter_map(|c| match c {
            ConjQuery::Atom(_, args) => Some((
                c.to_string(),
                args.iter().filter_map(|a| a.as_var().cloned()).collect(),
            )),
            ConjQuery::Equal(Expr::Var(a), Expr::Var(b)) if a != b => {
                Some((c.to_string(), [a.clone(), b.clone()].into_iter().collect()))
            }
            _ => None,
        })
        .collect()
}
