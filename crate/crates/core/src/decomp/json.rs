use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DecompError, DecompTree, NodeId};
use crate::relcore::Var;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NodeEntry {
    pub id: NodeId,
    pub bag: Vec<String>,
}

/// One tree as stored on disk; `query` names a prelude query or gives its text.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TreeFile {
    pub query: String,
    pub root: NodeId,
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<[NodeId; 2]>,
}

impl TreeFile {
    pub fn to_tree(&self) -> Result<DecompTree, DecompError> {
        let bags = self
            .nodes
            .iter()
            .map(|n| (n.id, n.bag.iter().map(|v| Var::new(v)).collect::<Vec<_>>()));
        let edges: Vec<(NodeId, NodeId)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        DecompTree::new(self.root, bags, &edges)
    }

    pub fn from_tree(query: &str, t: &DecompTree) -> TreeFile {
        TreeFile {
            query: query.to_string(),
            root: t.root(),
            nodes: t
                .nodes()
                .map(|u| NodeEntry {
                    id: u,
                    bag: t.bag(u).iter().map(|v| v.name().to_string()).collect(),
                })
                .collect(),
            edges: t.edges().iter().map(|&(p, c)| [p, c]).collect(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(TreeFile),
    Many(Vec<TreeFile>),
}

/// Accepts a single tree object or an array of them.
pub fn trees_from_json(text: &str) -> Result<Vec<TreeFile>, DecompError> {
    Ok(match serde_json::from_str(text)? {
        OneOrMany::One(t) => vec![t],
        OneOrMany::Many(ts) => ts,
    })
}

pub fn trees_to_json(trees: &[TreeFile]) -> String {
    serde_json::to_string_pretty(trees).expect("tree files serialize")
}

pub fn read_tree_file(path: &Path) -> Result<Vec<TreeFile>, DecompError> {
    let text = std::fs::read_to_string(path).map_err(|source| DecompError::Io {
        path: path.display().to_string(),
        source,
    })?;
    trees_from_json(&text)
}
