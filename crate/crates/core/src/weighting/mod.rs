//! Weightings of answer sets, their projections onto tree bags, and the
//! reconstruction of a weighting from a sound collection of bag weightings.

use std::collections::{BTreeMap, BTreeSet};

use crate::decomp::{normalize, normalize_with_origin, DecompTree, NodeId, NodeKind};
use crate::interp::{theta_name, xi_name, InterpretedLp, QueryLayout};
use crate::lpcore::{LpSolution, Status};
use crate::relcore::{AnswerSet, Assignment, Value, Var};

/// Denominators at or below this are treated as zero.
pub const ZERO_GUARD: f64 = 1e-12;
/// Default tolerance of [`check_sound`].
pub const SOUND_TOL: f64 = 1e-7;
/// Fallback tolerance for LP solutions that drift slightly.
pub const LOOSE_SOUND_TOL: f64 = 1e-5;
pub const CONJ_CHECK_LIMIT: usize = 10_000;
pub const RECONSTRUCT_LIMIT: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum WeightingError {
    #[error("variables {0:?} are not all columns of the base")]
    BadSubset(Vec<Var>),
    #[error("{values} weights for {rows} rows")]
    LengthMismatch { rows: usize, values: usize },
    #[error("negative weight {0}")]
    Negative(f64),
    #[error("node {0} has no weight for a row of its bag projection")]
    Incomplete(NodeId),
    #[error("unsound collection: {0}")]
    Unsound(Violation),
    #[error("{size} assignments exceed the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("{0} is not an answer")]
    NotAnAnswer(Assignment),
    #[error("tree is not normalized")]
    NotNormalized,
    #[error("solution is not optimal")]
    NotOptimal,
    #[error("no layout for query `{0}`")]
    UnknownQuery(String),
}

/// A nonnegative weight per row of `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct Weighting {
    base: AnswerSet,
    values: Vec<f64>,
}

impl Weighting {
    pub fn new(base: AnswerSet, values: Vec<f64>) -> Result<Weighting, WeightingError> {
        if base.len() != values.len() {
            return Err(WeightingError::LengthMismatch {
                rows: base.len(),
                values: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(WeightingError::Negative(bad));
        }
        Ok(Weighting { base, values })
    }

    pub fn uniform(base: AnswerSet, value: f64) -> Weighting {
        let values = vec![value; base.len()];
        Weighting { base, values }
    }

    pub fn base(&self) -> &AnswerSet {
        &self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn get_row(&self, row: &[Value]) -> Option<f64> {
        self.base.index_of_row(row).map(|i| self.values[i])
    }

    pub fn get(&self, a: &Assignment) -> Option<f64> {
        if a.len() != self.base.vars().len() {
            return None;
        }
        self.get_row(&self.base.row_of(a)?)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Value], f64)> {
        self.base.rows().iter().map(Vec::as_slice).zip(self.values.iter().copied())
    }

    /// Largest absolute difference to `other` over the union of both bases.
    pub fn max_diff(&self, other: &Weighting) -> f64 {
        let mut d: f64 = 0.0;
        for (row, v) in self.iter() {
            d = d.max((v - other.get_row(row).unwrap_or(0.0)).abs());
        }
        for (row, v) in other.iter() {
            d = d.max((v - self.get_row(row).unwrap_or(0.0)).abs());
        }
        d
    }

    /// Rows as `x=c,...,weight` lines.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        for (row, v) in self.iter() {
            let mut rec: Vec<String> = self
                .base
                .vars()
                .iter()
                .zip(row)
                .map(|(x, c)| format!("{x}={c}"))
                .collect();
            rec.push(v.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// For each row of `from`, the index of its restriction in `to`.
fn restriction_index(from: &AnswerSet, to: &AnswerSet) -> Result<Vec<Option<usize>>, WeightingError> {
    let cols = from
        .columns(to.vars())
        .map_err(|_| WeightingError::BadSubset(to.vars().to_vec()))?;
    let mut key = Vec::with_capacity(cols.len());
    Ok(from
        .rows()
        .iter()
        .map(|r| {
            key.clear();
            key.extend(cols.iter().map(|&c| r[c].clone()));
            to.index_of_row(&key)
        })
        .collect())
}

/// `A[α']` for every `α' ∈ A|X'`: row indices of `a`, grouped by restriction.
pub fn extension_index(a: &AnswerSet, xs: &[Var]) -> Result<(AnswerSet, Vec<Vec<usize>>), WeightingError> {
    let proj = a.restrict(xs).map_err(|_| WeightingError::BadSubset(xs.to_vec()))?;
    let mut groups = vec![Vec::new(); proj.len()];
    for (i, j) in restriction_index(a, &proj)?.into_iter().enumerate() {
        groups[j.expect("restriction of a row lies in the projection")].push(i);
    }
    debug_assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), a.len());
    Ok((proj, groups))
}

/// `π_X'(ω)(α') = Σ_{α ∈ A[α']} ω(α)`.
pub fn project_weighting(w: &Weighting, xs: &[Var]) -> Result<Weighting, WeightingError> {
    let (proj, groups) = extension_index(&w.base, xs)?;
    let values = groups.iter().map(|g| g.iter().map(|&i| w.values[i]).sum()).collect();
    Ok(Weighting { base: proj, values })
}

/// One weighting per node over the bag projection of a common answer set.
#[derive(Clone, Debug)]
pub struct WeightingCollection {
    pub tree: DecompTree,
    pub nodes: BTreeMap<NodeId, Weighting>,
}

impl WeightingCollection {
    pub fn node(&self, u: NodeId) -> &Weighting {
        &self.nodes[&u]
    }

    /// The same collection on the normalized tree; each new bag is projected
    /// from the original bag it came from.
    pub fn normalized(&self) -> Result<WeightingCollection, WeightingError> {
        if self.tree.is_normalized() {
            return Ok(self.clone());
        }
        let (tree, origin) = normalize_with_origin(&self.tree);
        let nodes = tree
            .nodes()
            .map(|u| Ok((u, project_weighting(self.node(origin[&u]), &tree.bag_vec(u))?)))
            .collect::<Result<_, WeightingError>>()?;
        Ok(WeightingCollection { tree, nodes })
    }

    /// Largest per-row difference to `other` across all nodes.
    pub fn max_diff(&self, other: &WeightingCollection) -> f64 {
        self.nodes
            .iter()
            .map(|(u, w)| other.nodes.get(u).map_or(f64::INFINITY, |o| w.max_diff(o)))
            .fold(0.0, f64::max)
    }
}

/// `Π_T(ω)`: the projection of `w` onto every bag.
pub fn collection_from_weighting(w: &Weighting, t: &DecompTree) -> Result<WeightingCollection, WeightingError> {
    let nodes = t
        .nodes()
        .map(|u| Ok((u, project_weighting(w, &t.bag_vec(u))?)))
        .collect::<Result<_, WeightingError>>()?;
    Ok(WeightingCollection { tree: t.clone(), nodes })
}

/// A soundness failure: unequal masses on the shared variables of two nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub nodes: (NodeId, NodeId),
    pub shared: Assignment,
    pub lhs: f64,
    pub rhs: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (u, v) = self.nodes;
        write!(f, "nodes ({u}, {v}) at {}: {} != {}", self.shared, self.lhs, self.rhs)
    }
}

fn close_enough(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

fn check_pair(c: &WeightingCollection, u: NodeId, v: NodeId, tol: f64) -> Result<(), Violation> {
    let shared: Vec<Var> = c.tree.bag(u).intersection(c.tree.bag(v)).cloned().collect();
    let pu = project_weighting(c.node(u), &shared).expect("shared variables lie in the bag");
    let pv = project_weighting(c.node(v), &shared).expect("shared variables lie in the bag");
    let keys: BTreeSet<&[Value]> = pu.iter().chain(pv.iter()).map(|(r, _)| r).collect();
    for key in keys {
        let lhs = pu.get_row(key).unwrap_or(0.0);
        let rhs = pv.get_row(key).unwrap_or(0.0);
        if !close_enough(lhs, rhs, tol) {
            return Err(Violation {
                nodes: (u, v),
                shared: Assignment::from_pairs(shared.iter().cloned().zip(key.iter().cloned())),
                lhs,
                rhs,
            });
        }
    }
    Ok(())
}

/// Edge-wise soundness, relative tolerance `tol`; edges in BFS order.
pub fn check_sound(c: &WeightingCollection, tol: f64) -> Result<(), Violation> {
    c.tree.edges().into_iter().try_for_each(|(u, v)| check_pair(c, u, v, tol))
}

/// Soundness for every pair of nodes, not only tree edges.
pub fn check_sound_pairwise(c: &WeightingCollection, tol: f64) -> Result<(), Violation> {
    let nodes: Vec<NodeId> = c.tree.nodes().collect();
    for (i, &u) in nodes.iter().enumerate() {
        for &v in &nodes[i + 1..] {
            check_pair(c, u, v, tol)?;
        }
    }
    Ok(())
}

/// A pair of partial answers at node `u` whose union leaves the set.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjWitness {
    pub node: NodeId,
    pub at: Assignment,
    pub up: Assignment,
    pub down: Assignment,
}

/// Variables of the nodes outside the strict subtree of `u`.
fn up_vars(t: &DecompTree, u: NodeId) -> BTreeSet<Var> {
    let below: BTreeSet<NodeId> = {
        let mut s = BTreeSet::new();
        let mut stack = t.children(u).to_vec();
        while let Some(v) = stack.pop() {
            s.insert(v);
            stack.extend_from_slice(t.children(v));
        }
        s
    };
    t.nodes()
        .filter(|v| !below.contains(v))
        .flat_map(|v| t.bag(v).iter().cloned())
        .collect()
}

/// Brute-force test that `a` is conjunctively decomposed by the normal form
/// of `t`: for every node and bag assignment, any upper and lower partial
/// answers recombine. Node ids in a witness refer to the normalized tree.
pub fn check_conj_decomposed(a: &AnswerSet, t: &DecompTree) -> Result<Option<ConjWitness>, WeightingError> {
    if a.len() > CONJ_CHECK_LIMIT {
        return Err(WeightingError::TooLarge {
            size: a.len(),
            limit: CONJ_CHECK_LIMIT,
        });
    }
    let t = &normalize(t);
    for u in t.bfs() {
        let bag = t.bag_vec(u);
        let up: Vec<Var> = up_vars(t, u).into_iter().collect();
        let down: Vec<Var> = t.subtree_vars(u).into_iter().collect();
        let (_, groups) = extension_index(a, &bag)?;
        for g in groups {
            let sub = AnswerSet::new(a.vars().to_vec(), g.iter().map(|&i| a.rows()[i].clone()).collect());
            let ups = sub.restrict(&up).map_err(|_| WeightingError::BadSubset(up.clone()))?;
            let downs = sub.restrict(&down).map_err(|_| WeightingError::BadSubset(down.clone()))?;
            for x in ups.assignments() {
                for y in downs.assignments() {
                    let joined = x.union(&y).expect("both agree on the bag");
                    if !sub.contains(&joined) {
                        return Ok(Some(ConjWitness {
                            node: u,
                            at: joined.restrict(bag.iter()).expect("bag variables bound"),
                            up: x,
                            down: y,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// The assignment set a collection is over: the join of its bag bases.
fn joined_base(c: &WeightingCollection, limit: usize) -> Result<AnswerSet, WeightingError> {
    let mut out = AnswerSet::unit();
    for u in c.tree.bfs() {
        out = out.join(c.node(u).base());
        if out.len() > limit {
            return Err(WeightingError::TooLarge { size: out.len(), limit });
        }
    }
    Ok(out)
}

fn lookup(w: &Weighting, idx: Option<usize>, u: NodeId) -> Result<f64, WeightingError> {
    idx.map(|i| w.values[i]).ok_or(WeightingError::Incomplete(u))
}

/// The weighting whose bag projections are the collection, built bottom-up
/// over a conjunctively decomposed set; the tree is normalized first.
pub fn reconstruct(c: &WeightingCollection) -> Result<Weighting, WeightingError> {
    reconstruct_checked(&c.normalized()?, SOUND_TOL)
}

fn reconstruct_checked(c: &WeightingCollection, tol: f64) -> Result<Weighting, WeightingError> {
    let t = &c.tree;
    check_sound(c, tol).map_err(WeightingError::Unsound)?;
    let a = joined_base(c, RECONSTRUCT_LIMIT)?;
    let mut omega: BTreeMap<NodeId, Weighting> = BTreeMap::new();
    for u in t.post_order() {
        let down_vars: Vec<Var> = t.subtree_vars(u).into_iter().collect();
        let down = a.restrict(&down_vars).map_err(|_| WeightingError::BadSubset(down_vars.clone()))?;
        let own = c.node(u);
        let own_idx = restriction_index(&down, own.base())?;
        let values: Vec<f64> = match t.kind(u).ok_or(WeightingError::NotNormalized)? {
            NodeKind::Leaf => own_idx
                .iter()
                .map(|&i| lookup(own, i, u))
                .collect::<Result<_, _>>()?,
            NodeKind::Project(_) => {
                let v = t.children(u)[0];
                let child = &omega[&v];
                restriction_index(&down, child.base())?
                    .into_iter()
                    .map(|i| lookup(child, i, v))
                    .collect::<Result<_, _>>()?
            }
            NodeKind::Extend(_) => {
                let v = t.children(u)[0];
                let child = &omega[&v];
                let child_bag = c.node(v);
                let child_idx = restriction_index(&down, child.base())?;
                let bag_idx = restriction_index(&down, child_bag.base())?;
                let mut values = Vec::with_capacity(down.len());
                for k in 0..down.len() {
                    let denom = lookup(child_bag, bag_idx[k], v)?;
                    values.push(if denom > ZERO_GUARD {
                        lookup(own, own_idx[k], u)? / denom * lookup(child, child_idx[k], v)?
                    } else {
                        0.0
                    });
                }
                values
            }
            NodeKind::Join(_) => {
                let kids = t.children(u);
                let idx: Vec<Vec<Option<usize>>> = kids
                    .iter()
                    .map(|v| restriction_index(&down, omega[v].base()))
                    .collect::<Result<_, _>>()?;
                let mut values = Vec::with_capacity(down.len());
                for k in 0..down.len() {
                    let at = lookup(own, own_idx[k], u)?;
                    if at <= ZERO_GUARD {
                        values.push(0.0);
                        continue;
                    }
                    let mut prod = 1.0;
                    for (j, v) in kids.iter().enumerate() {
                        prod *= lookup(&omega[v], idx[j][k], *v)?;
                    }
                    values.push(prod / at.powi(kids.len() as i32 - 1));
                }
                values
            }
        };
        for v in t.children(u) {
            omega.remove(v);
        }
        omega.insert(u, Weighting { base: down, values });
    }
    Ok(omega.remove(&t.root()).expect("root processed last"))
}

/// `ω(α)` for one answer by a single descent, without materializing `ω`.
///
/// Expects a normalized collection, see [`WeightingCollection::normalized`].
pub fn reconstruct_point(c: &WeightingCollection, alpha: &Assignment) -> Result<f64, WeightingError> {
    let t = &c.tree;
    if !t.is_normalized() {
        return Err(WeightingError::NotNormalized);
    }
    let bag_value = |u: NodeId| -> Result<f64, WeightingError> {
        let a = alpha
            .restrict(t.bag(u).iter())
            .map_err(|_| WeightingError::NotAnAnswer(alpha.clone()))?;
        c.node(u).get(&a).ok_or_else(|| WeightingError::NotAnAnswer(alpha.clone()))
    };
    for u in t.nodes() {
        bag_value(u)?;
    }
    fn go(
        t: &DecompTree,
        u: NodeId,
        bag_value: &dyn Fn(NodeId) -> Result<f64, WeightingError>,
    ) -> Result<f64, WeightingError> {
        Ok(match t.kind(u).ok_or(WeightingError::NotNormalized)? {
            NodeKind::Leaf => bag_value(u)?,
            NodeKind::Project(_) => go(t, t.children(u)[0], bag_value)?,
            NodeKind::Extend(_) => {
                let v = t.children(u)[0];
                let denom = bag_value(v)?;
                if denom > ZERO_GUARD {
                    bag_value(u)? / denom * go(t, v, bag_value)?
                } else {
                    0.0
                }
            }
            NodeKind::Join(_) => {
                let at = bag_value(u)?;
                if at <= ZERO_GUARD {
                    0.0
                } else {
                    let kids = t.children(u);
                    let mut prod = 1.0;
                    for &v in kids {
                        prod *= go(t, v, bag_value)?;
                    }
                    prod / at.powi(kids.len() as i32 - 1)
                }
            }
        })
    }
    go(t, t.root(), &bag_value)
}

fn value_of(sol: &LpSolution, name: &str) -> f64 {
    sol.assignment.get(name).copied().unwrap_or(0.0).max(0.0)
}

/// Per-answer weights of query `qid` read off an optimal solution.
///
/// A factorized layout goes through the bag collection and [`reconstruct`].
pub fn solution_to_weights(ilp: &InterpretedLp, sol: &LpSolution, qid: &str) -> Result<Weighting, WeightingError> {
    if sol.status != Status::Optimal {
        return Err(WeightingError::NotOptimal);
    }
    match ilp.layouts.get(qid) {
        None => Err(WeightingError::UnknownQuery(qid.to_string())),
        Some(QueryLayout::Natural { answers }) => {
            let values = answers.rows().iter().map(|r| value_of(sol, &theta_name(qid, r))).collect();
            Ok(Weighting {
                base: answers.clone(),
                values,
            })
        }
        Some(QueryLayout::Factorized { tree, projections }) => {
            let nodes: BTreeMap<NodeId, Weighting> = projections
                .iter()
                .map(|(&u, proj)| {
                    let values = proj.rows().iter().map(|r| value_of(sol, &xi_name(qid, u, r))).collect();
                    (
                        u,
                        Weighting {
                            base: proj.clone(),
                            values,
                        },
                    )
                })
                .collect();
            let c = WeightingCollection {
                tree: tree.clone(),
                nodes,
            }
            .normalized()?;
            match reconstruct_checked(&c, SOUND_TOL) {
                Err(WeightingError::Unsound(_)) => reconstruct_checked(&c, LOOSE_SOUND_TOL),
                other => other,
            }
        }
    }
}

/// `th_<qid>_(..)` values of a weighting, for checking against the natural LP.
pub fn theta_values(qid: &str, w: &Weighting) -> BTreeMap<String, f64> {
    w.iter().map(|(row, v)| (theta_name(qid, row), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn set(vars: &[&str], rows: &[&[&str]]) -> AnswerSet {
        AnswerSet::new(
            vars.iter().map(|s| v(s)).collect(),
            rows.iter().map(|r| r.iter().map(|c| Value::new(c)).collect()).collect(),
        )
    }

    fn f1() -> AnswerSet {
        set(&["x", "y"], &[&["0", "0"], &["0", "1"], &["1", "0"], &["1", "1"]])
    }

    fn three_node() -> DecompTree {
        DecompTree::new(0, [(0, vec![]), (1, vec![v("x")]), (2, vec![v("y")])], &[(0, 1), (0, 2)]).unwrap()
    }

    fn collection(tree: DecompTree, parts: &[(NodeId, AnswerSet, Vec<f64>)]) -> WeightingCollection {
        WeightingCollection {
            tree,
            nodes: parts
                .iter()
                .map(|(u, a, w)| (*u, Weighting::new(a.clone(), w.clone()).unwrap()))
                .collect(),
        }
    }

    #[test]
    fn projection_sums_extensions() {
        let w = Weighting::uniform(f1(), 1.0);
        let px = project_weighting(&w, &[v("x")]).unwrap();
        assert_eq!(px.values(), [2.0, 2.0]);
        assert_eq!(project_weighting(&w, &[]).unwrap().values(), [4.0]);
        assert_eq!(project_weighting(&w, &[v("x"), v("y")]).unwrap(), w);
        assert!(matches!(project_weighting(&w, &[v("z")]), Err(WeightingError::BadSubset(_))));
    }

    #[test]
    fn collection_of_uniform_weighting() {
        let c = collection_from_weighting(&Weighting::uniform(f1(), 1.0), &three_node()).unwrap();
        assert_eq!(c.node(0).values(), [4.0]);
        assert_eq!(c.node(1).values(), [2.0, 2.0]);
        assert_eq!(c.node(2).values(), [2.0, 2.0]);
        assert!(check_sound(&c, SOUND_TOL).is_ok());
        let zero = collection_from_weighting(&Weighting::uniform(f1(), 0.0), &three_node()).unwrap();
        assert!(check_sound(&zero, SOUND_TOL).is_ok());
        assert!(reconstruct(&zero).unwrap().values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn unsound_collection_is_reported() {
        let x = set(&["x"], &[&["0"], &["1"]]);
        let y = set(&["y"], &[&["0"], &["1"]]);
        let c = collection(
            three_node(),
            &[(0, AnswerSet::unit(), vec![2.0]), (1, x, vec![1.0, 1.0]), (2, y, vec![0.0, 0.0])],
        );
        let bad = check_sound(&c, SOUND_TOL).unwrap_err();
        assert_eq!(bad.nodes, (0, 2));
        assert_eq!((bad.lhs, bad.rhs), (2.0, 0.0));
        assert!(matches!(reconstruct(&c), Err(WeightingError::Unsound(_))));
    }

    #[test]
    fn non_conjunctive_relation_has_witness() {
        let a = set(&["x", "y"], &[&["0", "0"], &["1", "1"]]);
        let w = check_conj_decomposed(&a, &three_node()).unwrap().unwrap();
        assert!(w.at.is_empty());
        assert!(!a.contains(&w.up.union(&w.down).unwrap()));
        assert!(check_conj_decomposed(&f1(), &three_node()).unwrap().is_none());
        let single = DecompTree::single([v("x"), v("y")]);
        assert!(check_conj_decomposed(&a, &single).unwrap().is_none());
    }

    #[test]
    fn half_mass_reconstruction() {
        let x = set(&["x"], &[&["0"], &["1"]]);
        let y = set(&["y"], &[&["0"], &["1"]]);
        let c = collection(
            three_node(),
            &[(0, AnswerSet::unit(), vec![2.0]), (1, x, vec![1.0, 1.0]), (2, y, vec![1.0, 1.0])],
        );
        let omega = reconstruct(&c).unwrap();
        assert_eq!(omega.base(), &f1());
        assert!(omega.values().iter().all(|&w| (w - 0.5).abs() < 1e-12));
        assert!(matches!(reconstruct_point(&c, &Assignment::new()), Err(WeightingError::NotNormalized)));
        let c = c.normalized().unwrap();
        let alpha = Assignment::from_pairs([(v("x"), Value::new("0")), (v("y"), Value::new("1"))]);
        assert!((reconstruct_point(&c, &alpha).unwrap() - 0.5).abs() < 1e-12);
        let outside = Assignment::from_pairs([(v("x"), Value::new("5")), (v("y"), Value::new("1"))]);
        assert!(matches!(reconstruct_point(&c, &outside), Err(WeightingError::NotAnAnswer(_))));
    }

    #[test]
    fn point_mass_round_trip() {
        let mut values = vec![0.0; 4];
        values[2] = 3.0;
        let w = Weighting::new(f1(), values).unwrap();
        let c = collection_from_weighting(&w, &three_node()).unwrap();
        assert!(reconstruct(&c).unwrap().max_diff(&w) < 1e-12);
    }

    #[test]
    fn normalization_keeps_projections() {
        let two = DecompTree::new(0, [(0, vec![v("x"), v("y")]), (1, vec![v("x")])], &[(0, 1)]).unwrap();
        let c = collection_from_weighting(&Weighting::uniform(f1(), 1.0), &two).unwrap();
        let n = c.normalized().unwrap();
        assert!(n.tree.is_normalized());
        assert!(check_sound(&n, SOUND_TOL).is_ok());
        let omega = reconstruct(&c).unwrap();
        assert!(collection_from_weighting(&omega, &two).unwrap().max_diff(&c) < 1e-12);
    }

    #[test]
    fn csv_rows() {
        let mut out = Vec::new();
        Weighting::uniform(set(&["x"], &[&["a"]]), 0.5).write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x=a,0.5\n");
    }
}
