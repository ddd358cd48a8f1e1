use std::collections::{BTreeSet, HashMap, HashSet};

use super::{ConjQuery, CqError, Expr};
use crate::relcore::{AnswerSet, Database, Value, Var};

/// `⟦q⟧_X^D` over the variables `xs` (which must cover `fv(q)`).
pub fn evaluate(q: &ConjQuery, db: &Database, xs: &[Var]) -> Result<AnswerSet, CqError> {
    let xset: BTreeSet<Var> = xs.iter().cloned().collect();
    if let Some(missing) = q.free_vars().into_iter().find(|v| !xset.contains(v)) {
        return Err(CqError::XMissingFreeVar(missing));
    }
    for (rel, args) in q.atoms() {
        let r = db
            .relation(rel)
            .ok_or_else(|| CqError::UnknownRelation(rel.to_string()))?;
        if r.arity() != args.len() {
            return Err(CqError::ArityMismatch {
                name: rel.to_string(),
                expected: r.arity(),
                found: args.len(),
            });
        }
    }
    let (_, body) = q.prenex(&xset);
    let out_vars: Vec<Var> = xset.iter().cloned().collect();
    Ok(Plan::new(&body, &out_vars).run(db, &out_vars))
}

/// Equality classes of the body's variables, each possibly pinned to a constant.
struct Plan<'q> {
    class_of: HashMap<Var, usize>,
    pinned: Vec<Option<Value>>,
    atoms: Vec<(&'q str, Vec<Slot>)>,
    contradiction: bool,
}

#[derive(Clone)]
enum Slot {
    Class(usize),
    Fixed(Value),
}

impl<'q> Plan<'q> {
    fn new(body: &'q ConjQuery, out_vars: &[Var]) -> Plan<'q> {
        let mut vars: BTreeSet<Var> = body.all_vars();
        vars.extend(out_vars.iter().cloned());
        let index: HashMap<Var, usize> = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut parent: Vec<usize> = (0..vars.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let conjuncts = body.conjuncts();
        for c in &conjuncts {
            if let ConjQuery::Equal(Expr::Var(a), Expr::Var(b)) = c {
                let (ra, rb) = (find(&mut parent, index[a]), find(&mut parent, index[b]));
                parent[ra] = rb;
            }
        }
        let roots: Vec<usize> = (0..vars.len()).map(|i| find(&mut parent, i)).collect();
        let mut dense: HashMap<usize, usize> = HashMap::new();
        for &r in &roots {
            let n = dense.len();
            dense.entry(r).or_insert(n);
        }
        let class_of: HashMap<Var, usize> = vars
            .iter()
            .map(|v| (v.clone(), dense[&roots[index[v]]]))
            .collect();
        let mut plan = Plan {
            class_of,
            pinned: vec![None; dense.len()],
            atoms: Vec::new(),
            contradiction: false,
        };
        for c in conjuncts {
            match c {
                ConjQuery::Equal(Expr::Var(v), Expr::Const(k)) | ConjQuery::Equal(Expr::Const(k), Expr::Var(v)) => {
                    let cls = plan.class_of[v];
                    match &plan.pinned[cls] {
                        Some(prev) if prev != k => plan.contradiction = true,
                        _ => plan.pinned[cls] = Some(k.clone()),
                    }
                }
                ConjQuery::Equal(Expr::Const(a), Expr::Const(b)) if a != b => plan.contradiction = true,
                _ => {}
            }
        }
        for c in body.conjuncts() {
            if let ConjQuery::Atom(rel, args) = c {
                let slots = args
                    .iter()
                    .map(|a| match a {
                        Expr::Const(k) => Slot::Fixed(k.clone()),
                        Expr::Var(v) => {
                            let cls = plan.class_of[v];
                            match &plan.pinned[cls] {
                                Some(k) => Slot::Fixed(k.clone()),
                                None => Slot::Class(cls),
                            }
                        }
                    })
                    .collect();
                plan.atoms.push((rel.as_str(), slots));
            }
        }
        plan
    }

    fn run(&self, db: &Database, out_vars: &[Var]) -> AnswerSet {
        if self.contradiction {
            return AnswerSet::empty(out_vars.to_vec());
        }
        // Pinned classes must denote domain elements.
        for k in self.pinned.iter().flatten() {
            if !db.domain().contains(k) {
                return AnswerSet::empty(out_vars.to_vec());
            }
        }
        let mut cols: Vec<usize> = Vec::new();
        let mut rows: Vec<Vec<Value>> = vec![Vec::new()];
        let mut pending: Vec<usize> = (0..self.atoms.len()).collect();
        while !pending.is_empty() {
            let pick = pending
                .iter()
                .enumerate()
                .max_by_key(|(_, &a)| {
                    let shared = self.atoms[a]
                        .1
                        .iter()
                        .filter(|s| matches!(s, Slot::Class(c) if cols.contains(c)))
                        .count();
                    let len = db.relation(self.atoms[a].0).map_or(0, |r| r.len());
                    (shared, std::cmp::Reverse(len))
                })
                .map(|(i, _)| i)
                .unwrap();
            let atom = pending.swap_remove(pick);
            let (atom_cols, atom_rows) = self.scan(db, atom);
            (cols, rows) = hash_join(&cols, rows, &atom_cols, atom_rows);
            if rows.is_empty() {
                return AnswerSet::empty(out_vars.to_vec());
            }
        }
        // Unconstrained classes range over the domain only if visible in the output.
        let mut out_classes: Vec<usize> = out_vars.iter().map(|v| self.class_of[v]).collect();
        out_classes.sort_unstable();
        out_classes.dedup();
        for (cls, pin) in self.pinned.iter().enumerate() {
            if cols.contains(&cls) {
                continue;
            }
            if let Some(k) = pin {
                cols.push(cls);
                rows.iter_mut().for_each(|r| r.push(k.clone()));
            } else if out_classes.binary_search(&cls).is_ok() {
                let dom: Vec<&Value> = db.domain().iter().collect();
                let mut next = Vec::with_capacity(rows.len() * dom.len());
                for r in &rows {
                    for d in &dom {
                        let mut row = r.clone();
                        row.push((*d).clone());
                        next.push(row);
                    }
                }
                cols.push(cls);
                rows = next;
            } else if db.domain().is_empty() {
                return AnswerSet::empty(out_vars.to_vec());
            }
        }
        let pos: Vec<usize> = out_vars
            .iter()
            .map(|v| cols.iter().position(|&c| c == self.class_of[v]).unwrap())
            .collect();
        let rows = rows
            .into_iter()
            .map(|r| pos.iter().map(|&p| r[p].clone()).collect())
            .collect();
        AnswerSet::new(out_vars.to_vec(), rows)
    }

    /// Matching tuples of one atom, projected onto its distinct classes.
    fn scan(&self, db: &Database, atom: usize) -> (Vec<usize>, Vec<Vec<Value>>) {
        let (rel, slots) = &self.atoms[atom];
        let mut cols: Vec<usize> = Vec::new();
        let mut first_pos: Vec<usize> = Vec::new();
        for (i, s) in slots.iter().enumerate() {
            if let Slot::Class(c) = s {
                if !cols.contains(c) {
                    cols.push(*c);
                    first_pos.push(i);
                }
            }
        }
        let relation = db.relation(rel).expect("checked before planning");
        let mut seen = HashSet::new();
        let mut rows = Vec::new();
        'tuples: for t in relation.tuples() {
            for (i, s) in slots.iter().enumerate() {
                match s {
                    Slot::Fixed(k) if &t[i] != k => continue 'tuples,
                    Slot::Class(c) => {
                        let j = first_pos[cols.iter().position(|x| x == c).unwrap()];
                        if t[j] != t[i] {
                            continue 'tuples;
                        }
                    }
                    _ => {}
                }
            }
            let row: Vec<Value> = first_pos.iter().map(|&i| t[i].clone()).collect();
            if seen.insert(row.clone()) {
                rows.push(row);
            }
        }
        (cols, rows)
    }
}

fn hash_join(
    lcols: &[usize],
    lrows: Vec<Vec<Value>>,
    rcols: &[usize],
    rrows: Vec<Vec<Value>>,
) -> (Vec<usize>, Vec<Vec<Value>>) {
    let shared: Vec<(usize, usize)> = lcols
        .iter()
        .enumerate()
        .filter_map(|(i, c)| rcols.iter().position(|d| d == c).map(|j| (i, j)))
        .collect();
    let extra: Vec<usize> = (0..rcols.len())
        .filter(|j| !shared.iter().any(|&(_, s)| s == *j))
        .collect();
    let mut index: HashMap<Vec<&Value>, Vec<&Vec<Value>>> = HashMap::new();
    for r in &rrows {
        index
            .entry(shared.iter().map(|&(_, j)| &r[j]).collect())
            .or_default()
            .push(r);
    }
    let mut cols = lcols.to_vec();
    cols.extend(extra.iter().map(|&j| rcols[j]));
    let mut rows = Vec::new();
    for l in &lrows {
        let key: Vec<&Value> = shared.iter().map(|&(i, _)| &l[i]).collect();
        if let Some(ms) = index.get(&key) {
            for m in ms {
                let mut row = l.clone();
                row.extend(extra.iter().map(|&j| m[j].clone()));
                rows.push(row);
            }
        }
    }
    (cols, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::parse_query;

    fn f1() -> Database {
        Database::new()
            .with_relation("R1", 1, &[&["0"], &["1"]])
            .unwrap()
            .with_relation("R2", 1, &[&["0"], &["1"]])
            .unwrap()
    }

    fn vs(names: &[&str]) -> Vec<Var> {
        names.iter().map(|n| Var::new(n)).collect()
    }

    #[test]
    fn fixture_examples() {
        let db = f1();
        let all = evaluate(&parse_query("R1(x) /\\ R2(y)").unwrap(), &db, &vs(&["x", "y"])).unwrap();
        assert_eq!(all.len(), 4);
        let unit = evaluate(&ConjQuery::True, &db, &[]).unwrap();
        assert_eq!(unit, AnswerSet::unit());
        let proj = evaluate(&parse_query("exists y. R1(x) /\\ R2(y)").unwrap(), &db, &vs(&["x"])).unwrap();
        assert_eq!(proj.len(), 2);
        let ext = evaluate(&parse_query("y == y /\\ R1(x)").unwrap(), &db, &vs(&["x", "y"])).unwrap();
        assert_eq!(ext.len(), 4);
    }

    #[test]
    fn errors() {
        let db = f1();
        assert!(matches!(
            evaluate(&parse_query("R1(x)").unwrap(), &db, &[]),
            Err(CqError::XMissingFreeVar(_))
        ));
        assert!(matches!(
            evaluate(&parse_query("S(x)").unwrap(), &db, &vs(&["x"])),
            Err(CqError::UnknownRelation(_))
        ));
        assert!(matches!(
            evaluate(&parse_query("R1(x, y)").unwrap(), &db, &vs(&["x", "y"])),
            Err(CqError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn bound_name_reused_in_output() {
        let db = f1();
        // The y in X is a different variable from the quantified y.
        let a = evaluate(&parse_query("exists y. R1(y)").unwrap(), &db, &vs(&["y"])).unwrap();
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn constants_and_repeats() {
        let db = Database::new()
            .with_relation("R", 2, &[&["0", "0"], &["0", "1"], &["1", "1"]])
            .unwrap();
        let diag = evaluate(&parse_query("R(x, x)").unwrap(), &db, &vs(&["x"])).unwrap();
        assert_eq!(diag.len(), 2);
        let sel = evaluate(&parse_query("R(x, y) /\\ y == 1 /\\ x == z").unwrap(), &db, &vs(&["x", "y", "z"])).unwrap();
        assert_eq!(sel.len(), 2);
        let none = evaluate(&parse_query("R(x, y) /\\ x == 7").unwrap(), &db, &vs(&["x", "y"])).unwrap();
        assert!(none.is_empty());
        let contra = evaluate(&parse_query("0 == 1").unwrap(), &db, &[]).unwrap();
        assert!(contra.is_empty());
    }
}
