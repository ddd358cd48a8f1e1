use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::{RelError, Value, Var};

/// A finite map from query variables to domain values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(BTreeMap<Var, Value>);

impl Assignment {
    pub fn new() -> Assignment {
        Assignment(BTreeMap::new())
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, Value)>>(pairs: I) -> Assignment {
        Assignment(pairs.into_iter().collect())
    }

    pub fn get(&self, var: &Var) -> Option<&Value> {
        self.0.get(var)
    }

    pub fn bind(&mut self, var: Var, value: Value) -> Option<Value> {
        self.0.insert(var, value)
    }

    pub fn remove(&mut self, var: &Var) -> Option<Value> {
        self.0.remove(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Value)> {
        self.0.iter()
    }

    pub fn restrict<'a, I>(&self, vars: I) -> Result<Assignment, RelError>
    where
        I: IntoIterator<Item = &'a Var>,
    {
        let mut out = BTreeMap::new();
        for v in vars {
            let value = self
                .0
                .get(v)
                .ok_or_else(|| RelError::UnknownVariable(v.to_string()))?;
            out.insert(v.clone(), value.clone());
        }
        Ok(Assignment(out))
    }

    /// The union if both agree on shared variables.
    pub fn union(&self, other: &Assignment) -> Option<Assignment> {
        let mut out = self.0.clone();
        for (k, v) in &other.0 {
            match out.get(k) {
                Some(w) if w != v => return None,
                Some(_) => {}
                None => {
                    out.insert(k.clone(), v.clone());
                }
            }
        }
        Some(Assignment(out))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}/{v}")?;
        }
        f.write_str("]")
    }
}

/// A homogeneous set of assignments over `vars`.
///
/// Columns follow the sorted variable order; rows are sorted and distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerSet {
    vars: Vec<Var>,
    rows: Vec<Vec<Value>>,
}

impl AnswerSet {
    /// Builds from rows laid out in the given column order.
    pub fn new(vars: Vec<Var>, mut rows: Vec<Vec<Value>>) -> AnswerSet {
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by(|&a, &b| vars[a].cmp(&vars[b]));
        let sorted_vars: Vec<Var> = order.iter().map(|&i| vars[i].clone()).collect();
        debug_assert!(sorted_vars.windows(2).all(|w| w[0] < w[1]), "duplicate column");
        if order.iter().enumerate().any(|(i, &j)| i != j) {
            for row in rows.iter_mut() {
                *row = order.iter().map(|&i| row[i].clone()).collect();
            }
        }
        debug_assert!(rows.iter().all(|r| r.len() == vars.len()));
        rows.sort_unstable();
        rows.dedup();
        AnswerSet {
            vars: sorted_vars,
            rows,
        }
    }

    pub fn empty(mut vars: Vec<Var>) -> AnswerSet {
        vars.sort();
        vars.dedup();
        AnswerSet {
            vars,
            rows: Vec::new(),
        }
    }

    /// The set holding only the empty assignment.
    pub fn unit() -> AnswerSet {
        AnswerSet {
            vars: Vec::new(),
            rows: vec![Vec::new()],
        }
    }

    pub fn from_assignments<I>(vars: Vec<Var>, items: I) -> Result<AnswerSet, RelError>
    where
        I: IntoIterator<Item = Assignment>,
    {
        let mut rows = Vec::new();
        for a in items {
            let mut row = Vec::with_capacity(vars.len());
            for v in &vars {
                row.push(
                    a.get(v)
                        .ok_or_else(|| RelError::UnknownVariable(v.to_string()))?
                        .clone(),
                );
            }
            rows.push(row);
        }
        Ok(AnswerSet::new(vars, rows))
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn position(&self, var: &Var) -> Option<usize> {
        self.vars.binary_search(var).ok()
    }

    pub fn assignment(&self, row: &[Value]) -> Assignment {
        Assignment::from_pairs(self.vars.iter().cloned().zip(row.iter().cloned()))
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.rows.iter().map(|r| self.assignment(r))
    }

    /// Lays out `a` in this set's column order; `None` if a column is unbound.
    pub fn row_of(&self, a: &Assignment) -> Option<Vec<Value>> {
        self.vars.iter().map(|v| a.get(v).cloned()).collect()
    }

    pub fn index_of_row(&self, row: &[Value]) -> Option<usize> {
        self.rows.binary_search_by(|r| r.as_slice().cmp(row)).ok()
    }

    pub fn contains(&self, a: &Assignment) -> bool {
        a.len() == self.vars.len()
            && self
                .row_of(a)
                .is_some_and(|r| self.index_of_row(&r).is_some())
    }

    /// Column indices of `vars` in this set.
    pub fn columns(&self, vars: &[Var]) -> Result<Vec<usize>, RelError> {
        vars.iter()
            .map(|v| {
                self.position(v)
                    .ok_or_else(|| RelError::UnknownVariable(v.to_string()))
            })
            .collect()
    }

    /// Projection onto a subset of the columns.
    pub fn restrict(&self, vars: &[Var]) -> Result<AnswerSet, RelError> {
        let cols = self.columns(vars)?;
        let rows = self
            .rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
            .collect();
        Ok(AnswerSet::new(vars.to_vec(), rows))
    }

    /// Natural join: unions of compatible rows.
    pub fn join(&self, other: &AnswerSet) -> AnswerSet {
        let shared: Vec<Var> = self
            .vars
            .iter()
            .filter(|v| other.position(v).is_some())
            .cloned()
            .collect();
        let left_key: Vec<usize> = shared.iter().map(|v| self.position(v).unwrap()).collect();
        let right_key: Vec<usize> = shared.iter().map(|v| other.position(v).unwrap()).collect();
        let right_extra: Vec<usize> = (0..other.vars.len())
            .filter(|c| !right_key.contains(c))
            .collect();
        let mut index: HashMap<Vec<&Value>, Vec<&Vec<Value>>> = HashMap::new();
        for r in &other.rows {
            index
                .entry(right_key.iter().map(|&c| &r[c]).collect())
                .or_default()
                .push(r);
        }
        let mut vars = self.vars.clone();
        vars.extend(right_extra.iter().map(|&c| other.vars[c].clone()));
        let mut rows = Vec::new();
        for l in &self.rows {
            let key: Vec<&Value> = left_key.iter().map(|&c| &l[c]).collect();
            if let Some(matches) = index.get(&key) {
                for r in matches {
                    let mut row = l.clone();
                    row.extend(right_extra.iter().map(|&c| r[c].clone()));
                    rows.push(row);
                }
            }
        }
        AnswerSet::new(vars, rows)
    }

    /// Rows whose restriction to `other`'s columns lies in `other`.
    pub fn semijoin(&self, other: &AnswerSet) -> AnswerSet {
        let shared: Vec<Var> = other
            .vars
            .iter()
            .filter(|v| self.position(v).is_some())
            .cloned()
            .collect();
        let keys: std::collections::HashSet<Vec<&Value>> = {
            let cols: Vec<usize> = shared.iter().map(|v| other.position(v).unwrap()).collect();
            other
                .rows
                .iter()
                .map(|r| cols.iter().map(|&c| &r[c]).collect())
                .collect()
        };
        let cols: Vec<usize> = shared.iter().map(|v| self.position(v).unwrap()).collect();
        let rows = self
            .rows
            .iter()
            .filter(|r| keys.contains(&cols.iter().map(|&c| &r[c]).collect::<Vec<_>>()))
            .cloned()
            .collect();
        AnswerSet {
            vars: self.vars.clone(),
            rows,
        }
    }
}

pub fn join_assignment_sets(a: &AnswerSet, b: &AnswerSet) -> AnswerSet {
    a.join(b)
}
