//! CPLEX LP text: writer with name sanitization and a reader for our own output.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{LinConstraint, LinSum, LinearProgram, LpError, Relation, Sense};

/// LP text plus the `(sanitized, original)` variable name table.
#[derive(Clone, Debug, PartialEq)]
pub struct LpExport {
    pub text: String,
    pub mapping: Vec<(String, String)>,
}

impl LpExport {
    /// Maps sanitized names in `lp` back to the originals.
    pub fn restore_names(&self, lp: &LinearProgram) -> LinearProgram {
        let back: HashMap<&str, &str> = self
            .mapping
            .iter()
            .map(|(s, o)| (s.as_str(), o.as_str()))
            .collect();
        let rename = |s: &LinSum| {
            let mut out = LinSum::constant(s.constant_part());
            for (name, c) in s.terms() {
                out.add_term(back.get(name.as_str()).copied().unwrap_or(name), *c);
            }
            out
        };
        LinearProgram {
            sense: lp.sense,
            objective: rename(&lp.objective),
            constraints: lp
                .constraints
                .iter()
                .map(|c| LinConstraint {
                    lhs: rename(&c.lhs),
                    relation: c.relation,
                    rhs: rename(&c.rhs),
                })
                .collect(),
        }
    }

    pub fn mapping_tsv(&self) -> String {
        let mut out = String::new();
        for (s, o) in &self.mapping {
            let _ = writeln!(out, "{s}\t{o}");
        }
        out
    }
}

fn sanitize(name: &str, taken: &mut HashSet<String>) -> String {
    let mut base: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if base.is_empty() || base.starts_with(|c: char| c.is_ascii_digit()) {
        base.insert(0, 'v');
    }
    // `e12` would read as an exponent in some readers.
    if base.starts_with(['e', 'E']) && base[1..].starts_with(|c: char| c.is_ascii_digit()) {
        base.insert(0, 'v');
    }
    let mut candidate = base.clone();
    let mut k = 2;
    while !taken.insert(candidate.clone()) {
        candidate = format!("{base}_{k}");
        k += 1;
    }
    candidate
}

fn write_terms(out: &mut String, row: &LinSum, names: &BTreeMap<&str, String>, constant: bool) {
    let mut first = true;
    let mut on_line = 0;
    let mut push = |out: &mut String, c: f64, name: Option<&str>| {
        if on_line == 8 {
            out.push_str("\n   ");
            on_line = 0;
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        if first {
            if c < 0.0 {
                out.push_str(" -");
            }
        } else {
            let _ = write!(out, " {sign}");
        }
        match name {
            Some(n) => {
                let _ = write!(out, " {} {n}", c.abs());
            }
            None => {
                let _ = write!(out, " {}", c.abs());
            }
        }
        first = false;
        on_line += 1;
    };
    for (name, c) in row.terms() {
        push(out, *c, Some(&names[name.as_str()]));
    }
    if constant && (row.constant_part() != 0.0 || row.terms().is_empty()) {
        push(out, row.constant_part(), None);
    }
}

pub fn write_lp(lp: &LinearProgram) -> LpExport {
    let mut taken = HashSet::new();
    let names: BTreeMap<&str, String> = lp
        .variables()
        .into_iter()
        .map(|v| (v, sanitize(v, &mut taken)))
        .collect();
    let mut out = String::from("\\ written by lpcq\n");
    out.push_str(match lp.sense {
        Sense::Maximize => "Maximize\n obj:",
        Sense::Minimize => "Minimize\n obj:",
    });
    write_terms(&mut out, &lp.objective, &names, true);
    out.push_str("\nSubject To\n");
    let filler = names.values().next().cloned();
    for (i, c) in lp.constraints.iter().enumerate() {
        let (row, rel, b) = c.canonical();
        let op = match rel {
            Relation::Le => "<=",
            Relation::Eq => "=",
        };
        if row.terms().is_empty() {
            match &filler {
                Some(v) => {
                    let _ = writeln!(out, " c{}: 0 {v} {op} {b}", i + 1);
                }
                None => {
                    let _ = writeln!(out, "\\ c{}: 0 {op} {b}", i + 1);
                }
            }
            continue;
        }
        let _ = write!(out, " c{}:", i + 1);
        write_terms(&mut out, &row, &names, false);
        let _ = writeln!(out, " {op} {b}");
    }
    out.push_str("Bounds\n");
    for n in names.values() {
        let _ = writeln!(out, " {n} >= 0");
    }
    out.push_str("End\n");
    LpExport {
        text: out,
        mapping: names.into_iter().map(|(o, s)| (s, o.to_string())).collect(),
    }
}

/// Writes `path` and the name table to `path` + `.map`.
pub fn export_lp(lp: &LinearProgram, path: &Path) -> Result<LpExport, LpError> {
    let export = write_lp(lp);
    let io = |source| LpError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::write(path, &export.text).map_err(io)?;
    let mut map_path = path.as_os_str().to_owned();
    map_path.push(".map");
    fs::write(&map_path, export.mapping_tsv()).map_err(io)?;
    Ok(export)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Label(String),
    Num(f64),
    Sign(f64),
    Rel(&'static str),
}

fn lex_line(line: &str, lineno: usize, out: &mut Vec<(Tok, usize)>) -> Result<(), LpError> {
    let line = line.split('\\').next().unwrap_or("");
    let b = line.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'+' || c == b'-' {
            out.push((Tok::Sign(if c == b'-' { -1.0 } else { 1.0 }), lineno));
            i += 1;
        } else if c == b'<' || c == b'>' || c == b'=' {
            let two = line.get(i..i + 2).unwrap_or("");
            let (rel, len) = match two {
                "<=" | "=<" => ("<=", 2),
                ">=" | "=>" => (">=", 2),
                _ => match c {
                    b'<' => ("<=", 1),
                    b'>' => (">=", 1),
                    _ => ("=", 1),
                },
            };
            out.push((Tok::Rel(rel), lineno));
            i += len;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let v = line[start..i].parse().map_err(|_| LpError::Parse {
                line: lineno,
                msg: format!("bad number {:?}", &line[start..i]),
            })?;
            out.push((Tok::Num(v), lineno));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'.') {
                i += 1;
            }
            let name = line[start..i].to_string();
            let rest = line[i..].trim_start();
            if rest.starts_with(':') {
                i = line.len() - rest.len() + 1;
                out.push((Tok::Label(name), lineno));
            } else {
                out.push((Tok::Name(name), lineno));
            }
        } else {
            return Err(LpError::Parse {
                line: lineno,
                msg: format!("unexpected character {:?}", c as char),
            });
        }
    }
    Ok(())
}

#[derive(PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
}

fn section_of(line: &str) -> Option<(Section, Option<Sense>)> {
    let l = line.trim().to_ascii_lowercase();
    Some(match l.as_str() {
        "maximize" | "maximise" | "maximum" | "max" => (Section::Objective, Some(Sense::Maximize)),
        "minimize" | "minimise" | "minimum" | "min" => (Section::Objective, Some(Sense::Minimize)),
        "subject to" | "such that" | "st" | "s.t." => (Section::Constraints, None),
        "bounds" | "bound" => (Section::Bounds, None),
        "end" => (Section::None, None),
        _ => return None,
    })
}

/// Parses a sum until a relation (or the end of the slice).
fn parse_sum(toks: &[(Tok, usize)], pos: &mut usize) -> Result<LinSum, LpError> {
    let mut sum = LinSum::zero();
    while *pos < toks.len() {
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some((Tok::Sign(s), _)) = toks.get(*pos) {
            sign *= s;
            saw_sign = true;
            *pos += 1;
        }
        let coef = match toks.get(*pos) {
            Some((Tok::Num(v), _)) => {
                *pos += 1;
                Some(*v)
            }
            _ => None,
        };
        match toks.get(*pos) {
            Some((Tok::Name(n), _)) => {
                sum.add_term(n.clone(), sign * coef.unwrap_or(1.0));
                *pos += 1;
            }
            _ => match coef {
                Some(c) => sum.add_constant(sign * c),
                None if saw_sign => {
                    let line = toks.get(*pos).or(toks.last()).map_or(0, |t| t.1);
                    return Err(LpError::Parse {
                        line,
                        msg: "dangling sign".into(),
                    });
                }
                None => break,
            },
        }
    }
    Ok(sum)
}

pub fn parse_lp(text: &str) -> Result<LinearProgram, LpError> {
    let mut section = Section::None;
    let mut sense = None;
    let mut obj = Vec::new();
    let mut cons = Vec::new();
    let mut bounds = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        if let Some((s, sn)) = section_of(line) {
            if sn.is_some() {
                sense = sn;
            }
            section = s;
            continue;
        }
        let target = match section {
            Section::Objective => &mut obj,
            Section::Constraints => &mut cons,
            Section::Bounds => &mut bounds,
            Section::None => {
                if line.split('\\').next().unwrap_or("").trim().is_empty() {
                    continue;
                }
                return Err(LpError::Parse {
                    line: lineno,
                    msg: "text outside any section".into(),
                });
            }
        };
        lex_line(line, lineno, target)?;
    }
    let sense = sense.ok_or(LpError::Parse {
        line: 1,
        msg: "no objective section".into(),
    })?;
    let mut pos = 0;
    if let Some((Tok::Label(_), _)) = obj.first() {
        pos = 1;
    }
    let objective = parse_sum(&obj, &mut pos)?;
    let mut constraints = Vec::new();
    let mut pos = 0;
    while pos < cons.len() {
        if let (Tok::Label(_), _) = &cons[pos] {
            pos += 1;
        }
        let lhs = parse_sum(&cons, &mut pos)?;
        let (rel, line) = match cons.get(pos) {
            Some((Tok::Rel(r), l)) => (*r, *l),
            other => {
                return Err(LpError::Parse {
                    line: other.map_or(0, |t| t.1),
                    msg: "expected a relation".into(),
                })
            }
        };
        pos += 1;
        let mut sign = 1.0;
        while let Some((Tok::Sign(s), _)) = cons.get(pos) {
            sign *= s;
            pos += 1;
        }
        let rhs = match cons.get(pos) {
            Some((Tok::Num(v), _)) => sign * v,
            _ => {
                return Err(LpError::Parse {
                    line,
                    msg: "expected a numeric right-hand side".into(),
                })
            }
        };
        pos += 1;
        let rhs = LinSum::constant(rhs);
        constraints.push(match rel {
            "<=" => LinConstraint::le(lhs, rhs),
            ">=" => LinConstraint::le(rhs, lhs),
            _ => LinConstraint::eq(lhs, rhs),
        });
    }
    // Only the implicit `x >= 0` bound is representable.
    let mut pos = 0;
    while pos < bounds.len() {
        let ok = match (&bounds[pos].0, bounds.get(pos + 1), bounds.get(pos + 2)) {
            (Tok::Name(_), Some((Tok::Rel(">="), _)), Some((Tok::Num(z), _))) if *z == 0.0 => true,
            (Tok::Num(z), Some((Tok::Rel("<="), _)), Some((Tok::Name(_), _))) if *z == 0.0 => true,
            _ => false,
        };
        if !ok {
            return Err(LpError::Parse {
                line: bounds[pos].1,
                msg: "only `x >= 0` bounds are supported".into(),
            });
        }
        pos += 3;
    }
    Ok(LinearProgram {
        sense,
        objective,
        constraints,
    })
}
