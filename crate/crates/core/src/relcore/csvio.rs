use std::fs;
use std::path::Path;

use super::{Database, RelError, Relation, Value};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RelError + '_ {
    move |source| RelError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Loads every `<Name>.csv` in `dir` as relation `Name`.
pub fn load_database(dir: &Path) -> Result<Database, RelError> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(RelError::EmptyDir(dir.display().to_string()));
    }
    let mut db = Database::new();
    for path in files {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        db.add_relation(read_relation(&name, &path)?)?;
    }
    Ok(db)
}

fn read_relation(name: &str, path: &Path) -> Result<Relation, RelError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    if text.is_empty() {
        return Relation::new(name, 0, Vec::new());
    }
    if text.trim_end_matches(['\r', '\n']).is_empty() {
        return Relation::new(name, 0, vec![Vec::new()]);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut arity = None;
    let mut tuples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| RelError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let expected = *arity.get_or_insert(record.len());
        if record.len() != expected {
            return Err(RelError::RaggedRows {
                file: path.display().to_string(),
                row: i + 1,
                expected,
                found: record.len(),
            });
        }
        tuples.push(record.iter().map(Value::new).collect());
    }
    Relation::new(name, arity.unwrap_or(0), tuples)
}

/// Writes one headerless CSV per relation; inverse of [`load_database`].
pub fn save_database(db: &Database, dir: &Path) -> Result<(), RelError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for rel in db.relations() {
        let path = dir.join(format!("{}.csv", rel.name()));
        if rel.arity() == 0 {
            let body = if rel.is_empty() { "" } else { "\n" };
            fs::write(&path, body).map_err(io_err(&path))?;
            continue;
        }
        let csv_err = |source| RelError::Csv {
            path: path.display().to_string(),
            source,
        };
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)
            .map_err(csv_err)?;
        for t in rel.tuples() {
            w.write_record(t.iter().map(Value::text)).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    #[test]
    fn loads_fixture_f1() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "R1.csv", "0\n1");
        write(tmp.path(), "R2.csv", "0\n1\n1\n");
        let db = load_database(tmp.path()).unwrap();
        let r2 = db.relation("R2").unwrap();
        assert_eq!(r2.arity(), 1);
        assert_eq!(r2.len(), 2);
        assert_eq!(db.size(), 4);
        assert_eq!(db.domain().len(), 2);
    }

    #[test]
    fn zero_ary_files() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "S.csv", "");
        write(tmp.path(), "T.csv", "\n");
        let db = load_database(tmp.path()).unwrap();
        assert_eq!(db.relation("S").unwrap().arity(), 0);
        assert!(db.relation("S").unwrap().is_empty());
        assert_eq!(db.relation("T").unwrap().tuples(), &[Vec::<Value>::new()]);
    }

    #[test]
    fn numeric_cells() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "store.csv", "w1,10.5\n");
        let db = load_database(tmp.path()).unwrap();
        let t = &db.relation("store").unwrap().tuples()[0];
        assert_eq!(t[0].numeric(), None);
        assert_eq!(t[1].numeric(), Some(10.5));
    }

    #[test]
    fn errors() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(load_database(tmp.path()), Err(RelError::EmptyDir(_))));
        write(tmp.path(), "R.csv", "a,b\nc\n");
        assert!(matches!(
            load_database(tmp.path()),
            Err(RelError::RaggedRows { row: 2, expected: 2, found: 1, .. })
        ));
        let mut db = Database::new();
        db.add_relation(Relation::new("R", 0, vec![]).unwrap()).unwrap();
        assert!(matches!(
            db.add_relation(Relation::new("R", 0, vec![]).unwrap()),
            Err(RelError::DuplicateRelation(_))
        ));
    }

    #[test]
    fn save_round_trips() {
        let tmp = tempfile::tempdir().unwrap();
        let db = Database::new()
            .with_relation("R", 2, &[&["a", "1.5"], &["b,c", "\"q\""], &["", "x"]])
            .unwrap()
            .with_relation("F", 0, &[])
            .unwrap()
            .with_relation("T", 0, &[&[]])
            .unwrap();
        save_database(&db, tmp.path()).unwrap();
        assert_eq!(load_database(tmp.path()).unwrap(), db);
    }
}
