use std::io::Write;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use green_conv::grid::format_f64;
use green_conv::{DiffusionSet, Expansion};
use serde::{Deserialize, Serialize};

/// Writes `contents` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct CoefficientRow {
    j: usize,
    d: String,
    alpha: String,
}

pub fn coefficients_csv(expansion: &Expansion) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (j, (d, a)) in expansion.diffusions().iter().zip(expansion.alpha()).enumerate() {
        w.serialize(CoefficientRow { j: j + 1, d: format_f64(d), alpha: format_f64(*a) })?;
    }
    Ok(w.into_inner()?)
}

pub fn read_coefficients(path: &Path, dimension: usize) -> Result<Expansion> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let (mut ds, mut alpha) = (Vec::new(), Vec::new());
    for (i, row) in r.deserialize::<CoefficientRow>().enumerate() {
        let row = row.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        ensure!(row.j == i + 1, "{}: expected j = {}, found {}", path.display(), i + 1, row.j);
        ds.push(row.d.trim().parse::<f64>().with_context(|| format!("d in row {}", i + 1))?);
        alpha.push(row.alpha.trim().parse::<f64>().with_context(|| format!("alpha in row {}", i + 1))?);
    }
    ensure!(!ds.is_empty(), "{} has no coefficients", path.display());
    Ok(Expansion::new(dimension, DiffusionSet::new(ds)?, alpha)?)
}

/// Rows of named floats with a header line.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| format_f64(v)))?;
    }
    Ok(w.into_inner()?)
}

/// `key,value` pairs.
pub fn key_value_csv(pairs: &[(&str, String)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "value"])?;
    for (k, v) in pairs {
        w.write_record([*k, v.as_str()])?;
    }
    Ok(w.into_inner()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_round_trip_bitwise() {
        let ds = DiffusionSet::new(vec![1.0, 1.0 + 1f64.sin(), 0.1 + 0.2]).unwrap();
        let e = Expansion::new(2, ds, vec![-123456.789e3, 1.0 / 3.0, f64::MIN_POSITIVE]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_atomic(&path, &coefficients_csv(&e).unwrap()).unwrap();
        let back = read_coefficients(&path, 2).unwrap();
        assert_eq!(back, e);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("j,d,alpha\n1,"), "{text}");
    }

    #[test]
    fn malformed_rows_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "j,d,alpha\n1,1.0,2.0\n3,2.0,1.0\n").unwrap();
        assert!(read_coefficients(&path, 1).is_err());
        std::fs::write(&path, "j,d,alpha\n1,abc,2.0\n").unwrap();
        assert!(read_coefficients(&path, 1).is_err());
        std::fs::write(&path, "j,d,alpha\n").unwrap();
        assert!(read_coefficients(&path, 1).is_err());
    }

    #[test]
    fn atomic_write_replaces_existing_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("f.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
