//! Result files: tidy CSV tables headed by a `# config_hash=` comment line,
//! and JSON manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

const HASH_PREFIX: &str = "# config_hash=";

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

/// Writes `rows` as CSV under `dir/name`, preceded by the hash comment line.
pub fn write_csv<T: Serialize>(dir: &Path, name: &str, hash: &str, rows: &[T]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut body = format!("{HASH_PREFIX}{hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut body);
        for r in rows {
            w.serialize(r).map_err(|e| io_err(&path, e))?;
        }
        w.flush()?;
    }
    fs::write(&path, body)?;
    Ok(path)
}

/// A CSV table read back with its hash line.
pub struct CsvTable<T> {
    pub hash: Option<String>,
    pub rows: Vec<T>,
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<CsvTable<T>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let hash = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix(HASH_PREFIX))
        .map(str::to_string);
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| io_err(path, e))?;
    Ok(CsvTable { hash, rows })
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
    fs::write(&path, text + "\n")?;
    Ok(path)
}

/// Seconds since the Unix epoch.
pub fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Row {
        a: f64,
        b: String,
    }

    #[test]
    fn csv_round_trip_keeps_hash() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![Row { a: 0.1, b: "x".into() }, Row { a: 1e-300, b: "y".into() }];
        let p = write_csv(dir.path(), "t.csv", "abc", &rows).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# config_hash=abc\na,b\n"));
        let back: CsvTable<Row> = read_csv(&p).unwrap();
        assert_eq!(back.hash.as_deref(), Some("abc"));
        assert_eq!(back.rows, rows);
    }
}
