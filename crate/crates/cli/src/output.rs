//! Report rendering and atomic file output.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

/// A finished command: its JSON report, optional tabular rows, and whether
/// the domain answer was positive.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    /// Header and rows for the CSV and table views. Without them both views
    /// fall back to the flattened JSON.
    pub rows: Option<(Vec<String>, Vec<Vec<String>>)>,
    pub positive: bool,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("serializable report");
                s.push('\n');
                s
            }
            Format::Csv => {
                let (header, rows) = self.rows.clone().unwrap_or_else(|| flat_rows(&self.json));
                let mut out = header.join(",");
                out.push('\n');
                for r in rows {
                    out.push_str(&r.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Table => {
                let (header, rows) = self.rows.clone().unwrap_or_else(|| flat_rows(&self.json));
                table(&header, &rows)
            }
        }
    }
}

fn flat_rows(v: &Value) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    (
        vec!["key".into(), "value".into()],
        rows.into_iter().map(|(k, v)| vec![k, v]).collect(),
    )
}

/// Dotted key paths to scalar leaves, in document order.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(&rule));
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

/// Writes via a sibling temporary file and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::usage(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::usage(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flattening_orders_keys() {
        let mut out = Vec::new();
        flatten(
            "",
            &json!({"a": {"b": 1, "c": [true, "x"]}, "d": null}),
            &mut out,
        );
        let keys: Vec<&str> = out.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["a.b", "a.c.0", "a.c.1", "d"]);
        assert_eq!(out[2].1, "x");
    }

    #[test]
    fn explicit_rows_drive_csv() {
        let r = Report {
            json: json!({}),
            rows: Some((
                vec!["s".into(), "v".into()],
                vec![vec!["0".into(), "1".into()]],
            )),
            positive: true,
        };
        assert_eq!(r.render(Format::Csv), "s,v\n0,1\n");
        assert_eq!(r.render(Format::Table), "s  v\n-  -\n0  1\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("ndf-out-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
