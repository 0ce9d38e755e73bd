//! CSV emission. Floats use the shortest representation that parses back to
//! the same value; a missing value is an empty field.

use std::fmt::Write as _;
use std::path::Path;

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.join(","));
    }
    s
}

pub fn write_table(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, table(header, rows)).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))
}
