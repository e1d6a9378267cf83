//! CSV and PGM writers, a CSV reader, and atomic file replacement.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context};

use pdc_core::FarFieldMap;

/// Nine significant digits.
pub fn fmt9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Writes `contents` to a temporary sibling of `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(contents)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// A CSV table with `# key=value` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(meta: Vec<(String, String)>, columns: &[&str]) -> Self {
        Self { meta, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt9(v)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        write_atomic(path, self.render().as_bytes())
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut meta = Vec::new();
        let mut columns = None;
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if let Some(m) = line.strip_prefix("# ") {
                let Some((k, v)) = m.split_once('=') else {
                    bail!("line {}: metadata without `=`", n + 1);
                };
                meta.push((k.to_string(), v.to_string()));
            } else if columns.is_none() {
                columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
            } else {
                let row = line
                    .split(',')
                    .map(|c| c.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .with_context(|| format!("line {}: bad number", n + 1))?;
                rows.push(row);
            }
        }
        let columns = columns.context("missing column header")?;
        if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != columns.len()) {
            bail!("row {}: expected {} columns", i + 1, columns.len());
        }
        Ok(Self { meta, columns, rows })
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }
}

fn map_meta(map: &FarFieldMap, meta: &[(String, String)]) -> Vec<(String, String)> {
    let g = &map.grid;
    let mut m = vec![("kind".to_string(), map.meta.kind.to_string())];
    m.extend(meta.iter().cloned());
    m.push(("nx".into(), g.nx.to_string()));
    m.push(("ny".into(), g.ny.to_string()));
    m.push(("extent_X0".into(), g.extent.to_string()));
    m.push(("failed_cells".into(), map.failures.len().to_string()));
    m
}

/// Map as `x_over_X0,y_over_X0,value` rows, y outer.
pub fn map_table(map: &FarFieldMap, meta: &[(String, String)]) -> Table {
    let mut t = Table::new(map_meta(map, meta), &["x_over_X0", "y_over_X0", "value"]);
    let g = &map.grid;
    for (idx, &v) in map.values.iter().enumerate() {
        let (i, j) = g.cell_of(idx);
        let c = g.center(i, j);
        t.rows.push(vec![c[0], c[1], v]);
    }
    t
}

/// Plain P2 greymap, linear min-max scaling, top row at the largest y.
/// Failed cells are written as 0.
pub fn render_pgm(map: &FarFieldMap, meta: &[(String, String)]) -> String {
    let g = &map.grid;
    let (lo, hi) = map.min_max().unwrap_or((0.0, 0.0));
    let mut s = String::from("P2\n");
    for (k, v) in map_meta(map, meta) {
        let _ = writeln!(s, "# {k}={v}");
    }
    let _ = writeln!(s, "# min={}", fmt9(lo));
    let _ = writeln!(s, "# max={}", fmt9(hi));
    let _ = writeln!(s, "{} {}\n255", g.nx, g.ny);
    for j in (0..g.ny).rev() {
        let row: Vec<String> = (0..g.nx)
            .map(|i| {
                let v = map.value(i, j);
                let level =
                    if v.is_finite() && hi > lo { ((v - lo) / (hi - lo) * 255.0).round() } else { 0.0 };
                (level as u32).to_string()
            })
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits_round_trip() {
        for v in [0.0, -1.0, 1.0 / 3.0, 6.02214076e23, -2.5e-310, f64::MAX, 0.0657391234567] {
            let s = fmt9(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(fmt9(back), s);
            if v != 0.0 && v.is_normal() {
                assert!(((back - v) / v).abs() < 5e-9);
            }
        }
        assert_eq!(fmt9(1.0 / 3.0), "3.33333333e-1");
    }

    #[test]
    fn table_round_trip() {
        let mut t = Table::new(vec![("sigma".into(), "2".into())], &["a", "b"]);
        t.rows.push(vec![1.0, f64::NAN]);
        t.rows.push(vec![-3.25e-7, 12.0]);
        let back = Table::parse(&t.render()).unwrap();
        assert_eq!(back.meta, t.meta);
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows[1], t.rows[1]);
        assert!(back.rows[0][1].is_nan());
        assert_eq!(back.meta_value("sigma"), Some("2"));
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(Table::parse("a,b\n1,2\n3\n").is_err());
        assert!(Table::parse("# novalue\na\n").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        let names: Vec<_> = fs::read_dir(p.parent().unwrap()).unwrap().collect();
        assert_eq!(names.len(), 1);
    }
}
