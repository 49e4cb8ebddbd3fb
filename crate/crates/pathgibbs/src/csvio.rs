//! CSV emission and parsing.
//!
//! Floats are printed with 17 significant digits, which round-trips every
//! f64 exactly; the configuration reader/writer pair is bit-faithful.

use std::io::{BufRead, Write};

use sha2::{Digest, Sha256};

use crate::configuration::{Configuration, MarkedPoint};
use crate::error::{Error, Result};
use crate::langevin::PathMark;

/// 17-significant-digit scientific notation; round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::CsvParse {
        line,
        msg: format!("bad float {s:?}: {e}"),
    })
}

/// Write one path mark: a `s, m_1..m_d` row per grid node.
pub fn write_mark<W: Write>(w: &mut W, mark: &PathMark) -> Result<()> {
    let d = mark.dim();
    let header: Vec<String> = std::iter::once("s".to_string())
        .chain((1..=d).map(|i| format!("m{i}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    let n = mark.n_steps();
    for (k, node) in mark.nodes().enumerate() {
        let mut row = vec![fmt_f64(k as f64 / n as f64)];
        row.extend(node.iter().map(|v| fmt_f64(*v)));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn config_header(d: usize, n_nodes: usize) -> String {
    let mut cols = vec!["point_id".to_string()];
    cols.extend((1..=d).map(|i| format!("x{i}")));
    for k in 0..n_nodes {
        cols.extend((1..=d).map(move |i| format!("m{k}_{i}")));
    }
    cols.join(",")
}

/// Write a configuration: a `point_id, x_1..x_d, mark nodes` row per point.
pub fn write_configuration<W: Write>(w: &mut W, gamma: &Configuration) -> Result<()> {
    let (d, n_nodes) = match gamma.points().first() {
        Some(p) => (p.dim(), p.mark.n_nodes()),
        None => (1, 0),
    };
    writeln!(w, "{}", config_header(d, n_nodes))?;
    for (id, p) in gamma.points().iter().enumerate() {
        let mut row = vec![id.to_string()];
        row.extend(p.x.iter().map(|v| fmt_f64(*v)));
        row.extend(p.mark.values().iter().map(|v| fmt_f64(*v)));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Read a configuration written by [`write_configuration`].
pub fn read_configuration<R: BufRead>(r: R) -> Result<Configuration> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::CsvParse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let d = cols.iter().filter(|c| c.starts_with('x')).count();
    if d == 0 || cols[0] != "point_id" {
        return Err(Error::CsvParse {
            line: 1,
            msg: "expected point_id,x1..xd,mark columns".into(),
        });
    }
    let mark_cols = cols.len() - 1 - d;
    if mark_cols % d != 0 {
        return Err(Error::CsvParse {
            line: 1,
            msg: "mark columns not a multiple of d".into(),
        });
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::CsvParse {
                line: i + 1,
                msg: format!("expected {} fields, got {}", cols.len(), fields.len()),
            });
        }
        let x: Vec<f64> = fields[1..=d]
            .iter()
            .map(|s| parse_f64(s, i + 1))
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = fields[d + 1..]
            .iter()
            .map(|s| parse_f64(s, i + 1))
            .collect::<Result<Vec<_>>>()?;
        let mark = PathMark::new(d, values).map_err(|e| Error::CsvParse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        points.push(MarkedPoint { x, mark });
    }
    Configuration::new(points)
}

/// Write a generic table: a header plus float rows.
pub fn write_table<W: Write>(w: &mut W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Hex SHA-256 of a byte slice, for run manifests.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
