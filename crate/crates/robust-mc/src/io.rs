//! Plain-text file formats used by the CLI: dense matrices, observation
//! masks, coefficient triples, CSV tables, and PGM heatmaps. All writes
//! go through a temp file plus rename so readers never see partial
//! output.

use crate::error::{Error, Result};
use crate::mat::DenseMatrix;
use std::fs;
use std::io::Write as _;
use std::path::Path;

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write `contents` atomically: temp file in the same directory, then
/// rename over the destination.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| io_err(path, e))?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(contents.as_bytes()).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Matrix format: first line `m n`, then m lines of n space-separated
/// values in row order.
pub fn write_matrix(path: &Path, a: &DenseMatrix) -> Result<()> {
    let (m, n) = (a.rows(), a.cols());
    let mut out = String::with_capacity(m * n * 20);
    out.push_str(&format!("{m} {n}\n"));
    for i in 0..m {
        let row: Vec<String> = (0..n).map(|j| format!("{:.17e}", a[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty matrix file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(path, format!("bad dimension `{t}`"))))
        .collect::<Result<_>>()?;
    let [m, n] = dims[..] else {
        return Err(parse_err(path, "header must be `rows cols`"));
    };
    let mut entries = Vec::with_capacity(m * n);
    for (i, line) in lines.enumerate() {
        if i >= m {
            return Err(parse_err(path, format!("more than {m} data rows")));
        }
        for t in line.split_whitespace() {
            let v: f64 = t
                .parse()
                .map_err(|_| parse_err(path, format!("bad value `{t}` on data row {i}")))?;
            entries.push(v);
        }
    }
    if entries.len() != m * n {
        return Err(parse_err(
            path,
            format!("expected {} values, found {}", m * n, entries.len()),
        ));
    }
    DenseMatrix::from_row_major(m, n, &entries)
}

/// Mask format: lines of `i j` (0-based coefficient positions).
pub fn write_mask(path: &Path, mask: &[(usize, usize)]) -> Result<()> {
    let mut out = String::with_capacity(mask.len() * 8);
    for &(i, j) in mask {
        out.push_str(&format!("{i} {j}\n"));
    }
    write_atomic(path, &out)
}

pub fn read_mask(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut mask = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [i, j] = toks[..] else {
            return Err(parse_err(path, format!("line {}: expected `i j`", ln + 1)));
        };
        let i: usize = i
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad index `{i}`", ln + 1)))?;
        let j: usize = j
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad index `{j}`", ln + 1)))?;
        mask.push((i, j));
    }
    Ok(mask)
}

/// Coefficient format: lines of `i j value`.
pub fn write_coeffs(path: &Path, triples: &[(usize, usize, f64)]) -> Result<()> {
    let mut out = String::with_capacity(triples.len() * 28);
    for &(i, j, v) in triples {
        out.push_str(&format!("{i} {j} {v:.17e}\n"));
    }
    write_atomic(path, &out)
}

pub fn read_coeffs(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut triples = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [i, j, v] = toks[..] else {
            return Err(parse_err(
                path,
                format!("line {}: expected `i j value`", ln + 1),
            ));
        };
        let i: usize = i
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad index `{i}`", ln + 1)))?;
        let j: usize = j
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad index `{j}`", ln + 1)))?;
        let v: f64 = v
            .parse()
            .map_err(|_| parse_err(path, format!("line {}: bad value `{v}`", ln + 1)))?;
        triples.push((i, j, v));
    }
    Ok(triples)
}

/// CSV with a header row; all cells are preformatted strings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::invalid(format!(
                "csv row has {} cells but header has {}",
                row.len(),
                header.len()
            )));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, &out)
}

/// ASCII PGM (P2) heatmap of values in [0, 1], mapped to gray levels
/// 0..=255 row by row.
pub fn write_pgm(path: &Path, values: &[Vec<f64>]) -> Result<()> {
    let rows = values.len();
    let cols = values.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 || values.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid("pgm grid must be rectangular and non-empty"));
    }
    let mut out = format!("P2\n{cols} {rows}\n255\n");
    for row in values {
        let line: Vec<String> = row
            .iter()
            .map(|&v| {
                let g = (v.clamp(0.0, 1.0) * 255.0).round() as u32;
                g.to_string()
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    write_atomic(path, &out)
}
