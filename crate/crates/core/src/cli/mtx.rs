//! MatrixMarket `array` and `coordinate` files, `real general` only.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::matcore::Matrix;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct MtxError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> MtxError {
    MtxError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

fn parse_header(line: &str) -> Result<Layout, MtxError> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(err(1, "missing %%MatrixMarket banner"));
    }
    if tokens.len() != 5 || tokens[1] != "matrix" {
        return Err(err(1, format!("malformed header {line:?}")));
    }
    let layout = match tokens[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(err(1, format!("unsupported format {other:?}"))),
    };
    if tokens[3] != "real" {
        return Err(err(1, format!("unsupported field {:?}, expected real", tokens[3])));
    }
    if tokens[4] != "general" {
        return Err(err(1, format!("unsupported symmetry {:?}, expected general", tokens[4])));
    }
    Ok(layout)
}

fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize, MtxError> {
    token
        .parse()
        .map_err(|_| err(line, format!("invalid {what} {token:?}")))
}

fn parse_value(token: &str, line: usize) -> Result<f64, MtxError> {
    let value: f64 = token
        .parse()
        .map_err(|_| err(line, format!("invalid number {token:?}")))?;
    if !value.is_finite() {
        return Err(err(line, format!("non-finite value {token:?}")));
    }
    Ok(value)
}

/// Parses MatrixMarket text. `array` entries are column-major; `coordinate`
/// entries are 1-based `(i, j, value)` triplets with unlisted entries zero.
pub fn parse_matrix(text: &str) -> Result<Matrix, MtxError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let layout = parse_header(header)?;
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));

    let (size_line, size) = body.next().ok_or_else(|| err(1, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let expected_dims = if layout == Layout::Array { 2 } else { 3 };
    if dims.len() != expected_dims {
        return Err(err(size_line, format!("expected {expected_dims} size fields, got {size:?}")));
    }
    let rows = parse_usize(dims[0], size_line, "row count")?;
    let cols = parse_usize(dims[1], size_line, "column count")?;
    if rows == 0 || cols == 0 {
        return Err(err(size_line, format!("empty matrix {rows}x{cols}")));
    }

    let mut entries = vec![0.0; rows * cols];
    match layout {
        Layout::Array => {
            let mut k = 0;
            for (line, text) in body {
                for token in text.split_whitespace() {
                    if k == rows * cols {
                        return Err(err(line, format!("more than {} entries", rows * cols)));
                    }
                    let (i, j) = (k % rows, k / rows);
                    entries[i * cols + j] = parse_value(token, line)?;
                    k += 1;
                }
            }
            if k != rows * cols {
                return Err(err(size_line, format!("expected {} entries, found {k}", rows * cols)));
            }
        }
        Layout::Coordinate => {
            let nnz = parse_usize(dims[2], size_line, "entry count")?;
            let mut seen = vec![false; rows * cols];
            let mut k = 0;
            for (line, text) in body {
                let fields: Vec<&str> = text.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(err(line, format!("expected `i j value`, got {text:?}")));
                }
                if k == nnz {
                    return Err(err(line, format!("more than {nnz} entries")));
                }
                let i = parse_usize(fields[0], line, "row index")?;
                let j = parse_usize(fields[1], line, "column index")?;
                if !(1..=rows).contains(&i) || !(1..=cols).contains(&j) {
                    return Err(err(line, format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                let slot = (i - 1) * cols + (j - 1);
                if seen[slot] {
                    return Err(err(line, format!("duplicate entry ({i}, {j})")));
                }
                seen[slot] = true;
                entries[slot] = parse_value(fields[2], line)?;
                k += 1;
            }
            if k != nnz {
                return Err(err(size_line, format!("expected {nnz} entries, found {k}")));
            }
        }
    }
    Matrix::from_row_major(rows, cols, &entries).map_err(|e| err(size_line, e.to_string()))
}

/// Shortest text that parses back to the same `f64`.
fn format_value(v: f64) -> String {
    let magnitude = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&magnitude) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Dense `array real general` text, column-major.
pub fn write_matrix(m: &Matrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for v in m.to_col_major() {
        out.push_str(&format_value(v));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: String, source: MtxError },
}

pub fn read_matrix(path: &Path) -> Result<Matrix, ReadError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| ReadError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_matrix(&text).map_err(|source| ReadError::Parse { path: shown, source })
}
