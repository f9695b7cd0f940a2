//! Compressed sparse row matrices and Matrix Market coordinate I/O.

use super::WorkloadError;
use std::io::{BufRead, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from raw CSR arrays, checking every structural invariant.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, WorkloadError> {
        let m = CsrMatrix { rows, cols, row_offsets, col_indices, values };
        m.validate()?;
        Ok(m)
    }

    /// Build from 0-based `(row, col, value)` triplets. Entries are sorted by
    /// column within each row; for repeated coordinates the last one wins.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, WorkloadError> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(WorkloadError::Invalid(format!("entry ({r},{c}) outside {rows}x{cols}")));
        }
        // stable sort keeps input order among duplicates, so the last copy is the winner
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));
        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for t in order {
            let (r, c, v) = triplets[t];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() = v;
                continue;
            }
            last = Some((r, c));
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        CsrMatrix::from_parts(rows, cols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    #[inline]
    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    /// All stored entries as 0-based triplets in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.rows)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |m: String| Err(WorkloadError::Invalid(m));
        if self.row_offsets.len() != self.rows + 1 {
            return bad(format!("row_offsets has {} entries for {} rows", self.row_offsets.len(), self.rows));
        }
        if self.row_offsets[0] != 0 || self.row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("row_offsets must start at 0 and be non-decreasing".into());
        }
        if self.row_offsets[self.rows] != self.col_indices.len() || self.col_indices.len() != self.values.len() {
            return bad("row_offsets, col_indices and values disagree on nnz".into());
        }
        for i in 0..self.rows {
            let (cols, _) = self.row(i);
            if cols.iter().any(|&c| c >= self.cols) {
                return bad(format!("row {i} has a column index outside [0, {})", self.cols));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {i} columns are not strictly increasing"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

fn parse_err(line: usize, message: impl Into<String>) -> WorkloadError {
    WorkloadError::Parse { line, message: message.into() }
}

fn parse_header(line: &str) -> Result<(Field, bool), WorkloadError> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, "header must start with %%MatrixMarket"));
    }
    if tokens.len() != 5 {
        return Err(parse_err(1, "header must read `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    if tokens[1] != "matrix" {
        return Err(parse_err(1, format!("unsupported object `{}`", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format `{}` (only coordinate)", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field `{other}`"))),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };
    Ok((field, symmetric))
}

fn parse_index(tok: Option<&str>, bound: usize, what: &str, line: usize) -> Result<usize, WorkloadError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what} index")))?;
    let i: usize = tok
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what} index `{tok}`")))?;
    if i == 0 || i > bound {
        return Err(parse_err(line, format!("{what} index {i} outside [1, {bound}]")));
    }
    Ok(i - 1)
}

/// Parse a Matrix Market coordinate stream into canonical CSR.
///
/// Indices are converted from 1-based to 0-based, symmetric storage is
/// mirrored (diagonal kept once), `pattern` entries get the value 1.0 and
/// duplicate coordinates resolve to their last occurrence.
pub fn read_matrix_market<R: BufRead>(source: R) -> Result<CsrMatrix, WorkloadError> {
    let mut lines = source.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (field, symmetric) = match lines.next() {
        Some((_, l)) => parse_header(&l?)?,
        None => return Err(parse_err(1, "empty input")),
    };

    let mut dims = None;
    let mut triplets = Vec::new();
    let mut seen = 0usize;
    let mut last_line = 1;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let body = line.trim();
        if body.is_empty() || body.starts_with('%') {
            continue;
        }
        let mut tok = body.split_whitespace();
        let Some((rows, cols, nnz)) = dims else {
            let mut next = |what: &str| -> Result<usize, WorkloadError> {
                let t = tok.next().ok_or_else(|| parse_err(no, format!("size line is missing {what}")))?;
                t.parse().map_err(|_| parse_err(no, format!("bad {what} `{t}`")))
            };
            let size = (next("rows")?, next("cols")?, next("nnz")?);
            if tok.next().is_some() {
                return Err(parse_err(no, "size line must hold exactly `rows cols nnz`"));
            }
            if symmetric && size.0 != size.1 {
                return Err(parse_err(no, "symmetric matrix must be square"));
            }
            triplets.reserve(if symmetric { 2 * size.2 } else { size.2 });
            dims = Some(size);
            continue;
        };
        if seen == nnz {
            return Err(parse_err(no, format!("more than the declared {nnz} entries")));
        }
        let i = parse_index(tok.next(), rows, "row", no)?;
        let j = parse_index(tok.next(), cols, "column", no)?;
        let v = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => {
                let t = tok.next().ok_or_else(|| parse_err(no, "missing value"))?;
                t.parse::<f64>().map_err(|_| parse_err(no, format!("bad value `{t}`")))?
            }
        };
        if tok.next().is_some() {
            return Err(parse_err(no, "trailing tokens after entry"));
        }
        triplets.push((i, j, v));
        if symmetric && i != j {
            triplets.push((j, i, v));
        }
        seen += 1;
    }
    let Some((rows, cols, nnz)) = dims else {
        return Err(parse_err(last_line, "missing size line"));
    };
    if seen < nnz {
        return Err(parse_err(last_line, format!("truncated: expected {nnz} entries, found {seen}")));
    }
    CsrMatrix::from_triplets(rows, cols, &triplets)
}

/// Write `m` as a general real coordinate file with 1-based indices.
pub fn write_matrix_market<W: Write>(m: &CsrMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.rows, m.cols, m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(out, "{} {} {}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Per-row nonzero statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStats {
    pub mean_nnz: f64,
    /// max / min over rows holding at least one nonzero; absent when none do.
    pub max_min_ratio: Option<f64>,
    /// Population variance over all rows.
    pub variance: f64,
    pub empty_rows: usize,
}

pub fn row_stats(m: &CsrMatrix) -> RowStats {
    let counts: Vec<f64> = (0..m.rows).map(|i| m.row_nnz(i) as f64).collect();
    if counts.is_empty() {
        return RowStats { mean_nnz: 0.0, max_min_ratio: None, variance: 0.0, empty_rows: 0 };
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let variance = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
    let nonempty = counts.iter().copied().filter(|&c| c > 0.0);
    let min = nonempty.clone().fold(f64::INFINITY, f64::min);
    let max = nonempty.fold(0.0, f64::max);
    RowStats {
        mean_nnz: mean,
        max_min_ratio: min.is_finite().then(|| max / min),
        variance,
        empty_rows: counts.iter().filter(|&&c| c == 0.0).count(),
    }
}
