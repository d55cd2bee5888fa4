use super::{side_of, LinearOperator, OperatorKind};
use crate::error::{invalid, Error, Result};
use nalgebra::DMatrix;
use std::io::Write;

/// An explicitly stored matrix. Only sensible for small test problems.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    side: usize,
}

impl DenseOperator {
    /// The number of columns must be a perfect square `n²`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let side = side_of(matrix.ncols())
            .ok_or_else(|| invalid("matrix", format!("{} columns is not a perfect square", matrix.ncols())))?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dense operator"));
        }
        Ok(Self { matrix, side })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.matrix.nrows()
    }
    fn cols(&self) -> usize {
        self.matrix.ncols()
    }
    fn image_side(&self) -> usize {
        self.side
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::ExplicitDense
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for (j, col) in self.matrix.column_iter().enumerate() {
            let xj = x[j];
            if xj != 0.0 {
                for (yi, a) in y.iter_mut().zip(col.iter()) {
                    *yi += a * xj;
                }
            }
        }
    }
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        for (xj, col) in x.iter_mut().zip(self.matrix.column_iter()) {
            *xj = col.iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }
}

/// Write a matrix as plain text: row-major, one row per line, entries
/// separated by single spaces with 17 significant digits.
pub fn write_dense_matrix<W: Write>(mut out: W, m: &DMatrix<f64>) -> std::io::Result<()> {
    for i in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Parse the format written by [`write_dense_matrix`]. Blank lines are
/// ignored; every row must have the same number of entries.
pub fn parse_dense_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: `{tok}`: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} entries, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_is_lossless() {
        let m = DMatrix::from_fn(3, 4, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0) * 1e-7 - 0.1);
        let mut buf = Vec::new();
        write_dense_matrix(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(parse_dense_matrix(&text).unwrap(), m);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(parse_dense_matrix("1 2\n3\n").is_err());
        assert!(parse_dense_matrix("1 x\n").is_err());
    }

    #[test]
    fn dense_requires_square_image_domain() {
        assert!(DenseOperator::new(DMatrix::zeros(3, 3)).is_err());
        assert!(DenseOperator::new(DMatrix::zeros(3, 4)).is_ok());
    }
}
