//! Dense symmetric matrices and their file formats.
//!
//! `SymMatrix` is the carrier for covariance matrices, precision matrices,
//! sample covariances, and estimates. Symmetry is enforced at construction:
//! inputs within a small relative asymmetry are symmetrized exactly, anything
//! worse is rejected.
//!
//! File formats: CSV is `p` rows of `p` comma-separated values (no header);
//! JSON is `{"p": ..., "rows": [[...]]}`. Writers emit the full matrix with
//! 17 significant digits so a read-back reproduces every entry bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tolerated relative asymmetry before a constructor rejects input.
const ASYMMETRY_REL_TOL: f64 = 1e-8;

/// A dense symmetric matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds from a dense square matrix. Entries must be finite; the input
    /// must be symmetric up to a small relative tolerance and is symmetrized
    /// exactly by averaging mirrored entries.
    pub fn from_dense(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected square",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut scale = 0.0f64;
        for v in a.iter() {
            if !v.is_finite() {
                return Err(Error::InvalidInput("matrix entry is not finite".into()));
            }
            scale = scale.max(v.abs());
        }
        let p = a.nrows();
        let mut data = DMatrix::zeros(p, p);
        for i in 0..p {
            data[(i, i)] = a[(i, i)];
            for j in (i + 1)..p {
                let (x, y) = (a[(i, j)], a[(j, i)]);
                if (x - y).abs() > ASYMMETRY_REL_TOL * scale.max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({}, {}): {} vs {}",
                        i + 1,
                        j + 1,
                        x,
                        y
                    )));
                }
                let avg = 0.5 * (x + y);
                data[(i, j)] = avg;
                data[(j, i)] = avg;
            }
        }
        Ok(SymMatrix { data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    r.len(),
                    p
                )));
            }
        }
        Self::from_dense(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
    }

    pub fn identity(p: usize) -> Self {
        SymMatrix {
            data: DMatrix::identity(p, p),
        }
    }

    pub fn zeros(p: usize) -> Self {
        SymMatrix {
            data: DMatrix::zeros(p, p),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let p = diag.len();
        SymMatrix {
            data: DMatrix::from_fn(p, p, |i, j| if i == j { diag[i] } else { 0.0 }),
        }
    }

    /// Wraps a matrix already known to be exactly symmetric. Debug builds
    /// assert the invariant.
    pub(crate) fn from_symmetric_unchecked(data: DMatrix<f64>) -> Self {
        debug_assert!(data.nrows() == data.ncols());
        debug_assert!((0..data.nrows())
            .all(|i| (0..data.ncols()).all(|j| data[(i, j)] == data[(j, i)])));
        SymMatrix { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Sets entry (i, j) and its mirror.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[(i, j)] = v;
        self.data[(j, i)] = v;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    /// Largest absolute entrywise difference to another matrix of equal size.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let mut m = 0.0f64;
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            m = m.max((a - b).abs());
        }
        m
    }

    /// Extracts the dense principal submatrix on the given (0-based) vertex set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.data[(idx[a], idx[b])])
    }

    // ---- file formats ----

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad matrix entry {f:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("matrix file is empty".into()));
        }
        Self::from_rows(&rows)
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let p = self.dim();
        for i in 0..p {
            let line: Vec<String> = (0..p).map(|j| format_f64(self.data[(i, j)])).collect();
            writeln!(writer, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_json<R: Read>(mut reader: R) -> Result<Self> {
        let mut buf = String::new();
        reader.read_to_string(&mut buf)?;
        let parsed: MatrixJson = serde_json::from_str(&buf)?;
        if parsed.rows.len() != parsed.p {
            return Err(Error::Parse(format!(
                "matrix JSON declares p = {} but has {} rows",
                parsed.p,
                parsed.rows.len()
            )));
        }
        Self::from_rows(&parsed.rows)
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        let p = self.dim();
        let rows: Vec<Vec<f64>> = (0..p)
            .map(|i| (0..p).map(|j| self.data[(i, j)]).collect())
            .collect();
        let json = serde_json::to_string_pretty(&MatrixJson { p, rows })?;
        writer.write_all(json.as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    /// Reads a matrix from a path, picking the format by extension
    /// (`.json` means JSON, anything else CSV).
    pub fn read_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::read_json(file)
        } else {
            Self::read_csv(file)
        }
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn write_json_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_json(std::fs::File::create(path)?)
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, ij: (usize, usize)) -> &f64 {
        &self.data[ij]
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    p: usize,
    rows: Vec<Vec<f64>>,
}

/// 17 significant digits: enough to reproduce any f64 exactly on read-back.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrizes_rounding_dust() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0 + 1e-12], vec![2.0, 3.0]]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn rejects_gross_asymmetry() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 5.0], vec![2.0, 3.0]]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SymMatrix::from_rows(&[vec![1.0, f64::NAN], vec![f64::NAN, 3.0]]).is_err());
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0]]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = SymMatrix::from_rows(&[
            vec![1.0 / 3.0, -2.123456789012345e-7],
            vec![-2.123456789012345e-7, 9.87654321e12],
        ])
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = SymMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = SymMatrix::from_rows(&[vec![0.1, 0.2], vec![0.2, 0.3]]).unwrap();
        let mut buf = Vec::new();
        m.write_json(&mut buf).unwrap();
        let back = SymMatrix::read_json(buf.as_slice()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn json_dimension_check() {
        let bad = r#"{"p": 3, "rows": [[1.0, 0.0], [0.0, 1.0]]}"#;
        assert!(SymMatrix::read_json(bad.as_bytes()).is_err());
    }

    #[test]
    fn empty_csv_is_a_parse_error() {
        assert!(matches!(
            SymMatrix::read_csv("".as_bytes()),
            Err(Error::Parse(_))
        ));
    }
}
