//! Time-gridded multi-coordinate paths and their CSV form.

use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("time grid must be strictly increasing (index {0})")]
    NonIncreasing(usize),
    #[error("value buffer has {values} entries, expected {rows} rows × {dim} columns")]
    Shape { values: usize, rows: usize, dim: usize },
    #[error("header has {got} columns, expected {expected}")]
    Header { got: usize, expected: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad number {text:?} at row {row}")]
    Parse { text: String, row: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Values on a strictly increasing time grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    t: Vec<f64>,
    v: Vec<f64>,
    dim: usize,
}

impl SamplePath {
    pub fn new(t: Vec<f64>, v: Vec<f64>, dim: usize) -> Result<Self, PathError> {
        if v.len() != t.len() * dim {
            return Err(PathError::Shape { values: v.len(), rows: t.len(), dim });
        }
        if let Some(i) = (1..t.len()).find(|&i| t[i] <= t[i - 1]) {
            return Err(PathError::NonIncreasing(i));
        }
        Ok(Self { t, v, dim })
    }

    /// Builds a path from per-coordinate columns sharing the grid `t`.
    pub fn from_columns(t: Vec<f64>, columns: &[Vec<f64>]) -> Result<Self, PathError> {
        let dim = columns.len();
        let rows = t.len();
        let mut v = Vec::with_capacity(rows * dim);
        for i in 0..rows {
            for c in columns {
                if c.len() != rows {
                    return Err(PathError::Shape { values: c.len(), rows, dim: 1 });
                }
                v.push(c[i]);
            }
        }
        Self::new(t, v, dim)
    }

    /// Uniform grid `0, dt, ..., steps·dt` with every value zero.
    pub fn zeros_uniform(dim: usize, dt: f64, steps: usize) -> Self {
        Self { t: uniform_grid(dt, steps), v: vec![0.0; (steps + 1) * dim], dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.v[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.v[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.v[i * self.dim + k]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i, k)).collect()
    }

    pub fn last_row(&self) -> &[f64] {
        self.row(self.len() - 1)
    }

    /// The first `rows` grid points.
    pub fn truncated(&self, rows: usize) -> Self {
        let rows = rows.min(self.len());
        Self { t: self.t[..rows].to_vec(), v: self.v[..rows * self.dim].to_vec(), dim: self.dim }
    }

    /// Every `stride`-th grid point starting at 0.
    pub fn subsampled(&self, stride: usize) -> Self {
        let idx: Vec<usize> = (0..self.len()).step_by(stride.max(1)).collect();
        let t = idx.iter().map(|&i| self.t[i]).collect();
        let mut v = Vec::with_capacity(idx.len() * self.dim);
        for &i in &idx {
            v.extend_from_slice(self.row(i));
        }
        Self { t, v, dim: self.dim }
    }

    /// Same grid, values mapped row by row.
    pub fn map_rows<F: FnMut(&[f64], &mut [f64])>(&self, out_dim: usize, mut f: F) -> Self {
        let mut v = vec![0.0; self.len() * out_dim];
        for i in 0..self.len() {
            f(self.row(i), &mut v[i * out_dim..(i + 1) * out_dim]);
        }
        Self { t: self.t.clone(), v, dim: out_dim }
    }

    /// Writes a header row (`time` plus `names`) followed by one row per grid
    /// point, every number printed with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W, names: &[String]) -> Result<(), PathError> {
        if names.len() != self.dim {
            return Err(PathError::Header { got: names.len(), expected: self.dim });
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string()];
        header.extend(names.iter().cloned());
        w.write_record(&header)?;
        let mut rec = Vec::with_capacity(self.dim + 1);
        for i in 0..self.len() {
            rec.clear();
            rec.push(fmt_f64(self.t[i]));
            rec.extend(self.row(i).iter().map(|&x| fmt_f64(x)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`SamplePath::write_csv`]; returns the
    /// path and the coordinate column names.
    pub fn read_csv<R: Read>(reader: R) -> Result<(Self, Vec<String>), PathError> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() {
            return Err(PathError::Header { got: 0, expected: 1 });
        }
        let dim = header.len() - 1;
        let mut t = Vec::new();
        let mut v = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            for (j, field) in rec.iter().enumerate() {
                let x: f64 = field.parse().map_err(|_| PathError::Parse { text: field.to_string(), row })?;
                if j == 0 {
                    t.push(x);
                } else {
                    v.push(x);
                }
            }
        }
        Ok((Self::new(t, v, dim)?, header[1..].to_vec()))
    }
}

/// `{:.16e}` formatting: 17 significant digits, enough for an exact round trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `0, dt, 2dt, ..., steps·dt` computed as `i·dt` to avoid drift.
pub fn uniform_grid(dt: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| i as f64 * dt).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(SamplePath::new(vec![0.0, 0.0], vec![1.0, 2.0], 1), Err(PathError::NonIncreasing(1))));
        assert!(matches!(SamplePath::new(vec![0.0, 1.0], vec![1.0], 1), Err(PathError::Shape { .. })));
    }

    #[test]
    fn csv_header_and_format() {
        let p = SamplePath::new(vec![0.0, 0.5], vec![1.0, -2.0, 0.1, 3.0], 2).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf, &["a".into(), "b".into()]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("time,a,b"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,1.0000000000000000e0,-2.0000000000000000e0"));
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(vals in proptest::collection::vec(-1e300f64..1e300, 1..40), scale in 1e-12f64..1e3) {
            let n = vals.len();
            let t: Vec<f64> = (0..n).map(|i| i as f64 * scale).collect();
            let p = SamplePath::new(t, vals, 1).unwrap();
            let mut buf = Vec::new();
            p.write_csv(&mut buf, &["x".into()]).unwrap();
            let (q, names) = SamplePath::read_csv(&buf[..]).unwrap();
            prop_assert_eq!(names, vec!["x".to_string()]);
            prop_assert_eq!(p, q);
        }
    }
}
