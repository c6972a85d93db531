//! The ordered d-dimensional sample `X_1, …, X_n` and its CSV format.
//!
//! CSV layout: one row per time index, `d` numeric columns. A first row
//! that does not parse as numbers is treated as a header. Ragged rows and
//! non-finite values are rejected.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MAX_DIM;

/// Immutable time-ordered sample of `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    dim: usize,
    data: Vec<f64>,
}

impl SeriesSample {
    /// Builds a sample from row-major coordinates.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Domain(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
        }
        if data.is_empty() {
            return Err(Error::TooSmall {
                what: "sample",
                needed: 1,
                got: 0,
            });
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite coordinate at index {} (value {})",
                pos / dim,
                data[pos]
            )));
        }
        Ok(Self { dim, data })
    }

    /// Builds a sample from a list of points, all of which must share one dimension.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).ok_or(Error::TooSmall {
            what: "sample",
            needed: 1,
            got: 0,
        })?;
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            data.extend_from_slice(p);
        }
        Self::from_flat(dim, data)
    }

    /// One-dimensional sample.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Keeps only the listed columns, in the given order.
    pub fn project(&self, columns: &[usize]) -> Result<SeriesSample> {
        if columns.is_empty() {
            return Err(Error::Domain("projection needs at least one column".into()));
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= self.dim) {
            return Err(Error::Domain(format!(
                "column {c} out of range for a table with {} columns",
                self.dim
            )));
        }
        let data = self.points().flat_map(|p| columns.iter().map(move |&c| p[c])).collect();
        SeriesSample::from_flat(columns.len(), data)
    }

    /// Applies `f` to every point.
    pub fn map_points<F: FnMut(&[f64]) -> Vec<f64>>(&self, mut f: F) -> Result<SeriesSample> {
        let pts: Vec<Vec<f64>> = self.points().map(&mut f).collect();
        SeriesSample::from_points(&pts)
    }

    /// Reads a sample from CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = read_rows(reader)?;
        let mut dim = None;
        let mut data = Vec::new();
        for (line, fields) in rows {
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.trim().parse::<f64>()).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if dim.is_none() && data.is_empty() && line == 1 => continue,
                Err(e) => {
                    return Err(Error::Parse {
                        line,
                        message: e.to_string(),
                    })
                }
            };
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::Parse {
                        line,
                        message: format!("ragged row: expected {d} columns, found {}", values.len()),
                    })
                }
                _ => {}
            }
            if let Some(x) = values.iter().find(|x| !x.is_finite()) {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value {x}"),
                });
            }
            data.extend(values);
        }
        let dim = dim.ok_or(Error::TooSmall {
            what: "csv sample",
            needed: 1,
            got: 0,
        })?;
        Self::from_flat(dim, data)
    }

    /// Writes the sample as headerless CSV with full round-trip precision.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for p in self.points() {
            w.write_record(p.iter().map(|x| format!("{x:?}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads raw CSV records with their 1-based line numbers, skipping blank lines.
pub(crate) fn read_rows<R: Read>(reader: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header() {
        let s = SeriesSample::read_csv("x,y\n1,2\n3,4.5\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.point(1), &[3.0, 4.5]);
    }

    #[test]
    fn csv_without_header() {
        let s = SeriesSample::read_csv("0.5\n-1e-3\n\n2\n".as_bytes()).unwrap();
        assert_eq!(s.as_flat(), &[0.5, -1e-3, 2.0]);
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let err = SeriesSample::read_csv("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn csv_rejects_text_after_first_row() {
        assert!(SeriesSample::read_csv("1,2\nfoo,3\n".as_bytes()).is_err());
        assert!(SeriesSample::read_csv("1\nnan\n".as_bytes()).is_err());
        assert!(SeriesSample::read_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = SeriesSample::from_points(&[[0.1, 1.0 / 3.0], [-2.5e-17, 7.0]]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(SeriesSample::read_csv(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn construction_invariants() {
        assert!(SeriesSample::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(SeriesSample::from_flat(1, vec![]).is_err());
        assert!(SeriesSample::from_flat(1, vec![f64::INFINITY]).is_err());
        assert!(SeriesSample::from_points(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn projection() {
        let s = SeriesSample::from_points(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let p = s.project(&[2, 0]).unwrap();
        assert_eq!(p.as_flat(), &[3.0, 1.0, 6.0, 4.0]);
        assert!(s.project(&[]).is_err());
        assert!(s.project(&[3]).is_err());
    }
}
