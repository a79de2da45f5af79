use crate::error::{Error, Result};

/// `count` points in `dim`-dimensional space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointBatch {
    count: usize,
    dim: usize,
    data: Vec<f64>,
}

impl PointBatch {
    pub fn new(count: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be positive"));
        }
        if data.len() != count * dim {
            return Err(Error::DimensionMismatch {
                expected: count * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point batch"));
        }
        Ok(Self { count, dim, data })
    }

    pub fn zeros(count: usize, dim: usize) -> Self {
        assert!(dim > 0, "point dimension must be positive");
        Self {
            count,
            dim,
            data: vec![0.0; count * dim],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::invalid("cannot infer dimension from zero rows"))?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), dim, data)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Rows selected by `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            count: indices.len(),
            dim: self.dim,
            data,
        }
    }

    /// Applies `x -> x * m` to every row, where `m` is `dim x out_dim` row-major.
    pub fn transform(&self, m: &[f64], out_dim: usize) -> Result<Self> {
        if m.len() != self.dim * out_dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim * out_dim,
                found: m.len(),
            });
        }
        let mut out = Self::zeros(self.count, out_dim);
        for (src, dst) in self.rows().zip(out.data.chunks_exact_mut(out_dim)) {
            for (k, &x) in src.iter().enumerate() {
                let mrow = &m[k * out_dim..(k + 1) * out_dim];
                for (d, &w) in dst.iter_mut().zip(mrow) {
                    *d += x * w;
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(())
    }

    pub(crate) fn require_count(&self, needed: usize) -> Result<()> {
        if self.count < needed {
            return Err(Error::TooFewPoints {
                needed,
                found: self.count,
            });
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sq_norm(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}
