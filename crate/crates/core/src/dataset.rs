//! The dataset container: an ordered list of points in ℝᵐ.

use crate::error::{Error, Result};

/// An immutable set of `n ≥ 2` points with stable ids `0..n-1`.
///
/// Coordinates are stored row-major in one flat buffer; every coordinate is
/// finite by construction. Point ids never change across transformations:
/// a derived dataset produced by any transform in this crate keeps id `i`
/// referring to the image of the original point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    data: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from row vectors, validating shape and finiteness.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::validation(format!(
                "a dataset needs at least 2 points, got {}",
                rows.len()
            )));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::validation("points must have at least one coordinate"));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::validation(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
            for (d, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::validation(format!(
                        "point {i}, coordinate {d} is not finite"
                    )));
                }
                data.push(x);
            }
        }
        Ok(Dataset { dim, data })
    }

    /// Builds a dataset from a flat row-major buffer of `n × dim` coordinates.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("points must have at least one coordinate"));
        }
        if data.len() % dim != 0 {
            return Err(Error::validation(format!(
                "flat buffer of {} values is not a multiple of dim {dim}",
                data.len()
            )));
        }
        let n = data.len() / dim;
        if n < 2 {
            return Err(Error::validation(format!(
                "a dataset needs at least 2 points, got {n}"
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::validation(format!(
                "point {}, coordinate {} is not finite",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Dataset { dim, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // n ≥ 2 by construction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// The flat row-major coordinate buffer.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Copies the coordinates into row vectors.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(|p| p.to_vec()).collect()
    }

    /// A copy of this dataset with every coordinate multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::validation("scale factor must be finite"));
        }
        Dataset::from_flat(self.dim, self.data.iter().map(|x| x * alpha).collect())
    }
}
