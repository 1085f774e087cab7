//! Point storage and the spatial domain.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A list of points in R^d, stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Points {
    dim: usize,
    coords: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(Self { dim, coords })
    }

    pub fn zeros(dim: usize, n: usize) -> Self {
        Self {
            dim,
            coords: vec![0.0; dim * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        let mut coords = Vec::with_capacity(dim * rows.len());
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    /// One-dimensional points.
    pub fn line(xs: Vec<f64>) -> Self {
        Self { dim: 1, coords: xs }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Closest pair `(i, j, distance)` by exhaustive search; `None` for fewer
    /// than two points.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let d = distance(self.get(i), self.get(j));
                if best.is_none_or(|(_, _, b)| d < b) {
                    best = Some((i, j, d));
                }
            }
        }
        best
    }
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    if a.len() == 1 {
        return a[0].abs();
    }
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Free space R^d, or the periodic interval [0, L).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Free { dim: usize },
    Periodic { length: f64 },
}

impl Domain {
    pub fn free(dim: usize) -> Self {
        Domain::Free { dim }
    }

    pub fn periodic(length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid(format!("periodic length must be positive, got {length}")));
        }
        Ok(Domain::Periodic { length })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Free { dim } => *dim,
            Domain::Periodic { .. } => 1,
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            Domain::Periodic { length } => Some(*length),
            Domain::Free { .. } => None,
        }
    }

    /// Maps every coordinate into [0, L) on a periodic domain.
    pub fn wrap_all(&self, coords: &mut [f64]) {
        if let Domain::Periodic { length } = self {
            for x in coords {
                *x = wrap(*x, *length);
            }
        }
    }

    /// Periodic interaction sums use the forward gap in [0, L) and its single
    /// backward image; both together cover every image within distance L.
    pub fn check_support(&self, support: f64) -> Result<()> {
        match self {
            Domain::Periodic { length } if support >= *length => Err(Error::SupportExceedsPeriod {
                support,
                length: *length,
            }),
            _ => Ok(()),
        }
    }
}

#[inline]
pub fn wrap(x: f64, length: f64) -> f64 {
    let w = x.rem_euclid(length);
    // rem_euclid can return `length` itself for tiny negative inputs
    if w >= length {
        0.0
    } else {
        w
    }
}
