use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Velocity an agent follows when alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DesiredVelocity {
    Constant { value: Vec<f64> },
    /// `slope * x + offset`, componentwise.
    Affine { slope: f64, offset: Vec<f64> },
    /// 1D piecewise-linear table, constant beyond the end points.
    Tabulated { x: Vec<f64>, v: Vec<f64> },
}

impl DesiredVelocity {
    pub fn constant(value: Vec<f64>) -> Self {
        Self::Constant { value }
    }

    pub fn scalar(v: f64) -> Self {
        Self::Constant { value: vec![v] }
    }

    pub fn zero(dim: usize) -> Self {
        Self::Constant { value: vec![0.0; dim] }
    }

    pub fn affine(slope: f64, offset: Vec<f64>) -> Self {
        Self::Affine { slope, offset }
    }

    pub fn tabulated(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() || x.is_empty() {
            return Err(invalid("velocity table needs matching, nonempty columns"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("velocity table abscissae must increase"));
        }
        Ok(Self::Tabulated { x, v })
    }

    /// `c`, `c1,c2`, `affine:<slope>:<c1>[,<c2>]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let nums = |s: &str| -> Result<Vec<f64>> {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| invalid(format!("bad desired velocity `{spec}`")))
                })
                .collect()
        };
        if let Some(rest) = spec.strip_prefix("affine:") {
            let (slope, offset) = rest
                .split_once(':')
                .ok_or_else(|| invalid(format!("bad affine velocity `{spec}`")))?;
            let slope = nums(slope)?[0];
            return Ok(Self::affine(slope, nums(offset)?));
        }
        Ok(Self::constant(nums(spec)?))
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Constant { value } => Some(value.len()),
            Self::Affine { offset, .. } => Some(offset.len()),
            Self::Tabulated { .. } => Some(1),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Constant { value } => value.iter().all(|&v| v == 0.0),
            Self::Affine { slope, offset } => *slope == 0.0 && offset.iter().all(|&v| v == 0.0),
            Self::Tabulated { v, .. } => v.iter().all(|&v| v == 0.0),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::Constant { value } => out.copy_from_slice(value),
            Self::Affine { slope, offset } => {
                for ((o, xi), c) in out.iter_mut().zip(x).zip(offset) {
                    *o = slope * xi + c;
                }
            }
            Self::Tabulated { x: xs, v } => {
                let p = x[0];
                let n = xs.len();
                out[0] = if p <= xs[0] {
                    v[0]
                } else if p >= xs[n - 1] {
                    v[n - 1]
                } else {
                    let i = xs.partition_point(|&q| q <= p) - 1;
                    let t = (p - xs[i]) / (xs[i + 1] - xs[i]);
                    v[i] + t * (v[i + 1] - v[i])
                };
            }
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Affine { slope, .. } => slope.abs(),
            Self::Tabulated { x, v } => x
                .windows(2)
                .zip(v.windows(2))
                .map(|(a, b)| ((b[1] - b[0]) / (a[1] - a[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Largest difference quotient over `samples` points of `[lo, hi]^d`.
    pub fn sampled_lipschitz(&self, dim: usize, lo: f64, hi: f64, samples: usize) -> f64 {
        let pt = |i: usize| -> Vec<f64> {
            (0..dim)
                .map(|c| lo + (hi - lo) * ((i * (c + 2)) as f64 * 0.754_877_666_246_692_7).fract())
                .collect()
        };
        let (mut a, mut b) = (vec![0.0; dim], vec![0.0; dim]);
        let mut best: f64 = 0.0;
        for i in 0..samples {
            let (x, y) = (pt(i), pt(i + 1));
            self.eval(&x, &mut a);
            self.eval(&y, &mut b);
            let d = crate::space::distance(&x, &y);
            if d > 0.0 {
                best = best.max(crate::space::distance(&a, &b) / d);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declared_lipschitz_bounds_samples() {
        let cases = [
            (DesiredVelocity::scalar(1.0), 1),
            (DesiredVelocity::affine(-0.7, vec![1.0, 0.0]), 2),
            (DesiredVelocity::tabulated(vec![0.0, 1.0, 3.0], vec![1.0, 0.5, 2.0]).unwrap(), 1),
        ];
        for (v, d) in cases {
            assert!(v.sampled_lipschitz(d, -1.0, 4.0, 5000) <= v.lipschitz() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn parsing() {
        assert_eq!(DesiredVelocity::parse("1").unwrap(), DesiredVelocity::scalar(1.0));
        assert_eq!(
            DesiredVelocity::parse("affine:0.5:1,2").unwrap(),
            DesiredVelocity::affine(0.5, vec![1.0, 2.0])
        );
        assert!(DesiredVelocity::parse("fast").is_err());
        assert!(DesiredVelocity::zero(2).is_zero());
    }
}
