//! Unnormalized 1-Wasserstein distances between equal-mass measures.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::measure::{total_mass, AtomicMeasure, BumpMeasure, BumpProfile, CrowdMeasure, WeightedCloud};
use crate::numerics::{compensated_sum, integrate, CompensatedSum};
use crate::simplex::solve_transport;
use crate::space::{distance, Points};

/// Largest support accepted by the transport oracle, per side.
pub const LP_MAX_POINTS: usize = 2000;

const MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum W1Method {
    Cdf1d,
    Semidiscrete,
    LpOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct W1Result {
    pub value: f64,
    pub method: W1Method,
    pub certified_error: f64,
}

fn check_masses(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > MASS_TOL * a.abs().max(b.abs()).max(1.0) {
        return Err(Error::MassMismatch { left: a, right: b });
    }
    Ok(())
}

enum Cdf<'a> {
    Steps { xs: Vec<f64>, cum: Vec<f64> },
    Grid { dx: f64, length: f64, cum: Vec<f64>, values: &'a [f64] },
    Bumps { centers: Vec<f64>, bumps: &'a BumpMeasure },
}

impl<'a> Cdf<'a> {
    fn new(m: &'a CrowdMeasure) -> Result<Self> {
        if m.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: m.dim() });
        }
        Ok(match m {
            CrowdMeasure::Atomic(a) => Self::steps(a.points.as_slice(), None),
            CrowdMeasure::Cloud(c) => Self::steps(c.points.as_slice(), Some(&c.weights)),
            CrowdMeasure::Grid(g) => {
                let dx = g.cell_width();
                let mut cum = Vec::with_capacity(g.cells() + 1);
                let mut acc = CompensatedSum::new();
                cum.push(0.0);
                for v in &g.values {
                    acc.add(v * dx);
                    cum.push(acc.value());
                }
                Self::Grid { dx, length: g.length, cum, values: &g.values }
            }
            CrowdMeasure::Bumps(b) => {
                let mut centers = b.centers.as_slice().to_vec();
                centers.sort_by(f64::total_cmp);
                if centers.windows(2).any(|w| w[1] - w[0] < 2.0 * b.radius) {
                    return Err(invalid("overlapping bumps have no closed-form CDF"));
                }
                Self::Bumps { centers, bumps: b }
            }
        })
    }

    fn steps(xs: &[f64], w: Option<&[f64]>) -> Self {
        let mut idx: Vec<usize> = (0..xs.len()).collect();
        idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let mut acc = CompensatedSum::new();
        let mut cum = Vec::with_capacity(xs.len());
        for &i in &idx {
            acc.add(w.map_or(1.0, |w| w[i]));
            cum.push(acc.value());
        }
        Self::Steps { xs: idx.iter().map(|&i| xs[i]).collect(), cum }
    }

    /// `mu((-inf, x])`, or `mu((-inf, x))` when `left`.
    fn at(&self, x: f64, left: bool) -> f64 {
        match self {
            Self::Steps { xs, cum } => {
                let k = if left { xs.partition_point(|&p| p < x) } else { xs.partition_point(|&p| p <= x) };
                if k == 0 {
                    0.0
                } else {
                    cum[k - 1]
                }
            }
            Self::Grid { dx, length, cum, values } => {
                if x <= 0.0 {
                    0.0
                } else if x >= *length {
                    cum[cum.len() - 1]
                } else {
                    let i = ((x / dx) as usize).min(values.len() - 1);
                    cum[i] + values[i] * (x - i as f64 * dx)
                }
            }
            Self::Bumps { centers, bumps } => {
                let r = bumps.radius;
                let full = centers.partition_point(|&c| c + r <= x);
                let mut f = full as f64;
                if let Some(&c) = centers.get(full) {
                    if x > c - r {
                        f += bumps.bump_cdf1((x - c) / r);
                    }
                }
                f
            }
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Self::Steps { xs, .. } => out.extend_from_slice(xs),
            Self::Grid { dx, cum, .. } => out.extend((0..cum.len()).map(|i| i as f64 * dx)),
            Self::Bumps { centers, bumps } => {
                for c in centers {
                    out.extend([c - bumps.radius, *c, c + bumps.radius]);
                }
            }
        }
    }

    fn piecewise_linear(&self) -> bool {
        match self {
            Self::Bumps { bumps, .. } => bumps.profile == BumpProfile::Indicator,
            _ => true,
        }
    }
}

/// `int |F_mu - F_nu|`, exact when both CDFs are piecewise linear.
pub fn w1_1d(mu: &CrowdMeasure, nu: &CrowdMeasure) -> Result<W1Result> {
    check_masses(total_mass(mu), total_mass(nu))?;
    let (f, g) = (Cdf::new(mu)?, Cdf::new(nu)?);
    let mut breaks = Vec::new();
    f.breakpoints(&mut breaks);
    g.breakpoints(&mut breaks);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let exact = f.piecewise_linear() && g.piecewise_linear();
    let mut total = CompensatedSum::new();
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if exact {
            let da = f.at(a, false) - g.at(a, false);
            let db = f.at(b, true) - g.at(b, true);
            let area = if da * db >= 0.0 {
                0.5 * (b - a) * (da.abs() + db.abs())
            } else {
                0.5 * (b - a) * (da * da + db * db) / (da.abs() + db.abs())
            };
            total.add(area);
        } else {
            let piece = integrate(|x| (f.at(x, false) - g.at(x, false)).abs(), a, b, 1e-12);
            total.add(piece.value);
            err += piece.error;
        }
    }
    Ok(W1Result { value: total.value(), method: W1Method::Cdf1d, certified_error: err })
}

fn sorted_rows(p: &Points) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = p.iter().map(<[f64]>::to_vec).collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows
}

/// `m_f N r`: every bump is sent onto its own center.
pub fn w1_semidiscrete(atoms: &AtomicMeasure, bumps: &BumpMeasure) -> Result<W1Result> {
    if atoms.dim() != bumps.dim() {
        return Err(Error::DimensionMismatch { expected: atoms.dim(), found: bumps.dim() });
    }
    if atoms.len() != bumps.len() || sorted_rows(&atoms.points) != sorted_rows(&bumps.centers) {
        return Err(invalid("bump centers do not coincide with the atoms; use the transport oracle"));
    }
    if let Some((first, second, d)) = bumps.centers.closest_pair() {
        if !(bumps.radius < 0.5 * d) {
            return Err(Error::RadiusTooLarge { radius: bumps.radius, first, second, distance: d });
        }
    }
    Ok(W1Result {
        value: bumps.first_moment() * bumps.len() as f64 * bumps.radius,
        method: W1Method::Semidiscrete,
        certified_error: 0.0,
    })
}

/// Exact transport between finite weighted supports with cost `|x - y|`.
pub fn w1_lp_oracle(mu: &WeightedCloud, nu: &WeightedCloud) -> Result<W1Result> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: nu.dim() });
    }
    for c in [mu, nu] {
        if c.len() > LP_MAX_POINTS {
            return Err(Error::TooLarge(format!(
                "transport oracle accepts at most {LP_MAX_POINTS} points per side, got {}",
                c.len()
            )));
        }
    }
    let keep = |c: &WeightedCloud| -> (Vec<usize>, Vec<f64>) {
        let idx: Vec<usize> = (0..c.len()).filter(|&i| c.weights[i] > 0.0).collect();
        let w = idx.iter().map(|&i| c.weights[i]).collect();
        (idx, w)
    };
    let (iu, wu) = keep(mu);
    let (iv, wv) = keep(nu);
    let (mass_u, mass_v) = (wu.iter().sum::<f64>(), wv.iter().sum::<f64>());
    check_masses(mass_u, mass_v)?;
    let mut cost = Vec::with_capacity(iu.len() * iv.len());
    for &i in &iu {
        for &j in &iv {
            cost.push(distance(mu.points.get(i), nu.points.get(j)));
        }
    }
    let sol = solve_transport(&wu, &wv, &cost)?;
    let max_cost = cost.iter().fold(0.0f64, |a, &c| a.max(c));
    let gap = (sol.cost - sol.dual + sol.dual_infeasibility * mass_u).max(0.0);
    Ok(W1Result {
        value: sol.cost,
        method: W1Method::LpOracle,
        certified_error: gap + sol.primal_residual * max_cost,
    })
}

/// Cells of side `2r / cells_per_diameter` over each bump. 1D cell masses are
/// exact; 2D and 3D use a 4-point-per-axis midpoint rule. Rounding residue
/// goes to the cell nearest the center so each bump keeps unit mass. The
/// second value bounds the W1 distance to the bump measure.
pub fn discretize_bumps_cells(b: &BumpMeasure, cells_per_diameter: usize) -> Result<(WeightedCloud, f64)> {
    if cells_per_diameter == 0 {
        return Err(invalid("need at least one cell per diameter"));
    }
    let d = b.dim();
    let n = cells_per_diameter;
    let h = 2.0 * b.radius / n as f64;
    let sub: usize = 4;
    let cells = n.pow(d as u32);
    let mut offsets: Vec<Vec<f64>> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    for idx in 0..cells {
        let mut rest = idx;
        let mut lo = vec![0.0; d];
        for l in lo.iter_mut() {
            *l = -b.radius + (rest % n) as f64 * h;
            rest /= n;
        }
        let mass = if d == 1 {
            b.bump_cdf1((lo[0] + h) / b.radius) - b.bump_cdf1(lo[0] / b.radius)
        } else {
            let hs = h / sub as f64;
            let mut acc = 0.0;
            for s in 0..sub.pow(d as u32) {
                let mut r = s;
                let mut norm2 = 0.0;
                for l in &lo {
                    let x = l + ((r % sub) as f64 + 0.5) * hs;
                    norm2 += x * x;
                    r /= sub;
                }
                acc += b.bump_density(norm2.sqrt() / b.radius);
            }
            acc * hs.powi(d as i32)
        };
        if mass > 0.0 {
            offsets.push(lo.iter().map(|l| l + 0.5 * h).collect());
            masses.push(mass);
        }
    }
    let total: f64 = masses.iter().sum();
    for m in &mut masses {
        *m /= total;
    }
    let centre = (0..offsets.len())
        .min_by(|&i, &j| {
            let ni: f64 = offsets[i].iter().map(|x| x * x).sum();
            let nj: f64 = offsets[j].iter().map(|x| x * x).sum();
            ni.total_cmp(&nj)
        })
        .ok_or_else(|| invalid("bump discretization produced no cells"))?;
    let others = compensated_sum(masses.iter().enumerate().filter(|(i, _)| *i != centre).map(|(_, m)| *m));
    masses[centre] = 1.0 - others;

    let mut cloud = WeightedCloud {
        points: Points::zeros(d, 0),
        weights: Vec::new(),
        owner: Vec::new(),
    };
    let mut p = vec![0.0; d];
    for (k, c) in b.centers.iter().enumerate() {
        for (off, &m) in offsets.iter().zip(&masses) {
            for i in 0..d {
                p[i] = c[i] + off[i];
            }
            cloud.points.push(&p);
            cloud.weights.push(m);
            cloud.owner.push(k);
        }
    }
    let bound = b.len() as f64 * h * (d as f64).sqrt();
    Ok((cloud, bound))
}

/// `int phi d(nu - mu)`, a lower bound for W1 when `phi` is 1-Lipschitz.
/// The Lipschitz property is verified on both supports plus points offset
/// by `margin` along each axis.
pub fn dual_gap_check<F>(mu: &CrowdMeasure, nu: &CrowdMeasure, phi: F, margin: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let (a, b) = (mu.to_cloud()?, nu.to_cloud()?);
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let d = a.dim();
    let mut probe = Points::zeros(d, 0);
    let mut q = vec![0.0; d];
    for p in a.points.iter().chain(b.points.iter()) {
        probe.push(p);
        for axis in 0..d {
            for s in [-1.0, 1.0] {
                q.copy_from_slice(p);
                q[axis] += s * margin;
                probe.push(&q);
            }
        }
    }
    // deterministic thinning keeps the pairwise check quadratic in at most 3000 points
    let stride = probe.len().div_ceil(3000);
    let pts: Vec<&[f64]> = probe.iter().step_by(stride).collect();
    let vals: Vec<f64> = pts.iter().map(|p| phi(p)).collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dist = distance(pts[i], pts[j]);
            if (vals[i] - vals[j]).abs() > dist * (1.0 + 1e-12) + 1e-12 {
                return Err(invalid(format!(
                    "test function is not 1-Lipschitz: |phi(p) - phi(q)| = {} > |p - q| = {dist}",
                    (vals[i] - vals[j]).abs()
                )));
            }
        }
    }
    let integral = |c: &WeightedCloud| {
        let mut acc = CompensatedSum::new();
        for (p, w) in c.points.iter().zip(&c.weights) {
            acc.add(w * phi(p));
        }
        acc.value()
    };
    Ok(integral(&b) - integral(&a))
}

/// 1D measures use the CDF formula, everything else the transport oracle on
/// point representations.
pub fn w1_auto(mu: &CrowdMeasure, nu: &CrowdMeasure) -> Result<W1Result> {
    if mu.dim() == 1 && nu.dim() == 1 {
        w1_1d(mu, nu)
    } else {
        w1_lp_oracle(&mu.to_cloud()?, &nu.to_cloud()?)
    }
}
