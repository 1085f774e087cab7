//! Mass-N crowd measures: atoms, bump superpositions, periodic grid densities
//! and weighted point clouds.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{compensated_sum, gauss_legendre, integrate};
use crate::space::{distance, wrap, Points};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicMeasure {
    pub points: Points,
}

impl AtomicMeasure {
    pub fn new(points: Points) -> Result<Self> {
        if !points.is_finite() {
            return Err(invalid("atom positions must be finite"));
        }
        Ok(Self { points })
    }

    pub fn line(xs: Vec<f64>) -> Result<Self> {
        Self::new(Points::line(xs))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

/// Radial bump shapes on the unit ball, before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpProfile {
    Indicator,
    /// `(1 + cos(pi s)) / 2`, continuously differentiable.
    Cosine,
}

impl BumpProfile {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "indicator" => Ok(Self::Indicator),
            "cosine" => Ok(Self::Cosine),
            _ => Err(invalid(format!("unknown bump profile `{name}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Indicator => "indicator",
            Self::Cosine => "cosine",
        }
    }

    /// Unnormalized radial shape, zero for `s > 1`.
    pub fn shape(self, s: f64) -> f64 {
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        match self {
            Self::Indicator => 1.0,
            Self::Cosine => 0.5 * (1.0 + (PI * s).cos()),
        }
    }

    /// Normalizing constant and first moment `m_f = int |x| f(x) dx` on the
    /// unit ball in dimension `dim`.
    pub fn moments(self, dim: usize) -> Result<(f64, f64)> {
        let sphere = unit_sphere_area(dim)?;
        if self == Self::Indicator {
            let d = dim as f64;
            return Ok((d / sphere, d / (d + 1.0)));
        }
        let tol = 1e-14;
        let mass = integrate(|s| self.shape(s) * s.powi(dim as i32 - 1), 0.0, 1.0, tol).value;
        let first = integrate(|s| self.shape(s) * s.powi(dim as i32), 0.0, 1.0, tol).value;
        let c = 1.0 / (sphere * mass);
        Ok((c, c * sphere * first))
    }
}

fn unit_sphere_area(dim: usize) -> Result<f64> {
    match dim {
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        3 => Ok(4.0 * PI),
        _ => Err(Error::Unsupported(format!("bumps in dimension {dim}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpMeasure {
    pub centers: Points,
    pub radius: f64,
    pub profile: BumpProfile,
    normalization: f64,
    first_moment: f64,
}

impl BumpMeasure {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers.dim()
    }

    /// `m_f`, the mean distance of a bump's mass from its center at unit radius.
    pub fn first_moment(&self) -> f64 {
        self.first_moment
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Density of a single bump at offset `s = |x - center| / r`.
    pub fn bump_density(&self, s: f64) -> f64 {
        self.normalization * self.profile.shape(s) / self.radius.powi(self.dim() as i32)
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .map(|c| self.bump_density(distance(x, c) / self.radius))
            .sum()
    }

    /// Mass of one 1D bump left of `center + u r`, `u` in `[-1, 1]`.
    pub fn bump_cdf1(&self, u: f64) -> f64 {
        let u = u.clamp(-1.0, 1.0);
        let half = match self.profile {
            BumpProfile::Indicator => 0.5 * u.abs(),
            BumpProfile::Cosine => 0.5 * (u.abs() + (PI * u.abs()).sin() / PI),
        };
        if u < 0.0 {
            0.5 - half
        } else {
            0.5 + half
        }
    }

    /// Polar quadrature cloud: `radial` Gauss-Legendre radii times directions
    /// (two in 1D, `2 radial` angles in 2D). Each bump carries exactly unit
    /// mass, the last weight absorbing rounding.
    pub fn quadrature(&self, radial: usize) -> Result<WeightedCloud> {
        if radial == 0 {
            return Err(invalid("quadrature order must be at least 1"));
        }
        let dim = self.dim();
        let (nodes, w) = gauss_legendre(radial);
        let mut template: Vec<(Vec<f64>, f64)> = Vec::new();
        for (x, wr) in nodes.iter().zip(&w) {
            let rho = 0.5 * (x + 1.0);
            let radial_weight = 0.5 * wr * self.profile.shape(rho) * rho.powi(dim as i32 - 1);
            match dim {
                1 => {
                    template.push((vec![-rho], radial_weight));
                    template.push((vec![rho], radial_weight));
                }
                2 => {
                    let n_theta = 2 * radial;
                    for m in 0..n_theta {
                        let th = 2.0 * PI * (m as f64 + 0.5) / n_theta as f64;
                        template.push((vec![rho * th.cos(), rho * th.sin()], radial_weight));
                    }
                }
                _ => return Err(Error::Unsupported(format!("bump quadrature in dimension {dim}"))),
            }
        }
        let total: f64 = compensated_sum(template.iter().map(|t| t.1));
        let mut weights: Vec<f64> = template.iter().map(|t| t.1 / total).collect();
        let head = compensated_sum(weights[..weights.len() - 1].iter().copied());
        *weights.last_mut().unwrap() = 1.0 - head;

        let mut cloud = WeightedCloud {
            points: Points::zeros(dim, 0),
            weights: Vec::with_capacity(self.len() * template.len()),
            owner: Vec::with_capacity(self.len() * template.len()),
        };
        let mut p = vec![0.0; dim];
        for (b, c) in self.centers.iter().enumerate() {
            for ((offset, _), &wt) in template.iter().zip(&weights) {
                for k in 0..dim {
                    p[k] = c[k] + self.radius * offset[k];
                }
                cloud.points.push(&p);
                cloud.weights.push(wt);
                cloud.owner.push(b);
            }
        }
        Ok(cloud)
    }
}

/// Periodic 1D density given by cell averages on `[0, L)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridDensity1D {
    pub length: f64,
    pub values: Vec<f64>,
}

impl GridDensity1D {
    pub fn new(length: f64, values: Vec<f64>) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid(format!("grid length must be positive, got {length}")));
        }
        if values.is_empty() {
            return Err(invalid("grid needs at least one cell"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("grid densities must be finite and nonnegative"));
        }
        Ok(Self { length, values })
    }

    /// Constant density `N / L`.
    pub fn uniform(n_agents: f64, length: f64, cells: usize) -> Result<Self> {
        Self::new(length, vec![n_agents / length; cells])
    }

    /// Cell averages of a bump measure, by Gauss quadrature on each cell.
    pub fn from_bumps(b: &BumpMeasure, length: f64, cells: usize) -> Result<Self> {
        if b.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: b.dim() });
        }
        let dx = length / cells as f64;
        let mut values = vec![0.0; cells];
        for c in b.centers.iter() {
            let lo = c[0] - b.radius;
            let hi = c[0] + b.radius;
            let first = (lo / dx).floor() as i64;
            let last = (hi / dx).floor() as i64;
            for j in first..=last {
                let a = (j as f64 * dx).max(lo);
                let e = ((j + 1) as f64 * dx).min(hi);
                if e <= a {
                    continue;
                }
                let m = b.bump_cdf1((e - c[0]) / b.radius) - b.bump_cdf1((a - c[0]) / b.radius);
                values[j.rem_euclid(cells as i64) as usize] += m / dx;
            }
        }
        Self::new(length, values)
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn cell_width(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.cell_width()
    }
}

/// Finite weighted point set; `owner[p]` is the bump or cell point `p` came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedCloud {
    pub points: Points,
    pub weights: Vec<f64>,
    pub owner: Vec<usize>,
}

impl WeightedCloud {
    pub fn new(points: Points, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("cloud weights must be finite and nonnegative"));
        }
        let owner = (0..points.len()).collect();
        Ok(Self { points, weights, owner })
    }

    pub fn from_atoms(a: &AtomicMeasure) -> Self {
        Self {
            points: a.points.clone(),
            weights: vec![1.0; a.len()],
            owner: (0..a.len()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CrowdMeasure {
    Atomic(AtomicMeasure),
    Bumps(BumpMeasure),
    Grid(GridDensity1D),
    Cloud(WeightedCloud),
}

impl CrowdMeasure {
    pub fn dim(&self) -> usize {
        match self {
            Self::Atomic(a) => a.dim(),
            Self::Bumps(b) => b.dim(),
            Self::Grid(_) => 1,
            Self::Cloud(c) => c.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Atomic(_) => "atomic",
            Self::Bumps(_) => "bumps",
            Self::Grid(_) => "grid",
            Self::Cloud(_) => "cloud",
        }
    }

    pub fn as_atomic(&self) -> Option<&AtomicMeasure> {
        match self {
            Self::Atomic(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_cloud(&self) -> Option<&WeightedCloud> {
        match self {
            Self::Cloud(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridDensity1D> {
        match self {
            Self::Grid(g) => Some(g),
            _ => None,
        }
    }

    /// Point masses standing for the measure: atoms, cloud points, or cell
    /// centers carrying cell mass. Bumps use their default quadrature.
    pub fn to_cloud(&self) -> Result<WeightedCloud> {
        match self {
            Self::Atomic(a) => Ok(WeightedCloud::from_atoms(a)),
            Self::Bumps(b) => b.quadrature(8),
            Self::Grid(g) => {
                let dx = g.cell_width();
                let xs = (0..g.cells()).map(|i| g.cell_center(i)).collect();
                let mut c = WeightedCloud::new(Points::line(xs), g.values.iter().map(|v| v * dx).collect())?;
                c.owner = (0..g.cells()).collect();
                Ok(c)
            }
            Self::Cloud(c) => Ok(c.clone()),
        }
    }
}

impl From<AtomicMeasure> for CrowdMeasure {
    fn from(a: AtomicMeasure) -> Self {
        Self::Atomic(a)
    }
}

impl From<BumpMeasure> for CrowdMeasure {
    fn from(b: BumpMeasure) -> Self {
        Self::Bumps(b)
    }
}

impl From<GridDensity1D> for CrowdMeasure {
    fn from(g: GridDensity1D) -> Self {
        Self::Grid(g)
    }
}

impl From<WeightedCloud> for CrowdMeasure {
    fn from(c: WeightedCloud) -> Self {
        Self::Cloud(c)
    }
}

/// Centroids of the `2^{kd}` dyadic cubes of `[0, 1]^d`.
pub fn make_lattice(dim: usize, level: u32) -> Result<AtomicMeasure> {
    if !(1..=3).contains(&dim) {
        return Err(invalid(format!("lattice dimension must be 1, 2 or 3, got {dim}")));
    }
    if level as usize * dim > 24 {
        return Err(Error::TooLarge(format!(
            "lattice with k = {level}, d = {dim} has 2^{} points",
            level as usize * dim
        )));
    }
    let side = 1usize << level;
    let h = 1.0 / side as f64;
    let n = side.pow(dim as u32);
    let mut coords = Vec::with_capacity(n * dim);
    for idx in 0..n {
        let mut rest = idx;
        for _ in 0..dim {
            coords.push(((rest % side) as f64 + 0.5) * h);
            rest /= side;
        }
    }
    AtomicMeasure::new(Points::new(dim, coords)?)
}

/// One bump of radius `radius` on every atom. The radius must be strictly
/// below half the minimal pairwise distance.
pub fn make_bumps(atoms: &AtomicMeasure, radius: f64, profile: BumpProfile) -> Result<BumpMeasure> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid(format!("bump radius must be positive, got {radius}")));
    }
    if let Some((first, second, d)) = atoms.points.closest_pair() {
        if !(radius < 0.5 * d) {
            return Err(Error::RadiusTooLarge { radius, first, second, distance: d });
        }
    }
    let (normalization, first_moment) = profile.moments(atoms.dim())?;
    Ok(BumpMeasure {
        centers: atoms.points.clone(),
        radius,
        profile,
        normalization,
        first_moment,
    })
}

/// Point transformation for push-forwards.
#[derive(Clone)]
pub enum PointMap {
    /// `z -> a z`; bump radii and grid cells are rescaled with it.
    Scale(f64),
    Shift(Vec<f64>),
    /// Arbitrary map; bump radii are left unchanged.
    Func(PointFn),
}

pub type PointFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

impl std::fmt::Debug for PointMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Scale(a) => write!(f, "Scale({a})"),
            Self::Shift(s) => write!(f, "Shift({s:?})"),
            Self::Func(_) => f.write_str("Func(..)"),
        }
    }
}

impl PointMap {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::Scale(a) => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = a * v;
                }
            }
            Self::Shift(s) => {
                for ((o, v), c) in out.iter_mut().zip(x).zip(s) {
                    *o = v + c;
                }
            }
            Self::Func(f) => f(x, out),
        }
    }

    fn map_points(&self, p: &Points) -> Points {
        let mut out = Points::zeros(p.dim(), p.len());
        for i in 0..p.len() {
            self.apply(p.get(i), out.get_mut(i));
        }
        out
    }
}

pub fn push_forward(m: &CrowdMeasure, map: &PointMap) -> Result<CrowdMeasure> {
    match map {
        PointMap::Scale(a) if *a == 0.0 || !a.is_finite() => {
            return Err(invalid(format!("linear map with factor {a} is not invertible")))
        }
        PointMap::Shift(s) if s.len() != m.dim() => {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: s.len() })
        }
        _ => {}
    }
    Ok(match m {
        CrowdMeasure::Atomic(a) => AtomicMeasure::new(map.map_points(&a.points))?.into(),
        CrowdMeasure::Cloud(c) => WeightedCloud {
            points: map.map_points(&c.points),
            weights: c.weights.clone(),
            owner: c.owner.clone(),
        }
        .into(),
        CrowdMeasure::Bumps(b) => {
            let radius = match map {
                PointMap::Scale(a) => a.abs() * b.radius,
                _ => b.radius,
            };
            BumpMeasure {
                centers: map.map_points(&b.centers),
                radius,
                ..b.clone()
            }
            .into()
        }
        CrowdMeasure::Grid(g) => remap_grid(g, map)?.into(),
    })
}

/// Donor-cell remap: the mass of each source cell is spread uniformly over the
/// image of the cell and deposited by overlap, periodically.
fn remap_grid(g: &GridDensity1D, map: &PointMap) -> Result<GridDensity1D> {
    if let PointMap::Scale(a) = map {
        let mut values: Vec<f64> = g.values.iter().map(|v| v / a.abs()).collect();
        if *a < 0.0 {
            values.reverse();
        }
        return GridDensity1D::new(g.length * a.abs(), values);
    }
    let m = g.cells();
    let dx = g.cell_width();
    let mut values = vec![0.0; m];
    let mut ends = [0.0; 2];
    for (i, &rho) in g.values.iter().enumerate() {
        let mass = rho * dx;
        if mass == 0.0 {
            continue;
        }
        let (mut lo, mut hi) = ([0.0], [0.0]);
        map.apply(&[i as f64 * dx], &mut lo);
        map.apply(&[(i + 1) as f64 * dx], &mut hi);
        ends[0] = lo[0].min(hi[0]);
        ends[1] = lo[0].max(hi[0]);
        let width = ends[1] - ends[0];
        if !width.is_finite() {
            return Err(invalid("grid remap produced a non-finite cell image"));
        }
        if width == 0.0 {
            let j = (wrap(ends[0], g.length) / dx) as usize;
            values[j.min(m - 1)] += mass / dx;
            continue;
        }
        let first = (ends[0] / dx).floor() as i64;
        let last = (ends[1] / dx).floor() as i64;
        for j in first..=last {
            let a = (j as f64 * dx).max(ends[0]);
            let b = ((j + 1) as f64 * dx).min(ends[1]);
            if b > a {
                values[j.rem_euclid(m as i64) as usize] += mass * (b - a) / width / dx;
            }
        }
    }
    GridDensity1D::new(g.length, values)
}

pub fn total_mass(m: &CrowdMeasure) -> f64 {
    match m {
        CrowdMeasure::Atomic(a) => a.len() as f64,
        CrowdMeasure::Bumps(b) => b.len() as f64,
        CrowdMeasure::Grid(g) => compensated_sum(g.values.iter().copied()) * g.cell_width(),
        CrowdMeasure::Cloud(c) => compensated_sum(c.weights.iter().copied()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lattice_examples() {
        let a = make_lattice(1, 0).unwrap();
        assert_eq!(a.points.as_slice(), &[0.5]);
        let a = make_lattice(2, 1).unwrap();
        assert_eq!(a.len(), 4);
        let mut rows: Vec<Vec<f64>> = a.points.iter().map(<[f64]>::to_vec).collect();
        rows.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(rows, vec![vec![0.25, 0.25], vec![0.25, 0.75], vec![0.75, 0.25], vec![0.75, 0.75]]);
        assert_eq!(a.points.closest_pair().unwrap().2, 0.5);
        let a = make_lattice(3, 2).unwrap();
        assert_eq!(a.len(), 64);
        assert_eq!(a.points.closest_pair().unwrap().2, 0.25);
        assert!(matches!(make_lattice(3, 9), Err(Error::TooLarge(_))));
    }

    #[test]
    fn indicator_first_moment() {
        for d in 1..=3 {
            let (c, mf) = BumpProfile::Indicator.moments(d).unwrap();
            assert_eq!(mf, d as f64 / (d as f64 + 1.0));
            let sphere = unit_sphere_area(d).unwrap();
            let mass = integrate(|s| s.powi(d as i32 - 1), 0.0, 1.0, 1e-14).value;
            let first = integrate(|s| s.powi(d as i32), 0.0, 1.0, 1e-14).value;
            assert_abs_diff_eq!(c, 1.0 / (sphere * mass), epsilon = 1e-13);
            assert_abs_diff_eq!(mf, first / mass, epsilon = 1e-13);
        }
    }

    #[test]
    fn radius_violation_names_pair() {
        let atoms = AtomicMeasure::line(vec![0.0, 1.0]).unwrap();
        match make_bumps(&atoms, 0.6, BumpProfile::Indicator) {
            Err(Error::RadiusTooLarge { first, second, distance, .. }) => {
                assert_eq!((first, second, distance), (0, 1, 1.0));
            }
            other => panic!("{other:?}"),
        }
        let lattice = make_lattice(1, 2).unwrap();
        assert!(make_bumps(&lattice, 1.0 / 32.0, BumpProfile::Indicator).is_ok());
    }

    #[test]
    fn bump_density_integrates_to_n() {
        for profile in [BumpProfile::Indicator, BumpProfile::Cosine] {
            let atoms = AtomicMeasure::line(vec![0.1, 0.4, 0.9]).unwrap();
            let b = make_bumps(&atoms, 0.1, profile).unwrap();
            let mut breaks: Vec<f64> = Vec::new();
            for c in [0.1, 0.4, 0.9] {
                breaks.extend([c - 0.1, c, c + 0.1]);
            }
            let m = crate::numerics::integrate_piecewise(|x| b.density(&[x]), -0.5, 1.5, &breaks, 1e-12).value;
            assert_abs_diff_eq!(m, 3.0, epsilon = 3e-8);
        }
    }

    #[test]
    fn cosine_cdf_matches_density() {
        let atoms = AtomicMeasure::line(vec![0.0]).unwrap();
        let b = make_bumps(&atoms, 0.5, BumpProfile::Cosine).unwrap();
        for u in [-0.7, -0.2, 0.0, 0.3, 0.95] {
            let m = integrate(|x| b.density(&[x]), -0.5, 0.5 * u, 1e-13).value;
            assert_abs_diff_eq!(b.bump_cdf1(u), m, epsilon = 1e-12);
        }
    }

    #[test]
    fn push_forward_examples() {
        let a: CrowdMeasure = AtomicMeasure::line(vec![1.0]).unwrap().into();
        let img = push_forward(&a, &PointMap::Scale(2.0)).unwrap();
        assert_eq!(img.as_atomic().unwrap().points.as_slice(), &[2.0]);

        let b: CrowdMeasure = make_bumps(&AtomicMeasure::line(vec![0.3]).unwrap(), 0.1, BumpProfile::Indicator)
            .unwrap()
            .into();
        let CrowdMeasure::Bumps(img) = push_forward(&b, &PointMap::Scale(2.0)).unwrap() else {
            panic!()
        };
        assert_eq!(img.centers.as_slice(), &[0.6]);
        assert_abs_diff_eq!(img.radius, 0.2, epsilon = 1e-15);
        let m = integrate(|x| img.density(&[x]), 0.4, 0.8, 1e-12).value;
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-9);

        let id = PointMap::Func(Arc::new(|x, o| o.copy_from_slice(x)));
        assert_eq!(push_forward(&b, &id).unwrap(), b);
        assert!(push_forward(&a, &PointMap::Scale(0.0)).is_err());
    }

    #[test]
    fn grid_remap_conserves_mass() {
        let g = GridDensity1D::new(2.0, (0..50).map(|i| 1.0 + (i as f64 * 0.3).sin()).collect()).unwrap();
        let before = total_mass(&g.clone().into());
        for map in [
            PointMap::Shift(vec![0.123]),
            PointMap::Scale(-1.5),
            PointMap::Func(Arc::new(|x, o| o[0] = x[0] + 0.1 * x[0] * x[0])),
        ] {
            let img = push_forward(&g.clone().into(), &map).unwrap();
            let after = total_mass(&img);
            assert!(((after - before) / before).abs() < 1e-10, "{map:?}: {after} vs {before}");
        }
    }

    #[test]
    fn masses() {
        assert_eq!(total_mass(&make_lattice(1, 2).unwrap().into()), 4.0);
        let g = GridDensity1D::uniform(4.0, 2.0, 64).unwrap();
        assert_eq!(total_mass(&g.into()), 4.0);
    }

    #[test]
    fn quadrature_carries_unit_mass_per_bump() {
        let atoms = make_lattice(2, 2).unwrap();
        let b = make_bumps(&atoms, 0.1, BumpProfile::Cosine).unwrap();
        let c = b.quadrature(4).unwrap();
        assert_eq!(c.len(), 16 * 32);
        for k in 0..16 {
            let m: f64 = c.weights[k * 32..(k + 1) * 32].iter().sum();
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn grid_from_bumps_mass() {
        let atoms = AtomicMeasure::line(vec![0.05, 1.0]).unwrap();
        let b = make_bumps(&atoms, 0.1, BumpProfile::Cosine).unwrap();
        let g = GridDensity1D::from_bumps(&b, 2.0, 100).unwrap();
        assert_abs_diff_eq!(total_mass(&g.into()), 2.0, epsilon = 1e-12);
    }
}
