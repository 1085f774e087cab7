//! Nonlocal conservation law `rho_t + div(rho v[rho]) = 0` with
//! `v[mu](x) = v_d(x) - int K(y - x) dmu(y)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::desired::DesiredVelocity;
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::kernel::{Profile1D, ScaledKernel};
use crate::measure::{BumpMeasure, CrowdMeasure, GridDensity1D, WeightedCloud};
use crate::micro::{advance, default_dt, Field, SimConfig};
use crate::numerics::{compensated_sum, integrate_piecewise, CompensatedSum};
use crate::space::{Domain, Points};
use crate::trajectory::{Snapshot, Trajectory};

/// Default radial order of the bump quadrature: 16 points per bump in 1D,
/// 32 in 2D.
pub fn default_radial_order(dim: usize) -> usize {
    if dim == 1 {
        8
    } else {
        4
    }
}

/// `v[mu](x)`. Bumps are integrated with a polar Gauss rule of radial order
/// `quad_order`; grids use the midpoint rule with periodic images.
pub fn macro_velocity(
    m: &CrowdMeasure,
    x: &[f64],
    v_d: &DesiredVelocity,
    k: &ScaledKernel,
    domain: &Domain,
    quad_order: usize,
) -> Result<Vec<f64>> {
    if quad_order < 1 {
        return Err(invalid("quadrature order must be at least 1"));
    }
    let grid_domain;
    let (domain, sources, weights): (&Domain, Points, Option<Vec<f64>>) = match m {
        CrowdMeasure::Atomic(a) => (domain, a.points.clone(), None),
        CrowdMeasure::Bumps(b) => {
            let c = b.quadrature(quad_order)?;
            (domain, c.points, Some(c.weights))
        }
        CrowdMeasure::Cloud(c) => (domain, c.points.clone(), Some(c.weights.clone())),
        CrowdMeasure::Grid(g) => {
            grid_domain = Domain::periodic(g.length)?;
            let c = CrowdMeasure::Grid(g.clone()).to_cloud()?;
            (&grid_domain, c.points, Some(c.weights))
        }
    };
    if x.len() != sources.dim() {
        return Err(Error::DimensionMismatch { expected: sources.dim(), found: x.len() });
    }
    let field = Field { v_d, kernel: k, domain };
    field.check(x.len())?;
    let mut out = vec![0.0; x.len()];
    field.velocity(sources.as_slice(), weights.as_deref(), x, &mut out);
    Ok(out)
}

pub fn discretize_bumps(b: &BumpMeasure, radial: usize) -> Result<WeightedCloud> {
    b.quadrature(radial)
}

/// Transports the quadrature cloud of `m0` along the self-consistent field.
/// `radial` defaults to `default_radial_order`.
pub fn integrate_characteristics(
    m0: &BumpMeasure,
    v_d: &DesiredVelocity,
    k: &ScaledKernel,
    domain: &Domain,
    cfg: &SimConfig,
    radial: Option<usize>,
) -> Result<Trajectory> {
    let cloud = m0.quadrature(radial.unwrap_or_else(|| default_radial_order(m0.dim())))?;
    let mut tr = integrate_cloud(&cloud, m0.len(), v_d, k, domain, cfg)?;
    let lip_v = v_d.lipschitz() + m0.len() as f64 * k.lipschitz()?;
    let growth = lip_v * cfg.t_final * (lip_v * cfg.t_final).exp();
    tr.notes.push(format!("Lip(v) T exp(Lip(v) T) = {growth:.6e}"));
    Ok(tr)
}

/// Moves a weighted cloud of total mass `n_agents` through its own field.
pub fn integrate_cloud(
    cloud: &WeightedCloud,
    n_agents: usize,
    v_d: &DesiredVelocity,
    k: &ScaledKernel,
    domain: &Domain,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    k.lipschitz()?;
    let dim = cloud.dim();
    let field = Field { v_d, kernel: k, domain };
    field.check(dim)?;
    let dt = cfg.dt.unwrap_or_else(|| default_dt(v_d, k, n_agents));
    let as_cloud = |s: &[f64]| -> CrowdMeasure {
        WeightedCloud {
            points: Points::new(dim, s.to_vec()).expect("dim divides state"),
            weights: cloud.weights.clone(),
            owner: cloud.owner.clone(),
        }
        .into()
    };
    let y0 = cloud.points.as_slice().to_vec();
    let (states, dt, steps) = advance(y0, dim, cloud.len(), Some(&cloud.weights), &field, cfg, dt, as_cloud)?;
    let snapshots = states
        .into_iter()
        .map(|(t, s)| Snapshot { t, measure: as_cloud(&s) })
        .collect();
    Ok(Trajectory { snapshots, dt, steps, notes: Vec::new() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FvConfig {
    /// Largest step; the CFL limit may force smaller ones.
    pub dt: f64,
    pub t_final: f64,
    /// Strong-stability-preserving Runge-Kutta order, 1 to 3.
    pub order: u32,
    pub snapshot_stride: usize,
    pub cfl: f64,
    pub execution: Execution,
}

impl Default for FvConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_final: 1.0,
            order: 2,
            snapshot_stride: 10,
            cfl: 0.9,
            execution: Execution::default(),
        }
    }
}

struct FvOperator<'a> {
    v_d: &'a DesiredVelocity,
    /// Nonzero `(cell offset, weight)` pairs, in offset order.
    offsets: Vec<(usize, f64)>,
    dx: f64,
    exec: Execution,
}

impl FvOperator<'_> {
    /// Velocity at face `i + 1/2`, summing cells downstream in offset order.
    fn face_velocities(&self, rho: &[f64], out: &mut [f64]) {
        let m = rho.len();
        self.exec.fill_chunks(out, 1, |i, v| {
            let mut acc = CompensatedSum::new();
            for &(o, w) in &self.offsets {
                acc.add(w * rho[(i + 1 + o) % m]);
            }
            self.v_d.eval(&[(i + 1) as f64 * self.dx], v);
            v[0] -= acc.value();
        });
    }

    fn rate(&self, rho: &[f64], faces: &mut [f64], out: &mut [f64]) {
        self.face_velocities(rho, faces);
        let m = rho.len();
        let flux = |i: usize| {
            let v = faces[i];
            if v > 0.0 {
                v * rho[i]
            } else {
                v * rho[(i + 1) % m]
            }
        };
        let mut left = flux(m - 1);
        for (i, o) in out.iter_mut().enumerate() {
            let right = flux(i);
            *o = -(right - left) / self.dx;
            left = right;
        }
    }

    /// Largest step keeping the upwind update positive.
    fn cfl_limit(&self, faces: &[f64], cfl: f64) -> f64 {
        let m = faces.len();
        let worst = (0..m)
            .map(|i| faces[i].max(0.0) - faces[(i + m - 1) % m].min(0.0))
            .fold(0.0, f64::max);
        if worst > 0.0 {
            cfl * self.dx / worst
        } else {
            f64::INFINITY
        }
    }
}

/// Upwind finite volumes on the periodic grid of `state0`.
pub fn integrate_fv(
    state0: &GridDensity1D,
    v_d: &DesiredVelocity,
    k: &ScaledKernel,
    cfg: &FvConfig,
) -> Result<Trajectory> {
    if !(1..=3).contains(&cfg.order) {
        return Err(invalid(format!("SSP order must be 1..=3, got {}", cfg.order)));
    }
    if cfg.snapshot_stride == 0 {
        return Err(invalid("snapshot stride must be at least 1"));
    }
    if !(cfg.dt > 0.0) || !(cfg.t_final >= 0.0) || !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(invalid("FV step, final time and CFL number must be positive"));
    }
    if v_d.dim() != Some(1) {
        return Err(Error::DimensionMismatch { expected: 1, found: v_d.dim().unwrap_or(0) });
    }
    let length = state0.length;
    Domain::periodic(length)?.check_support(k.support_radius())?;
    let m = state0.cells();
    let dx = state0.cell_width();
    let offsets: Vec<(usize, f64)> = (0..m)
        .map(|o| (o, dx * k.periodic1((o as f64 + 0.5) * dx, length)))
        .filter(|&(_, w)| w != 0.0)
        .collect();
    let op = FvOperator { v_d, offsets, dx, exec: cfg.execution };

    let mut rho = state0.values.clone();
    let mut faces = vec![0.0; m];
    let mut k1 = vec![0.0; m];
    let mut stage = vec![0.0; m];
    let mut snapshots = vec![Snapshot { t: 0.0, measure: state0.clone().into() }];
    let mut notes = Vec::new();
    let (mut t, mut steps, mut reductions) = (0.0, 0usize, 0usize);
    let mut smallest = cfg.dt;

    while t < cfg.t_final {
        op.face_velocities(&rho, &mut faces);
        let limit = op.cfl_limit(&faces, cfg.cfl);
        let mut dt = cfg.dt.min(cfg.t_final - t);
        if limit < dt {
            dt = limit;
            reductions += 1;
            smallest = smallest.min(dt);
        }
        let last = t + dt >= cfg.t_final * (1.0 - 1e-14);
        match cfg.order {
            1 => {
                op.rate(&rho, &mut faces, &mut k1);
                for (r, d) in rho.iter_mut().zip(&k1) {
                    *r += dt * d;
                }
            }
            2 => {
                op.rate(&rho, &mut faces, &mut k1);
                for i in 0..m {
                    stage[i] = rho[i] + dt * k1[i];
                }
                op.rate(&stage, &mut faces, &mut k1);
                for i in 0..m {
                    rho[i] = 0.5 * rho[i] + 0.5 * (stage[i] + dt * k1[i]);
                }
            }
            _ => {
                op.rate(&rho, &mut faces, &mut k1);
                for i in 0..m {
                    stage[i] = rho[i] + dt * k1[i];
                }
                op.rate(&stage, &mut faces, &mut k1);
                for i in 0..m {
                    stage[i] = 0.75 * rho[i] + 0.25 * (stage[i] + dt * k1[i]);
                }
                op.rate(&stage, &mut faces, &mut k1);
                for i in 0..m {
                    rho[i] = rho[i] / 3.0 + 2.0 / 3.0 * (stage[i] + dt * k1[i]);
                }
            }
        }
        t = if last { cfg.t_final } else { t + dt };
        steps += 1;
        if let Some((cell, &value)) = rho.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -1e-12) {
            return Err(Error::NegativeDensity { t, cell, value });
        }
        if steps % cfg.snapshot_stride == 0 || last {
            let values = rho.iter().map(|v| v.max(0.0)).collect();
            snapshots.push(Snapshot { t, measure: GridDensity1D { length, values }.into() });
        }
    }
    if reductions > 0 {
        notes.push(format!(
            "CFL limit reduced the step {reductions} times (smallest {smallest:.3e})"
        ));
    }
    Ok(Trajectory { snapshots, dt: cfg.dt, steps, notes })
}

fn periodic_integral<K: Profile1D + ?Sized, F: Fn(f64) -> f64>(k: &K, length: f64, weight: F) -> f64 {
    // int_0^L (K(z) + K(z - L)) w(z) dz for L-periodic w
    let mut breaks = k.breakpoints();
    breaks.extend([0.0, -length, length]);
    integrate_piecewise(|z| k.eval1(z) * weight(z), -length, length, &breaks, 1e-13).value
}

/// `v_d - (N / L) int_0^L K`.
pub fn uniform_equilibrium_speed<K: Profile1D + ?Sized>(n: f64, length: f64, v_d: f64, k: &K) -> f64 {
    if n == 0.0 {
        return v_d;
    }
    v_d - n / length * periodic_integral(k, length, |_| 1.0)
}

/// `Re sigma` of Fourier mode `mode` around the uniform density `N / L`.
pub fn macro_growth_rate<K: Profile1D + ?Sized>(n: f64, length: f64, k: &K, mode: i64) -> f64 {
    let q = 2.0 * PI * mode as f64 / length;
    -q * (n / length) * periodic_integral(k, length, |z| (q * z).sin())
}

pub fn macro_stability_spectrum<K: Profile1D + ?Sized>(n: f64, length: f64, k: &K, k_max: usize) -> Vec<f64> {
    (1..=k_max as i64).map(|m| macro_growth_rate(n, length, k, m)).collect()
}

/// Total mass of a trajectory snapshot.
pub fn snapshot_mass(s: &Snapshot) -> f64 {
    match &s.measure {
        CrowdMeasure::Grid(g) => compensated_sum(g.values.iter().copied()) * g.cell_width(),
        other => crate::measure::total_mass(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelProfile;
    use crate::measure::{make_bumps, AtomicMeasure, BumpProfile};
    use crate::micro::{micro_velocity, MicroState};
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_density_speed() {
        let fig3 = KernelProfile::fig3();
        assert_abs_diff_eq!(uniform_equilibrium_speed(4.0, 2.0, 1.0, &fig3), 1.0 - 4.0 / 15.0, epsilon = 1e-12);
        assert_eq!(uniform_equilibrium_speed(0.0, 2.0, 1.0, &fig3), 1.0);
        let fig5 = KernelProfile::fig5();
        assert_abs_diff_eq!(uniform_equilibrium_speed(3.0, 3.0, 1.0, &fig5), 1.0 - 1.0 / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_velocity_matches_hand_integral() {
        let g = GridDensity1D::uniform(4.0, 2.0, 4000).unwrap();
        let k = ScaledKernel::unscaled(KernelProfile::fig3());
        let v = macro_velocity(&g.into(), &[0.3], &DesiredVelocity::scalar(1.0), &k, &Domain::free(1), 8).unwrap();
        assert_abs_diff_eq!(v[0], 1.0 - 4.0 / 15.0, epsilon = 1e-6);
    }

    #[test]
    fn atomic_velocity_is_particle_velocity() {
        let pts = Points::line(vec![0.0, 0.3, 0.45, 1.2]);
        let k = ScaledKernel::new(KernelProfile::fig5(), 1.0, 0.0, 4).unwrap();
        let v = DesiredVelocity::affine(0.2, vec![1.0]);
        let dom = Domain::free(1);
        let m: CrowdMeasure = AtomicMeasure::new(pts.clone()).unwrap().into();
        for i in 0..4 {
            let a = micro_velocity(&MicroState::new(pts.clone()), i, &v, &k, &dom).unwrap();
            let b = macro_velocity(&m, pts.get(i), &v, &k, &dom, 8).unwrap();
            assert_eq!(a, b);
        }
        let far = macro_velocity(&m, &[10.0], &v, &k, &dom, 8).unwrap();
        assert_abs_diff_eq!(far[0], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn free_transport_of_cloud() {
        let atoms = AtomicMeasure::line(vec![0.0, 1.0]).unwrap();
        let b = make_bumps(&atoms, 0.2, BumpProfile::Indicator).unwrap();
        let k = ScaledKernel::unscaled(KernelProfile::zero());
        let cfg = SimConfig::default().with_dt(0.1).with_t_final(1.0);
        let tr = integrate_characteristics(&b, &DesiredVelocity::scalar(0.5), &k, &Domain::free(1), &cfg, None).unwrap();
        let c0 = tr.first().measure.as_cloud().unwrap();
        let c1 = tr.last().measure.as_cloud().unwrap();
        for (a, b) in c0.points.as_slice().iter().zip(c1.points.as_slice()) {
            assert_abs_diff_eq!(b - a, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn single_bump_spreads_symmetrically() {
        let atoms = AtomicMeasure::line(vec![0.4]).unwrap();
        let b = make_bumps(&atoms, 0.3, BumpProfile::Cosine).unwrap();
        let k = ScaledKernel::unscaled(KernelProfile::tent(1.0).unwrap());
        let cfg = SimConfig::default().with_dt(0.05).with_t_final(2.0);
        let tr = integrate_characteristics(&b, &DesiredVelocity::scalar(0.0), &k, &Domain::free(1), &cfg, None).unwrap();
        let com = |c: &WeightedCloud| -> f64 {
            c.points.as_slice().iter().zip(&c.weights).map(|(x, w)| x * w).sum()
        };
        let (c0, c1) = (tr.first().measure.as_cloud().unwrap(), tr.last().measure.as_cloud().unwrap());
        assert_abs_diff_eq!(com(c1), com(c0), epsilon = 1e-8);
        let spread = |c: &WeightedCloud| c.points.as_slice().iter().fold(0.0f64, |m, x| m.max((x - 0.4).abs()));
        assert!(spread(c1) > spread(c0));
    }

    #[test]
    fn uniform_state_is_steady() {
        let g = GridDensity1D::uniform(8.0, 2.0, 200).unwrap();
        let k = ScaledKernel::unscaled(KernelProfile::fig3());
        let cfg = FvConfig { dt: 0.005, ..FvConfig::default() };
        let tr = integrate_fv(&g, &DesiredVelocity::scalar(1.0), &k, &cfg).unwrap();
        for s in &tr.snapshots {
            let v = &s.measure.as_grid().unwrap().values;
            assert!(v.iter().all(|&x| (x - 4.0).abs() < 1e-12));
        }
    }

    #[test]
    fn fv_advection_converges_first_order() {
        let k = ScaledKernel::unscaled(KernelProfile::zero());
        let atoms = AtomicMeasure::line(vec![0.5]).unwrap();
        let b = make_bumps(&atoms, 0.25, BumpProfile::Cosine).unwrap();
        let mut errs = Vec::new();
        for cells in [100, 200, 400] {
            let g = GridDensity1D::from_bumps(&b, 2.0, cells).unwrap();
            let cfg = FvConfig { dt: 1.0, t_final: 0.5, ..FvConfig::default() };
            let tr = integrate_fv(&g, &DesiredVelocity::scalar(1.0), &k, &cfg).unwrap();
            let shifted = crate::measure::push_forward(&b.clone().into(), &crate::measure::PointMap::Shift(vec![0.5])).unwrap();
            let CrowdMeasure::Bumps(sb) = shifted else { unreachable!() };
            let exact = GridDensity1D::from_bumps(&sb, 2.0, cells).unwrap();
            let end = tr.last().measure.as_grid().unwrap();
            let l1: f64 = end.values.iter().zip(&exact.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * end.cell_width();
            errs.push(l1);
            assert!(!tr.notes.is_empty(), "a unit step must trigger the CFL limit");
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        let rate = (errs[1] / errs[2]).log2();
        assert!(rate > 0.6, "rate {rate}");
    }

    #[test]
    fn fv_conserves_mass() {
        let atoms = AtomicMeasure::line(vec![0.5, 1.4]).unwrap();
        let b = make_bumps(&atoms, 0.3, BumpProfile::Cosine).unwrap();
        let g = GridDensity1D::from_bumps(&b, 2.0, 160).unwrap();
        let k = ScaledKernel::unscaled(KernelProfile::tent(0.8).unwrap());
        let cfg = FvConfig { dt: 0.01, t_final: 1.0, order: 3, snapshot_stride: 1, ..FvConfig::default() };
        let tr = integrate_fv(&g, &DesiredVelocity::scalar(0.5), &k, &cfg).unwrap();
        for s in &tr.snapshots {
            assert_abs_diff_eq!(snapshot_mass(s), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn macro_spectrum_properties() {
        let fig3 = KernelProfile::fig3();
        let sp = macro_stability_spectrum(8.0, 2.0, &fig3, 64);
        assert!(sp.iter().all(|&s| s < 0.0), "{sp:?}");
        for m in 1..10 {
            assert_eq!(macro_growth_rate(8.0, 2.0, &fig3, m), macro_growth_rate(8.0, 2.0, &fig3, -m));
        }
        assert!(macro_stability_spectrum(8.0, 2.0, &KernelProfile::zero(), 5).iter().all(|&s| s == 0.0));
    }
}
