//! Discrete against continuous trajectories started from lattice data.

use serde::Serialize;

use crate::continuum::{default_radial_order, integrate_characteristics};
use crate::desired::DesiredVelocity;
use crate::error::{invalid, Error, Result};
use crate::estimates::{continuous_dependence_bound, xi_n};
use crate::exec::Execution;
use crate::kernel::{KernelProfile, ScaledKernel};
use crate::measure::{make_bumps, make_lattice, BumpProfile, CrowdMeasure};
use crate::micro::{default_dt, integrate_micro, MicroState, SimConfig};
use crate::rk::RkOrder;
use crate::space::Domain;
use crate::trajectory::Trajectory;
use crate::wasserstein::{w1_1d, w1_lp_oracle, w1_semidiscrete};

/// Values below this are clamped before taking logs.
pub const MEASUREMENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub dim: usize,
    /// Bump radius exponent: `r = N^{-(1+h)/d} / 2`.
    pub h: f64,
    pub levels: Vec<u32>,
    pub alpha: f64,
    pub beta: f64,
    pub t_final: f64,
    pub kernel: KernelProfile,
    pub v_d: DesiredVelocity,
    pub profile: BumpProfile,
    pub dt: Option<f64>,
    pub order: RkOrder,
    pub snapshot_stride: usize,
    /// Starting radial quadrature order; `None` picks the default.
    pub radial: Option<usize>,
    /// Relative W1 change below which cloud refinement stops.
    pub refine_tol: f64,
    pub max_refinements: usize,
    pub execution: Execution,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            h: 1.0,
            levels: (2..=6).collect(),
            alpha: 1.0,
            beta: 0.0,
            t_final: 1.0,
            kernel: KernelProfile::fig5(),
            v_d: DesiredVelocity::scalar(1.0),
            profile: BumpProfile::Indicator,
            dt: None,
            order: RkOrder::Classic4,
            snapshot_stride: 10,
            radial: None,
            refine_tol: 0.05,
            max_refinements: 3,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub k: u32,
    pub n: usize,
    pub r: f64,
    pub w1_initial: f64,
    /// `m_f N r`.
    pub w1_initial_closed_form: f64,
    pub times: Vec<f64>,
    pub w1: Vec<f64>,
    pub ceiling: Vec<f64>,
    pub radial: usize,
    pub refinements: usize,
    /// Relative terminal change at the last refinement.
    pub refinement_change: f64,
}

impl LevelReport {
    pub fn w1_terminal(&self) -> f64 {
        *self.w1.last().expect("at least the initial snapshot")
    }

    pub fn ceiling_terminal(&self) -> f64 {
        *self.ceiling.last().expect("at least the initial snapshot")
    }

    pub fn within_ceiling(&self) -> bool {
        self.w1.iter().zip(&self.ceiling).all(|(w, c)| *w <= c + 1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    /// Some value was at or below zero and was replaced by the floor.
    pub floored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub xi_star: f64,
    pub levels: Vec<LevelReport>,
    pub fit: Option<DecayFit>,
    /// `(d - 1 - h) / d`, the order of the initial distances.
    pub predicted_slope: f64,
    pub h_exceeds_dim_minus_one: bool,
}

impl ConvergenceReport {
    pub fn all_within_ceiling(&self) -> bool {
        self.levels.iter().all(LevelReport::within_ceiling)
    }
}

/// `2^{-2-hk}`, `2^{(1-h)k}/3` and `3 2^{(2-h)k-3}` for the indicator bumps on
/// the dyadic lattice in dimension 1, 2 and 3.
pub fn lattice_initial_distance(dim: usize, h: f64, k: u32) -> Result<f64> {
    let k = f64::from(k);
    match dim {
        1 => Ok((-2.0 - h * k).exp2()),
        2 => Ok(((1.0 - h) * k).exp2() / 3.0),
        3 => Ok(3.0 * ((2.0 - h) * k - 3.0).exp2()),
        _ => Err(Error::Unsupported(format!("lattice distances in dimension {dim}"))),
    }
}

/// `r = N^{-(1+h)/d} / 2 = 2^{-1-(1+h)k}` on a lattice with `N = 2^{kd}`.
pub fn lattice_radius(h: f64, k: u32) -> f64 {
    (-1.0 - (1.0 + h) * f64::from(k)).exp2()
}

fn distances(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| {
            let cloud = y.measure.to_cloud()?;
            let w = match x.measure.dim() {
                1 => w1_1d(&x.measure, &CrowdMeasure::Cloud(cloud))?,
                _ => w1_lp_oracle(&x.measure.to_cloud()?, &cloud)?,
            };
            Ok(w.value)
        })
        .collect()
}

fn check(cfg: &ConvergenceConfig) -> Result<()> {
    if cfg.alpha + cfg.beta < 1.0 {
        return Err(invalid(format!(
            "alpha + beta = {} is below 1",
            cfg.alpha + cfg.beta
        )));
    }
    if cfg.kernel.lipschitz().is_none() {
        return Err(Error::DiscontinuousKernel(cfg.kernel.name().to_string()));
    }
    if !(cfg.h > cfg.dim as f64 - 1.0) {
        return Err(invalid(format!(
            "h = {} must exceed d - 1 = {}",
            cfg.h,
            cfg.dim - 1
        )));
    }
    if !cfg.kernel.supports_dim(cfg.dim) {
        return Err(Error::Unsupported(format!(
            "kernel `{}` in dimension {}",
            cfg.kernel.name(),
            cfg.dim
        )));
    }
    if !(cfg.t_final > 0.0) || cfg.refine_tol <= 0.0 {
        return Err(invalid("T and the refinement tolerance must be positive"));
    }
    Ok(())
}

fn run_level(cfg: &ConvergenceConfig, k: u32, xi_star: f64) -> Result<LevelReport> {
    let atoms = make_lattice(cfg.dim, k)?;
    let n = atoms.len();
    let r = lattice_radius(cfg.h, k);
    let bumps = make_bumps(&atoms, r, cfg.profile)?;
    let w1_initial = w1_semidiscrete(&atoms, &bumps)?.value;
    let kernel = ScaledKernel::new(cfg.kernel.clone(), cfg.alpha, cfg.beta, n)?;
    let domain = Domain::free(cfg.dim);
    let sim = SimConfig {
        dt: Some(cfg.dt.unwrap_or_else(|| default_dt(&cfg.v_d, &kernel, n))),
        t_final: cfg.t_final,
        order: cfg.order,
        snapshot_stride: cfg.snapshot_stride,
        execution: cfg.execution,
    };
    let micro = integrate_micro(&MicroState::new(atoms.points.clone()), &cfg.v_d, &kernel, &domain, &sim)?;

    let mut radial = cfg.radial.unwrap_or_else(|| default_radial_order(cfg.dim));
    let mut w1 = {
        let tr = integrate_characteristics(&bumps, &cfg.v_d, &kernel, &domain, &sim, Some(radial))?;
        distances(&micro, &tr)?
    };
    let mut refinements = 0;
    let mut change = f64::INFINITY;
    while refinements < cfg.max_refinements {
        let finer = 2 * radial;
        let tr = integrate_characteristics(&bumps, &cfg.v_d, &kernel, &domain, &sim, Some(finer))?;
        let next = distances(&micro, &tr)?;
        let (old, new) = (w1[w1.len() - 1], next[next.len() - 1]);
        change = if new > 0.0 { (new - old).abs() / new } else { (new - old).abs() };
        radial = finer;
        w1 = next;
        refinements += 1;
        if change < cfg.refine_tol {
            break;
        }
    }
    let times = micro.times();
    let ceiling = times
        .iter()
        .map(|&t| continuous_dependence_bound(w1_initial, xi_star, t, cfg.t_final))
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelReport {
        k,
        n,
        r,
        w1_initial,
        w1_initial_closed_form: bumps.first_moment() * n as f64 * r,
        times,
        w1,
        ceiling,
        radial,
        refinements,
        refinement_change: change,
    })
}

pub fn run_convergence(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    check(cfg)?;
    let probe = ScaledKernel::new(cfg.kernel.clone(), cfg.alpha, cfg.beta, 1)?;
    let xi_star = xi_n(&cfg.v_d, &probe)?
        .xi_star
        .ok_or_else(|| invalid("exponents are not admissible"))?;
    let levels = cfg
        .execution
        .map(cfg.levels.len(), |i| run_level(cfg, cfg.levels[i], xi_star))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let fit = if levels.len() >= 3 {
        let series: Vec<(f64, f64)> = levels.iter().map(|l| (l.n as f64, l.w1_terminal())).collect();
        Some(fit_decay_exponent(&series)?)
    } else {
        None
    };
    let d = cfg.dim as f64;
    Ok(ConvergenceReport {
        xi_star,
        levels,
        fit,
        predicted_slope: (d - 1.0 - cfg.h) / d,
        h_exceeds_dim_minus_one: cfg.h > d - 1.0,
    })
}

/// Least-squares slope of `log W1` against `log N`.
pub fn fit_decay_exponent(series: &[(f64, f64)]) -> Result<DecayFit> {
    if series.len() < 3 {
        return Err(invalid(format!("need at least 3 levels, got {}", series.len())));
    }
    if series.iter().any(|&(n, _)| !(n > 0.0)) {
        return Err(invalid("N must be positive"));
    }
    let mut floored = false;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .map(|&(n, w)| {
            let w = if w > MEASUREMENT_FLOOR {
                w
            } else {
                floored = true;
                MEASUREMENT_FLOOR
            };
            (n.ln(), w.ln())
        })
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("all levels have the same N"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(DecayFit { slope: sxy / sxx, floored })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn synthetic_fits() {
        let s: Vec<_> = [4.0, 16.0, 64.0, 256.0].iter().map(|&n| (n, 1.0 / n)).collect();
        assert_abs_diff_eq!(fit_decay_exponent(&s).unwrap().slope, -1.0, epsilon = 1e-9);
        let s: Vec<_> = [4.0, 16.0, 64.0].iter().map(|&n| (n, 0.3)).collect();
        assert_abs_diff_eq!(fit_decay_exponent(&s).unwrap().slope, 0.0, epsilon = 1e-12);
        let s = [(2.0, 0.0), (4.0, 1e-3), (8.0, 1e-4)];
        assert!(fit_decay_exponent(&s).unwrap().floored);
        assert!(fit_decay_exponent(&s[..2]).is_err());
    }

    #[test]
    fn initial_distance_slope_1d() {
        let s: Vec<_> = (2..=6)
            .map(|k| (f64::from(1u32 << k), lattice_initial_distance(1, 1.0, k).unwrap()))
            .collect();
        assert_abs_diff_eq!(fit_decay_exponent(&s).unwrap().slope, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_forms_match_semidiscrete() {
        for (d, h, ks) in [(1, 1.0, 1..=6), (2, 2.0, 1..=4), (3, 3.0, 1..=3)] {
            for k in ks {
                let atoms = make_lattice(d, k).unwrap();
                let b = make_bumps(&atoms, lattice_radius(h, k), BumpProfile::Indicator).unwrap();
                let w = w1_semidiscrete(&atoms, &b).unwrap().value;
                let closed = lattice_initial_distance(d, h, k).unwrap();
                assert!((w - closed).abs() <= 1e-12 * closed.max(1.0), "d={d} k={k}: {w} vs {closed}");
            }
        }
    }

    #[test]
    fn preconditions_are_named() {
        let cfg = ConvergenceConfig { alpha: 0.5, ..Default::default() };
        assert!(run_convergence(&cfg).unwrap_err().to_string().contains("alpha + beta"));
        let cfg = ConvergenceConfig { kernel: KernelProfile::fig3(), ..Default::default() };
        assert!(matches!(run_convergence(&cfg), Err(Error::DiscontinuousKernel(_))));
        let cfg = ConvergenceConfig { dim: 2, h: 1.0, ..Default::default() };
        assert!(run_convergence(&cfg).unwrap_err().to_string().contains("d - 1"));
    }

    #[test]
    fn small_run_respects_ceiling() {
        let cfg = ConvergenceConfig { levels: vec![1, 2, 3], t_final: 0.5, ..Default::default() };
        let rep = run_convergence(&cfg).unwrap();
        assert_eq!(rep.xi_star, 1.0);
        assert!(rep.all_within_ceiling());
        for l in &rep.levels {
            assert_eq!(l.w1[0], l.w1_initial);
        }
    }
}
