//! Lipschitz moduli, a-priori stability bounds and the scaling equivalence
//! between kernel families with equal `alpha + beta`.

use serde::Serialize;

use crate::desired::DesiredVelocity;
use crate::error::{invalid, Error, Result};
use crate::kernel::{KernelProfile, ScaledKernel};
use crate::measure::{push_forward, AtomicMeasure, CrowdMeasure, PointMap};
use crate::micro::{default_dt, integrate_micro, integrate_micro_with_tracers, MicroState, SimConfig};
use crate::space::{distance, Domain, Points};
use crate::trajectory::Trajectory;
use crate::wasserstein::w1_auto;

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiReport {
    /// `2 max(Lip v_d, N Lip K^N)`.
    pub xi_n: f64,
    /// `2 max(Lip v_d, Lip K)` for the base profile, reported for admissible
    /// exponents where it bounds `xi_n` uniformly in `N`.
    pub xi_star: Option<f64>,
}

pub fn xi_n(v_d: &DesiredVelocity, k: &ScaledKernel) -> Result<XiReport> {
    let lip = k.lipschitz()?;
    let base = k
        .base()
        .lipschitz()
        .ok_or_else(|| Error::DiscontinuousKernel(k.base().name().to_string()))?;
    let lv = v_d.lipschitz();
    Ok(XiReport {
        xi_n: 2.0 * lv.max(k.n_agents() as f64 * lip),
        xi_star: k.is_admissible().then(|| 2.0 * lv.max(base)),
    })
}

/// `exp(xi t (1 + exp(xi T))) w1_initial`.
pub fn continuous_dependence_bound(w1_initial: f64, xi: f64, t: f64, t_final: f64) -> Result<f64> {
    if t > t_final {
        return Err(invalid(format!("t = {t} exceeds the horizon T = {t_final}")));
    }
    if !(t >= 0.0 && xi >= 0.0 && w1_initial >= 0.0) {
        return Err(invalid("bound needs t, xi and the initial distance nonnegative"));
    }
    Ok((xi * t * (1.0 + (xi * t_final).exp())).exp() * w1_initial)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub xi_n: f64,
    /// Amplification factor at the final time.
    pub bound_factor: f64,
    pub times: Vec<f64>,
    pub observed: Vec<f64>,
    pub predicted_ceiling: Vec<f64>,
    pub satisfied: bool,
}

impl BoundReport {
    fn new(xi_n: f64, bound_factor: f64, times: Vec<f64>, observed: Vec<f64>, predicted_ceiling: Vec<f64>) -> Self {
        let satisfied = observed.iter().zip(&predicted_ceiling).all(|(o, c)| *o <= c + SLACK);
        Self { xi_n, bound_factor, times, observed, predicted_ceiling, satisfied }
    }
}

fn require_free(domain: &Domain) -> Result<()> {
    if domain.period().is_some() {
        return Err(Error::Unsupported("distance bounds are checked on free space only".into()));
    }
    Ok(())
}

fn common_dt(cfg: &SimConfig, v_d: &DesiredVelocity, k: &ScaledKernel, n: usize) -> SimConfig {
    let mut c = cfg.clone();
    c.dt = Some(cfg.dt.unwrap_or_else(|| default_dt(v_d, k, n)));
    c
}

fn pairwise_w1(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| Ok(w1_auto(&x.measure, &y.measure)?.value))
        .collect()
}

/// Simulates both crowds and compares their distance with the a-priori ceiling.
pub fn verify_continuous_dependence(
    mu0: &AtomicMeasure,
    nu0: &AtomicMeasure,
    v_d: &DesiredVelocity,
    k: &ScaledKernel,
    domain: &Domain,
    cfg: &SimConfig,
) -> Result<BoundReport> {
    require_free(domain)?;
    let xi = xi_n(v_d, k)?.xi_n;
    let cfg = common_dt(cfg, v_d, k, mu0.len());
    let a = integrate_micro(&MicroState::new(mu0.points.clone()), v_d, k, domain, &cfg)?;
    let b = integrate_micro(&MicroState::new(nu0.points.clone()), v_d, k, domain, &cfg)?;
    let observed = pairwise_w1(&a, &b)?;
    let w0 = observed[0];
    let times = a.times();
    let ceiling = times
        .iter()
        .map(|&t| continuous_dependence_bound(w0, xi, t, cfg.t_final))
        .collect::<Result<Vec<_>>>()?;
    let factor = continuous_dependence_bound(1.0, xi, cfg.t_final, cfg.t_final)?;
    Ok(BoundReport::new(xi, factor, times, observed, ceiling))
}

fn snapshot_points(m: &CrowdMeasure) -> Option<&Points> {
    match m {
        CrowdMeasure::Atomic(a) => Some(&a.points),
        CrowdMeasure::Cloud(c) => Some(&c.points),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowMapReport {
    pub pairs_checked: usize,
    /// Smallest `exp(xi t)|y - x| - |gamma_t(y) - gamma_t(x)|`.
    pub min_slack: f64,
}

/// Samples `|gamma_t(y) - gamma_t(x)| <= exp(xi t)|y - x|` over all point
/// pairs of a free-space trajectory.
pub fn check_flow_map_lipschitz(tr: &Trajectory, xi: f64) -> Result<FlowMapReport> {
    let p0 = snapshot_points(&tr.first().measure).ok_or_else(|| invalid("trajectory has no point samples"))?;
    let mut min_slack = f64::INFINITY;
    let mut pairs = 0;
    for s in &tr.snapshots {
        let pt = snapshot_points(&s.measure).ok_or_else(|| invalid("trajectory has no point samples"))?;
        let grow = (xi * s.t).exp();
        for i in 0..p0.len() {
            for j in i + 1..p0.len() {
                let slack = grow * distance(p0.get(i), p0.get(j)) - distance(pt.get(i), pt.get(j));
                min_slack = min_slack.min(slack);
                pairs += 1;
            }
        }
    }
    Ok(FlowMapReport { pairs_checked: pairs, min_slack })
}

/// Carries the same tracers through the fields of two crowds and checks
/// `|gamma^nu_t(x) - gamma^mu_t(x)| <= xi exp(xi t) / N * int_0^t W1 ds`,
/// the integral by the trapezoid rule over snapshots.
pub fn check_flow_map_cross(
    mu0: &AtomicMeasure,
    nu0: &AtomicMeasure,
    tracers: &Points,
    v_d: &DesiredVelocity,
    k: &ScaledKernel,
    domain: &Domain,
    cfg: &SimConfig,
) -> Result<BoundReport> {
    require_free(domain)?;
    let xi = xi_n(v_d, k)?.xi_n;
    let n = mu0.len() as f64;
    let cfg = common_dt(cfg, v_d, k, mu0.len());
    let (a, ta) = integrate_micro_with_tracers(&MicroState::new(mu0.points.clone()), tracers, v_d, k, domain, &cfg)?;
    let (b, tb) = integrate_micro_with_tracers(&MicroState::new(nu0.points.clone()), tracers, v_d, k, domain, &cfg)?;
    let w1 = pairwise_w1(&a, &b)?;
    let times = a.times();
    let mut integral = 0.0;
    let mut observed = Vec::with_capacity(times.len());
    let mut ceiling = Vec::with_capacity(times.len());
    for s in 0..times.len() {
        if s > 0 {
            integral += 0.5 * (times[s] - times[s - 1]) * (w1[s] + w1[s - 1]);
        }
        let gap = (0..tracers.len())
            .map(|i| distance(ta[s].get(i), tb[s].get(i)))
            .fold(0.0, f64::max);
        observed.push(gap);
        ceiling.push(xi * (xi * times[s]).exp() / n * integral);
    }
    let factor = xi * (xi * cfg.t_final).exp() / n;
    Ok(BoundReport::new(xi, factor, times, observed, ceiling))
}

/// Push-forward by `U(z) = N^{beta' - beta} z`.
pub fn scaling_transform(m: &CrowdMeasure, beta: f64, beta_prime: f64, n: usize) -> Result<CrowdMeasure> {
    if n == 0 {
        return Err(invalid("scaling needs N >= 1"));
    }
    let a = if beta == beta_prime { 1.0 } else { (n as f64).powf(beta_prime - beta) };
    push_forward(m, &PointMap::Scale(a))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub scale: f64,
    /// Steps tried: `dt`, `dt/2`, `dt/4`.
    pub dts: Vec<f64>,
    /// `W1(nu_T, U # mu_T)` per step size.
    pub terminal_discrepancy: Vec<f64>,
    /// Richardson estimate of the combined integrator error for `dt` and `dt/2`.
    pub richardson_ceiling: Vec<f64>,
    /// Per-snapshot discrepancy of the `dt` runs.
    pub times: Vec<f64>,
    pub discrepancy: Vec<f64>,
    pub below_ceiling: bool,
    /// `d(dt/4) <= d(dt) / 8`.
    pub shrinks: bool,
}

/// Runs `mu` with `K^N_{alpha,beta}` from `mu0` and `nu` with
/// `K^N_{alpha',beta'}` from `U # mu0`, then measures `W1(nu_t, U # mu_t)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_scaling_equivalence(
    mu0: &AtomicMeasure,
    from: (f64, f64),
    to: (f64, f64),
    base: &KernelProfile,
    v_d: &DesiredVelocity,
    domain: &Domain,
    cfg: &SimConfig,
) -> Result<ScalingReport> {
    require_free(domain)?;
    if ((from.0 + from.1) - (to.0 + to.1)).abs() > 1e-12 {
        return Err(invalid(format!(
            "exponent sums differ: {} vs {}",
            from.0 + from.1,
            to.0 + to.1
        )));
    }
    if !v_d.is_zero() {
        return Err(invalid("scaling equivalence needs a zero desired velocity"));
    }
    let n = mu0.len();
    let k_mu = ScaledKernel::new(base.clone(), from.0, from.1, n)?;
    let k_nu = ScaledKernel::new(base.clone(), to.0, to.1, n)?;
    let mu_start: CrowdMeasure = mu0.clone().into();
    let nu_start = scaling_transform(&mu_start, from.1, to.1, n)?;
    let scale = if from.1 == to.1 { 1.0 } else { (n as f64).powf(to.1 - from.1) };
    let nu_atoms = nu_start.as_atomic().expect("atoms map to atoms").points.clone();

    let dt0 = cfg.dt.unwrap_or_else(|| default_dt(v_d, &k_mu, n).min(default_dt(v_d, &k_nu, n)));
    let mut runs = Vec::new();
    for level in 0..3 {
        let dt = dt0 / f64::from(1u32 << level);
        let c = SimConfig { dt: Some(dt), snapshot_stride: cfg.snapshot_stride << level, ..cfg.clone() };
        let a = integrate_micro(&MicroState::new(mu0.points.clone()), v_d, &k_mu, domain, &c)?;
        let b = integrate_micro(&MicroState::new(nu_atoms.clone()), v_d, &k_nu, domain, &c)?;
        runs.push((dt, a, b));
    }
    let mut terminal = Vec::new();
    let mut times = Vec::new();
    let mut discrepancy = Vec::new();
    for (i, (_, a, b)) in runs.iter().enumerate() {
        let mut per = Vec::new();
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            let img = push_forward(&x.measure, &PointMap::Scale(scale))?;
            per.push(w1_auto(&y.measure, &img)?.value);
        }
        terminal.push(per[per.len() - 1]);
        if i == 0 {
            times = a.times();
            discrepancy = per;
        }
    }
    let p = cfg.order.order() as i32;
    let richardson = 2f64.powi(p) / (2f64.powi(p) - 1.0);
    let mut ceiling = Vec::new();
    for w in runs.windows(2) {
        let (_, a0, b0) = &w[0];
        let (_, a1, b1) = &w[1];
        let e_mu = w1_auto(&a0.last().measure, &a1.last().measure)?.value * richardson;
        let e_nu = w1_auto(&b0.last().measure, &b1.last().measure)?.value * richardson;
        ceiling.push(scale.abs() * e_mu + e_nu);
    }
    Ok(ScalingReport {
        scale,
        dts: runs.iter().map(|r| r.0).collect(),
        below_ceiling: terminal[0] <= ceiling[0] + SLACK,
        shrinks: terminal[2] <= terminal[0] / 8.0,
        terminal_discrepancy: terminal,
        richardson_ceiling: ceiling,
        times,
        discrepancy,
    })
}
