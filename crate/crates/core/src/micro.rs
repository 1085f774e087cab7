//! N-particle dynamics `X_i' = v_d(X_i) - sum_j K(X_j - X_i)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::desired::DesiredVelocity;
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::kernel::{Profile1D, ScaledKernel};
use crate::measure::{AtomicMeasure, CrowdMeasure};
use crate::numerics::{compensated_sum, CompensatedSum};
use crate::rk::{step_plan, RkOrder, Stepper};
use crate::space::{wrap, Domain, Points};
use crate::trajectory::{Snapshot, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Requested step; `None` picks `default_dt`.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub order: RkOrder,
    /// Keep every `snapshot_stride`-th step (the final state is always kept).
    pub snapshot_stride: usize,
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: None,
            t_final: 1.0,
            order: RkOrder::Classic4,
            snapshot_stride: 10,
            execution: Execution::default(),
        }
    }
}

impl SimConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_t_final(mut self, t: f64) -> Self {
        self.t_final = t;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_execution(mut self, e: Execution) -> Self {
        self.execution = e;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroState {
    pub t: f64,
    pub positions: Points,
}

impl MicroState {
    pub fn new(positions: Points) -> Self {
        Self { t: 0.0, positions }
    }
}

/// Velocity field generated by a finite weighted point set.
pub(crate) struct Field<'a> {
    pub v_d: &'a DesiredVelocity,
    pub kernel: &'a ScaledKernel,
    pub domain: &'a Domain,
}

impl Field<'_> {
    pub fn check(&self, dim: usize) -> Result<()> {
        if self.domain.dim() != dim {
            return Err(Error::DimensionMismatch { expected: self.domain.dim(), found: dim });
        }
        if let Some(d) = self.v_d.dim() {
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: d });
            }
        }
        if !self.kernel.base().supports_dim(dim) {
            return Err(Error::Unsupported(format!(
                "kernel `{}` in dimension {dim}",
                self.kernel.base().name()
            )));
        }
        self.domain.check_support(self.kernel.support_radius())
    }

    /// `v_d(x) - sum_j w_j K(y_j - x)`, summed in index order.
    pub fn velocity(&self, sources: &[f64], weights: Option<&[f64]>, x: &[f64], out: &mut [f64]) {
        let dim = x.len();
        self.v_d.eval(x, out);
        let weight = |j: usize| weights.map_or(1.0, |w| w[j]);
        if dim == 1 {
            let mut acc = CompensatedSum::new();
            match self.domain.period() {
                Some(length) => {
                    for (j, &y) in sources.iter().enumerate() {
                        let g = wrap(y - x[0], length);
                        acc.add(weight(j) * self.kernel.periodic1(g, length));
                    }
                }
                None => {
                    for (j, &y) in sources.iter().enumerate() {
                        acc.add(weight(j) * self.kernel.eval1(y - x[0]));
                    }
                }
            }
            out[0] -= acc.value();
            return;
        }
        let mut acc = [CompensatedSum::new(); 3];
        let mut z = [0.0; 3];
        let mut k = [0.0; 3];
        for (j, y) in sources.chunks_exact(dim).enumerate() {
            for c in 0..dim {
                z[c] = y[c] - x[c];
            }
            self.kernel.eval(&z[..dim], &mut k[..dim]);
            let w = weight(j);
            for c in 0..dim {
                acc[c].add(w * k[c]);
            }
        }
        for c in 0..dim {
            out[c] -= acc[c].value();
        }
    }

    /// Velocities at every target point, data-parallel over targets.
    pub fn velocities(
        &self,
        exec: Execution,
        sources: &[f64],
        weights: Option<&[f64]>,
        targets: &[f64],
        dim: usize,
        out: &mut [f64],
    ) {
        exec.fill_chunks(out, dim, |i, chunk| {
            self.velocity(sources, weights, &targets[i * dim..(i + 1) * dim], chunk)
        });
    }
}

/// `min(0.01, 0.1 / xi)` with `xi = 2 max(Lip v_d, N Lip K)`; 0.01 when the
/// kernel has no Lipschitz constant.
pub fn default_dt(v_d: &DesiredVelocity, k: &ScaledKernel, n_agents: usize) -> f64 {
    match k.lipschitz() {
        Ok(lip) => {
            let xi = 2.0 * v_d.lipschitz().max(n_agents as f64 * lip);
            if xi > 0.0 {
                (0.1 / xi).min(0.01)
            } else {
                0.01
            }
        }
        Err(_) => 0.01,
    }
}

pub fn micro_velocity(
    state: &MicroState,
    i: usize,
    v_d: &DesiredVelocity,
    k: &ScaledKernel,
    domain: &Domain,
) -> Result<Vec<f64>> {
    let p = &state.positions;
    if i >= p.len() {
        return Err(invalid(format!("agent index {i} out of range for {} agents", p.len())));
    }
    let field = Field { v_d, kernel: k, domain };
    field.check(p.dim())?;
    let mut out = vec![0.0; p.dim()];
    field.velocity(p.as_slice(), None, p.get(i), &mut out);
    Ok(out)
}

type Kept = Vec<(f64, Vec<f64>)>;

/// Shared fixed-step driver: the first `n_sources` points (weighted by
/// `weights`) generate the field, the remaining points are passive.
#[allow(clippy::too_many_arguments)]
pub(crate) fn advance<M>(
    y0: Vec<f64>,
    dim: usize,
    n_sources: usize,
    weights: Option<&[f64]>,
    field: &Field,
    cfg: &SimConfig,
    dt: f64,
    snapshot: M,
) -> Result<(Kept, f64, usize)>
where
    M: Fn(&[f64]) -> CrowdMeasure,
{
    if cfg.snapshot_stride == 0 {
        return Err(invalid("snapshot stride must be at least 1"));
    }
    let (steps, dt) = step_plan(cfg.t_final, dt)?;
    let mut y = y0;
    field.domain.wrap_all(&mut y);
    let mut stepper = Stepper::new(cfg.order, y.len());
    let mut states = vec![(0.0, y.clone())];
    let mut rhs = |_t: f64, s: &[f64], ds: &mut [f64]| {
        field.velocities(cfg.execution, &s[..n_sources * dim], weights, s, dim, ds);
    };
    let mut last_valid = y.clone();
    for n in 0..steps {
        let t = n as f64 * dt;
        stepper.step(&mut rhs, t, &mut y, dt);
        field.domain.wrap_all(&mut y);
        let t_next = if n + 1 == steps { cfg.t_final } else { (n + 1) as f64 * dt };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t: t_next,
                last_valid: Box::new(Snapshot { t, measure: snapshot(&last_valid) }),
            });
        }
        last_valid.copy_from_slice(&y);
        if (n + 1) % cfg.snapshot_stride == 0 || n + 1 == steps {
            states.push((t_next, y.clone()));
        }
    }
    Ok((states, dt, steps))
}

pub fn integrate_micro(
    state0: &MicroState,
    v_d: &DesiredVelocity,
    k: &ScaledKernel,
    domain: &Domain,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    let empty = Points::zeros(state0.positions.dim(), 0);
    Ok(integrate_micro_with_tracers(state0, &empty, v_d, k, domain, cfg)?.0)
}

/// As `integrate_micro`, also carrying passive tracers through the agents'
/// velocity field. The second value holds tracer positions per snapshot.
pub fn integrate_micro_with_tracers(
    state0: &MicroState,
    tracers: &Points,
    v_d: &DesiredVelocity,
    k: &ScaledKernel,
    domain: &Domain,
    cfg: &SimConfig,
) -> Result<(Trajectory, Vec<Points>)> {
    let dim = state0.positions.dim();
    let n = state0.positions.len();
    if tracers.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: tracers.dim() });
    }
    if !state0.positions.is_finite() {
        return Err(invalid("initial positions must be finite"));
    }
    let field = Field { v_d, kernel: k, domain };
    field.check(dim)?;
    let dt = cfg.dt.unwrap_or_else(|| default_dt(v_d, k, n));
    let mut y0 = state0.positions.as_slice().to_vec();
    y0.extend_from_slice(tracers.as_slice());
    let atoms = |s: &[f64]| -> CrowdMeasure {
        AtomicMeasure { points: Points::new(dim, s[..n * dim].to_vec()).expect("dim divides state") }.into()
    };
    let (states, dt, steps) = advance(y0, dim, n, None, &field, cfg, dt, atoms)?;
    let mut snapshots = Vec::with_capacity(states.len());
    let mut paths = Vec::with_capacity(states.len());
    for (t, s) in states {
        snapshots.push(Snapshot { t: state0.t + t, measure: atoms(&s) });
        paths.push(Points::new(dim, s[n * dim..].to_vec())?);
    }
    Ok((
        Trajectory { snapshots, dt, steps, notes: Vec::new() },
        paths,
    ))
}

/// Speed of the equispaced traveling lattice: `v_d - sum_{h=0}^{N-1} K(h L / N)`.
/// The `h = 0` term is the self-interaction `K(0)`.
pub fn lattice_equilibrium_speed<K: Profile1D + ?Sized>(n: usize, length: f64, v_d: f64, k: &K) -> f64 {
    if n == 0 {
        return v_d;
    }
    let spacing = length / n as f64;
    v_d - compensated_sum((0..n).map(|h| k.periodic1(h as f64 * spacing, length)))
}

/// Real parts of the lattice perturbation eigenvalues for modes `1..N-1`.
pub fn micro_stability_spectrum<K: Profile1D + ?Sized>(n: usize, length: f64, k: &K) -> Vec<f64> {
    let spacing = length / n as f64;
    let slopes: Vec<f64> = (1..n).map(|h| k.periodic_derivative1(h as f64 * spacing, length)).collect();
    (1..n)
        .map(|mode| {
            compensated_sum(slopes.iter().enumerate().map(|(i, s)| {
                let h = (i + 1) as f64;
                s * (1.0 - (2.0 * PI * mode as f64 * h / n as f64).cos())
            }))
        })
        .collect()
}

/// Equispaced lattice `x_i = i L / N` on `[0, L)`.
pub fn equispaced(n: usize, length: f64) -> Points {
    Points::line((0..n).map(|i| i as f64 * length / n as f64).collect())
}
