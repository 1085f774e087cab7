//! Speed diagrams of the equispaced lattice versus the uniform density, and
//! the gap between them as `N` grows.

use serde::Serialize;

use crate::continuum::uniform_equilibrium_speed;
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::kernel::Profile1D;
use crate::micro::lattice_equilibrium_speed;
use crate::numerics::{compensated_sum, integrate_piecewise};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedRow {
    pub n: usize,
    pub v_micro: f64,
    pub v_macro: f64,
    pub dv: f64,
    /// `dv / K(0+)`, present when `K(0+) > 0`.
    pub dv_over_k0p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedDiagram {
    pub length: f64,
    pub rows: Vec<SpeedRow>,
}

pub fn speed_diagram<K: Profile1D + ?Sized>(
    length: f64,
    ns: &[usize],
    v_d: f64,
    k: &K,
    exec: Execution,
) -> Result<SpeedDiagram> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(invalid(format!("corridor length must be positive, got {length}")));
    }
    let k0p = k.right_limit_at_zero();
    // the macro branch is affine in N, so its slope is computed once
    let slope = v_d - uniform_equilibrium_speed(1.0, length, v_d, k);
    let rows = exec.map(ns.len(), |i| {
        let n = ns[i];
        let v_micro = lattice_equilibrium_speed(n, length, v_d, k);
        let v_macro = v_d - slope * n as f64;
        let dv = v_micro - v_macro;
        SpeedRow {
            n,
            v_micro,
            v_macro,
            dv,
            dv_over_k0p: (k0p > 0.0).then(|| dv / k0p),
        }
    });
    Ok(SpeedDiagram { length, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub n: usize,
    /// `(1/2) <K>` over the right half of the first cell, minus `K(0)`.
    pub first: f64,
    /// Sum of midpoint defects `<K>_{E_i} - K(x_i)`, `i = 2..N`.
    pub middle: f64,
    /// `(1/2) <K>` over the last half cell `((N - 1/2) L / N, L]`.
    pub last: f64,
    pub total: f64,
    /// Individual midpoint defects, in cell order.
    pub middle_terms: Vec<f64>,
}

/// Splits `dv(N)` over the cells `E_i = ((i - 3/2) L/N, (i - 1/2) L/N]`
/// centred on the lattice sites `x_i = (i - 1) L / N`.
pub fn delta_v_partition<K: Profile1D + ?Sized>(n: usize, length: f64, k: &K) -> Result<Partition> {
    if n == 0 {
        return Err(invalid("partition needs N >= 1"));
    }
    let h = length / n as f64;
    let breaks = k.breakpoints();
    let mean = |a: f64, b: f64| {
        integrate_piecewise(|z| k.eval1(z), a, b, &breaks, 1e-14).value / (b - a)
    };
    let first = 0.5 * mean(0.0, 0.5 * h) - k.value_at_zero();
    let middle_terms: Vec<f64> = (2..=n)
        .map(|i| {
            let centre = (i - 1) as f64 * h;
            mean(centre - 0.5 * h, centre + 0.5 * h) - k.eval1(centre)
        })
        .collect();
    let middle = compensated_sum(middle_terms.iter().copied());
    let last = 0.5 * mean(length - 0.5 * h, length);
    Ok(Partition {
        n,
        first,
        middle,
        last,
        total: compensated_sum([first, middle, last]),
        middle_terms,
    })
}

/// Largest midpoint defect allowed by the curvature of `K` on one cell:
/// `(1/2) sup|K''| L^2 / (12 N^2)`.
pub fn midpoint_defect_bound(second_derivative_sup: f64, n: usize, length: f64) -> f64 {
    0.5 * second_derivative_sup * length * length / (12.0 * (n * n) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub ns: Vec<usize>,
    pub dv: Vec<f64>,
    /// `K(0+)/2 - K(0)`.
    pub expected_limit: f64,
    pub terminal_error: f64,
    /// Richardson value from the last three doublings, assuming
    /// `dv(N) = A + a/N + b/N^2`.
    pub extrapolated: Option<f64>,
}

pub fn delta_v_limit_check<K: Profile1D + ?Sized>(
    k: &K,
    length: f64,
    n_max: usize,
    exec: Execution,
) -> Result<LimitReport> {
    if n_max < 2 {
        return Err(invalid("N_max must be at least 2"));
    }
    let mut ns = vec![2usize];
    while ns[ns.len() - 1] * 2 <= n_max {
        ns.push(ns[ns.len() - 1] * 2);
    }
    let diagram = speed_diagram(length, &ns, 1.0, k, exec)?;
    let dv: Vec<f64> = diagram.rows.iter().map(|r| r.dv).collect();
    let expected_limit = 0.5 * k.right_limit_at_zero() - k.value_at_zero();
    let extrapolated = (dv.len() >= 3).then(|| {
        let j = dv.len();
        (8.0 * dv[j - 1] - 6.0 * dv[j - 2] + dv[j - 3]) / 3.0
    });
    Ok(LimitReport {
        terminal_error: (dv[dv.len() - 1] - expected_limit).abs(),
        ns,
        dv,
        expected_limit,
        extrapolated,
    })
}

/// `a, a*m, a*m^2, ... <= b` for `a:m:b`, or an explicit comma list.
pub fn parse_n_grid(spec: &str) -> Result<Vec<usize>> {
    let bad = || invalid(format!("bad N grid `{spec}`; use start:ratio:end or a comma list"));
    if spec.contains(':') {
        let parts: Vec<usize> = spec
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [start, ratio, end] = parts[..] else { return Err(bad()) };
        if start == 0 || ratio < 2 || end < start {
            return Err(bad());
        }
        let mut out = vec![start];
        while let Some(next) = out[out.len() - 1].checked_mul(ratio).filter(|&x| x <= end) {
            out.push(next);
        }
        Ok(out)
    } else {
        spec.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
    }
}
