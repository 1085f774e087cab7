//! Fixed-step explicit Runge-Kutta schemes of order 1 to 4.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RkOrder {
    Euler,
    Heun,
    Kutta3,
    #[default]
    Classic4,
}

impl RkOrder {
    pub fn from_order(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Self::Euler),
            2 => Ok(Self::Heun),
            3 => Ok(Self::Kutta3),
            4 => Ok(Self::Classic4),
            _ => Err(invalid(format!("integrator order must be 1..=4, got {p}"))),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Self::Euler => 1,
            Self::Heun => 2,
            Self::Kutta3 => 3,
            Self::Classic4 => 4,
        }
    }

    fn tableau(self) -> (&'static [&'static [f64]], &'static [f64], &'static [f64]) {
        match self {
            Self::Euler => (&[&[]], &[1.0], &[0.0]),
            Self::Heun => (&[&[], &[1.0]], &[0.5, 0.5], &[0.0, 1.0]),
            Self::Kutta3 => (
                &[&[], &[0.5], &[-1.0, 2.0]],
                &[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
                &[0.0, 0.5, 1.0],
            ),
            Self::Classic4 => (
                &[&[], &[0.5], &[0.0, 0.5], &[0.0, 0.0, 1.0]],
                &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
                &[0.0, 0.5, 0.5, 1.0],
            ),
        }
    }
}

/// Reusable stage storage for one state size.
pub struct Stepper {
    order: RkOrder,
    stages: Vec<Vec<f64>>,
    scratch: Vec<f64>,
}

impl Stepper {
    pub fn new(order: RkOrder, len: usize) -> Self {
        let s = order.tableau().1.len();
        Self {
            order,
            stages: vec![vec![0.0; len]; s],
            scratch: vec![0.0; len],
        }
    }

    /// Advances `y` from `t` to `t + dt` for `y' = f(t, y)`.
    pub fn step<F>(&mut self, f: &mut F, t: f64, y: &mut [f64], dt: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let (a, b, c) = self.order.tableau();
        for s in 0..b.len() {
            self.scratch.copy_from_slice(y);
            for (j, &aij) in a[s].iter().enumerate() {
                if aij != 0.0 {
                    for (x, k) in self.scratch.iter_mut().zip(&self.stages[j]) {
                        *x += dt * aij * k;
                    }
                }
            }
            f(t + c[s] * dt, &self.scratch, &mut self.stages[s]);
        }
        for (s, &bs) in b.iter().enumerate() {
            for (x, k) in y.iter_mut().zip(&self.stages[s]) {
                *x += dt * bs * k;
            }
        }
    }
}

/// Number of steps and the effective step for reaching `t_final` exactly.
pub fn step_plan(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(invalid(format!("final time must be nonnegative, got {t_final}")));
    }
    if t_final == 0.0 {
        return Ok((0, dt));
    }
    let n = (t_final / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok((n, t_final / n as f64))
}
