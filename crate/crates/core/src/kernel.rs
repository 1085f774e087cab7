//! Interaction kernel profiles and the N-scaled kernel family.
//!
//! A profile `K` gives the repulsive velocity contribution of a neighbour at
//! relative position `z` (the neighbour sits at `x + z`). The scaled family
//! is `K^N_{a,b}(z) = N^{-a} K(z / N^b)`.
//!
//! One-dimensional profiles may be frontal (support in `[0, R]`) and may jump
//! at the origin: the value at `z = 0` is stored separately from the right
//! limit `K(0+)`, so `eval1(0.0)` returns `K(0)` exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::norm;

/// Piecewise-linear tabulated profile, zero outside the table range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    z: Vec<f64>,
    k: Vec<f64>,
}

impl Table {
    pub fn new(z: Vec<f64>, k: Vec<f64>) -> Result<Self> {
        if z.len() != k.len() || z.len() < 2 {
            return Err(invalid("kernel table needs at least two (z, K) rows"));
        }
        if z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("kernel table abscissae must be strictly increasing"));
        }
        if z.iter().chain(&k).any(|v| !v.is_finite()) {
            return Err(invalid("kernel table contains non-finite values"));
        }
        Ok(Self { z, k })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.z.len();
        if x < self.z[0] || x > self.z[n - 1] {
            return 0.0;
        }
        let i = match self.z.partition_point(|&zi| zi <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let t = (x - self.z[i]) / (self.z[i + 1] - self.z[i]);
        self.k[i] + t * (self.k[i + 1] - self.k[i])
    }

    fn max_slope(&self) -> f64 {
        self.z
            .windows(2)
            .zip(self.k.windows(2))
            .map(|(z, k)| ((k[1] - k[0]) / (z[1] - z[0])).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// `(1/5)(1 - z^2)` on `(0, 1]`.
    Fig3,
    /// `(1/2) z (1 - z)` on `[0, 1]`.
    Fig5,
    /// Radial `z (1 - |z|/R)_+`, any dimension.
    Tent { radius: f64 },
    Zero,
    Table(Table),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    name: String,
    shape: Shape,
    value_at_zero: f64,
}

impl KernelProfile {
    pub fn new(name: impl Into<String>, shape: Shape) -> Self {
        let mut p = Self {
            name: name.into(),
            shape,
            value_at_zero: 0.0,
        };
        p.value_at_zero = p.raw(0.0);
        p
    }

    pub fn fig3() -> Self {
        Self::new("fig3", Shape::Fig3)
    }

    /// `fig3` with `K(0) = K(0+)`: agents also feel themselves.
    pub fn fig3_right_continuous() -> Self {
        Self::fig3().with_value_at_zero(0.2).renamed("fig3rc")
    }

    pub fn fig5() -> Self {
        Self::new("fig5", Shape::Fig5)
    }

    pub fn tent(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("tent radius must be positive, got {radius}")));
        }
        Ok(Self::new(format!("tent:{radius}"), Shape::Tent { radius }))
    }

    pub fn zero() -> Self {
        Self::new("zero", Shape::Zero)
    }

    pub fn from_table(name: impl Into<String>, z: Vec<f64>, k: Vec<f64>) -> Result<Self> {
        Ok(Self::new(name, Shape::Table(Table::new(z, k)?)))
    }

    /// Reads `z,k1[,k2,...]` rows; `column` selects the value column (1-based).
    /// A non-numeric first row is treated as a header, `#` lines are comments.
    pub fn from_table_csv(path: &Path, column: usize) -> Result<Self> {
        if column == 0 {
            return Err(invalid("kernel table columns are numbered from 1"));
        }
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_path(path)?;
        let (mut z, mut k) = (Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parsed: std::result::Result<Vec<f64>, _> =
                rec.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(v) if v.len() > column => {
                    z.push(v[0]);
                    k.push(v[column]);
                }
                Ok(_) => {
                    return Err(Error::Parse(format!(
                        "{}: row {} has no column {column}",
                        path.display(),
                        row + 1
                    )))
                }
                Err(_) if row == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("{}: {e}", path.display()))),
            }
        }
        Self::from_table(format!("table:{}", path.display()), z, k)
    }

    /// Resolves a kernel name: `fig3`, `fig3rc`, `fig5`, `tent`, `tent:<R>`,
    /// `zero`, or `table:<path>[#<column>]`.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec {
            "fig3" => return Ok(Self::fig3()),
            "fig3rc" => return Ok(Self::fig3_right_continuous()),
            "fig5" => return Ok(Self::fig5()),
            "tent" => return Self::tent(1.0),
            "zero" => return Ok(Self::zero()),
            _ => {}
        }
        if let Some(r) = spec.strip_prefix("tent:") {
            let radius = r
                .parse()
                .map_err(|_| invalid(format!("bad tent radius `{r}`")))?;
            return Self::tent(radius);
        }
        if let Some(rest) = spec.strip_prefix("table:") {
            let (path, column) = match rest.rsplit_once('#') {
                Some((p, c)) => (
                    p,
                    c.parse()
                        .map_err(|_| invalid(format!("bad table column `{c}`")))?,
                ),
                None => (rest, 1),
            };
            return Self::from_table_csv(Path::new(path), column);
        }
        Err(invalid(format!("unknown kernel `{spec}`")))
    }

    pub fn with_value_at_zero(mut self, v: f64) -> Self {
        self.value_at_zero = v;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Shape function without the special value at the origin.
    fn raw(&self, z: f64) -> f64 {
        match &self.shape {
            Shape::Fig3 => {
                if z > 0.0 && z <= 1.0 {
                    0.2 * (1.0 - z * z)
                } else {
                    0.0
                }
            }
            Shape::Fig5 => {
                if (0.0..=1.0).contains(&z) {
                    0.5 * z * (1.0 - z)
                } else {
                    0.0
                }
            }
            Shape::Tent { radius } => {
                if z.abs() < *radius {
                    z * (1.0 - z.abs() / radius)
                } else {
                    0.0
                }
            }
            Shape::Zero => 0.0,
            Shape::Table(t) => t.eval(z),
        }
    }

    /// Scalar profile value in one dimension.
    #[inline]
    pub fn eval1(&self, z: f64) -> f64 {
        if z == 0.0 {
            self.value_at_zero
        } else {
            self.raw(z)
        }
    }

    /// Vector profile value; one-dimensional shapes require `z.len() == 1`.
    pub fn eval(&self, z: &[f64], out: &mut [f64]) {
        if z.len() == 1 {
            out[0] = self.eval1(z[0]);
            return;
        }
        match &self.shape {
            Shape::Tent { radius } => {
                let n = norm(z);
                let s = if n < *radius { 1.0 - n / radius } else { 0.0 };
                for (o, zi) in out.iter_mut().zip(z) {
                    *o = zi * s;
                }
            }
            _ => out.fill(0.0),
        }
    }

    pub fn supports_dim(&self, dim: usize) -> bool {
        dim == 1 || matches!(self.shape, Shape::Tent { .. } | Shape::Zero)
    }

    pub fn support_radius(&self) -> f64 {
        match &self.shape {
            Shape::Fig3 | Shape::Fig5 => 1.0,
            Shape::Tent { radius } => *radius,
            Shape::Zero => 0.0,
            Shape::Table(t) => t.z[0].abs().max(t.z[t.z.len() - 1].abs()),
        }
    }

    /// Support contained in `[0, R]` (sensory region ahead only).
    pub fn is_frontal(&self) -> bool {
        match &self.shape {
            Shape::Fig3 | Shape::Fig5 | Shape::Zero => true,
            Shape::Tent { .. } => false,
            Shape::Table(t) => t.z[0] >= 0.0,
        }
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    pub fn right_limit_at_zero(&self) -> f64 {
        match &self.shape {
            Shape::Fig3 => 0.2,
            _ => self.raw(0.0),
        }
    }

    pub fn left_limit_at_zero(&self) -> f64 {
        match &self.shape {
            Shape::Table(t) if t.z[0] < 0.0 => t.eval(0.0),
            _ => 0.0,
        }
    }

    pub fn is_discontinuous_at_zero(&self) -> bool {
        self.value_at_zero != self.right_limit_at_zero() || self.value_at_zero != self.left_limit_at_zero()
    }

    /// Global Lipschitz constant; `None` when the profile jumps anywhere.
    pub fn lipschitz(&self) -> Option<f64> {
        if self.is_discontinuous_at_zero() {
            return None;
        }
        match &self.shape {
            Shape::Fig3 => None,
            Shape::Fig5 => Some(0.5),
            // |g'(s)| = |1 - 2s/R| <= 1 and g(s)/s = 1 - s/R <= 1 for g(s) = s(1 - s/R)
            Shape::Tent { .. } => Some(1.0),
            Shape::Zero => Some(0.0),
            Shape::Table(t) => {
                let n = t.k.len();
                if t.k[0] != 0.0 || t.k[n - 1] != 0.0 {
                    None
                } else {
                    Some(t.max_slope())
                }
            }
        }
    }

    /// Points where the one-dimensional profile may lose smoothness.
    pub fn breakpoints(&self) -> Vec<f64> {
        let r = self.support_radius();
        match &self.shape {
            Shape::Table(t) => {
                let mut b = t.z.clone();
                b.push(0.0);
                b
            }
            _ => vec![-r, 0.0, r],
        }
    }

    /// One-dimensional derivative. At a kink (the support edge, a table knot)
    /// it returns the mean of the one-sided derivatives, i.e. the limit of
    /// the symmetric difference quotient.
    pub fn derivative1(&self, z: f64) -> f64 {
        let one_sided_mean = |left: f64, right: f64| 0.5 * (left + right);
        match &self.shape {
            Shape::Fig3 => {
                if z > 0.0 && z < 1.0 {
                    -0.4 * z
                } else if z == 1.0 {
                    one_sided_mean(-0.4, 0.0)
                } else {
                    0.0
                }
            }
            Shape::Fig5 => {
                if z > 0.0 && z < 1.0 {
                    0.5 - z
                } else if z == 0.0 {
                    one_sided_mean(0.0, 0.5)
                } else if z == 1.0 {
                    one_sided_mean(-0.5, 0.0)
                } else {
                    0.0
                }
            }
            Shape::Tent { radius } => {
                let a = z.abs();
                if a < *radius {
                    1.0 - 2.0 * a / radius
                } else if a == *radius {
                    one_sided_mean(-1.0, 0.0)
                } else {
                    0.0
                }
            }
            Shape::Zero => 0.0,
            Shape::Table(_) => {
                let h = 1e-6 * self.support_radius().max(f64::MIN_POSITIVE);
                (self.raw(z + h) - self.raw(z - h)) / (2.0 * h)
            }
        }
    }

    /// Second derivative inside smooth pieces.
    pub fn second_derivative1(&self, z: f64) -> f64 {
        match &self.shape {
            Shape::Fig3 if z > 0.0 && z < 1.0 => -0.4,
            Shape::Fig5 if z > 0.0 && z < 1.0 => -1.0,
            Shape::Tent { radius } if z.abs() < *radius && z != 0.0 => -2.0 * z.signum() / radius,
            Shape::Table(_) => {
                let h = 1e-4 * self.support_radius().max(f64::MIN_POSITIVE);
                (self.raw(z + h) - 2.0 * self.raw(z) + self.raw(z - h)) / (h * h)
            }
            _ => 0.0,
        }
    }

    /// Sup of |K''| over the open support `(0, R)`, sampled on 10^4 points.
    pub fn second_derivative_sup(&self) -> f64 {
        let r = self.support_radius();
        let m = 10_000;
        (0..m)
            .map(|i| self.second_derivative1(r * (i as f64 + 0.5) / m as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Samples the structural invariants of a profile in dimension `dim`:
    /// zero outside the support, repulsivity `K(z).z >= 0`, and the declared
    /// Lipschitz constant against difference quotients (origin excluded when
    /// the profile jumps there).
    pub fn check_invariants(&self, dim: usize, samples: usize) -> InvariantReport {
        let r = self.support_radius().max(1e-12);
        let mut report = InvariantReport::default();
        let mut out = vec![0.0; dim];
        let mut out2 = vec![0.0; dim];
        let point = |i: usize, scale: f64| -> Vec<f64> {
            // deterministic quasi-random directions
            (0..dim)
                .map(|c| {
                    let u = ((i * (2 * c + 3)) as f64 * 0.618_033_988_749_895).fract();
                    scale * (2.0 * u - 1.0)
                })
                .collect()
        };
        for i in 0..samples {
            let outside = point(i, 3.0 * r);
            if norm(&outside) > r {
                self.eval(&outside, &mut out);
                if out.iter().any(|&v| v != 0.0) {
                    report.nonzero_outside_support += 1;
                }
            }
            let z = point(i + 1, 1.2 * r);
            self.eval(&z, &mut out);
            let dot: f64 = out.iter().zip(&z).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                report.repulsivity_violations += 1;
            }
            let w = point(i + 7919, 1.2 * r);
            let jumpy = self.is_discontinuous_at_zero();
            if jumpy && (norm(&z) == 0.0 || norm(&w) == 0.0) {
                continue;
            }
            if jumpy && dim == 1 && z[0].signum() != w[0].signum() {
                continue;
            }
            self.eval(&w, &mut out2);
            let dz: Vec<f64> = z.iter().zip(&w).map(|(a, b)| a - b).collect();
            let dk: Vec<f64> = out.iter().zip(&out2).map(|(a, b)| a - b).collect();
            if norm(&dz) > 0.0 {
                report.max_difference_quotient = report.max_difference_quotient.max(norm(&dk) / norm(&dz));
            }
        }
        report.declared_lipschitz = self.lipschitz();
        report
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvariantReport {
    pub nonzero_outside_support: usize,
    pub repulsivity_violations: usize,
    pub max_difference_quotient: f64,
    pub declared_lipschitz: Option<f64>,
}

impl InvariantReport {
    pub fn ok(&self) -> bool {
        self.nonzero_outside_support == 0
            && self.repulsivity_violations == 0
            && self
                .declared_lipschitz
                .is_none_or(|l| self.max_difference_quotient <= l * (1.0 + 1e-9))
    }
}

/// Scalar view shared by base profiles and scaled kernels.
pub trait Profile1D: Sync {
    fn eval1(&self, z: f64) -> f64;
    fn derivative1(&self, z: f64) -> f64;
    fn support_radius(&self) -> f64;
    fn value_at_zero(&self) -> f64;
    fn right_limit_at_zero(&self) -> f64;
    fn breakpoints(&self) -> Vec<f64>;

    /// Sum of the two images `K(g) + K(g - L)` for a forward gap `g` in `[0, L)`.
    #[inline]
    fn periodic1(&self, gap: f64, length: f64) -> f64 {
        self.eval1(gap) + self.eval1(gap - length)
    }

    #[inline]
    fn periodic_derivative1(&self, gap: f64, length: f64) -> f64 {
        self.derivative1(gap) + self.derivative1(gap - length)
    }
}

macro_rules! forward_profile {
    ($t:ty) => {
        impl Profile1D for $t {
            fn eval1(&self, z: f64) -> f64 {
                <$t>::eval1(self, z)
            }
            fn derivative1(&self, z: f64) -> f64 {
                <$t>::derivative1(self, z)
            }
            fn support_radius(&self) -> f64 {
                <$t>::support_radius(self)
            }
            fn value_at_zero(&self) -> f64 {
                <$t>::value_at_zero(self)
            }
            fn right_limit_at_zero(&self) -> f64 {
                <$t>::right_limit_at_zero(self)
            }
            fn breakpoints(&self) -> Vec<f64> {
                <$t>::breakpoints(self)
            }
        }
    };
}

forward_profile!(KernelProfile);
forward_profile!(ScaledKernel);

/// `K^N_{a,b}(z) = N^{-a} K(z / N^b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledKernel {
    base: KernelProfile,
    alpha: f64,
    beta: f64,
    n_agents: usize,
    amplitude: f64,
    stretch: f64,
}

impl ScaledKernel {
    pub fn new(base: KernelProfile, alpha: f64, beta: f64, n_agents: usize) -> Result<Self> {
        if n_agents == 0 {
            return Err(invalid("the kernel family needs N >= 1"));
        }
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(invalid("kernel exponents must be finite"));
        }
        let n = n_agents as f64;
        Ok(Self {
            base,
            alpha,
            beta,
            n_agents,
            amplitude: n.powf(-alpha),
            stretch: n.powf(beta),
        })
    }

    /// Identity scaling: `alpha = beta = 0`, `N = 1`.
    pub fn unscaled(base: KernelProfile) -> Self {
        Self {
            base,
            alpha: 0.0,
            beta: 0.0,
            n_agents: 1,
            amplitude: 1.0,
            stretch: 1.0,
        }
    }

    pub fn base(&self) -> &KernelProfile {
        &self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn support_radius(&self) -> f64 {
        self.stretch * self.base.support_radius()
    }

    /// `alpha + beta >= 1`, which keeps `N Lip(K^N)` bounded.
    pub fn is_admissible(&self) -> bool {
        self.alpha + self.beta >= 1.0 - 1e-12
    }

    #[inline]
    pub fn eval1(&self, z: f64) -> f64 {
        if z.abs() > self.support_radius() {
            return 0.0;
        }
        self.amplitude * self.base.eval1(z / self.stretch)
    }

    pub fn eval(&self, z: &[f64], out: &mut [f64]) {
        if z.len() == 1 {
            out[0] = self.eval1(z[0]);
            return;
        }
        if norm(z) > self.support_radius() {
            out.fill(0.0);
            return;
        }
        let scaled: Vec<f64> = z.iter().map(|v| v / self.stretch).collect();
        self.base.eval(&scaled, out);
        for o in out {
            *o *= self.amplitude;
        }
    }

    pub fn derivative1(&self, z: f64) -> f64 {
        self.amplitude / self.stretch * self.base.derivative1(z / self.stretch)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints().into_iter().map(|b| b * self.stretch).collect()
    }

    pub fn value_at_zero(&self) -> f64 {
        self.amplitude * self.base.value_at_zero()
    }

    pub fn right_limit_at_zero(&self) -> f64 {
        self.amplitude * self.base.right_limit_at_zero()
    }

    /// `Lip(K) / N^{alpha + beta}`; rejects profiles that jump.
    pub fn lipschitz(&self) -> Result<f64> {
        let lip = self
            .base
            .lipschitz()
            .ok_or_else(|| Error::DiscontinuousKernel(self.base.name.clone()))?;
        Ok(lip * (self.n_agents as f64).powf(-(self.alpha + self.beta)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AssumptionClause {
    /// Support `[0, R]` with `0 < R < L`.
    Support,
    /// `K, K''` bounded and `K` twice continuously differentiable on `(0, R)`.
    Regularity,
    /// `K > 0`, `K' < 0` on `(0, R)`, `K(0) = K(R) = 0`, `K(0+) > 0`.
    Monotonicity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseCheck {
    pub clause: AssumptionClause,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ClauseCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn passed(&self, clause: AssumptionClause) -> bool {
        self.checks.iter().any(|c| c.clause == clause && c.passed)
    }
}

pub fn validate_stationary_assumptions(k: &KernelProfile, length: f64) -> ValidationReport {
    validate_stationary_assumptions_on(k, length, 1000)
}

/// Samples the stationary-corridor kernel hypotheses on a `grid`-point mesh of
/// `(0, R)`. The C^2 probe compares second differences at the mesh spacing
/// `h` and at `h/2` (relative tolerance 1e-6); stencils of neighbouring
/// interior nodes overlap, so a kink anywhere in between is seen.
pub fn validate_stationary_assumptions_on(
    k: &KernelProfile,
    length: f64,
    grid: usize,
) -> ValidationReport {
    let r = k.support_radius();
    let mut checks = Vec::with_capacity(3);

    let mut support_issues = Vec::new();
    if !(r > 0.0) {
        support_issues.push(format!("R = {r} is not positive"));
    }
    if !(r < length) {
        support_issues.push(format!("R = {r} is not smaller than L = {length}"));
    }
    let leak = (1..=grid).map(|i| -(i as f64) * 1.5 * r.max(1e-12) / grid as f64)
        .chain((1..=grid).map(|i| r + i as f64 * r.max(1e-12) / grid as f64))
        .find(|&z| k.eval1(z) != 0.0);
    if let Some(z) = leak {
        support_issues.push(format!("K({z}) != 0 outside [0, R]"));
    }
    checks.push(ClauseCheck {
        clause: AssumptionClause::Support,
        passed: support_issues.is_empty(),
        detail: support_issues.join("; "),
    });

    let nodes: Vec<f64> = (0..grid).map(|i| r * (i as f64 + 0.5) / grid as f64).collect();
    let h = r / grid as f64;
    let d2 = |z: f64, h: f64| (k.eval1(z + h) - 2.0 * k.eval1(z) + k.eval1(z - h)) / (h * h);
    let mut max_k: f64 = 0.0;
    let mut max_d2: f64 = 0.0;
    let mut max_jump: f64 = 0.0;
    let mut finite = true;
    for &z in nodes.iter().skip(1).take(grid.saturating_sub(2)) {
        let (a, b) = (d2(z, h), d2(z, 0.5 * h));
        finite &= k.eval1(z).is_finite() && a.is_finite() && b.is_finite();
        max_k = max_k.max(k.eval1(z).abs());
        max_d2 = max_d2.max(a.abs());
        max_jump = max_jump.max((a - b).abs());
    }
    let smooth = max_jump <= 1e-6 * max_d2.max(1.0);
    checks.push(ClauseCheck {
        clause: AssumptionClause::Regularity,
        passed: r > 0.0 && finite && smooth,
        detail: format!(
            "sup|K| = {max_k:.6e}, sup|K''| ~ {max_d2:.6e}, second-difference drift {max_jump:.3e}"
        ),
    });

    let mut mono_issues = Vec::new();
    if let Some(z) = nodes.iter().find(|&&z| k.eval1(z) <= 0.0) {
        mono_issues.push(format!("K({z}) <= 0"));
    }
    if let Some(z) = nodes.iter().find(|&&z| k.derivative1(z) >= 0.0) {
        mono_issues.push(format!("K'({z}) >= 0"));
    }
    if k.value_at_zero() != 0.0 {
        mono_issues.push(format!("K(0) = {} != 0", k.value_at_zero()));
    }
    if r > 0.0 && k.eval1(r) != 0.0 {
        mono_issues.push(format!("K(R) = {} != 0", k.eval1(r)));
    }
    if !(k.right_limit_at_zero() > 0.0) {
        mono_issues.push(format!("K(0+) = {} is not positive", k.right_limit_at_zero()));
    }
    checks.push(ClauseCheck {
        clause: AssumptionClause::Monotonicity,
        passed: mono_issues.is_empty(),
        detail: mono_issues.join("; "),
    });

    ValidationReport { checks }
}
