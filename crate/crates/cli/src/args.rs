//! Command-line and config-file options. Every option is optional here; the
//! file fills gaps left by flags, then each command applies its defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "crowdlab", version, about = "Crowd model experiments: speed diagrams, stability, transport distances")]
pub struct Cli {
    /// TOML file with option values; flags win on conflict.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium speeds of the lattice and the uniform density over N.
    SpeedDiagram(SpeedArgs),
    /// Real parts of the linearized spectra around both equilibria.
    Stability(StabilityArgs),
    /// Lattice agents against bump densities across refinement levels.
    Converge(ConvergeArgs),
    /// Compares kernel families with equal alpha + beta.
    ScalingEquiv(ScalingArgs),
    /// Distance between two perturbed crowds against the a-priori bound.
    StabilityBound(BoundArgs),
    /// Wasserstein-1 distance between two measure files.
    W1(W1Args),
    /// Integrates one model and writes its snapshots.
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SpeedDiagram(_) => "speed-diagram",
            Self::Stability(_) => "stability",
            Self::Converge(_) => "converge",
            Self::ScalingEquiv(_) => "scaling-equiv",
            Self::StabilityBound(_) => "stability-bound",
            Self::W1(_) => "w1",
            Self::Simulate(_) => "simulate",
        }
    }
}

pub trait Merge: Sized + DeserializeOwned {
    fn merge(self, file: Self) -> Self;

    fn with_file(self, path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(self) };
        let text = std::fs::read_to_string(path)?;
        let file: Self = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(self.merge(file))
    }
}

macro_rules! mergeable {
    ($name:ident { $($field:ident),* $(,)? }) => {
        #[allow(clippy::needless_update)]
        impl Merge for $name {
            fn merge(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field),)* ..self }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedArgs {
    /// Kernel: fig3, fig3rc, fig5, tent:R, zero or table:path#column.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Corridor length.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub length: Option<f64>,
    /// Agent counts: start:ratio:end or a comma list.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<String>,
    /// Desired speed.
    #[arg(long)]
    pub vd: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}
mergeable!(SpeedArgs { kernel, length, n, vd, out, svg });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub length: Option<f64>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Number of Fourier modes for the continuum spectrum.
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}
mergeable!(StabilityArgs { kernel, length, n, modes, out, svg });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub kmin: Option<u32>,
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub kernel: Option<String>,
    /// Desired velocity: a constant `c` or `c1,c2`, or `affine:slope:offset`.
    #[arg(long)]
    pub vd: Option<String>,
    /// Bump profile: indicator or cosine.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Starting radial quadrature order for the bump clouds.
    #[arg(long)]
    pub radial: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}
mergeable!(ConvergeArgs { d, h, kmin, kmax, alpha, beta, t_final, kernel, vd, profile, dt, radial, stride, out, svg });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingArgs {
    /// Agent count for the random initial crowd.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial crowd as a measure CSV instead of a random one.
    #[arg(long)]
    pub agents: Option<PathBuf>,
    /// First exponent pair `alpha,beta`.
    #[arg(long)]
    pub from: Option<String>,
    /// Second exponent pair `alpha',beta'`.
    #[arg(long)]
    pub to: Option<String>,
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(ScalingArgs { n, seed, agents, from, to, kernel, t_final, dt, stride, out });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest displacement of the second crowd.
    #[arg(long)]
    pub perturb: Option<f64>,
    /// First crowd as a measure CSV.
    #[arg(long)]
    pub mu: Option<PathBuf>,
    /// Second crowd as a measure CSV.
    #[arg(long)]
    pub nu: Option<PathBuf>,
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub vd: Option<String>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(BoundArgs { n, seed, perturb, mu, nu, kernel, alpha, beta, vd, t_final, dt, stride, out });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct W1Args {
    #[serde(skip)]
    pub first: PathBuf,
    #[serde(skip)]
    pub second: PathBuf,
    /// auto, cdf, lp or semidiscrete.
    #[arg(long)]
    pub method: Option<String>,
    /// Cells per bump diameter when the LP needs bumps as point masses.
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(W1Args { method, cells, out });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// Initial measure CSV.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// micro, characteristics or fv; inferred from the measure when absent.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Agent count used in the kernel scaling (default: from the measure).
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long)]
    pub vd: Option<String>,
    /// free or periodic.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Runge-Kutta order 1 to 4 (SSP order 1 to 3 for fv).
    #[arg(long)]
    pub order: Option<u32>,
    /// Grid cells when a bump measure starts the fv model.
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub radial: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(SimulateArgs { init, model, kernel, alpha, beta, agents, vd, domain, length, dt, t_final, stride, order, cells, radial, out });
