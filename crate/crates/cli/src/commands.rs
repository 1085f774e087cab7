use std::path::Path;

use crowdlab::continuum::{
    integrate_characteristics, integrate_fv, macro_stability_spectrum, FvConfig,
};
use crowdlab::convergence::{run_convergence, ConvergenceConfig};
use crowdlab::csvio::read_measure;
use crowdlab::desired::DesiredVelocity;
use crowdlab::estimates::{check_flow_map_lipschitz, verify_continuous_dependence, verify_scaling_equivalence, xi_n};
use crowdlab::kernel::{validate_stationary_assumptions, KernelProfile, ScaledKernel};
use crowdlab::measure::{total_mass, AtomicMeasure, BumpProfile, CrowdMeasure, GridDensity1D, WeightedCloud};
use crowdlab::micro::{integrate_micro, micro_stability_spectrum, MicroState, SimConfig};
use crowdlab::rk::RkOrder;
use crowdlab::space::Domain;
use crowdlab::stationary::{parse_n_grid, speed_diagram};
use crowdlab::trajectory::Trajectory;
use crowdlab::wasserstein::{discretize_bumps_cells, w1_1d, w1_auto, w1_lp_oracle, w1_semidiscrete};
use crowdlab::Execution;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::*;
use crate::error::{invalid, CliError};
use crate::output::{echo, emit, line_chart, num, Series, Table};

type Out = Result<(), CliError>;

fn pair(spec: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    let bad = || invalid(format!("expected `alpha,beta`, got `{spec}`"));
    match parts[..] {
        [a, b] => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn write_svg(path: Option<&Path>, title: &str, x: &str, y: &str, series: &[Series]) -> Out {
    if let Some(p) = path {
        std::fs::write(p, line_chart(title, x, y, series))?;
    }
    Ok(())
}

/// Sorted positions with one agent per cell of `[0, 1]`, jittered inside the
/// middle 60% of the cell.
fn jittered_line(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.2 + 0.6 * rng.random::<f64>()) / n as f64).collect()
}

fn atoms_from(path: &Path) -> Result<AtomicMeasure, CliError> {
    match read_measure(path)? {
        CrowdMeasure::Atomic(a) => Ok(a),
        other => Err(invalid(format!("{} holds a {} measure, expected atoms", path.display(), other.kind()))),
    }
}

pub fn speed(args: SpeedArgs, config: Option<&Path>, exec: Execution) -> Out {
    let defaults = SpeedArgs {
        kernel: Some("fig3".into()),
        length: Some(2.0),
        n: Some("2:2:4096".into()),
        vd: Some(1.0),
        ..Default::default()
    };
    let a = args.with_file(config)?.merge(defaults);
    let kernel = KernelProfile::parse(a.kernel.as_deref().unwrap())?;
    let ns = parse_n_grid(a.n.as_deref().unwrap())?;
    let d = speed_diagram(a.length.unwrap(), &ns, a.vd.unwrap(), &kernel, exec)?;

    let mut t = Table::new(&echo("speed-diagram", &a)?, &["N", "v_micro", "v_macro", "dv", "dv_over_K0p"]);
    for r in &d.rows {
        t.row([
            r.n.to_string(),
            num(r.v_micro),
            num(r.v_macro),
            num(r.dv),
            r.dv_over_k0p.map(num).unwrap_or_default(),
        ]);
    }
    emit(a.out.as_deref(), &t.into_string())?;
    let points = d
        .rows
        .iter()
        .map(|r| ((r.n as f64).log2(), r.dv_over_k0p.unwrap_or(r.dv)))
        .collect();
    let label = if kernel.right_limit_at_zero() > 0.0 { "dv / K(0+)" } else { "dv" };
    write_svg(
        a.svg.as_deref(),
        &format!("speed gap, {} kernel, L = {}", kernel.name(), d.length),
        "log2 N",
        label,
        &[Series { label: label.into(), points }],
    )
}

pub fn stability(args: StabilityArgs, config: Option<&Path>) -> Out {
    let defaults = StabilityArgs {
        kernel: Some("fig3".into()),
        length: Some(2.0),
        n: Some(16),
        modes: Some(64),
        ..Default::default()
    };
    let a = args.with_file(config)?.merge(defaults);
    let kernel = KernelProfile::parse(a.kernel.as_deref().unwrap())?;
    let (length, n, modes) = (a.length.unwrap(), a.n.unwrap(), a.modes.unwrap());
    if n < 2 {
        return Err(invalid("stability needs N >= 2"));
    }
    Domain::periodic(length)?.check_support(kernel.support_radius())?;
    let micro = micro_stability_spectrum(n, length, &kernel);
    let macro_ = macro_stability_spectrum(n as f64, length, &kernel, modes);

    let mut comments = echo("stability", &a)?;
    for c in validate_stationary_assumptions(&kernel, length).checks {
        let verdict = if c.passed { "ok" } else { "violated" };
        if c.detail.is_empty() {
            comments.push(format!("{:?}: {verdict}", c.clause));
        } else {
            comments.push(format!("{:?}: {verdict} ({})", c.clause, c.detail));
        }
    }
    let mut t = Table::new(&comments, &["k", "re_sigma_micro", "re_sigma_macro"]);
    for k in 1..=micro.len().max(macro_.len()) {
        t.row([
            k.to_string(),
            micro.get(k - 1).copied().map(num).unwrap_or_default(),
            macro_.get(k - 1).copied().map(num).unwrap_or_default(),
        ]);
    }
    emit(a.out.as_deref(), &t.into_string())?;
    let series = |label: &str, v: &[f64]| Series {
        label: label.into(),
        points: v.iter().enumerate().map(|(i, s)| ((i + 1) as f64, *s)).collect(),
    };
    write_svg(
        a.svg.as_deref(),
        &format!("linearized spectra, {} kernel", kernel.name()),
        "mode k",
        "Re sigma",
        &[series("lattice", &micro), series("uniform density", &macro_)],
    )
}

pub fn converge(args: ConvergeArgs, config: Option<&Path>, exec: Execution) -> Out {
    let base = ConvergenceConfig::default();
    let defaults = ConvergeArgs {
        d: Some(1),
        h: Some(1.0),
        kmin: Some(2),
        kmax: Some(6),
        alpha: Some(base.alpha),
        beta: Some(base.beta),
        t_final: Some(base.t_final),
        kernel: Some("fig5".into()),
        vd: Some("1".into()),
        profile: Some("indicator".into()),
        stride: Some(base.snapshot_stride),
        ..Default::default()
    };
    let a = args.with_file(config)?.merge(defaults);
    let (kmin, kmax) = (a.kmin.unwrap(), a.kmax.unwrap());
    if kmin > kmax {
        return Err(invalid(format!("kmin = {kmin} exceeds kmax = {kmax}")));
    }
    let mut v_d = DesiredVelocity::parse(a.vd.as_deref().unwrap())?;
    let dim = a.d.unwrap();
    if let DesiredVelocity::Constant { value } = &v_d {
        if value.len() == 1 && dim > 1 {
            let mut v = vec![0.0; dim];
            v[0] = value[0];
            v_d = DesiredVelocity::constant(v);
        }
    }
    let cfg = ConvergenceConfig {
        dim,
        h: a.h.unwrap(),
        levels: (kmin..=kmax).collect(),
        alpha: a.alpha.unwrap(),
        beta: a.beta.unwrap(),
        t_final: a.t_final.unwrap(),
        kernel: KernelProfile::parse(a.kernel.as_deref().unwrap())?,
        v_d,
        profile: BumpProfile::parse(a.profile.as_deref().unwrap())?,
        dt: a.dt,
        snapshot_stride: a.stride.unwrap(),
        radial: a.radial,
        execution: exec,
        ..base
    };
    let rep = run_convergence(&cfg)?;

    let mut t = Table::new(&echo("converge", &a)?, &["k", "N", "r", "w1_initial", "w1_terminal", "ceiling"]);
    for l in &rep.levels {
        t.row([
            l.k.to_string(),
            l.n.to_string(),
            num(l.r),
            num(l.w1_initial),
            num(l.w1_terminal()),
            num(l.ceiling_terminal()),
        ]);
    }
    t.comment(&format!("xi_star = {}", rep.xi_star));
    if let Some(fit) = &rep.fit {
        t.comment(&format!(
            "fitted slope = {} (initial-data order {}){}",
            fit.slope,
            rep.predicted_slope,
            if fit.floored { ", floored values present" } else { "" }
        ));
    }
    t.comment(&format!("all snapshots within ceiling = {}", rep.all_within_ceiling()));
    emit(a.out.as_deref(), &t.into_string())?;
    let log = |f: &dyn Fn(&crowdlab::convergence::LevelReport) -> f64| -> Vec<(f64, f64)> {
        rep.levels.iter().map(|l| ((l.n as f64).log2(), f(l).log10())).collect()
    };
    write_svg(
        a.svg.as_deref(),
        "discrete against continuous distance",
        "log2 N",
        "log10 W1",
        &[
            Series { label: "initial".into(), points: log(&|l| l.w1_initial) },
            Series { label: "terminal".into(), points: log(&|l| l.w1_terminal()) },
        ],
    )
}

pub fn scaling(args: ScalingArgs, config: Option<&Path>, exec: Execution) -> Out {
    let defaults = ScalingArgs {
        n: Some(8),
        seed: Some(1),
        from: Some("1,0".into()),
        to: Some("0,1".into()),
        kernel: Some("fig5".into()),
        t_final: Some(1.0),
        dt: Some(0.01),
        stride: Some(10),
        ..Default::default()
    };
    let a = args.with_file(config)?.merge(defaults);
    let mu = match &a.agents {
        Some(p) => atoms_from(p)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap());
            AtomicMeasure::line(jittered_line(&mut rng, a.n.unwrap()))?
        }
    };
    let cfg = SimConfig::default()
        .with_dt(a.dt.unwrap())
        .with_t_final(a.t_final.unwrap())
        .with_stride(a.stride.unwrap())
        .with_execution(exec);
    let rep = verify_scaling_equivalence(
        &mu,
        pair(a.from.as_deref().unwrap())?,
        pair(a.to.as_deref().unwrap())?,
        &KernelProfile::parse(a.kernel.as_deref().unwrap())?,
        &DesiredVelocity::zero(mu.dim()),
        &Domain::free(mu.dim()),
        &cfg,
    )?;
    let ok = rep.below_ceiling && rep.shrinks;
    json_report(a.out.as_deref(), "scaling-equiv", &a, &rep)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "discrepancies {:?} against ceiling {:?}",
            rep.terminal_discrepancy, rep.richardson_ceiling
        )))
    }
}

#[derive(Serialize)]
struct Report<'a, A: Serialize, R: Serialize> {
    command: &'a str,
    config: &'a A,
    report: &'a R,
}

fn json_report<A: Serialize, R: Serialize>(out: Option<&Path>, command: &str, config: &A, report: &R) -> Out {
    let mut text = serde_json::to_string_pretty(&Report { command, config, report })?;
    text.push('\n');
    emit(out, &text)
}

#[derive(Serialize)]
struct BoundOutput {
    continuous_dependence: crowdlab::estimates::BoundReport,
    flow_map: crowdlab::estimates::FlowMapReport,
}

pub fn bound(args: BoundArgs, config: Option<&Path>, exec: Execution) -> Out {
    let defaults = BoundArgs {
        n: Some(8),
        seed: Some(1),
        perturb: Some(0.02),
        kernel: Some("fig5".into()),
        alpha: Some(1.0),
        beta: Some(0.0),
        vd: Some("1".into()),
        t_final: Some(1.0),
        stride: Some(10),
        ..Default::default()
    };
    let a = args.with_file(config)?.merge(defaults);
    let (mu, nu) = match (&a.mu, &a.nu) {
        (Some(p), Some(q)) => (atoms_from(p)?, atoms_from(q)?),
        (None, None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap());
            let x = jittered_line(&mut rng, a.n.unwrap());
            let eps = a.perturb.unwrap();
            let y = x.iter().map(|v| v + eps * (2.0 * rng.random::<f64>() - 1.0)).collect();
            (AtomicMeasure::line(x)?, AtomicMeasure::line(y)?)
        }
        _ => return Err(invalid("give both --mu and --nu, or neither")),
    };
    if mu.len() != nu.len() {
        return Err(invalid(format!("crowds differ in size: {} vs {}", mu.len(), nu.len())));
    }
    let k = ScaledKernel::new(
        KernelProfile::parse(a.kernel.as_deref().unwrap())?,
        a.alpha.unwrap(),
        a.beta.unwrap(),
        mu.len(),
    )?;
    let v_d = DesiredVelocity::parse(a.vd.as_deref().unwrap())?;
    let dom = Domain::free(mu.dim());
    let mut cfg = SimConfig::default()
        .with_t_final(a.t_final.unwrap())
        .with_stride(a.stride.unwrap())
        .with_execution(exec);
    cfg.dt = a.dt;
    let rep = verify_continuous_dependence(&mu, &nu, &v_d, &k, &dom, &cfg)?;
    let tr = integrate_micro(&MicroState::new(mu.points.clone()), &v_d, &k, &dom, &cfg)?;
    let flow = check_flow_map_lipschitz(&tr, xi_n(&v_d, &k)?.xi_n)?;
    let ok = rep.satisfied && flow.min_slack >= 0.0;
    json_report(a.out.as_deref(), "stability-bound", &a, &BoundOutput { continuous_dependence: rep, flow_map: flow })?;
    if ok {
        Ok(())
    } else {
        Err(CliError::CheckFailed("observed distance exceeds the a-priori ceiling".into()))
    }
}

pub fn w1(args: W1Args, config: Option<&Path>) -> Out {
    let defaults = W1Args { method: Some("auto".into()), cells: Some(32), ..Default::default() };
    let a = args.with_file(config)?.merge(defaults);
    let mu = read_measure(&a.first)?;
    let nu = read_measure(&a.second)?;
    let lp_cloud = |m: &CrowdMeasure| -> Result<(WeightedCloud, f64), CliError> {
        match m {
            CrowdMeasure::Bumps(b) => Ok(discretize_bumps_cells(b, a.cells.unwrap())?),
            other => Ok((other.to_cloud()?, 0.0)),
        }
    };
    let res = match a.method.as_deref().unwrap() {
        "auto" => w1_auto(&mu, &nu)?,
        "cdf" => w1_1d(&mu, &nu)?,
        "lp" => {
            let ((p, e1), (q, e2)) = (lp_cloud(&mu)?, lp_cloud(&nu)?);
            let mut r = w1_lp_oracle(&p, &q)?;
            r.certified_error += e1 + e2;
            r
        }
        "semidiscrete" => match (&mu, &nu) {
            (CrowdMeasure::Atomic(x), CrowdMeasure::Bumps(b)) | (CrowdMeasure::Bumps(b), CrowdMeasure::Atomic(x)) => {
                w1_semidiscrete(x, b)?
            }
            _ => return Err(invalid("semidiscrete needs one atomic and one bump measure")),
        },
        other => return Err(invalid(format!("unknown method `{other}`; use auto, cdf, lp or semidiscrete"))),
    };
    let mut comments = echo("w1", &a)?;
    comments.push(format!("first = {}", a.first.display()));
    comments.push(format!("second = {}", a.second.display()));
    let mut t = Table::new(&comments, &["value", "certified_error", "method"]);
    t.row([num(res.value), num(res.certified_error), format!("{:?}", res.method)]);
    emit(a.out.as_deref(), &t.into_string())
}

fn trajectory_table(tr: &Trajectory, comments: &[String]) -> Result<String, CliError> {
    let first = &tr.first().measure;
    let mut t = match first {
        CrowdMeasure::Atomic(a) if a.dim() == 1 => {
            let mut h = vec!["t".to_string()];
            h.extend((1..=a.len()).map(|i| format!("x_{i}")));
            Table::new(comments, &h.iter().map(String::as_str).collect::<Vec<_>>())
        }
        CrowdMeasure::Atomic(a) => {
            let mut h = vec!["t".to_string(), "agent".to_string()];
            h.extend((1..=a.dim()).map(|k| format!("x{k}")));
            Table::new(comments, &h.iter().map(String::as_str).collect::<Vec<_>>())
        }
        CrowdMeasure::Grid(g) => {
            let mut h = vec!["t".to_string()];
            h.extend((1..=g.cells()).map(|i| format!("rho_{i}")));
            Table::new(comments, &h.iter().map(String::as_str).collect::<Vec<_>>())
        }
        CrowdMeasure::Cloud(c) => {
            let mut h = vec!["t".to_string(), "w".to_string()];
            h.extend((1..=c.dim()).map(|k| format!("x{k}")));
            Table::new(comments, &h.iter().map(String::as_str).collect::<Vec<_>>())
        }
        CrowdMeasure::Bumps(_) => return Err(invalid("bump snapshots are not produced by any solver")),
    };
    for note in &tr.notes {
        t.comment(note);
    }
    for s in &tr.snapshots {
        let ts = num(s.t);
        match &s.measure {
            CrowdMeasure::Atomic(a) if a.dim() == 1 => {
                t.row(std::iter::once(ts).chain(a.points.as_slice().iter().map(|v| num(*v))))
            }
            CrowdMeasure::Atomic(a) => {
                for (i, p) in a.points.iter().enumerate() {
                    t.row([ts.clone(), (i + 1).to_string()].into_iter().chain(p.iter().map(|v| num(*v))));
                }
            }
            CrowdMeasure::Grid(g) => t.row(std::iter::once(ts).chain(g.values.iter().map(|v| num(*v)))),
            CrowdMeasure::Cloud(c) => {
                for (p, w) in c.points.iter().zip(&c.weights) {
                    t.row([ts.clone(), num(*w)].into_iter().chain(p.iter().map(|v| num(*v))));
                }
            }
            CrowdMeasure::Bumps(_) => unreachable!("checked on the first snapshot"),
        }
    }
    Ok(t.into_string())
}

pub fn simulate(args: SimulateArgs, config: Option<&Path>, exec: Execution) -> Out {
    let defaults = SimulateArgs {
        kernel: Some("fig5".into()),
        alpha: Some(0.0),
        beta: Some(0.0),
        vd: Some("1".into()),
        domain: Some("free".into()),
        t_final: Some(1.0),
        stride: Some(10),
        cells: Some(256),
        ..Default::default()
    };
    let a = args.with_file(config)?.merge(defaults);
    let path = a.init.as_deref().ok_or_else(|| invalid("--init is required"))?;
    let init = read_measure(path)?;
    let model = match a.model.as_deref() {
        Some(m) => m.to_string(),
        None => match &init {
            CrowdMeasure::Atomic(_) => "micro".into(),
            CrowdMeasure::Bumps(_) | CrowdMeasure::Cloud(_) => "characteristics".into(),
            CrowdMeasure::Grid(_) => "fv".into(),
        },
    };
    let n_agents = match a.agents {
        Some(n) => n,
        None => match &init {
            CrowdMeasure::Atomic(x) => x.len(),
            CrowdMeasure::Bumps(b) => b.len(),
            other => total_mass(other).round().max(1.0) as usize,
        },
    };
    let kernel = ScaledKernel::new(
        KernelProfile::parse(a.kernel.as_deref().unwrap())?,
        a.alpha.unwrap(),
        a.beta.unwrap(),
        n_agents,
    )?;
    let v_d = DesiredVelocity::parse(a.vd.as_deref().unwrap())?;
    let domain = match a.domain.as_deref().unwrap() {
        "free" => Domain::free(init.dim()),
        "periodic" => Domain::periodic(a.length.ok_or_else(|| invalid("a periodic domain needs --L"))?)?,
        other => return Err(invalid(format!("unknown domain `{other}`; use free or periodic"))),
    };
    let mut cfg = SimConfig::default()
        .with_t_final(a.t_final.unwrap())
        .with_stride(a.stride.unwrap())
        .with_execution(exec);
    cfg.dt = a.dt;
    if let Some(p) = a.order {
        cfg.order = RkOrder::from_order(p)?;
    }
    let tr = match (model.as_str(), &init) {
        ("micro", CrowdMeasure::Atomic(x)) => integrate_micro(&MicroState::new(x.points.clone()), &v_d, &kernel, &domain, &cfg)?,
        ("characteristics", CrowdMeasure::Bumps(b)) => integrate_characteristics(b, &v_d, &kernel, &domain, &cfg, a.radial)?,
        ("characteristics", CrowdMeasure::Cloud(c)) => {
            crowdlab::continuum::integrate_cloud(c, n_agents, &v_d, &kernel, &domain, &cfg)?
        }
        ("fv", m) => {
            let length = domain.period().ok_or_else(|| invalid("the fv model needs --domain periodic"))?;
            let grid = match m {
                CrowdMeasure::Grid(g) => g.clone(),
                CrowdMeasure::Bumps(b) => GridDensity1D::from_bumps(b, length, a.cells.unwrap())?,
                other => return Err(invalid(format!("the fv model cannot start from a {} measure", other.kind()))),
            };
            let fv = FvConfig {
                dt: a.dt.unwrap_or(FvConfig::default().dt),
                t_final: cfg.t_final,
                order: a.order.unwrap_or(2),
                snapshot_stride: cfg.snapshot_stride,
                execution: exec,
                ..Default::default()
            };
            integrate_fv(&grid, &v_d, &kernel, &fv)?
        }
        (m, other) => {
            return Err(invalid(format!("model `{m}` cannot start from a {} measure", other.kind())));
        }
    };
    let mut comments = echo("simulate", &a)?;
    comments.push(format!("model = \"{model}\""));
    comments.push(format!("dt_effective = {}", tr.dt));
    emit(a.out.as_deref(), &trajectory_table(&tr, &comments)?)
}
