//! One PASS/FAIL line per acceptance criterion. Exits nonzero on any failure.

use std::time::Instant;

use crowdlab::continuum::{
    integrate_characteristics, integrate_fv, macro_stability_spectrum, snapshot_mass,
    uniform_equilibrium_speed, FvConfig,
};
use crowdlab::convergence::{lattice_initial_distance, lattice_radius, run_convergence, ConvergenceConfig};
use crowdlab::desired::DesiredVelocity;
use crowdlab::estimates::{check_flow_map_lipschitz, verify_continuous_dependence, verify_scaling_equivalence, xi_n};
use crowdlab::kernel::{KernelProfile, ScaledKernel};
use crowdlab::measure::{make_bumps, make_lattice, AtomicMeasure, BumpProfile, CrowdMeasure, GridDensity1D, WeightedCloud};
use crowdlab::micro::{equispaced, integrate_micro, lattice_equilibrium_speed, micro_stability_spectrum, MicroState, SimConfig};
use crowdlab::space::{distance, wrap, Domain, Points};
use crowdlab::stationary::{delta_v_partition, speed_diagram};
use crowdlab::wasserstein::{discretize_bumps_cells, w1_1d, w1_lp_oracle, w1_semidiscrete};
use crowdlab::Execution;
use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn doublings(max: usize) -> Vec<usize> {
    std::iter::successors(Some(2usize), |n| Some(n * 2)).take_while(|&n| n <= max).collect()
}

fn non_convergent_diagram() -> Outcome {
    let k = KernelProfile::fig3();
    let mut worst: f64 = 0.0;
    for length in [1.0, 2.0, 4.0] {
        let d = speed_diagram(length, &doublings(4096), 1.0, &k, Execution::Parallel).map_err(err)?;
        let ratio = d.rows.last().unwrap().dv_over_k0p.ok_or("K(0+) vanished")?;
        worst = worst.max((ratio - 0.5).abs());
    }
    ensure(worst < 0.02, format!("max |dv(4096)/K(0+) - 0.5| = {worst:.2e}"))
}

fn convergent_diagram() -> Outcome {
    let k = KernelProfile::fig5();
    let d = speed_diagram(1.0, &doublings(4096), 1.0, &k, Execution::Parallel).map_err(err)?;
    let dv: Vec<(usize, f64)> = d.rows.iter().map(|r| (r.n, r.dv.abs())).collect();
    let last = dv.last().unwrap().1;
    let decreasing = dv.windows(2).filter(|w| w[0].0 >= 8).all(|w| w[1].1 < w[0].1);
    ensure(
        last < 1e-3 && decreasing,
        format!("|dv(4096)| = {last:.2e}, decreasing from N = 8: {decreasing}"),
    )
}

fn partition_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in [KernelProfile::fig3(), KernelProfile::fig5()] {
        for length in [1.0, 2.0] {
            for n in [4, 16, 64, 256] {
                let p = delta_v_partition(n, length, &k).map_err(err)?;
                let direct = lattice_equilibrium_speed(n, length, 1.0, &k)
                    - uniform_equilibrium_speed(n as f64, length, 1.0, &k);
                worst = worst.max((p.first + p.middle + p.last - direct).abs());
            }
        }
    }
    ensure(worst <= 1e-9, format!("max partition defect {worst:.2e}"))
}

fn headways(p: &Points, length: f64) -> Vec<f64> {
    let x = p.as_slice();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    (0..x.len())
        .map(|i| wrap(x[order[(i + 1) % x.len()]] - x[order[i]], length))
        .collect()
}

/// Real parts of the eigenvalues of the linearized lattice dynamics.
fn circulant_oracle(n: usize, length: f64, k: &KernelProfile) -> Vec<f64> {
    let h = length / n as f64;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let gap = ((j + n - i) % n) as f64 * h;
                let slope = k.derivative1(gap) + k.derivative1(gap - length);
                jac[(i, j)] -= slope;
                jac[(i, i)] += slope;
            }
        }
    }
    // circulant matrices are normal, so the real parts of the eigenvalues are
    // the eigenvalues of the symmetric part; unshifted QR on `jac` itself can stall
    let sym = (&jac + jac.transpose()) * 0.5;
    let mut re: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    re.sort_by(f64::total_cmp);
    re
}

fn micro_equilibrium() -> Outcome {
    let (n, length) = (16, 2.0);
    let base = KernelProfile::fig3();
    let k = ScaledKernel::unscaled(base.clone());
    let dom = Domain::periodic(length).map_err(err)?;
    let v_d = DesiredVelocity::scalar(1.0);

    let cfg = SimConfig::default().with_t_final(5.0).with_stride(50);
    let tr = integrate_micro(&MicroState::new(equispaced(n, length)), &v_d, &k, &dom, &cfg).map_err(err)?;
    let mut headway_dev: f64 = 0.0;
    for s in &tr.snapshots {
        let p = &s.measure.as_atomic().unwrap().points;
        for g in headways(p, length) {
            headway_dev = headway_dev.max((g - length / n as f64).abs());
        }
    }

    let mut sigma = micro_stability_spectrum(n, length, &base);
    let all_negative = sigma.iter().all(|&s| s < 0.0);
    let mut oracle = circulant_oracle(n, length, &base);
    // the oracle also carries the neutral translation mode
    let neutral = oracle.iter().position(|v| v.abs() < 1e-9).ok_or("no neutral mode in the oracle")?;
    oracle.remove(neutral);
    sigma.sort_by(f64::total_cmp);
    let oracle_gap = sigma.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let predicted = sigma.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x0 = Points::line(
        equispaced(n, length).as_slice().iter().map(|v| v + 1e-3 * (2.0 * rng.random::<f64>() - 1.0)).collect(),
    );
    let t_final = 6.0;
    let cfg = SimConfig::default().with_t_final(t_final).with_stride(10);
    let tr = integrate_micro(&MicroState::new(x0), &v_d, &k, &dom, &cfg).map_err(err)?;
    let amplitude = |p: &Points| {
        let g = headways(p, length);
        (g.iter().map(|v| (v - length / n as f64).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let late: Vec<(f64, f64)> = tr
        .snapshots
        .iter()
        .filter(|s| s.t >= t_final / 2.0)
        .map(|s| (s.t, amplitude(&s.measure.as_atomic().unwrap().points).ln()))
        .collect();
    let m = late.len() as f64;
    let mt = late.iter().map(|p| p.0).sum::<f64>() / m;
    let ma = late.iter().map(|p| p.1).sum::<f64>() / m;
    let measured = late.iter().map(|p| (p.0 - mt) * (p.1 - ma)).sum::<f64>()
        / late.iter().map(|p| (p.0 - mt).powi(2)).sum::<f64>();
    let rel = ((measured - predicted) / predicted).abs();
    ensure(
        headway_dev <= 1e-6 && all_negative && oracle_gap <= 1e-9 && rel <= 0.1,
        format!(
            "(a) headway drift {headway_dev:.1e}; (b) all Re < 0: {all_negative}, oracle gap {oracle_gap:.1e}; \
             (c) decay {measured:.4} vs {predicted:.4} ({:.1}%)",
            100.0 * rel
        ),
    )
}

fn macro_equilibrium() -> Outcome {
    let (n, length) = (16.0, 2.0);
    let base = KernelProfile::fig3();
    let sigma = macro_stability_spectrum(n, length, &base, 64);
    let worst = sigma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let grid = GridDensity1D::uniform(n, length, 256).map_err(err)?;
    let rho_bar = n / length;
    let cfg = FvConfig { t_final: 1.0, ..Default::default() };
    let tr = integrate_fv(&grid, &DesiredVelocity::scalar(1.0), &ScaledKernel::unscaled(base), &cfg).map_err(err)?;
    let drift = tr
        .snapshots
        .iter()
        .flat_map(|s| s.measure.as_grid().unwrap().values.iter().map(|v| (v - rho_bar).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    ensure(
        worst < 0.0 && drift <= 1e-10,
        format!("max Re sigma_k (k = 1..64) = {worst:.4e}; FV drift {drift:.1e}"),
    )
}

fn semidiscrete_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, h, levels) in [(1usize, 1.0, 1..=8u32), (2, 2.0, 1..=4), (3, 3.0, 1..=3)] {
        for k in levels {
            let atoms = make_lattice(d, k).map_err(err)?;
            let b = make_bumps(&atoms, lattice_radius(h, k), BumpProfile::Indicator).map_err(err)?;
            let w = w1_semidiscrete(&atoms, &b).map_err(err)?.value;
            let closed = lattice_initial_distance(d, h, k).map_err(err)?;
            let mfnr = b.first_moment() * atoms.len() as f64 * b.radius;
            worst = worst.max((w - closed).abs()).max((w - mfnr).abs());
        }
    }
    let atoms = make_lattice(1, 2).map_err(err)?;
    let b = make_bumps(&atoms, lattice_radius(1.0, 2), BumpProfile::Indicator).map_err(err)?;
    let (cloud, bound) = discretize_bumps_cells(&b, 64).map_err(err)?;
    let lp = w1_lp_oracle(&WeightedCloud::from_atoms(&atoms), &cloud).map_err(err)?.value;
    let closed = lattice_initial_distance(1, 1.0, 2).map_err(err)?;
    let gap = (lp - closed).abs();
    ensure(
        worst <= 1e-12 && gap <= bound,
        format!("closed-form defect {worst:.1e}; LP {lp:.6} vs {closed:.6} (gap {gap:.1e} <= bound {bound:.1e})"),
    )
}

fn random_atoms(rng: &mut ChaCha8Rng, n: usize, d: usize) -> AtomicMeasure {
    let coords = (0..n * d).map(|_| rng.random::<f64>()).collect();
    AtomicMeasure::new(Points::new(d, coords).unwrap()).unwrap()
}

fn lp(a: &AtomicMeasure, b: &AtomicMeasure) -> Result<f64, String> {
    Ok(w1_lp_oracle(&WeightedCloud::from_atoms(a), &WeightedCloud::from_atoms(b)).map_err(err)?.value)
}

fn metric_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut sym, mut tri, mut cdf_gap) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..200 {
        let n = rng.random_range(1..=8usize);
        let d = 1 + case % 2;
        let (a, b, c) = (random_atoms(&mut rng, n, d), random_atoms(&mut rng, n, d), random_atoms(&mut rng, n, d));
        let (ab, ba, bc, ac) = (lp(&a, &b)?, lp(&b, &a)?, lp(&b, &c)?, lp(&a, &c)?);
        sym = sym.max((ab - ba).abs());
        tri = tri.max(ac - ab - bc);
        if d == 1 {
            let exact = w1_1d(&a.clone().into(), &b.clone().into()).map_err(err)?.value;
            cdf_gap = cdf_gap.max((exact - ab).abs());
        }
    }
    let mut brute_gap: f64 = 0.0;
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for case in 0..50 {
        let d = 1 + case % 2;
        let (a, b) = (random_atoms(&mut rng, 3, d), random_atoms(&mut rng, 3, d));
        let best = PERMS
            .iter()
            .map(|p| (0..3).map(|i| distance(a.points.get(i), b.points.get(p[i]))).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        // same optimum; the two sums may round differently in the last place
        brute_gap = brute_gap.max((lp(&a, &b)? - best).abs() / (f64::EPSILON * best));
    }
    ensure(
        sym <= 1e-9 && tri <= 1e-9 && cdf_gap <= 1e-9 && brute_gap <= 4.0,
        format!(
            "symmetry {sym:.1e}, triangle excess {tri:.1e}, CDF vs LP {cdf_gap:.1e}, brute force within {brute_gap:.0} ulp"
        ),
    )
}

fn sorted_jitter(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.2 + 0.6 * rng.random::<f64>()) / n as f64).collect()
}

fn continuous_dependence() -> Outcome {
    let n = 8;
    let k = ScaledKernel::new(KernelProfile::fig5(), 1.0, 0.0, n).map_err(err)?;
    let v_d = DesiredVelocity::scalar(1.0);
    let dom = Domain::free(1);
    let cfg = SimConfig::default().with_stride(5);
    let xi = xi_n(&v_d, &k).map_err(err)?.xi_n;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut violations, mut min_slack, mut worst_ratio) = (0, f64::INFINITY, 0.0f64);
    for _ in 0..20 {
        let x = sorted_jitter(&mut rng, n);
        let y: Vec<f64> = x.iter().map(|v| v + 0.02 * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let (mu, nu) = (AtomicMeasure::line(x).map_err(err)?, AtomicMeasure::line(y).map_err(err)?);
        let rep = verify_continuous_dependence(&mu, &nu, &v_d, &k, &dom, &cfg).map_err(err)?;
        if !rep.satisfied {
            violations += 1;
        }
        for (o, c) in rep.observed.iter().zip(&rep.predicted_ceiling) {
            if *c > 0.0 {
                worst_ratio = worst_ratio.max(o / c);
            }
        }
        let tr = integrate_micro(&MicroState::new(mu.points.clone()), &v_d, &k, &dom, &cfg).map_err(err)?;
        min_slack = min_slack.min(check_flow_map_lipschitz(&tr, xi).map_err(err)?.min_slack);
    }
    ensure(
        violations == 0 && min_slack >= 0.0,
        format!("xi^N = {xi}; bound violations {violations}/20 (max observed/ceiling {worst_ratio:.3}); flow-map slack {min_slack:.2e}"),
    )
}

fn scaling_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mu = AtomicMeasure::line(sorted_jitter(&mut rng, 8)).map_err(err)?;
    let cfg = SimConfig::default().with_dt(0.01).with_stride(10);
    let mut lines = Vec::new();
    let mut ok = true;
    for (from, to) in [((1.0, 0.0), (0.0, 1.0)), ((2.0, -1.0), (1.0, 0.0))] {
        let rep = verify_scaling_equivalence(
            &mu,
            from,
            to,
            &KernelProfile::fig5(),
            &DesiredVelocity::scalar(0.0),
            &Domain::free(1),
            &cfg,
        )
        .map_err(err)?;
        ok &= rep.below_ceiling && rep.shrinks;
        lines.push(format!(
            "{from:?}->{to:?}: W1(T) {:.1e} / {:.1e} / {:.1e}, ceiling {:.1e}",
            rep.terminal_discrepancy[0], rep.terminal_discrepancy[1], rep.terminal_discrepancy[2], rep.richardson_ceiling[0]
        ));
    }
    ensure(ok, lines.join("; "))
}

fn discrete_continuous() -> Outcome {
    let cfg = ConvergenceConfig::default();
    let rep = run_convergence(&cfg).map_err(err)?;
    let exact = rep
        .levels
        .iter()
        .all(|l| l.w1_initial == lattice_initial_distance(1, 1.0, l.k).unwrap());
    let terminal: Vec<f64> = rep.levels.iter().map(|l| l.w1_terminal()).collect();
    let decreasing = terminal.windows(2).all(|w| w[1] < w[0]);
    let slope = rep.fit.as_ref().ok_or("no fit")?.slope;
    let within = rep.all_within_ceiling();
    ensure(
        exact && decreasing && slope <= -0.7 && within,
        format!(
            "initial exact: {exact}; terminal W1 {:?}; slope {slope:.3}; within ceiling: {within}",
            terminal.iter().map(|w| format!("{w:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn solver_cross_validation() -> Outcome {
    let length = 4.0;
    let atoms = AtomicMeasure::line(vec![1.5]).map_err(err)?;
    let bump = make_bumps(&atoms, 0.5, BumpProfile::Cosine).map_err(err)?;
    let k = ScaledKernel::new(KernelProfile::fig5(), -1.0, 0.0, 4).map_err(err)?;
    let v_d = DesiredVelocity::scalar(1.0);
    let t_final = 0.5;

    let fv = |cells: usize| -> Result<CrowdMeasure, String> {
        let g = GridDensity1D::from_bumps(&bump, length, cells).map_err(err)?;
        let cfg = FvConfig { dt: 0.2 * length / cells as f64, t_final, order: 2, ..Default::default() };
        let tr = integrate_fv(&g, &v_d, &k, &cfg).map_err(err)?;
        let drift = (snapshot_mass(tr.last()) - snapshot_mass(tr.first())).abs() / snapshot_mass(tr.first());
        if drift > 1e-8 {
            return Err(format!("FV mass drift {drift:.1e} at {cells} cells"));
        }
        Ok(tr.last().measure.clone())
    };
    let dom = Domain::periodic(length).map_err(err)?;
    let ch = |radial: usize| -> Result<CrowdMeasure, String> {
        let cfg = SimConfig::default().with_dt(0.005).with_t_final(t_final);
        let tr = integrate_characteristics(&bump, &v_d, &k, &dom, &cfg, Some(radial)).map_err(err)?;
        let drift = (snapshot_mass(tr.last()) - snapshot_mass(tr.first())).abs() / snapshot_mass(tr.first());
        if drift > 1e-8 {
            return Err(format!("cloud mass drift {drift:.1e}"));
        }
        Ok(tr.last().measure.clone())
    };
    let w = |a: &CrowdMeasure, b: &CrowdMeasure| w1_1d(a, b).map(|r| r.value).map_err(err);
    let (f1, f2) = (fv(800)?, fv(1600)?);
    let (c1, c2) = (ch(16)?, ch(32)?);
    let (e_fv, e_ch) = (w(&f1, &f2)?, w(&c1, &c2)?);
    let gap = w(&f2, &c2)?;
    ensure(
        gap <= 3.0 * (e_fv + e_ch),
        format!("W1(FV, characteristics) = {gap:.2e}; self-convergence FV {e_fv:.2e}, characteristics {e_ch:.2e}; mass conserved"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("non-convergent speed diagram", non_convergent_diagram),
        ("convergent speed diagram", convergent_diagram),
        ("partition identity", partition_identity),
        ("micro equilibrium and attractiveness", micro_equilibrium),
        ("macro equilibrium", macro_equilibrium),
        ("semi-discrete W1 closed form", semidiscrete_closed_form),
        ("W1 metric properties", metric_properties),
        ("continuous dependence", continuous_dependence),
        ("scaling equivalence", scaling_equivalence),
        ("discrete-continuous convergence", discrete_continuous),
        ("solver cross-validation", solver_cross_validation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
