use crowdlab::continuum::{integrate_characteristics, integrate_fv, macro_velocity, snapshot_mass, FvConfig};
use crowdlab::desired::DesiredVelocity;
use crowdlab::kernel::{KernelProfile, ScaledKernel};
use crowdlab::measure::{make_bumps, AtomicMeasure, BumpProfile, CrowdMeasure, GridDensity1D};
use crowdlab::micro::{integrate_micro, micro_velocity, MicroState, SimConfig};
use crowdlab::space::{Domain, Points};
use crowdlab::wasserstein::w1_1d;
use crowdlab::Execution;
use proptest::prelude::*;

fn fig5(n: usize) -> ScaledKernel {
    ScaledKernel::new(KernelProfile::fig5(), 1.0, 0.0, n).unwrap()
}

fn spread(xs: &[f64]) -> Vec<f64> {
    xs.iter().enumerate().map(|(i, v)| 0.3 * i as f64 + 0.2 * v).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn velocities_are_translation_equivariant(xs in prop::collection::vec(0.0f64..1.0, 2..8), s in -5.0f64..5.0) {
        let xs = spread(&xs);
        let k = fig5(xs.len());
        let v_d = DesiredVelocity::scalar(1.0);
        let dom = Domain::free(1);
        let a = MicroState::new(Points::line(xs.clone()));
        let b = MicroState::new(Points::line(xs.iter().map(|v| v + s).collect()));
        for i in 0..xs.len() {
            let va = micro_velocity(&a, i, &v_d, &k, &dom).unwrap()[0];
            let vb = micro_velocity(&b, i, &v_d, &k, &dom).unwrap()[0];
            prop_assert!((va - vb).abs() <= 1e-12);
        }
    }

    #[test]
    fn velocity_field_is_lipschitz_in_space_and_measure(
        xs in prop::collection::vec(0.0f64..1.0, 2..8),
        ys in prop::collection::vec(0.0f64..1.0, 8),
        p in -1.0f64..3.0,
        q in -1.0f64..3.0,
    ) {
        let xs = spread(&xs);
        let n = xs.len();
        let ys: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x + 0.3 * (y - 0.5)).collect();
        let k = fig5(n);
        let v_d = DesiredVelocity::affine(0.3, vec![1.0]);
        let dom = Domain::free(1);
        let mu: CrowdMeasure = AtomicMeasure::line(xs).unwrap().into();
        let nu: CrowdMeasure = AtomicMeasure::line(ys).unwrap().into();
        let lip_k = k.lipschitz().unwrap();
        let v = |m: &CrowdMeasure, x: f64| macro_velocity(m, &[x], &v_d, &k, &dom, 4).unwrap()[0];
        let lip_v = v_d.lipschitz() + n as f64 * lip_k;
        prop_assert!((v(&mu, p) - v(&mu, q)).abs() <= lip_v * (p - q).abs() + 1e-12);
        let w = w1_1d(&mu, &nu).unwrap().value;
        prop_assert!((v(&mu, p) - v(&nu, p)).abs() <= lip_k * w + 1e-12);
    }

    #[test]
    fn fv_conserves_mass(values in prop::collection::vec(0.0f64..3.0, 16..64), t in 0.05f64..0.5) {
        let g = GridDensity1D::new(2.0, values).unwrap();
        let k = ScaledKernel::unscaled(KernelProfile::fig3());
        let cfg = FvConfig { t_final: t, ..Default::default() };
        let tr = integrate_fv(&g, &DesiredVelocity::scalar(1.0), &k, &cfg).unwrap();
        let m0 = snapshot_mass(tr.first());
        for s in &tr.snapshots {
            prop_assert!((snapshot_mass(s) - m0).abs() <= 1e-10 * m0.max(1.0));
            prop_assert!(s.measure.as_grid().unwrap().values.iter().all(|&v| v >= 0.0));
        }
    }
}

#[test]
fn parallel_and_sequential_runs_agree_bitwise() {
    let xs: Vec<f64> = (0..40).map(|i| 0.05 * i as f64 + 0.01 * ((i * 7) % 5) as f64).collect();
    let k = fig5(40);
    let v_d = DesiredVelocity::scalar(1.0);
    let dom = Domain::free(1);
    let state = MicroState::new(Points::line(xs));
    let cfg = SimConfig::default().with_dt(0.01).with_t_final(0.5);
    let a = integrate_micro(&state, &v_d, &k, &dom, &cfg.clone().with_execution(Execution::Sequential)).unwrap();
    let b = integrate_micro(&state, &v_d, &k, &dom, &cfg.with_execution(Execution::Parallel)).unwrap();
    assert_eq!(a.snapshots, b.snapshots);

    let bumps = make_bumps(&AtomicMeasure::line(vec![0.0, 0.5, 1.0]).unwrap(), 0.1, BumpProfile::Cosine).unwrap();
    let cfg = SimConfig::default().with_dt(0.02).with_t_final(0.4);
    let k = fig5(3);
    let a = integrate_characteristics(&bumps, &v_d, &k, &dom, &cfg.clone().with_execution(Execution::Sequential), None).unwrap();
    let b = integrate_characteristics(&bumps, &v_d, &k, &dom, &cfg.with_execution(Execution::Parallel), None).unwrap();
    assert_eq!(a.snapshots, b.snapshots);

    let g = GridDensity1D::from_bumps(&bumps, 2.0, 128).unwrap();
    let fv = |e| FvConfig { t_final: 0.3, execution: e, ..Default::default() };
    let a = integrate_fv(&g, &v_d, &k, &fv(Execution::Sequential)).unwrap();
    let b = integrate_fv(&g, &v_d, &k, &fv(Execution::Parallel)).unwrap();
    assert_eq!(a.snapshots, b.snapshots);
}

#[test]
fn characteristics_follow_a_free_bump() {
    // no interaction: every quadrature point moves with the desired velocity
    let bumps = make_bumps(&AtomicMeasure::line(vec![0.0]).unwrap(), 0.2, BumpProfile::Indicator).unwrap();
    let k = ScaledKernel::unscaled(KernelProfile::zero());
    let cfg = SimConfig::default().with_dt(0.1).with_t_final(1.0);
    let tr = integrate_characteristics(&bumps, &DesiredVelocity::scalar(0.5), &k, &Domain::free(1), &cfg, None).unwrap();
    let start = tr.first().measure.as_cloud().unwrap();
    let end = tr.last().measure.as_cloud().unwrap();
    for (a, b) in start.points.iter().zip(end.points.iter()) {
        assert!((b[0] - a[0] - 0.5).abs() < 1e-12);
    }
}
