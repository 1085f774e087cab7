use crowdlab::desired::DesiredVelocity;
use crowdlab::estimates::{check_flow_map_cross, scaling_transform, verify_scaling_equivalence};
use crowdlab::kernel::{KernelProfile, ScaledKernel};
use crowdlab::measure::{AtomicMeasure, CrowdMeasure};
use crowdlab::micro::SimConfig;
use crowdlab::space::{Domain, Points};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equal_exponent_sums_give_matching_flows(
        jitter in prop::collection::vec(0.0f64..1.0, 3..7),
        alpha in 0.0f64..2.0,
        shift in -1.0f64..1.0,
    ) {
        let n = jitter.len();
        let xs: Vec<f64> = jitter.iter().enumerate().map(|(i, j)| (i as f64 + 0.8 * j) / n as f64).collect();
        let mu = AtomicMeasure::line(xs).unwrap();
        let cfg = SimConfig::default().with_dt(0.02).with_t_final(0.5);
        let rep = verify_scaling_equivalence(
            &mu,
            (alpha, 1.0 - alpha),
            (alpha + shift, 1.0 - alpha - shift),
            &KernelProfile::tent(1.0).unwrap(),
            &DesiredVelocity::scalar(0.0),
            &Domain::free(1),
            &cfg,
        )
        .unwrap();
        prop_assert!(rep.terminal_discrepancy.iter().all(|&d| d <= 1e-9 * rep.scale.max(1.0)));
    }

    #[test]
    fn scaling_round_trips(xs in prop::collection::vec(-3.0f64..3.0, 1..6), b in -1.0f64..1.0, bp in -1.0f64..1.0) {
        let m: CrowdMeasure = AtomicMeasure::line(xs).unwrap().into();
        let n = 5;
        let there = scaling_transform(&m, b, bp, n).unwrap();
        let back = scaling_transform(&there, bp, b, n).unwrap();
        let (p, q) = (&m.as_atomic().unwrap().points, &back.as_atomic().unwrap().points);
        for (x, y) in p.as_slice().iter().zip(q.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }
}

#[test]
fn tracers_separate_no_faster_than_the_measures() {
    let mu = AtomicMeasure::line(vec![0.0, 0.3, 0.55, 0.9]).unwrap();
    let nu = AtomicMeasure::line(vec![0.02, 0.28, 0.6, 0.88]).unwrap();
    let tracers = Points::line(vec![-0.5, 0.1, 0.45, 1.2]);
    let k = ScaledKernel::new(KernelProfile::fig5(), 1.0, 0.0, 4).unwrap();
    let rep = check_flow_map_cross(
        &mu,
        &nu,
        &tracers,
        &DesiredVelocity::affine(0.2, vec![1.0]),
        &k,
        &Domain::free(1),
        &SimConfig::default().with_dt(0.01).with_stride(1),
    )
    .unwrap();
    assert!(rep.satisfied, "{:?} vs {:?}", rep.observed, rep.predicted_ceiling);
    assert_eq!(rep.observed[0], 0.0);
}
