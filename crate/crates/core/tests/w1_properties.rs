use crowdlab::measure::{make_bumps, push_forward, AtomicMeasure, BumpProfile, CrowdMeasure, PointMap, WeightedCloud};
use crowdlab::space::Points;
use crowdlab::wasserstein::{dual_gap_check, w1_1d, w1_auto, w1_lp_oracle};
use proptest::prelude::*;

fn atoms(d: usize, coords: Vec<f64>) -> AtomicMeasure {
    AtomicMeasure::new(Points::new(d, coords).unwrap()).unwrap()
}

fn lp(a: &AtomicMeasure, b: &AtomicMeasure) -> f64 {
    w1_lp_oracle(&WeightedCloud::from_atoms(a), &WeightedCloud::from_atoms(b)).unwrap().value
}

/// Three point sets of equal size in dimension 1 or 2.
fn triple() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=2, 1usize..=7).prop_flat_map(|(d, n)| {
        let coords = || prop::collection::vec(-2.0f64..2.0, n * d);
        (Just(d), coords(), coords(), coords())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn lp_is_a_metric((d, x, y, z) in triple()) {
        let (a, b, c) = (atoms(d, x), atoms(d, y), atoms(d, z));
        prop_assert_eq!(lp(&a, &a), 0.0);
        let ab = lp(&a, &b);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - lp(&b, &a)).abs() <= 1e-9);
        prop_assert!(lp(&a, &c) <= ab + lp(&b, &c) + 1e-9);
    }

    #[test]
    fn cdf_matches_lp_in_1d(x in prop::collection::vec(-3.0f64..3.0, 1..9), shift in -1.0f64..1.0) {
        let y: Vec<f64> = x.iter().rev().map(|v| v * 0.7 + shift).collect();
        let (a, b) = (atoms(1, x), atoms(1, y));
        let exact = w1_1d(&a.clone().into(), &b.clone().into()).unwrap().value;
        prop_assert!((exact - lp(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn translation_and_dilation((d, x, y, _) in triple(), s in -1.0f64..1.0, scale in 0.1f64..4.0) {
        let (a, b): (CrowdMeasure, CrowdMeasure) = (atoms(d, x).into(), atoms(d, y).into());
        let base = w1_auto(&a, &b).unwrap().value;
        let shift = PointMap::Shift(vec![s; d]);
        let moved = w1_auto(&push_forward(&a, &shift).unwrap(), &push_forward(&b, &shift).unwrap()).unwrap().value;
        prop_assert!((moved - base).abs() <= 1e-9 * (1.0 + base));
        let dil = PointMap::Scale(-scale);
        let grown = w1_auto(&push_forward(&a, &dil).unwrap(), &push_forward(&b, &dil).unwrap()).unwrap().value;
        prop_assert!((grown - scale * base).abs() <= 1e-9 * (1.0 + grown));
    }

    #[test]
    fn lipschitz_test_functions_bound_w1((d, x, y, _) in triple(), slope in -1.0f64..1.0, c in -1.0f64..1.0) {
        let (a, b): (CrowdMeasure, CrowdMeasure) = (atoms(d, x).into(), atoms(d, y).into());
        let w = w1_auto(&a, &b).unwrap().value;
        let phi = |p: &[f64]| slope * (p[0] - c).abs();
        let gap = dual_gap_check(&a, &b, phi, 0.1).unwrap();
        prop_assert!(gap <= w + 1e-9);
    }

    #[test]
    fn bump_mass_spreads_are_exact(centers in prop::collection::vec(0.0f64..1.0, 1..5), frac in 0.05f64..0.45) {
        let mut xs: Vec<f64> = centers.iter().enumerate().map(|(i, c)| i as f64 + 0.5 * c).collect();
        xs.sort_by(f64::total_cmp);
        let a = atoms(1, xs);
        let b = make_bumps(&a, frac * 0.5, BumpProfile::Indicator).unwrap();
        let via_cdf = w1_1d(&a.clone().into(), &b.clone().into()).unwrap().value;
        let closed = 0.5 * a.len() as f64 * b.radius;
        prop_assert!((via_cdf - closed).abs() <= 1e-12);
    }
}

#[test]
fn non_lipschitz_test_function_is_rejected() {
    let a: CrowdMeasure = atoms(1, vec![0.0]).into();
    let b: CrowdMeasure = atoms(1, vec![1.0]).into();
    assert!(dual_gap_check(&a, &b, |p| 2.0 * p[0], 0.1).is_err());
    assert_eq!(dual_gap_check(&a, &b, |p| -p[0].abs(), 0.1).unwrap(), -1.0);
}
