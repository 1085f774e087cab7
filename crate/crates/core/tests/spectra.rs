use crowdlab::continuum::{macro_growth_rate, uniform_equilibrium_speed};
use crowdlab::kernel::KernelProfile;
use crowdlab::micro::{lattice_equilibrium_speed, micro_stability_spectrum};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Real eigenvalue parts of the lattice Jacobian, built entry by entry.
fn jacobian_spectrum(n: usize, length: f64, k: &KernelProfile) -> Vec<f64> {
    let h = length / n as f64;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let gap = ((j + n - i) % n) as f64 * h;
            let s = k.derivative1(gap) + k.derivative1(gap - length);
            jac[(i, j)] -= s;
            jac[(i, i)] += s;
        }
    }
    // circulant matrices are normal, so the real parts of the eigenvalues are
    // the eigenvalues of the symmetric part; unshifted QR on `jac` itself can stall
    let sym = (&jac + jac.transpose()) * 0.5;
    let mut re: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    re.sort_by(f64::total_cmp);
    re
}

fn closest_removed(mut v: Vec<f64>, target: f64) -> Vec<f64> {
    let i = (0..v.len())
        .min_by(|&a, &b| (v[a] - target).abs().total_cmp(&(v[b] - target).abs()))
        .unwrap();
    v.remove(i);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectrum_matches_circulant_eigenvalues(n in 2usize..24, length in 1.1f64..6.0, radius in 0.2f64..1.0) {
        let k = KernelProfile::tent(radius).unwrap();
        let mut sigma = micro_stability_spectrum(n, length, &k);
        sigma.sort_by(f64::total_cmp);
        let oracle = closest_removed(jacobian_spectrum(n, length, &k), 0.0);
        for (a, b) in sigma.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn lattice_speed_tends_to_uniform_speed_for_continuous_kernels(length in 1.5f64..5.0) {
        let k = KernelProfile::fig5();
        let dv = |n: usize| lattice_equilibrium_speed(n, length, 1.0, &k) - uniform_equilibrium_speed(n as f64, length, 1.0, &k);
        prop_assert!(dv(1024).abs() < dv(64).abs());
        prop_assert!(dv(1024).abs() < 1e-3);
    }

    #[test]
    fn growth_rates_match_quadrature(mode in 1i64..12, n in 1.0f64..40.0) {
        let (k, length) = (KernelProfile::fig3(), 2.0);
        let q = 2.0 * std::f64::consts::PI * mode as f64 / length;
        let m = 20_000;
        let h = 1.0 / m as f64;
        // midpoint rule over the support
        let integral: f64 = (0..m).map(|i| { let z = (i as f64 + 0.5) * h; k.eval1(z) * (q * z).sin() }).sum::<f64>() * h;
        let expected = -q * n / length * integral;
        prop_assert!((macro_growth_rate(n, length, &k, mode) - expected).abs() <= 1e-6 * (1.0 + expected.abs()));
    }
}

#[test]
fn discontinuous_gap_keeps_half_jump() {
    let k = KernelProfile::fig3();
    for length in [1.0, 2.0, 4.0] {
        let dv = lattice_equilibrium_speed(4096, length, 1.0, &k) - uniform_equilibrium_speed(4096.0, length, 1.0, &k);
        assert!((dv / k.right_limit_at_zero() - 0.5).abs() < 0.02);
    }
}
