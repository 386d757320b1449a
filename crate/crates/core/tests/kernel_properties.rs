use std::f64::consts::PI;

use green_conv::radial_kernel::{gaussian_kernel, hm_inner, hm_norm, DecayHint, RadialKernel, SobolevIndex};
use green_conv::special_fn::{bessel_k, green_eval, BesselOrder, GreenParams};
use green_conv::transform::radial_fourier;
use proptest::prelude::*;

/// `K̂(s) = a e^{−b s²} + c/(1 + d s²)²`: smooth, radial and in every `Hᵐ_r` with `m ≤ 1` for `n ≤ 3`.
fn kernel(n: usize, a: f64, b: f64, c: f64, d: f64) -> RadialKernel<f64> {
    RadialKernel::from_fourier(n, move |s: f64| a * (-b * s * s).exp() + c / (1.0 + d * s * s).powi(2)).unwrap()
}

fn params() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-2.0f64..2.0, 0.2f64..3.0, -2.0f64..2.0, 0.2f64..3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cauchy_schwarz(n in 1usize..=3, p in params(), q in params(), m in 0u32..=1) {
        let k1 = kernel(n, p.0, p.1, p.2, p.3);
        let k2 = kernel(n, q.0, q.1, q.2, q.3);
        let m = SobolevIndex(m);
        let inner = hm_inner(&k1, &k2, m).unwrap();
        let bound = hm_norm(&k1, m).unwrap() * hm_norm(&k2, m).unwrap();
        prop_assert!(inner.abs() <= bound * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn norms_grow_with_m(n in 1usize..=3, p in params()) {
        let k = kernel(n, p.0, p.1, p.2, p.3);
        let h0 = hm_norm(&k, SobolevIndex(0)).unwrap();
        let h1 = hm_norm(&k, SobolevIndex(1)).unwrap();
        prop_assert!(h0 <= h1 * (1.0 + 1e-12));
    }

    #[test]
    fn green_is_positive(n in 1usize..=3, d in 0.04f64..10.0, r in 1e-6f64..30.0) {
        let v = green_eval(GreenParams::new(n, d).unwrap(), r).unwrap();
        prop_assert!(v > 0.0 || (r / d.sqrt() > 25.0 && v >= 0.0));
    }

    #[test]
    fn bessel_order_symmetry(nu in prop::sample::select(vec![0.5f64, 1.5]), r in 1e-3f64..40.0) {
        let a = bessel_k(BesselOrder::new(nu).unwrap(), r).unwrap();
        let b = bessel_k(BesselOrder::new(-nu).unwrap(), r).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn gaussian_physical_and_fourier_profiles_agree(n in 1usize..=3, s in 0.0f64..4.0) {
        let k = gaussian_kernel::<f64>(n).unwrap();
        let phys = k.physical_profile().unwrap();
        let got = radial_fourier(n, |r| phys(r), s, 1.0, 1e-11).unwrap();
        let want = k.fourier(s);
        prop_assert!((got - want).abs() <= 1e-6 * want.max(1e-3));
    }

    #[test]
    fn green_physical_and_fourier_profiles_agree(n in 1usize..=3, d in 0.04f64..10.0, s in 0.05f64..5.0) {
        let k = RadialKernel::green(n, d).unwrap();
        let phys = k.physical_profile().unwrap();
        let got = radial_fourier(n, |r| phys(r), s, d.sqrt(), 1e-11).unwrap();
        prop_assert!(((got - k.fourier(s)) / k.fourier(s)).abs() <= 1e-6);
    }
}

#[test]
fn bessel_integral_oracle() {
    // M_ν(r) = ∫₀^∞ e^{−r cosh t} cosh(νt) dt by the composite trapezoid rule, which is
    // spectrally accurate for this doubly exponentially decaying analytic integrand
    let oracle = |nu: f64, r: f64| {
        let h: f64 = 1.0 / 64.0;
        let mut sum = 0.5 * (-r).exp();
        let mut t: f64 = h;
        loop {
            let v = (-r * t.cosh()).exp() * (nu * t).cosh();
            sum += v;
            if v < 1e-30 * sum {
                break;
            }
            t += h;
        }
        sum * h
    };
    for (nu, order) in [(0.0, BesselOrder::ZERO), (1.0, BesselOrder::ONE), (0.5, BesselOrder::HALF), (1.5, BesselOrder::THREE_HALVES)] {
        for r in [1e-3, 0.1, 0.5, 1.0, 1.9, 2.1, 5.0, 12.0, 40.0] {
            let got = bessel_k(order, r).unwrap();
            let want = oracle(nu, r);
            assert!(((got - want) / want).abs() < 1e-12, "nu={nu} r={r}: {got} vs {want}");
        }
    }
    assert!((bessel_k(BesselOrder::HALF, 1.0).unwrap() - (PI / 2.0).sqrt() * (-1f64).exp()).abs() < 1e-15);
}

#[test]
fn green_solves_the_screened_poisson_equation_away_from_the_origin() {
    // 1-D: d k'' − k = 0 for r > 0; the centred second difference is O(h²) accurate
    let d = 1.7;
    let p = GreenParams::new(1, d).unwrap();
    let k = |r: f64| green_eval(p, r).unwrap();
    let mut previous = f64::INFINITY;
    for h in [0.02, 0.01, 0.005] {
        let mut worst = 0.0f64;
        for i in 1..=40 {
            let r = 0.25 * i as f64;
            let lap = (k(r + h) - 2.0 * k(r) + k(r - h)) / (h * h);
            worst = worst.max((d * lap - k(r)).abs());
        }
        assert!(worst < 0.05 * h * h, "h={h}: {worst}");
        assert!(worst < previous / 3.5);
        previous = worst;
    }
    // the jump of d k' at the origin carries the unit source
    let eps = 1e-7;
    let jump = d * (k(eps) - k(0.0)) / eps * 2.0;
    assert!((jump + 1.0).abs() < 1e-6);
}

#[test]
fn tabulated_profile_tracks_the_analytic_one() {
    let amplitude = (4.0 * PI).sqrt();
    let s: Vec<f64> = (0..2001).map(|i| 8.0 * i as f64 / 2000.0).collect();
    let v: Vec<f64> = s.iter().map(|&x| amplitude * (-x * x).exp()).collect();
    let table = green_conv::TabulatedProfile::new(s, v, DecayHint::Gaussian { rate: 1.0 }).unwrap();
    let tab = RadialKernel::tabulated(1, table).unwrap();
    let exact = gaussian_kernel::<f64>(1).unwrap();
    let worst = (0..=100_000).map(|i| 10.0 * i as f64 / 100_000.0).fold(0.0f64, |m, s| m.max((tab.fourier(s) - exact.fourier(s)).abs()));
    assert!(worst < 1e-6 * amplitude, "{worst}");
}
