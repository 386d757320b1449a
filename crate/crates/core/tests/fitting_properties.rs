use green_conv::fitting::{
    assemble, cauchy_solve, fit, gram_entry, gram_entry_quadrature, residual_energy, solve_coefficients,
    DiffusionSet, FitOptions,
};
use green_conv::linalg::{residual, Cholesky, SymMatrix};
use green_conv::radial_kernel::{gaussian_kernel, DecayHint, RadialKernel, SobolevIndex, TabulatedProfile};
use green_conv::{Quad, Real};
use num_traits::Float;
use proptest::prelude::*;

const L2: SobolevIndex = SobolevIndex::L2;

/// Diffusion values with pairwise relative gap at least `gap`, or `None`.
fn separated(values: Vec<f64>, gap: f64) -> Option<Vec<f64>> {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let (a, b) = (values[i], values[j]);
            if (a - b).abs() < gap * a.max(b) {
                return None;
            }
        }
    }
    Some(values)
}

fn diffusions(max_len: usize, gap: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.2f64..2.3, 1..=max_len)
        .prop_map(|logs| logs.into_iter().map(f64::exp).collect::<Vec<_>>())
        .prop_filter_map("diffusions too close", move |v| separated(v, gap))
}

fn to_quad(v: &[f64]) -> DiffusionSet<Quad> {
    DiffusionSet::new(v.iter().map(|&d| Quad::lit(d)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_quadrature(dj in 0.04f64..10.0, dl in 0.04f64..10.0, n in 1usize..=3) {
        let closed = gram_entry(n, dj, dl).unwrap();
        let q = gram_entry_quadrature(n, L2, |s: f64| 1.0 / (1.0 + dj * s * s), |s| 1.0 / (1.0 + dl * s * s)).unwrap();
        prop_assert!(((closed - q) / q).abs() < 1e-8);
    }

    #[test]
    fn gram_is_symmetric_positive(dj in 0.04f64..10.0, dl in 0.04f64..10.0, n in 1usize..=3) {
        let a = gram_entry(n, dj, dl).unwrap();
        prop_assert_eq!(a, gram_entry(n, dl, dj).unwrap());
        prop_assert!(a > 0.0);
        // Cauchy-Schwarz for the Green functions themselves
        prop_assert!(a * a <= gram_entry(n, dj, dj).unwrap() * gram_entry(n, dl, dl).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn quad_cholesky_has_positive_pivots(ds in diffusions(12, 1e-3), n in 1usize..=3) {
        let q: Vec<Quad> = ds.iter().map(|&d| Quad::lit(d)).collect();
        let a = SymMatrix::from_fn(q.len(), |i, j| gram_entry(n, q[i], q[j]).unwrap());
        let chol = Cholesky::factor(&a).unwrap();
        prop_assert!(chol.diagonal().iter().all(|&p| p > Quad::lit(0.0)));
    }

    #[test]
    fn scaling_the_inner_product_keeps_the_minimizer(ds in diffusions(4, 0.3), n in 1usize..=3, c in 1e-3f64..1e3) {
        let set = DiffusionSet::new(ds).unwrap();
        let sys = assemble(&gaussian_kernel::<f64>(n).unwrap(), &set, L2).unwrap();
        let a = solve_coefficients(&sys).unwrap();
        let b = solve_coefficients(&sys.scaled(c)).unwrap();
        let scale = a.expansion.max_abs_alpha();
        for (x, y) in a.alpha().iter().zip(b.alpha()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
        }
        prop_assert!((b.residual_sq - c * a.residual_sq).abs() <= 1e-10 * c * sys.kernel_norm_sq);
    }

    #[test]
    fn gradient_vanishes_at_the_solution(ds in diffusions(6, 0.05), n in 1usize..=3) {
        let set = DiffusionSet::new(ds).unwrap();
        let sys = assemble(&gaussian_kernel::<f64>(n).unwrap(), &set, L2).unwrap();
        let fit = solve_coefficients(&sys).unwrap();
        let g = sys.gradient(fit.alpha()).unwrap();
        let bmax = sys.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(g.iter().all(|v| v.abs() <= 1e-8 * bmax), "{g:?}");
    }

    #[test]
    fn energy_increases_away_from_the_minimizer(ds in diffusions(5, 0.1), n in 1usize..=3, l in 0usize..5, sign in prop::bool::ANY) {
        let set = DiffusionSet::new(ds).unwrap();
        let sys = assemble(&gaussian_kernel::<f64>(n).unwrap(), &set, L2).unwrap();
        let fit = solve_coefficients(&sys).unwrap();
        let e0 = residual_energy(&sys, fit.alpha()).unwrap();
        let mut beta = fit.alpha().to_vec();
        let l = l % beta.len();
        beta[l] += if sign { 1e-3 } else { -1e-3 };
        prop_assert!(residual_energy(&sys, &beta).unwrap() > e0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn appending_a_diffusion_never_increases_the_residual(ds in diffusions(6, 1e-3), extra in -3.2f64..2.3, n in 1usize..=3) {
        let extra = extra.exp();
        prop_assume!(ds.iter().all(|&d| (d - extra).abs() >= 1e-3 * d.max(extra)));
        let kernel = gaussian_kernel::<Quad>(n).unwrap();
        let base = to_quad(&ds);
        let longer = base.with_appended(Quad::lit(extra)).unwrap();
        let opts = FitOptions::default();
        let a = fit(&kernel, &base, L2, &opts).unwrap();
        let b = fit(&kernel, &longer, L2, &opts).unwrap();
        // both residuals carry quadrature error of relative size quad_tol
        let slack = Quad::lit(1e-24) * a.kernel_norm_sq;
        prop_assert!(b.residual_sq <= a.residual_sq + slack);
    }

    #[test]
    fn span_members_are_recovered(ds in diffusions(6, 1e-2), seed in prop::collection::vec(-1.0f64..1.0, 6), n in 1usize..=3) {
        let c = &seed[..ds.len()];
        let q = to_quad(&ds);
        let cq: Vec<Quad> = c.iter().map(|&v| Quad::lit(v)).collect();
        let kernel = RadialKernel::green_sum(n, q.as_slice(), &cq).unwrap();
        let approx = fit(&kernel, &q, L2, &FitOptions::default()).unwrap();
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for (a, &want) in approx.alpha().iter().zip(c) {
            prop_assert!((a.to_f64_lossy() - want).abs() <= 1e-6 * scale);
        }
        prop_assert!(approx.residual_sq <= Quad::lit(1e-10) * approx.kernel_norm_sq);
    }
}

#[test]
fn reference_set_fits_have_large_mixed_coefficients() {
    for n in 1..=3 {
        let kernel = gaussian_kernel::<Quad>(n).unwrap();
        let ds = DiffusionSet::<Quad>::one_plus_sin(10).unwrap();
        let approx = fit(&kernel, &ds, L2, &FitOptions::default()).unwrap();
        assert!(approx.expansion.max_abs_alpha() >= Quad::lit(1e5));
        assert!(approx.expansion.has_mixed_signs());
        assert!(approx.is_ill_conditioned());
    }
}

#[test]
fn cauchy_inverse_agrees_but_leaves_a_larger_residual_on_the_reference_set() {
    for n in [1usize, 3] {
        let kernel = gaussian_kernel::<Quad>(n).unwrap();
        let ds = DiffusionSet::<Quad>::one_plus_sin(10).unwrap();
        let sys = assemble(&kernel, &ds, L2).unwrap();
        let chol = solve_coefficients(&sys).unwrap();
        let cauchy = cauchy_solve(&ds, &sys.rhs, n).unwrap();
        let scale = chol.expansion.max_abs_alpha();
        for (x, y) in chol.alpha().iter().zip(&cauchy) {
            assert!((*x - *y).abs() <= Quad::lit(1e-10) * scale);
        }
        let worst = |r: Vec<Quad>| r.iter().fold(Quad::lit(0.0), |m, v| m.max(v.abs()));
        let r_chol = worst(residual(&sys.matrix, chol.alpha(), &sys.rhs));
        let r_cauchy = worst(residual(&sys.matrix, &cauchy, &sys.rhs));
        assert!(r_chol <= r_cauchy, "n={n}: {r_chol} vs {r_cauchy}");
    }
}

#[test]
fn cauchy_matches_cholesky_on_well_separated_sets() {
    let ds = DiffusionSet::new(vec![0.1f64, 0.7, 3.0, 9.0]).unwrap();
    for n in [1usize, 3] {
        let sys = assemble(&gaussian_kernel::<f64>(n).unwrap(), &ds, L2).unwrap();
        let a = solve_coefficients(&sys).unwrap();
        let b = cauchy_solve(&ds, &sys.rhs, n).unwrap();
        let scale = a.expansion.max_abs_alpha();
        for (x, y) in a.alpha().iter().zip(&b) {
            assert!((x - y).abs() <= 1e-6 * scale);
        }
    }
}

#[test]
fn tabulated_gaussian_reproduces_the_builtin_fit() {
    let n = 1;
    let amplitude = (4.0 * std::f64::consts::PI).sqrt();
    let s: Vec<f64> = (0..2001).map(|i| 8.0 * i as f64 / 2000.0).collect();
    let v: Vec<f64> = s.iter().map(|&x| amplitude * (-x * x).exp()).collect();
    let table = TabulatedProfile::new(s, v, DecayHint::Gaussian { rate: 1.0 }).unwrap();
    let tabulated = RadialKernel::tabulated(n, table).unwrap();
    let builtin = gaussian_kernel::<f64>(n).unwrap();
    let ds = DiffusionSet::new(vec![0.2f64, 1.0, 4.0]).unwrap();
    let opts = FitOptions { quad_tol: 1e-12, refinement_steps: 1 };
    let a = fit(&builtin, &ds, L2, &opts).unwrap();
    let b = fit(&tabulated, &ds, L2, &opts).unwrap();
    let scale = a.expansion.max_abs_alpha();
    for (x, y) in a.alpha().iter().zip(b.alpha()) {
        assert!((x - y).abs() <= 1e-4 * scale, "{x} vs {y}");
    }
}

#[test]
fn hm_fit_residual_shrinks_with_more_terms() {
    let kernel = gaussian_kernel::<Quad>(1).unwrap();
    let ds = DiffusionSet::<Quad>::one_plus_sin(10).unwrap();
    let mut last = Quad::infinity();
    for len in 2..=10 {
        let approx = green_conv::fitting::fit_hm_with(&kernel, &ds.prefix(len).unwrap(), SobolevIndex(1), Some(1), &FitOptions::default()).unwrap();
        assert!(approx.residual_sq < last, "len {len}");
        last = approx.residual_sq;
    }
}

#[test]
fn raw_basis_residual_bounds_the_phi_residual_on_the_same_budget() {
    // the φ family with J = 1 spans a subspace of span{k_1, ..., k_N}
    let kernel = gaussian_kernel::<Quad>(1).unwrap();
    let ds = DiffusionSet::new([0.3, 0.8, 1.5, 3.0, 6.0].iter().map(|&d| Quad::lit(d)).collect()).unwrap();
    let opts = FitOptions::default();
    let raw = fit(&kernel, &ds, L2, &opts).unwrap();
    let phi = green_conv::fitting::fit_hm_with(&kernel, &ds, L2, Some(1), &opts).unwrap();
    assert!(raw.residual_sq <= phi.residual_sq);
    assert!(phi.residual_sq < Quad::lit(1e-2) * phi.kernel_norm_sq);
}
