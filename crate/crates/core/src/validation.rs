//! Self-checks run by `green-conv validate`.
//!
//! Each check is an independent function returning a [`CheckOutcome`]; [`run_all`] strings
//! them together with a fixed seed so the table is reproducible. Checks that solve the
//! large reference normal equations fit in [`Quad`] and compare in `f64`.

use std::fmt;
use std::time::Instant;

use num_traits::{Float, Zero};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::convolution::{error_report, screened_poisson_solve};
use crate::error::{Error, Result};
use crate::fitting::{
    assemble, fit, fit_hm_with, gram_entry, gram_entry_quadrature, DiffusionSet, FitOptions, GreenExpansion,
    PhiBasis,
};
use crate::grid::GridField;
use crate::linalg::Cholesky;
use crate::quadrature::integrate_semi_infinite;
use crate::radial_kernel::{gaussian_kernel, RadialKernel, SobolevIndex};
use crate::scalar::{Quad, Real};
use crate::special_fn::{green_eval, green_fourier, green_l2_norm_sq, sphere_area, GreenParams};
use crate::transform::radial_fourier;

/// Default seed of [`run_all`].
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Result of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value against the threshold, in words.
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    fn from_result(name: &'static str, start: Instant, r: Result<(bool, String)>) -> Self {
        let seconds = start.elapsed().as_secs_f64();
        match r {
            Ok((passed, detail)) => Self { name, passed, detail, seconds },
            Err(e) => Self { name, passed: false, detail: format!("error: {e}"), seconds },
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict}  {:<28} {:>7.2}s  {}", self.name, self.seconds, self.detail)
    }
}

/// Ordered collection of outcomes.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        write!(f, "{passed}/{} checks passed", self.checks.len())
    }
}

/// Runs every check with the given seed.
pub fn run_all(seed: u64) -> ValidationReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let checks = vec![
        check_gram_closed_form(gram_entry, 100, &mut rng),
        check_hankel_identity(),
        check_unit_mass(),
        check_l2_norms(),
        check_positive_definite(50, &mut rng),
        check_exact_span(&mut rng),
        check_phi_identities(&mut rng),
        check_phi_self_fit(),
        check_eigenfunctions(),
        check_young_bound(),
        check_unsupported_dimension(),
    ];
    ValidationReport { checks }
}

/// The three diffusion constants used by the Green-function identity checks.
pub const IDENTITY_DIFFUSIONS: [f64; 3] = [0.041, 1.0, 1.989];
/// Frequencies used by the Hankel-transform check.
pub const HANKEL_FREQUENCIES: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];

fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random diffusion set of the given size, log-uniform on `[lo, hi]`, with pairwise relative
/// gaps of at least `min_gap`.
pub fn random_diffusions(rng: &mut StdRng, len: usize, lo: f64, hi: f64, min_gap: f64) -> DiffusionSet<f64> {
    let mut values: Vec<f64> = Vec::with_capacity(len);
    while values.len() < len {
        let d = log_uniform(rng, lo, hi);
        if values.iter().all(|&v| (v - d).abs() >= min_gap * v.max(d)) {
            values.push(d);
        }
    }
    DiffusionSet::new(values).expect("sampled values are positive and separated")
}

/// Closed-form Gram entries against quadrature for random pairs in `[0.04, 10]²`.
///
/// `gram` is the closed form under test, so a deliberately broken implementation can be
/// passed in to confirm the check is able to fail.
pub fn check_gram_closed_form<G>(gram: G, pairs: usize, rng: &mut StdRng) -> CheckOutcome
where
    G: Fn(usize, f64, f64) -> Result<f64>,
{
    let start = Instant::now();
    let samples: Vec<(f64, f64)> = (0..pairs).map(|_| (rng.random_range(0.04..10.0), rng.random_range(0.04..10.0))).collect();
    let r = (|| {
        let mut worst = 0.0f64;
        for n in 1..=3 {
            for &(dj, dl) in &samples {
                let closed = gram(n, dj, dl)?;
                let quad = gram_entry_quadrature(n, SobolevIndex::L2, |s| green_fourier(dj, s), |s| green_fourier(dl, s))?;
                worst = worst.max(((closed - quad) / quad).abs());
            }
        }
        Ok((worst <= 1e-8, format!("max relative difference {worst:.2e} (limit 1e-8)")))
    })();
    CheckOutcome::from_result("gram closed form", start, r)
}

/// Radial Fourier transform of `k(·;d)` against `1/(1 + d s²)`.
pub fn check_hankel_identity() -> CheckOutcome {
    let start = Instant::now();
    let r = (|| {
        let mut worst = 0.0f64;
        for n in 1..=3 {
            for d in IDENTITY_DIFFUSIONS {
                let p = GreenParams::new(n, d)?;
                for s in HANKEL_FREQUENCIES {
                    let got = radial_fourier(n, |r| green_eval(p, r).unwrap_or(0.0), s, d.sqrt(), 1e-11)?;
                    let want = green_fourier(d, s);
                    worst = worst.max(((got - want) / want).abs());
                }
            }
        }
        Ok((worst <= 1e-6, format!("max relative error {worst:.2e} (limit 1e-6)")))
    })();
    CheckOutcome::from_result("hankel identity", start, r)
}

/// `ω_{n−1} ∫ r^{n−1} k(r;d) dr = 1`.
pub fn check_unit_mass() -> CheckOutcome {
    let start = Instant::now();
    let r = (|| {
        let mut worst = 0.0f64;
        for n in 1..=3 {
            for d in IDENTITY_DIFFUSIONS {
                let p = GreenParams::new(n, d)?;
                let v = integrate_semi_infinite(|r: f64| r.powi(n as i32 - 1) * green_eval(p, r).unwrap_or(0.0), d.sqrt(), 1e-12)?;
                worst = worst.max((sphere_area::<f64>(n) * v.value - 1.0).abs());
            }
        }
        Ok((worst <= 1e-8, format!("max |mass - 1| {worst:.2e} (limit 1e-8)")))
    })();
    CheckOutcome::from_result("unit mass", start, r)
}

/// Quadrature of `‖k(·;d)‖²_{L²(ℝⁿ)}` against the Γ-function formula.
pub fn check_l2_norms() -> CheckOutcome {
    let start = Instant::now();
    let r = (|| {
        let mut worst = 0.0f64;
        for n in 1..=3 {
            for d in IDENTITY_DIFFUSIONS {
                let p = GreenParams::new(n, d)?;
                let v = integrate_semi_infinite(
                    |r: f64| {
                        let k = green_eval(p, r).unwrap_or(0.0);
                        r.powi(n as i32 - 1) * k * k
                    },
                    d.sqrt(),
                    1e-13,
                )?;
                let got = sphere_area::<f64>(n) * v.value;
                let want = green_l2_norm_sq(n, d)?;
                worst = worst.max(((got - want) / want).abs());
            }
        }
        Ok((worst <= 1e-10, format!("max relative error {worst:.2e} (limit 1e-10)")))
    })();
    CheckOutcome::from_result("green L2 norms", start, r)
}

/// Cholesky of the quad-precision Gram matrix for random diffusion sets of size 2..=12.
pub fn check_positive_definite(sets: usize, rng: &mut StdRng) -> CheckOutcome {
    let start = Instant::now();
    let draws: Vec<DiffusionSet<f64>> = (0..sets)
        .map(|_| {
            let len = rng.random_range(2..=12);
            random_diffusions(rng, len, 0.04, 10.0, 1e-3)
        })
        .collect();
    let r = (|| {
        let mut worst_cond = 0.0f64;
        for ds in &draws {
            let q: DiffusionSet<Quad> = ds.cast()?;
            for n in 1..=3 {
                let a = crate::linalg::SymMatrix::from_fn(q.len(), |i, j| gram_entry(n, q[i], q[j]).unwrap_or(Quad::nan()));
                let chol = Cholesky::factor(&a)?;
                if chol.diagonal().iter().any(|&p| !(p > Quad::zero())) {
                    return Ok((false, "non-positive pivot".into()));
                }
                worst_cond = worst_cond.max(chol.condition_estimate().to_f64_lossy());
            }
        }
        Ok((true, format!("{} sets x 3 dimensions factor; largest condition estimate {worst_cond:.1e}", draws.len())))
    })();
    CheckOutcome::from_result("gram positive-definite", start, r)
}

/// Fits `K = Σ cⱼ kⱼ` and compares `α` with `c`.
pub fn check_exact_span(rng: &mut StdRng) -> CheckOutcome {
    let start = Instant::now();
    let cases: Vec<(usize, DiffusionSet<f64>, Vec<f64>)> = (1..=3)
        .map(|n| {
            let ds = random_diffusions(rng, 6, 0.04, 10.0, 1e-2);
            let c = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            (n, ds, c)
        })
        .collect();
    let r = (|| {
        let (mut worst, mut worst_res) = (0.0f64, 0.0f64);
        for (n, ds, c) in &cases {
            let (coef_err, rel_res) = exact_span_errors(*n, ds, c)?;
            worst = worst.max(coef_err);
            worst_res = worst_res.max(rel_res);
        }
        let ok = worst <= 1e-6 && worst_res <= 1e-10;
        Ok((ok, format!("coefficient error {worst:.2e} (limit 1e-6), residual/|K|^2 {worst_res:.2e} (limit 1e-10)")))
    })();
    CheckOutcome::from_result("exact-span recovery", start, r)
}

/// Relative coefficient error `max|α − c| / max|c|` and `E/‖K‖²` of a quad-precision fit of `Σ cⱼ kⱼ`.
pub fn exact_span_errors(n: usize, ds: &DiffusionSet<f64>, c: &[f64]) -> Result<(f64, f64)> {
    let q: DiffusionSet<Quad> = ds.cast()?;
    let cq: Vec<Quad> = c.iter().map(|&v| Quad::lit(v)).collect();
    let kernel = RadialKernel::green_sum(n, q.as_slice(), &cq)?;
    let approx = fit(&kernel, &q, SobolevIndex::L2, &FitOptions::default())?;
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = approx.alpha().iter().zip(c).fold(0.0f64, |m, (a, &b)| m.max((a.to_f64_lossy() - b).abs())) / scale;
    let rel = (approx.residual_sq / approx.kernel_norm_sq).to_f64_lossy();
    Ok((err, rel))
}

/// Partial-fraction identity of the regularized basis for random depths `J ≤ 4`.
pub fn check_phi_identities(rng: &mut StdRng) -> CheckOutcome {
    let start = Instant::now();
    let draws: Vec<(usize, DiffusionSet<f64>, Vec<f64>)> = (0..20)
        .map(|_| {
            let depth = rng.random_range(1..=4);
            let ds = random_diffusions(rng, depth + 3, 0.1, 10.0, 0.1);
            let s = (0..20).map(|_| log_uniform(rng, 1e-2, 1e2)).collect();
            (depth, ds, s)
        })
        .collect();
    let r = (|| {
        let mut worst = 0.0f64;
        for (depth, ds, s) in &draws {
            let basis = PhiBasis::new(ds, *depth)?;
            for j in 0..basis.len() {
                for &sv in s {
                    let product = basis.fourier(j, sv);
                    let expanded = basis.fourier_expanded(j, sv);
                    worst = worst.max((product - expanded).abs());
                }
            }
        }
        Ok((worst <= 1e-10, format!("max |product - partial fractions| {worst:.2e} (limit 1e-10)")))
    })();
    CheckOutcome::from_result("phi partial fractions", start, r)
}

/// Fitting `K = φ₁` in `H¹_r` returns `phi_coefficients` and zero residual.
pub fn check_phi_self_fit() -> CheckOutcome {
    let start = Instant::now();
    let r = (|| {
        let ds = DiffusionSet::new(vec![0.5f64, 2.0])?;
        let basis = PhiBasis::new(&ds, 1)?;
        let target = basis.clone();
        let kernel = RadialKernel::from_fourier(1, move |s| target.fourier(0, s))?;
        let approx = fit_hm_with(&kernel, &ds, SobolevIndex(1), Some(1), &FitOptions::default())?;
        let mut worst = 0.0f64;
        let gammas = basis.gammas(0);
        worst = worst.max((approx.alpha()[1] - gammas[0]).abs());
        worst = worst.max((approx.alpha()[0] - gammas[1]).abs());
        let res = approx.residual_sq;
        Ok((res <= 1e-10 && worst <= 1e-8, format!("residual {res:.2e} (limit 1e-10), coefficient error {worst:.2e}")))
    })();
    CheckOutcome::from_result("phi self fit", start, r)
}

/// `cos(kx)` is scaled by `1/(1 + d k²)`.
pub fn check_eigenfunctions() -> CheckOutcome {
    let start = Instant::now();
    let r = (|| {
        let l = 2.0 * std::f64::consts::PI;
        let mut worst = 0.0f64;
        for k in [1.0f64, 2.0, 5.0] {
            for d in [0.3, 1.0, 2.5] {
                let f = GridField::from_fn(vec![64], vec![l], |x| (k * x[0]).cos())?;
                let w = screened_poisson_solve(&f, d)?;
                let want = f.map(|v| v / (1.0 + d * k * k));
                worst = worst.max(w.sub(&want)?.norm_linf());
            }
        }
        Ok((worst <= 1e-12, format!("max error {worst:.2e} (limit 1e-12)")))
    })();
    CheckOutcome::from_result("spectral eigenfunctions", start, r)
}

/// A named scalar test input.
pub type NamedInput = (&'static str, Box<dyn Fn(f64) -> f64 + Send + Sync>);

/// Smooth test inputs on `[0, L)` used by the Young-inequality checks.
pub fn smooth_inputs(l: f64) -> Vec<NamedInput> {
    let c = l / 2.0;
    vec![
        ("gaussian bump", Box::new(move |x: f64| (-(x - c).powi(2) / 2.0).exp())),
        ("sech^2 pulse", Box::new(move |x: f64| (0.8 * (x - c - 3.0)).cosh().powi(-2))),
        (
            "two-sign packet",
            Box::new(move |x: f64| ((x - c) * 1.3).sin() * (-(x - c).powi(2) / 8.0).exp()),
        ),
    ]
}

/// The reference Gaussian fit (`n = 1`, `dⱼ = 1 + sin(j − 1)`, `N = 10`) fitted in quad precision.
pub fn reference_fit(n: usize, terms: usize) -> Result<GreenExpansion<f64>> {
    let kernel = gaussian_kernel::<Quad>(n)?;
    let ds = DiffusionSet::<Quad>::one_plus_sin(terms)?;
    let approx = fit(&kernel, &ds, SobolevIndex::L2, &FitOptions::default())?;
    approx.expansion.cast()
}

/// `‖K∗f − K_N∗f‖ ≤ ‖K − K_N‖ ‖f‖₁ (1 + 1e-3)` on a 4096-point grid of length 40.
pub fn check_young_bound() -> CheckOutcome {
    let start = Instant::now();
    let r = (|| {
        let expansion = reference_fit(1, 10)?;
        let kernel = gaussian_kernel::<f64>(1)?;
        let l = 40.0;
        let mut ratio = 0.0f64;
        let mut ok = true;
        for (_, f) in smooth_inputs(l) {
            let field = GridField::from_fn(vec![4096], vec![l], |x| f(x[0]))?;
            let rep = error_report(&field, &kernel, &expansion)?;
            ok &= rep.young_holds;
            ratio = ratio.max(rep.l2_error / rep.young_bound);
        }
        Ok((ok, format!("largest error/bound ratio {ratio:.3} (limit 1.001)")))
    })();
    CheckOutcome::from_result("young bound", start, r)
}

/// A raw-basis fit in four dimensions is refused with a typed error.
pub fn check_unsupported_dimension() -> CheckOutcome {
    let start = Instant::now();
    let r = (|| {
        let kernel = gaussian_kernel::<f64>(4)?;
        let ds = DiffusionSet::new(vec![1.0, 2.0])?;
        match assemble(&kernel, &ds, SobolevIndex::L2) {
            Err(Error::GreenBasisNotInSpace { n: 4, .. }) => Ok((true, "rejected with GreenBasisNotInSpace".to_string())),
            Err(e) => Ok((false, format!("unexpected error {e}"))),
            Ok(_) => Ok((false, "accepted an n = 4 raw-basis fit".to_string())),
        }
    })();
    CheckOutcome::from_result("n = 4 raw fit rejected", start, r)
}
