//! Modified Bessel functions of the second kind and the screened-Poisson Green function.
//!
//! The Green function of `d Δk − k + δ = 0` on ℝⁿ is
//! `k(x; d) = d^{-n/2} G(|x| / √d)` with the normalized profile
//! `G(r) = (2π)^{-n/2} r^{1-n/2} M_{n/2-1}(r)`, where `M_ν` is the modified
//! Bessel function of the second kind. Only the orders `0, 1/2, 1, 3/2` occur
//! for the supported dimensions, so no general-order machinery is provided.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Order of `M_ν`, stored as `2ν`. `M_ν = M_{-ν}`, so the sign is irrelevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BesselOrder {
    twice: i32,
}

impl BesselOrder {
    pub const ZERO: Self = Self { twice: 0 };
    pub const HALF: Self = Self { twice: 1 };
    pub const ONE: Self = Self { twice: 2 };
    pub const THREE_HALVES: Self = Self { twice: 3 };

    /// Accepts `ν ∈ {0, ±1/2, ±1, ±3/2}`.
    pub fn new(nu: f64) -> Result<Self> {
        let twice = (2.0 * nu).round();
        if (2.0 * nu - twice).abs() > 0.0 || twice.abs() > 3.0 {
            return Err(Error::Domain(format!("unsupported Bessel order {nu}")));
        }
        Ok(Self { twice: twice as i32 })
    }

    /// The order `n/2 − 1` appearing in the Green profile of ℝⁿ.
    pub fn for_dimension(n: usize) -> Result<Self> {
        match n {
            1..=5 => Ok(Self { twice: n as i32 - 2 }),
            _ => Err(Error::UnsupportedDimension { n, reason: "no Bessel order n/2-1 support" }),
        }
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

/// Parameters of a single Green function `k(·; d)` on ℝⁿ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenParams<T> {
    pub n: usize,
    pub d: T,
}

impl<T: Real> GreenParams<T> {
    pub fn new(n: usize, d: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::UnsupportedDimension { n, reason: "dimension must be positive" });
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::Domain(format!("diffusion constant must be positive, got {d}")));
        }
        Ok(Self { n, d })
    }
}

/// `M_ν(r) = ∫₀^∞ e^{-r cosh s} cosh(νs) ds` for `r > 0`.
pub fn bessel_k<T: Real>(nu: BesselOrder, r: T) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("M_nu(r) requires r > 0, got {r}")));
    }
    if r.is_infinite() {
        return Ok(T::zero());
    }
    Ok(match nu.twice.abs() {
        0 => k0_k1(r).0,
        2 => k0_k1(r).1,
        1 => half_order(r),
        3 => half_order(r) * (T::one() + r.recip()),
        _ => unreachable!("BesselOrder is validated on construction"),
    })
}

/// `M_{1/2}(r) = √(π / 2r) e^{-r}`.
fn half_order<T: Real>(r: T) -> T {
    (T::pi() / (T::lit(2.0) * r)).sqrt() * (-r).exp()
}

/// `(M_0(x), M_1(x))` via the ascending series below 2 and Steed's continued fraction above.
fn k0_k1<T: Real>(x: T) -> (T, T) {
    if x < T::lit(2.0) { k0_k1_series(x) } else { k0_k1_continued_fraction(x) }
}

fn k0_k1_series<T: Real>(x: T) -> (T, T) {
    let eps = T::epsilon();
    let half_x = x * T::lit(0.5);
    let y = half_x * half_x;
    let log_half_x = half_x.ln();
    let gamma = T::euler_gamma();

    // K0 = -(ln(x/2) + γ) I0 + Σ_{k≥1} H_k y^k / (k!)^2
    let mut term = T::one();
    let mut i0 = T::one();
    let mut harmonic = T::zero();
    let mut tail = T::zero();
    // K1 = 1/x + ln(x/2) I1 − (x/4) Σ_{k≥0} (ψ(k+1) + ψ(k+2)) y^k / (k!(k+1)!)
    let mut term1 = T::one();
    let mut i1_sum = T::one();
    let mut psi_sum = -T::lit(2.0) * gamma + T::one();
    let mut k = 1usize;
    loop {
        let kt = T::count(k);
        term = term * y / (kt * kt);
        harmonic = harmonic + kt.recip();
        i0 = i0 + term;
        tail = tail + harmonic * term;

        term1 = term1 * y / (kt * (kt + T::one()));
        i1_sum = i1_sum + term1;
        let psi = -T::lit(2.0) * gamma + T::lit(2.0) * harmonic + (kt + T::one()).recip();
        psi_sum = psi_sum + psi * term1;

        if term <= eps * T::lit(1e-3) * i0 && k > 2 {
            break;
        }
        k += 1;
    }
    let k0 = -(log_half_x + gamma) * i0 + tail;
    let k1 = x.recip() + log_half_x * half_x * i1_sum - x * T::lit(0.25) * psi_sum;
    (k0, k1)
}

fn k0_k1_continued_fraction<T: Real>(x: T) -> (T, T) {
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut b = two * (T::one() + x);
    let mut d = b.recip();
    let mut h = d;
    let mut delh = d;
    let mut q1 = T::zero();
    let mut q2 = T::one();
    let a1 = T::lit(0.25);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = T::one() + q * delh;
    for i in 2..100_000usize {
        let it = T::count(i);
        a = a - two * (it - T::one());
        c = -a * c / it;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q = q + c * qnew;
        b = b + two;
        d = (b + a * d).recip();
        delh = (b * d - T::one()) * delh;
        h = h + delh;
        let dels = q * delh;
        s = s + dels;
        if (dels / s).abs() < eps * T::lit(0.25) {
            break;
        }
    }
    h = a1 * h;
    let k0 = (T::pi() / (two * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + T::lit(0.5) - h) / x;
    (k0, k1)
}

/// `Γ(k/2)` for a positive integer `k`.
pub fn gamma_half_integer<T: Real>(k: u32) -> T {
    assert!(k >= 1, "Gamma(k/2) needs k >= 1");
    let (mut g, mut x) = if k.is_multiple_of(2) {
        (T::one(), T::one())
    } else {
        (T::pi().sqrt(), T::lit(0.5))
    };
    let target = T::lit(k as f64 / 2.0);
    while x < target {
        g = g * x;
        x = x + T::one();
    }
    g
}

/// Surface area `ω_{n-1} = 2 π^{n/2} / Γ(n/2)` of the unit sphere in ℝⁿ.
pub fn sphere_area<T: Real>(n: usize) -> T {
    let half = T::lit(n as f64 / 2.0);
    T::lit(2.0) * T::pi().powf(half) / gamma_half_integer::<T>(n as u32)
}

/// Normalized Green profile `G(r)` for `n ∈ {1, 2, 3}`.
///
/// At `r = 0` the profile is `1/2` for `n = 1` and `+∞` (integrable singularity) for `n = 2, 3`.
pub fn green_profile<T: Real>(n: usize, r: T) -> Result<T> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension { n, reason: "physical Green profile needs n <= 3" });
    }
    if !(r >= T::zero()) {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    if r == T::zero() {
        return Ok(if n == 1 { T::lit(0.5) } else { T::infinity() });
    }
    let nu = BesselOrder::for_dimension(n)?;
    let m = bessel_k(nu, r)?;
    let two_pi = T::lit(2.0) * T::pi();
    Ok(match n {
        1 => r.sqrt() * m / two_pi.sqrt(),
        2 => m / two_pi,
        _ => m / (two_pi * (two_pi * r).sqrt()),
    })
}

/// Green function `k(r; d) = d^{-n/2} G(r / √d)`.
pub fn green_eval<T: Real>(p: GreenParams<T>, r: T) -> Result<T> {
    let sd = p.d.sqrt();
    let g = green_profile(p.n, r / sd)?;
    Ok(g / sd.powi(p.n as i32))
}

/// Radial Fourier transform `1 / (1 + d s²)` of `k(·; d)`, valid in every dimension.
#[inline]
pub fn green_fourier<T: Real>(d: T, s: T) -> T {
    debug_assert!(d > T::zero() && s >= T::zero());
    (T::one() + d * s * s).recip()
}

/// `‖k(·; d)‖²_{L²(ℝⁿ)} = d^{-n/2} Γ(2 − n/2) / (2^{n+1} π^{(n−1)/2} Γ(3/2))`, finite only for `n ≤ 3`.
pub fn green_l2_norm_sq<T: Real>(n: usize, d: T) -> Result<T> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension { n, reason: "the Green function is not square integrable for n >= 4" });
    }
    if !(d > T::zero()) {
        return Err(Error::Domain(format!("diffusion constant must be positive, got {d}")));
    }
    let pi = T::pi();
    let num = gamma_half_integer::<T>((4 - n) as u32);
    let den = T::lit(2f64.powi(n as i32 + 1)) * pi.powf(T::lit((n as f64 - 1.0) / 2.0)) * gamma_half_integer::<T>(3);
    Ok(num / den / d.sqrt().powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Float, One};
    use crate::quadrature::{integrate, radial_quadrature};
    use crate::scalar::Quad;
    use std::f64::consts::PI;

    /// Oracle: the defining integral, by adaptive quadrature.
    fn bessel_k_integral(nu: f64, r: f64) -> f64 {
        radial_quadrature(|s: f64| (-r * s.cosh()).exp() * (nu * s).cosh(), 1e-13).unwrap()
    }

    const REFERENCE: [(f64, f64, f64); 9] = [
        (1e-8, 18.536612259610778409, 99999999.999999904817),
        (0.1, 2.4270690247020166125, 9.8538447808706061348),
        (1.5, 0.21380556264752573672, 0.27738780045684381609),
        (1.999, 0.11403383058923292414, 0.1400498420771096829),
        (2.0, 0.11389387274953343565, 0.13986588181652242728),
        (2.001, 0.1137540987366846116, 0.13968218830176753496),
        (5.0, 0.0036910983340425942747, 0.0040446134454521642084),
        (20.0, 5.7412378153365242927e-10, 5.8830579695570381777e-10),
        (50.0, 3.4101677497894955139e-23, 3.4441022267175556126e-23),
    ];

    #[test]
    fn integer_orders_match_reference_values() {
        for &(r, k0, k1) in &REFERENCE {
            let a = bessel_k(BesselOrder::ZERO, r).unwrap();
            let b = bessel_k(BesselOrder::ONE, r).unwrap();
            assert!(((a - k0) / k0).abs() < 1e-12, "K0({r}) = {a}, want {k0}");
            assert!(((b - k1) / k1).abs() < 1e-12, "K1({r}) = {b}, want {k1}");
        }
    }

    #[test]
    fn quad_precision_bessel_beats_f64() {
        // K0(1) and K1(3) to 30 digits
        let k0 = bessel_k(BesselOrder::ZERO, Quad::one()).unwrap();
        let want = Quad::from_parts(0.42102443824070834, -9.659705789588543e-18);
        assert!(((k0 - want) / want).abs() < Quad::lit(1e-30));
        let k1 = bessel_k(BesselOrder::ONE, Quad::lit(3.0)).unwrap();
        let want = Quad::from_parts(0.040156431128194184, 5.661632965823687e-19);
        assert!(((k1 - want) / want).abs() < Quad::lit(1e-30));
    }

    #[test]
    fn switchover_agrees_with_defining_integral() {
        for &r in &[0.5, 1.0, 1.9999, 2.0, 2.0001, 3.0, 10.0] {
            for (order, nu) in [(BesselOrder::ZERO, 0.0), (BesselOrder::ONE, 1.0)] {
                let v = bessel_k(order, r).unwrap();
                let oracle = bessel_k_integral(nu, r);
                assert!(((v - oracle) / oracle).abs() < 1e-11, "nu={nu} r={r}: {v} vs {oracle}");
            }
        }
    }

    #[test]
    fn half_orders() {
        let v = bessel_k(BesselOrder::HALF, 1.0f64).unwrap();
        let closed = (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!((v - closed).abs() < 1e-15);
        assert!((v - 0.461068).abs() < 1e-6);
        assert!((v - bessel_k_integral(0.5, 1.0)).abs() < 1e-12);
        let minus = bessel_k(BesselOrder::new(-0.5).unwrap(), 2.0f64).unwrap();
        assert_eq!(minus, bessel_k(BesselOrder::HALF, 2.0).unwrap());
        let t = bessel_k(BesselOrder::THREE_HALVES, 1.7f64).unwrap();
        assert!(((t - bessel_k_integral(1.5, 1.7)) / t).abs() < 1e-12);
        let k0 = bessel_k(BesselOrder::ZERO, 1.0f64).unwrap();
        assert!((k0 - 0.421024).abs() < 1e-6);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_k(BesselOrder::ZERO, 0.0).is_err());
        assert!(bessel_k(BesselOrder::ZERO, -1.0).is_err());
        assert!(bessel_k(BesselOrder::ZERO, f64::NAN).is_err());
        assert!(BesselOrder::new(0.25).is_err());
        assert!(BesselOrder::new(2.0).is_err());
        assert!(green_profile(4, 1.0).is_err());
        assert!(green_profile(2, -1.0).is_err());
        assert!(green_l2_norm_sq(4, 1.0).is_err());
    }

    #[test]
    fn green_profile_examples() {
        assert_eq!(green_profile(1, 0.0).unwrap(), 0.5);
        assert!(green_profile::<f64>(2, 0.0).unwrap().is_infinite());
        assert!(green_profile::<f64>(3, 0.0).unwrap().is_infinite());
        let g3 = green_profile(3, 1.0).unwrap();
        assert!((g3 - (-1.0f64).exp() / (4.0 * PI)).abs() < 1e-15);
        assert!((g3 - 0.029_274_915_762_159_58).abs() < 1e-15);
        for &r in &[0.01f64, 0.3, 1.0, 7.0] {
            let g1 = green_profile(1, r).unwrap();
            assert!((g1 - (-r).exp() / 2.0).abs() < 1e-15);
        }
        assert!(green_profile(2, 1e-6).unwrap() > green_profile(2, 1e-3).unwrap());
    }

    #[test]
    fn green_eval_examples() {
        let p = GreenParams::new(1, 4.0f64).unwrap();
        assert!((green_eval(p, 0.0).unwrap() - 0.25).abs() < 1e-15);
        let p = GreenParams::new(1, 1.0f64).unwrap();
        assert!((green_eval(p, 2.0).unwrap() - (-2.0f64).exp() / 2.0).abs() < 1e-15);
        let p = GreenParams::new(3, 1.0f64).unwrap();
        assert!((green_eval(p, 1.0).unwrap() - (-1.0f64).exp() / (4.0 * PI)).abs() < 1e-15);
        assert!(GreenParams::new(1, 0.0).is_err());
        assert!(GreenParams::new(1, -2.0).is_err());
    }

    #[test]
    fn green_fourier_examples() {
        assert_eq!(green_fourier(1.0, 0.0), 1.0);
        assert_eq!(green_fourier(1.0, 1.0), 0.5);
        assert!((green_fourier(3.0f64, 2.0) - 1.0 / 13.0).abs() < 1e-16);
    }

    #[test]
    fn green_l2_norm_examples_and_oracles() {
        assert!((green_l2_norm_sq(1, 1.0f64).unwrap() - 0.25).abs() < 1e-15);
        let v3 = green_l2_norm_sq(3, 1.0).unwrap();
        assert!((v3 - 1.0 / (8.0 * PI)).abs() < 1e-15);
        let v34 = green_l2_norm_sq(3, 4.0).unwrap();
        assert!((v34 - 1.0 / (64.0 * PI)).abs() < 1e-16);
        // oracle: ∫(e^{-|x|}/2)^2 dx and ∫ 4π r² (e^{-r}/(4π r))² dr
        let o1 = 2.0 * radial_quadrature(|x: f64| ((-x).exp() / 2.0).powi(2), 1e-13).unwrap();
        assert!((o1 - 0.25).abs() < 1e-13);
        let o3 = radial_quadrature(|r: f64| 4.0 * PI * ((-r).exp() / (4.0 * PI)).powi(2), 1e-13).unwrap();
        assert!((o3 - v3).abs() < 1e-14);
    }

    #[test]
    fn positivity_and_pde_residual() {
        for n in 1..=3 {
            let p = GreenParams::new(n, 1.3).unwrap();
            for i in 1..200 {
                assert!(green_eval(p, i as f64 * 0.1).unwrap() > 0.0);
            }
        }
        // d k'' − k = 0 away from the origin, second-order differences converge as h².
        let d = 0.7;
        let p = GreenParams::new(1, d).unwrap();
        let k = |x: f64| green_eval(p, x.abs()).unwrap();
        let residual = |h: f64| {
            (1..40)
                .map(|i| {
                    let x = 0.5 + i as f64 * 0.1;
                    (d * (k(x + h) - 2.0 * k(x) + k(x - h)) / (h * h) - k(x)).abs()
                })
                .fold(0.0, f64::max)
        };
        let r1 = residual(0.02);
        let r2 = residual(0.01);
        assert!(r1 < 1e-4);
        assert!((r1 / r2 - 4.0).abs() < 0.1, "ratio {}", r1 / r2);
    }

    #[test]
    fn gamma_and_sphere_area() {
        assert!((gamma_half_integer::<f64>(1) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half_integer::<f64>(3) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(gamma_half_integer::<f64>(8), 6.0);
        assert!((sphere_area::<f64>(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area::<f64>(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area::<f64>(3) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn two_dimensional_green_has_unit_mass_near_origin_singularity() {
        let p = GreenParams::new(2, 1.0).unwrap();
        let inner = integrate(|r: f64| 2.0 * PI * r * green_eval(p, r).unwrap(), 0.0, 1.0, 1e-12).unwrap();
        assert!(inner.value > 0.0 && inner.value < 1.0);
    }
}
