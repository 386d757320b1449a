//! Numerical radial Fourier transforms on ℝⁿ.
//!
//! For a radial function `g(|x|)` the transform `∫ e^{-ix·ξ} g(|x|) dx` depends only
//! on `s = |ξ|` and reduces to a Hankel transform
//! `(2π)^{n/2} s^{1-n/2} ∫₀^∞ J_{n/2-1}(sr) g(r) r^{n/2} dr`.
//! The cases `n = 1, 3` use the elementary kernels `cos` and `sin`.

use crate::error::{Error, Result};
use crate::quadrature::integrate_semi_infinite;
use crate::scalar::Real;
use crate::special_fn::sphere_area;

/// `F_n[g](s)` for a radial profile `g`, by adaptive quadrature over `r ∈ [0, ∞)`.
///
/// `scale` is the width of the first quadrature panel and should be comparable to the
/// length scale on which `g` varies.
pub fn radial_fourier<T: Real, F: Fn(T) -> T>(n: usize, g: F, s: T, scale: T, tol: T) -> Result<T> {
    if n == 0 {
        return Err(Error::UnsupportedDimension { n, reason: "dimension must be positive" });
    }
    if !(s >= T::zero()) {
        return Err(Error::Domain(format!("frequency must be nonnegative, got {s}")));
    }
    let two = T::lit(2.0);
    let pi = T::pi();
    if s == T::zero() {
        let area = sphere_area::<T>(n);
        let v = integrate_semi_infinite(|r: T| r.powi(n as i32 - 1) * g(r), scale, tol)?;
        return Ok(area * v.value);
    }
    let v = match n {
        1 => two * integrate_semi_infinite(|r: T| (s * r).cos() * g(r), scale, tol)?.value,
        3 => {
            let four_pi = T::lit(4.0) * pi;
            four_pi / s * integrate_semi_infinite(|r: T| r * (s * r).sin() * g(r), scale, tol)?.value
        }
        _ => {
            let twice_nu = n as i32 - 2;
            let half_n = T::lit(n as f64 / 2.0);
            let prefactor = (two * pi).powf(half_n) * s.powf(T::one() - half_n);
            let inner = integrate_semi_infinite(
                |r: T| bessel_j(twice_nu, s * r) * g(r) * r.powf(half_n),
                scale,
                tol,
            )?;
            prefactor * inner.value
        }
    };
    Ok(v)
}

/// Inverse radial transform `(2π)^{-n} F_n[ĝ](r)`.
pub fn radial_inverse_fourier<T: Real, F: Fn(T) -> T>(n: usize, ghat: F, r: T, scale: T, tol: T) -> Result<T> {
    let f = radial_fourier(n, ghat, r, scale, tol)?;
    Ok(f / (T::lit(2.0) * T::pi()).powi(n as i32))
}

/// Bessel function of the first kind `J_ν(x)`, `ν = twice_nu / 2 ≥ -1/2`, `x ≥ 0`.
///
/// Integer orders use the trapezoidal rule on Bessel's integral (spectrally accurate for a
/// periodic integrand); half-integer orders use the spherical closed forms and upward recurrence.
pub(crate) fn bessel_j<T: Real>(twice_nu: i32, x: T) -> T {
    debug_assert!(twice_nu >= -1);
    if twice_nu % 2 == 0 {
        bessel_j_integer((twice_nu / 2) as u32, x)
    } else {
        bessel_j_half(twice_nu, x)
    }
}

fn bessel_j_integer<T: Real>(order: u32, x: T) -> T {
    if x == T::zero() {
        return if order == 0 { T::one() } else { T::zero() };
    }
    // J_m(x) = (1/2π) ∫₀^{2π} cos(mθ − x sin θ) dθ; aliasing error ~ J_M(x), negligible once M ≳ x + digits.
    let digits = -T::epsilon().log10().to_f64_lossy();
    let xf = x.to_f64_lossy().abs();
    let points = (xf + 2.0 * digits + 8.0 * xf.cbrt() + order as f64 + 16.0).ceil() as usize;
    let m = T::lit(order as f64);
    let step = T::lit(2.0) * T::pi() / T::count(points);
    let mut sum = T::zero();
    for k in 0..points {
        let theta = step * T::count(k);
        sum = sum + (m * theta - x * theta.sin()).cos();
    }
    sum / T::count(points)
}

fn bessel_j_half<T: Real>(twice_nu: i32, x: T) -> T {
    if x == T::zero() {
        return if twice_nu == -1 { T::infinity() } else { T::zero() };
    }
    let norm = (T::lit(2.0) / (T::pi() * x)).sqrt();
    let j_minus = norm * x.cos();
    if twice_nu == -1 {
        return j_minus;
    }
    let mut j_prev = j_minus;
    let mut j_curr = norm * x.sin();
    let mut nu = T::lit(0.5);
    let mut t = 1;
    while t < twice_nu {
        let next = T::lit(2.0) * nu / x * j_curr - j_prev;
        j_prev = j_curr;
        j_curr = next;
        nu = nu + T::one();
        t += 2;
    }
    j_curr
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bessel_j_reference_values() {
        // mpmath besselj at 30 digits
        let cases = [
            (0, 1.0f64, 0.765_197_686_557_966_6f64),
            (0, 10.0, -0.245_935_764_451_348_3),
            (0, 100.5, 0.054_436_573_814_413_59),
            (2, 2.5, 0.497_094_102_464_274_4),
        ];
        for (twice, x, want) in cases {
            let v = bessel_j(twice, x);
            assert!((v - want).abs() < 1e-14, "J_{}({x}) = {v}, want {want}", twice / 2);
        }
        let x = 1.3f64;
        assert!((bessel_j(1, x) - (2.0 / (PI * x)).sqrt() * x.sin()).abs() < 1e-15);
        let j32 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
        assert!((bessel_j(3, x) - j32).abs() < 1e-14);
    }

    #[test]
    fn gaussian_transform_every_dimension() {
        // F_n[e^{-r²/4}](s) = (4π)^{n/2} e^{-s²}
        for n in 1..=4 {
            for &s in &[0.0, 0.3, 1.0, 2.5] {
                let v = radial_fourier(n, |r: f64| (-r * r / 4.0).exp(), s, 1.0, 1e-12).unwrap();
                let want = (4.0 * PI).powf(n as f64 / 2.0) * (-s * s).exp();
                assert!(((v - want) / want).abs() < 1e-9, "n={n} s={s}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn inverse_transform_recovers_gaussian() {
        let v = radial_inverse_fourier(2, |s: f64| 4.0 * PI * (-s * s).exp(), 1.5, 1.0, 1e-12).unwrap();
        assert!((v - (-1.5f64 * 1.5 / 4.0).exp()).abs() < 1e-10);
    }
}
