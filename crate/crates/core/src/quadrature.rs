//! Adaptive Gauss–Legendre quadrature on finite intervals and on `[0, ∞)`.
//!
//! Each subinterval is integrated with a fixed-order Gauss–Legendre rule and with
//! the same rule on its two halves; the difference is the local error estimate.
//! The worst subinterval is bisected until the summed estimate meets the relative
//! tolerance (or a round-off floor). Nodes are computed by Newton iteration in the
//! working precision, so quad-precision integrals are not capped at `f64` accuracy.
//!
//! The half line is covered by geometrically growing panels `[0, c], [c, 2c],
//! [2c, 4c], …` until two consecutive panels contribute less than the tolerance.

use crate::error::{Error, Result};
use crate::scalar::Real;

const RULE_ORDER: usize = 16;
const MAX_INTERVALS: usize = 4000;
const MAX_PANELS: usize = 256;
/// Panels must reach at least this multiple of the scale before the tail test may stop the sweep.
const MIN_EXTENT: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = T::lit(guess);
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            nodes.push(x);
            weights.push(T::lit(2.0) / ((T::one() - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Integral and integral of `|f|` over `[a, b]`.
    fn apply<F: Fn(T) -> T>(&self, f: &F, a: T, b: T) -> (T, T) {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let mut s = T::zero();
        let mut sa = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            s = s + w * v;
            sa = sa + w * v.abs();
        }
        (s * half, sa * half.abs())
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kt = T::count(k);
        let p2 = ((T::lit(2.0) * kt - T::one()) * x * p1 - (kt - T::one()) * p0) / kt;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nt = T::count(n);
    let d = nt * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    abs: T,
    left: (T, T),
    right: (T, T),
    error: T,
}

fn segment<T: Real, F: Fn(T) -> T>(rule: &GaussLegendre<T>, f: &F, a: T, b: T, whole: T) -> Segment<T> {
    let m = (a + b) * T::lit(0.5);
    let left = rule.apply(f, a, m);
    let right = rule.apply(f, m, b);
    let value = left.0 + right.0;
    Segment {
        a,
        b,
        value,
        abs: left.1 + right.1,
        left,
        right,
        error: (whole - value).abs(),
    }
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
///
/// Stops when the error estimate is below `max(tol * |I|, abs_floor)` or the
/// round-off floor of the working precision.
pub fn integrate_with_floor<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    tol: T,
    abs_floor: T,
) -> Result<QuadratureResult<T>> {
    if !(tol > T::zero()) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    if a == b {
        return Ok(QuadratureResult { value: T::zero(), error: T::zero(), evaluations: 0 });
    }
    let rule = GaussLegendre::<T>::new(RULE_ORDER);
    integrate_rule(&rule, &f, a, b, tol, abs_floor)
}

fn integrate_rule<T: Real, F: Fn(T) -> T>(
    rule: &GaussLegendre<T>,
    f: &F,
    a: T,
    b: T,
    tol: T,
    abs_floor: T,
) -> Result<QuadratureResult<T>> {
    let per_segment = 2 * rule.order();
    let (whole, _) = rule.apply(f, a, b);
    let mut segments = vec![segment(rule, f, a, b, whole)];
    let mut evaluations = rule.order() + per_segment;
    loop {
        let value = segments.iter().fold(T::zero(), |s, g| s + g.value);
        let error = segments.iter().fold(T::zero(), |s, g| s + g.error);
        let abs = segments.iter().fold(T::zero(), |s, g| s + g.abs);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureFailure {
                estimate: value.to_f64_lossy(),
                error_bound: error.to_f64_lossy(),
            });
        }
        let roundoff = T::lit(50.0) * T::epsilon() * abs;
        let target = (tol * value.abs()).max(abs_floor).max(roundoff);
        if error <= target {
            return Ok(QuadratureResult { value, error, evaluations });
        }
        if segments.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure {
                estimate: value.to_f64_lossy(),
                error_bound: error.to_f64_lossy(),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let g = segments.swap_remove(worst);
        let m = (g.a + g.b) * T::lit(0.5);
        if !(m > g.a.min(g.b) && m < g.a.max(g.b)) {
            // no further bisection possible in the working precision
            return Err(Error::QuadratureFailure {
                estimate: value.to_f64_lossy(),
                error_bound: error.to_f64_lossy(),
            });
        }
        segments.push(segment(rule, f, g.a, m, g.left.0));
        segments.push(segment(rule, f, m, g.b, g.right.0));
        evaluations += 2 * per_segment;
    }
}

/// Adaptive integration over `[a, b]` to relative tolerance `tol`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<QuadratureResult<T>> {
    integrate_with_floor(f, a, b, tol, T::zero())
}

/// Integral of `f` over `[0, ∞)` with geometric panels starting at width `scale`.
pub fn integrate_semi_infinite<T: Real, F: Fn(T) -> T>(
    f: F,
    scale: T,
    tol: T,
) -> Result<QuadratureResult<T>> {
    integrate_semi_infinite_with_floor(f, scale, tol, T::zero())
}

/// As [`integrate_semi_infinite`], accepting any estimate whose error is below `abs_floor`.
///
/// Needed when `f` carries evaluation noise of known absolute size, which a purely
/// relative criterion cannot resolve once the integral itself is at noise level.
pub fn integrate_semi_infinite_with_floor<T: Real, F: Fn(T) -> T>(
    f: F,
    scale: T,
    tol: T,
    abs_floor: T,
) -> Result<QuadratureResult<T>> {
    if !(tol > T::zero()) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    if !(scale > T::zero()) || !scale.is_finite() {
        return Err(Error::Domain("quadrature scale must be positive".into()));
    }
    let rule = GaussLegendre::<T>::new(RULE_ORDER);
    let mut total = T::zero();
    let mut error = T::zero();
    let mut evaluations = 0;
    let mut lo = T::zero();
    let mut hi = scale;
    let mut quiet = 0;
    let tenth = T::lit(0.1);
    for _ in 0..MAX_PANELS {
        let floor = (tenth * tol * total.abs()).max(abs_floor);
        let panel = integrate_rule(&rule, &f, lo, hi, tol * T::lit(0.5), floor)?;
        total = total + panel.value;
        error = error + panel.error;
        evaluations += panel.evaluations;
        if panel.value.abs() <= floor && hi >= scale * T::lit(MIN_EXTENT) {
            quiet += 1;
            if quiet >= 2 {
                // geometric panels: the remaining tail is bounded by the last panel for decay faster than 1/s
                error = error + panel.value.abs();
                return Ok(QuadratureResult { value: total, error, evaluations });
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        hi = hi + hi;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::QuadratureFailure { estimate: total.to_f64_lossy(), error_bound: error.to_f64_lossy() })
}

/// `∫₀^∞ g(s) ds` to relative tolerance `tol` with unit panel scale.
pub fn radial_quadrature<T: Real, F: Fn(T) -> T>(g: F, tol: T) -> Result<T> {
    integrate_semi_infinite(g, T::one(), tol).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Float, One};
    use crate::scalar::Quad;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::<f64>::new(RULE_ORDER);
        let sum: f64 = rule.weights().iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // degree 2n-1 = 31 is exact
        let (v, _) = rule.apply(&|x: f64| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn spec_examples() {
        let e = radial_quadrature(|s: f64| (-s).exp(), 1e-10).unwrap();
        assert!((e - 1.0).abs() < 1e-10);
        let r = radial_quadrature(|s: f64| 1.0 / ((1.0 + s * s) * (1.0 + 4.0 * s * s)), 1e-10).unwrap();
        assert!((r - std::f64::consts::PI / 6.0).abs() < 1e-10 * r);
        let g = radial_quadrature(|s: f64| s * (-s * s).exp(), 1e-10).unwrap();
        assert!((g - 0.5).abs() < 1e-10);
    }

    #[test]
    fn zero_integrand_terminates() {
        let r = integrate_semi_infinite(|_s: f64| 0.0, 1.0, 1e-10).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn integrable_endpoint_singularities() {
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10).unwrap().value;
        assert!((v - 2.0).abs() < 1e-9);
        let v = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-12).unwrap().value;
        assert!((v + 1.0).abs() < 1e-11);
    }

    #[test]
    fn quad_precision_reaches_quad_accuracy() {
        let v = radial_quadrature(|s: Quad| Quad::one() / (Quad::one() + s * s), Quad::lit(1e-28)).unwrap();
        let expected = Quad::pi() / Quad::lit(2.0);
        assert!(((v - expected) / expected).abs() < Quad::lit(1e-27));
    }

    #[test]
    fn reports_failure_for_divergent_integral() {
        let err = radial_quadrature(|s: f64| 1.0 / (1.0 + s), 1e-10).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }
}
