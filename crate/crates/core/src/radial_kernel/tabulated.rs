//! Sampled Fourier profiles: monotone piecewise-cubic Hermite interpolation
//! (Fritsch–Carlson slope limiting) with a declared tail beyond the last sample.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::DecayHint;

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile<T> {
    s: Vec<T>,
    v: Vec<T>,
    slopes: Vec<T>,
    decay: DecayHint<T>,
}

impl<T: Real> TabulatedProfile<T> {
    /// Builds the interpolant. `s` must be nonnegative, finite and strictly increasing.
    pub fn new(s: Vec<T>, v: Vec<T>, decay: DecayHint<T>) -> Result<Self> {
        if s.len() != v.len() {
            return Err(Error::LengthMismatch { expected: s.len(), found: v.len() });
        }
        if s.len() < 2 {
            return Err(Error::Domain("a tabulated profile needs at least two samples".into()));
        }
        for (i, (&a, &b)) in s.iter().zip(&v).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        if s[0] < T::zero() {
            return Err(Error::Domain("frequencies must be nonnegative".into()));
        }
        if let Some(i) = s.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(format!("frequencies must be strictly increasing (rows {} and {})", i + 1, i + 2)));
        }
        let slopes = fritsch_carlson_slopes(&s, &v);
        Ok(Self { s, v, slopes, decay })
    }

    /// Parses two whitespace- or comma-separated columns `s K̂(s)`; `#` starts a comment.
    pub fn parse(text: &str, decay: DecayHint<T>) -> Result<Self> {
        let mut s = Vec::new();
        let mut v = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
            if fields.len() != 2 {
                return Err(Error::Parse { line: lineno + 1, message: format!("expected 2 columns, found {}", fields.len()) });
            }
            let mut pair = [T::zero(); 2];
            for (slot, field) in pair.iter_mut().zip(&fields) {
                let x: f64 = field.parse().map_err(|e| Error::Parse { line: lineno + 1, message: format!("{field:?}: {e}") })?;
                *slot = T::lit(x);
            }
            s.push(pair[0]);
            v.push(pair[1]);
        }
        Self::new(s, v, decay)
    }

    pub fn from_path(path: impl AsRef<Path>, decay: DecayHint<T>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text, decay)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn decay(&self) -> DecayHint<T> {
        self.decay
    }

    pub fn frequencies(&self) -> &[T] {
        &self.s
    }

    pub fn values(&self) -> &[T] {
        &self.v
    }

    /// Interpolated value; constant below the first sample, decay-hint tail above the last.
    pub fn eval(&self, x: T) -> T {
        let n = self.s.len();
        if x <= self.s[0] {
            return self.v[0];
        }
        if x >= self.s[n - 1] {
            return self.decay.extrapolate(self.s[n - 1], self.v[n - 1], x);
        }
        let k = self.s.partition_point(|&t| t <= x) - 1;
        let h = self.s[k + 1] - self.s[k];
        let t = (x - self.s[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * self.v[k] + h10 * h * self.slopes[k] + h01 * self.v[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

fn fritsch_carlson_slopes<T: Real>(s: &[T], v: &[T]) -> Vec<T> {
    let n = s.len();
    let h: Vec<T> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<T> = (0..n - 1).map(|k| (v[k + 1] - v[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut m = vec![T::zero(); n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > T::zero() {
            m[k] = (h[k] * delta[k - 1] + h[k - 1] * delta[k]) / (h[k - 1] + h[k]);
        }
    }
    m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    let nine = T::lit(9.0);
    for k in 0..n - 1 {
        if delta[k] == T::zero() {
            m[k] = T::zero();
            m[k + 1] = T::zero();
            continue;
        }
        let a = m[k] / delta[k];
        let b = m[k + 1] / delta[k];
        if a < T::zero() {
            m[k] = T::zero();
        }
        if b < T::zero() {
            m[k + 1] = T::zero();
        }
        let r = a * a + b * b;
        if r > nine {
            let tau = T::lit(3.0) / r.sqrt();
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    m
}

/// Shape-preserving three-point end slope.
fn end_slope<T: Real>(h0: T, h1: T, d0: T, d1: T) -> T {
    let m = ((T::lit(2.0) * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= T::zero() {
        T::zero()
    } else if d0 * d1 <= T::zero() && m.abs() > T::lit(3.0) * d0.abs() {
        T::lit(3.0) * d0
    } else {
        m
    }
}
