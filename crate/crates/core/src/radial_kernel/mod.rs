//! Radial kernels described by their Fourier profile, and the radial `Hᵐ` inner product
//! `⟨K₁, K₂⟩ = ∫₀^∞ s^{n-1} (1+s²)^m K̂₁(s) K̂₂(s) ds`.
//!
//! The inner product carries no surface-area or `(2π)^{-n}` factor. It differs from the
//! usual Sobolev inner product on ℝⁿ by the constant `ω_{n-1}/(2π)^n`, which changes no
//! minimizer; see [`standard_l2_factor`] for the conversion.

mod tabulated;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::integrate_semi_infinite;
use crate::scalar::{compensated_sum, Real};
use crate::special_fn::{green_eval, green_fourier, sphere_area, GreenParams};

pub use tabulated::TabulatedProfile;

/// Shared, thread-safe radial profile.
pub type Profile<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Asymptotic behaviour of `K̂(s)` as `s → ∞`.
///
/// Used to choose the first quadrature panel and to extrapolate tabulated data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayHint<T> {
    /// Nothing is known; quadrature starts at unit scale and extrapolation returns zero.
    Unknown,
    /// `K̂(s) ~ exp(-rate · s²)`.
    Gaussian { rate: T },
    /// `K̂(s) ~ exp(-rate · s)`.
    Exponential { rate: T },
    /// `K̂(s) ~ s^{-power}`.
    Algebraic { power: T },
}

impl<T: Real> DecayHint<T> {
    /// Natural frequency scale of the tail.
    pub fn scale(&self) -> T {
        match *self {
            DecayHint::Gaussian { rate } if rate > T::zero() => rate.sqrt().recip(),
            DecayHint::Exponential { rate } if rate > T::zero() => rate.recip(),
            _ => T::one(),
        }
    }

    /// Continues a profile beyond its last known sample `(s0, v0)`.
    pub fn extrapolate(&self, s0: T, v0: T, s: T) -> T {
        match *self {
            DecayHint::Unknown => T::zero(),
            DecayHint::Gaussian { rate } => v0 * (-rate * (s * s - s0 * s0)).exp(),
            DecayHint::Exponential { rate } => v0 * (-rate * (s - s0)).exp(),
            DecayHint::Algebraic { power } => {
                if s0 > T::zero() {
                    v0 * (s0 / s).powf(power)
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Sobolev index `m ≥ 0` of the fitting norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SobolevIndex(pub u32);

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex(0);

    pub fn get(self) -> u32 {
        self.0
    }

    /// Weight `(1 + s²)^m`.
    pub fn weight<T: Real>(self, s: T) -> T {
        (T::one() + s * s).powi(self.0 as i32)
    }
}

impl fmt::Display for SobolevIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H^{}", self.0)
    }
}

/// A real radial kernel on ℝⁿ.
#[derive(Clone)]
pub struct RadialKernel<T> {
    dim: usize,
    fourier: Profile<T>,
    physical: Option<Profile<T>>,
    decay: DecayHint<T>,
    frequency_scale: T,
    label: String,
}

impl<T: Real> fmt::Debug for RadialKernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialKernel")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("physical", &self.physical.is_some())
            .field("decay", &self.decay)
            .finish()
    }
}

impl<T: Real> RadialKernel<T> {
    /// Kernel given by its Fourier profile `s ↦ K̂(s)`.
    pub fn from_fourier<F>(dim: usize, fourier: F) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::UnsupportedDimension { n: 0, reason: "dimension must be positive" });
        }
        Ok(Self {
            dim,
            fourier: Arc::new(fourier),
            physical: None,
            decay: DecayHint::Unknown,
            frequency_scale: T::one(),
            label: String::from("custom"),
        })
    }

    /// Attaches a physical-space profile `r ↦ K(r)`.
    pub fn with_physical<F>(mut self, physical: F) -> Self
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        self.physical = Some(Arc::new(physical));
        self
    }

    /// Sets the decay hint; the quadrature frequency scale follows it.
    pub fn with_decay(mut self, decay: DecayHint<T>) -> Self {
        self.frequency_scale = decay.scale();
        self.decay = decay;
        self
    }

    /// Overrides the frequency scale used as the first quadrature panel width.
    pub fn with_frequency_scale(mut self, scale: T) -> Self {
        if scale > T::zero() && scale.is_finite() {
            self.frequency_scale = scale;
        }
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The zero kernel.
    pub fn zero(dim: usize) -> Result<Self> {
        Ok(Self::from_fourier(dim, |_| T::zero())?.with_physical(|_| T::zero()).with_label("zero"))
    }

    /// The Green function `k(·; d)`, `K̂(s) = 1/(1 + d s²)`.
    ///
    /// The physical profile is attached for `n ≤ 3`.
    pub fn green(dim: usize, d: T) -> Result<Self> {
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::Domain(format!("diffusion constant must be positive and finite, got {d}")));
        }
        let k = Self::from_fourier(dim, move |s| green_fourier(d, s))?
            .with_decay(DecayHint::Algebraic { power: T::lit(2.0) })
            .with_frequency_scale(d.sqrt().recip())
            .with_label(format!("green(d={d})"));
        if dim <= 3 {
            let p = GreenParams::new(dim, d)?;
            Ok(k.with_physical(move |r| green_eval(p, r).unwrap_or(T::nan())))
        } else {
            Ok(k)
        }
    }

    /// `Σ cⱼ k(·; dⱼ)`.
    pub fn green_sum(dim: usize, diffusions: &[T], coefficients: &[T]) -> Result<Self> {
        if diffusions.len() != coefficients.len() {
            return Err(Error::LengthMismatch { expected: diffusions.len(), found: coefficients.len() });
        }
        if let Some(bad) = diffusions.iter().find(|d| !(**d > T::zero())) {
            return Err(Error::Domain(format!("diffusion constant must be positive, got {bad}")));
        }
        let ds: Arc<[T]> = diffusions.into();
        let cs: Arc<[T]> = coefficients.into();
        let dmin = ds.iter().copied().fold(T::infinity(), T::min);
        let (fd, fc) = (ds.clone(), cs.clone());
        let mut k = Self::from_fourier(dim, move |s| {
            compensated_sum(fd.iter().zip(fc.iter()).map(|(&d, &c)| c * green_fourier(d, s)))
        })?
        .with_decay(DecayHint::Algebraic { power: T::lit(2.0) })
        .with_label("green sum");
        if dmin.is_finite() {
            k = k.with_frequency_scale(dmin.sqrt().recip());
        }
        if dim <= 3 {
            k = k.with_physical(move |r| {
                compensated_sum(ds.iter().zip(cs.iter()).map(|(&d, &c)| {
                    c * green_eval(GreenParams { n: dim, d }, r).unwrap_or(T::nan())
                }))
            });
        }
        Ok(k)
    }

    /// Kernel interpolated from Fourier samples.
    pub fn tabulated(dim: usize, table: TabulatedProfile<T>) -> Result<Self> {
        let decay = table.decay();
        let table = Arc::new(table);
        Ok(Self::from_fourier(dim, move |s| table.eval(s))?
            .with_decay(decay)
            .with_label("tabulated"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn decay(&self) -> DecayHint<T> {
        self.decay
    }

    pub fn frequency_scale(&self) -> T {
        self.frequency_scale
    }

    /// `K̂(s)`.
    #[inline]
    pub fn fourier(&self, s: T) -> T {
        (self.fourier)(s)
    }

    /// Shared handle to the Fourier profile.
    pub fn fourier_profile(&self) -> Profile<T> {
        self.fourier.clone()
    }

    pub fn has_physical(&self) -> bool {
        self.physical.is_some()
    }

    /// `K(r)` when a physical profile is available.
    pub fn physical(&self, r: T) -> Option<T> {
        self.physical.as_ref().map(|p| p(r))
    }

    pub fn physical_profile(&self) -> Option<Profile<T>> {
        self.physical.clone()
    }
}

/// The Gaussian `K(r) = e^{-r²/4}`, `K̂(s) = (4π)^{n/2} e^{-s²}`.
pub fn gaussian_kernel<T: Real>(n: usize) -> Result<RadialKernel<T>> {
    let amplitude = (T::lit(4.0) * T::pi()).powf(T::lit(n as f64 / 2.0));
    Ok(RadialKernel::from_fourier(n, move |s: T| amplitude * (-s * s).exp())?
        .with_physical(|r: T| (-r * r / T::lit(4.0)).exp())
        .with_decay(DecayHint::Gaussian { rate: T::one() })
        .with_label("gaussian"))
}

/// Default relative tolerance for norms and inner products.
pub fn default_tol<T: Real>() -> T {
    T::lit(1e-10)
}

/// `∫₀^∞ s^{n-1} (1+s²)^m f̂₁(s) f̂₂(s) ds` for plain profiles.
pub fn weighted_inner<T, F, G>(n: usize, m: SobolevIndex, f1: F, f2: G, scale: T, tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
    G: Fn(T) -> T,
{
    let power = n as i32 - 1;
    let r = integrate_semi_infinite(|s: T| s.powi(power) * m.weight(s) * f1(s) * f2(s), scale, tol)?;
    Ok(r.value)
}

/// `⟨K₁, K₂⟩_{Hᵐ_r}` to relative tolerance `tol`.
pub fn hm_inner_tol<T: Real>(k1: &RadialKernel<T>, k2: &RadialKernel<T>, m: SobolevIndex, tol: T) -> Result<T> {
    if k1.dim != k2.dim {
        return Err(Error::DimensionMismatch { expected: k1.dim, found: k2.dim });
    }
    let scale = k1.frequency_scale.min(k2.frequency_scale);
    weighted_inner(k1.dim, m, |s| k1.fourier(s), |s| k2.fourier(s), scale, tol)
}

/// `⟨K₁, K₂⟩_{Hᵐ_r}` to the default tolerance.
pub fn hm_inner<T: Real>(k1: &RadialKernel<T>, k2: &RadialKernel<T>, m: SobolevIndex) -> Result<T> {
    hm_inner_tol(k1, k2, m, default_tol())
}

/// `‖K‖_{Hᵐ_r}`.
pub fn hm_norm<T: Real>(k: &RadialKernel<T>, m: SobolevIndex) -> Result<T> {
    hm_norm_sq_tol(k, m, default_tol()).map(|v| v.sqrt())
}

/// `‖K‖²_{Hᵐ_r}` to relative tolerance `tol`; never negative.
pub fn hm_norm_sq_tol<T: Real>(k: &RadialKernel<T>, m: SobolevIndex, tol: T) -> Result<T> {
    let power = k.dim as i32 - 1;
    let r = integrate_semi_infinite(
        |s: T| {
            let v = k.fourier(s);
            s.powi(power) * m.weight(s) * v * v
        },
        k.frequency_scale,
        tol,
    )?;
    Ok(r.value.max(T::zero()))
}

/// Factor `ω_{n-1} / (2π)^n` converting the radial `L²_r` convention to `‖·‖²_{L²(ℝⁿ)}`.
pub fn standard_l2_factor<T: Real>(n: usize) -> T {
    sphere_area::<T>(n) / (T::lit(2.0) * T::pi()).powi(n as i32)
}

/// Inner products `⟨K, kᵢ⟩` against several profiles, evaluated in parallel.
pub(crate) fn inner_products_parallel<T, F>(
    kernel: &RadialKernel<T>,
    m: SobolevIndex,
    count: usize,
    profile: F,
    scale: impl Fn(usize) -> T + Sync,
    tol: T,
) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(usize, T) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let sc = scale(i).min(kernel.frequency_scale);
            weighted_inner(kernel.dim, m, |s| kernel.fourier(s), |s| profile(i, s), sc, tol)
        })
        .collect()
}
