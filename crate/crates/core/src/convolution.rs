//! Periodic-grid convolution `K ∗ f` and its approximation `Σ αⱼ wⱼ`, where each `wⱼ`
//! solves `dⱼ Δwⱼ − wⱼ + f = 0`.
//!
//! All solves are spectral. The multiplier on the lattice `ξ ∈ (2π/L) ℤⁿ` is the exact
//! continuous symbol `1/(1 + d|ξ|²)`, not a finite-difference one, so a screened-Poisson
//! solve and a Fourier-side convolution with the same symbol coincide to round-off.

use num_traits::Float;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::fitting::GreenExpansion;
use crate::grid::GridField;
use crate::quadrature::integrate_semi_infinite_with_floor;
use crate::radial_kernel::{hm_norm_sq_tol, standard_l2_factor, RadialKernel, SobolevIndex};
use crate::scalar::{two_sum, Quad, Real};

/// Scalars usable by the FFT-based routines.
pub trait FftReal: Real + FftNum {}
impl<T: Real + FftNum> FftReal for T {}

/// Which oracle [`convolve_direct`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionRoute {
    /// Multiply `f̂` by `K̂(|ξ|)` on the frequency lattice.
    #[default]
    Fourier,
    /// Circular convolution with the sampled, periodized physical profile.
    Physical,
}

/// A multiplier table on the discrete frequency lattice of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSymbol<T> {
    shape: Vec<usize>,
    box_length: Vec<T>,
    values: Vec<T>,
}

impl<T: FftReal> SpectralSymbol<T> {
    /// `m(|ξ|)` at every lattice frequency, in FFT order.
    pub fn from_radial(like: &GridField<T>, m: impl Fn(T) -> T) -> Self {
        let freqs = lattice_frequencies(like);
        let len = like.len();
        let mut values = Vec::with_capacity(len);
        let mut idx = vec![0usize; like.dim()];
        for flat in 0..len {
            unravel(flat, like.shape(), &mut idx);
            let s2 = idx.iter().enumerate().fold(T::zero(), |acc, (axis, &i)| {
                let k = freqs[axis][i];
                acc + k * k
            });
            values.push(m(s2.sqrt()));
        }
        Self { shape: like.shape().to_vec(), box_length: like.box_length().to_vec(), values }
    }

    /// `1/(1 + d|ξ|²)`.
    pub fn screened_poisson(like: &GridField<T>, d: T) -> Result<Self> {
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::Domain(format!("diffusion constant must be positive, got {d}")));
        }
        Ok(Self::from_radial(like, |s| (T::one() + d * s * s).recip()))
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn box_length(&self) -> &[T] {
        &self.box_length
    }

    /// Applies the multiplier to `f`.
    pub fn apply(&self, f: &GridField<T>) -> Result<GridField<T>> {
        self.check_grid(f)?;
        let spectrum = Spectrum::forward(f);
        spectrum.multiply_inverse(&self.values)
    }

    fn check_grid(&self, f: &GridField<T>) -> Result<()> {
        if f.shape() != self.shape.as_slice() || f.box_length() != self.box_length.as_slice() {
            return Err(Error::InvalidGrid("symbol and field live on different grids".into()));
        }
        Ok(())
    }
}

/// Signed lattice wavenumbers `2πk/L`, `k ∈ {0, 1, …, N/2, −N/2+1, …, −1}`, per axis.
pub fn lattice_frequencies<T: Real>(like: &GridField<T>) -> Vec<Vec<T>> {
    let two_pi = T::lit(2.0) * T::pi();
    like.shape()
        .iter()
        .zip(like.box_length())
        .map(|(&n, &l)| {
            (0..n)
                .map(|i| {
                    let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                    two_pi * T::lit(k) / l
                })
                .collect()
        })
        .collect()
}

fn unravel(mut flat: usize, shape: &[usize], idx: &mut [usize]) {
    for axis in (0..shape.len()).rev() {
        idx[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
}

/// Forward transform of a field, kept so several multipliers can reuse it.
struct Spectrum<'a, T: FftReal> {
    grid: &'a GridField<T>,
    data: Vec<Complex<T>>,
}

impl<'a, T: FftReal> Spectrum<'a, T> {
    fn forward(grid: &'a GridField<T>) -> Self {
        let mut data: Vec<Complex<T>> = grid.values().iter().map(|&v| Complex::new(v, T::zero())).collect();
        fft_nd(&mut data, grid.shape(), false);
        Self { grid, data }
    }

    fn multiply_inverse(&self, symbol: &[T]) -> Result<GridField<T>> {
        let mut data: Vec<Complex<T>> = self.data.iter().zip(symbol).map(|(&c, &m)| c * m).collect();
        fft_nd(&mut data, self.grid.shape(), true);
        let scale = T::count(data.len()).recip();
        self.grid.with_values(data.into_iter().map(|c| c.re * scale).collect())
    }
}

/// Unnormalized n-dimensional FFT, applied axis by axis.
fn fft_nd<T: FftReal>(data: &mut [Complex<T>], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let total = data.len();
    let mut stride = total;
    for &len in shape {
        stride /= len;
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        if stride == 1 {
            fft.process(data);
            continue;
        }
        let mut line = vec![Complex::new(T::zero(), T::zero()); len];
        let block = len * stride;
        for outer in 0..total / block {
            for inner in 0..stride {
                let start = outer * block + inner;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }
}

/// Solves `d Δw − w + f = 0` on the periodic grid.
pub fn screened_poisson_solve<T: FftReal>(f: &GridField<T>, d: T) -> Result<GridField<T>> {
    SpectralSymbol::screened_poisson(f, d)?.apply(f)
}

/// `Σⱼ αⱼ wⱼ`, with the `N` screened-Poisson solves run concurrently and summed in index order.
pub fn approximate_convolution<T: FftReal, A: AsRef<GreenExpansion<T>>>(f: &GridField<T>, approx: &A) -> Result<GridField<T>> {
    let approx = approx.as_ref();
    if approx.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: approx.dim(), found: f.dim() });
    }
    let spectrum = Spectrum::forward(f);
    let solves = approx
        .diffusions()
        .as_slice()
        .par_iter()
        .map(|&d| {
            let symbol = SpectralSymbol::screened_poisson(f, d)?;
            spectrum.multiply_inverse(symbol.values())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = vec![T::zero(); f.len()];
    let mut carry = vec![T::zero(); f.len()];
    for (w, &a) in solves.iter().zip(approx.alpha()) {
        for ((s, c), &v) in sum.iter_mut().zip(carry.iter_mut()).zip(w.values()) {
            let (t, e) = two_sum(*s, a * v);
            *s = t;
            *c = *c + e;
        }
    }
    f.with_values(sum.into_iter().zip(carry).map(|(s, c)| s + c).collect())
}

/// Oracle periodic convolution `K ∗ f`.
pub fn convolve_direct<T: FftReal>(f: &GridField<T>, kernel: &RadialKernel<T>, route: ConvolutionRoute) -> Result<GridField<T>> {
    if kernel.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.dim(), found: f.dim() });
    }
    match route {
        ConvolutionRoute::Fourier => SpectralSymbol::from_radial(f, |s| kernel.fourier(s)).apply(f),
        ConvolutionRoute::Physical => {
            let profile = kernel.physical_profile().ok_or(Error::MissingProfile("physical"))?;
            let sampled = periodized_samples(f, |r| profile(r))?;
            let mut k: Vec<Complex<T>> = sampled.iter().map(|&v| Complex::new(v, T::zero())).collect();
            fft_nd(&mut k, f.shape(), false);
            let h = f.cell_volume();
            let symbol: Vec<Complex<T>> = k.into_iter().map(|c| c * h).collect();
            let mut data: Vec<Complex<T>> = f.values().iter().map(|&v| Complex::new(v, T::zero())).collect();
            fft_nd(&mut data, f.shape(), false);
            for (x, m) in data.iter_mut().zip(&symbol) {
                *x = *x * *m;
            }
            fft_nd(&mut data, f.shape(), true);
            let scale = T::count(data.len()).recip();
            f.with_values(data.into_iter().map(|c| c.re * scale).collect())
        }
    }
}

/// `Σ_{m ∈ {−1,0,1}ⁿ} K(|x + mL|)` at every node `x` of the grid.
fn periodized_samples<T: FftReal>(like: &GridField<T>, k: impl Fn(T) -> T) -> Result<Vec<T>> {
    let n = like.dim();
    let images = 3usize.pow(n as u32);
    let mut out = Vec::with_capacity(like.len());
    for flat in 0..like.len() {
        let x = like.coordinates(flat);
        let mut acc = T::zero();
        for image in 0..images {
            let mut code = image;
            let mut r2 = T::zero();
            for (axis, &xa) in x.iter().enumerate() {
                let shift = T::lit((code % 3) as f64 - 1.0) * like.box_length()[axis];
                code /= 3;
                let y = xa + shift;
                r2 = r2 + y * y;
            }
            acc = acc + k(r2.sqrt());
        }
        if !acc.is_finite() {
            return Err(Error::Domain("the physical route needs a kernel that is finite at every grid node".into()));
        }
        out.push(acc);
    }
    Ok(out)
}

/// Discrepancy between `K ∗ f` and `K_N ∗ f` together with the Young-inequality check
/// `‖K∗f − K_N∗f‖_{L²} ≤ ‖K − K_N‖_{L²(ℝⁿ)} ‖f‖_{L¹}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport<T> {
    pub l2_error: T,
    pub linf_error: T,
    /// `‖K − K_N‖` in the standard `L²(ℝⁿ)` norm.
    pub kernel_l2_error: T,
    pub input_l1: T,
    /// `‖K − K_N‖_{L²} ‖f‖_{L¹}`.
    pub young_bound: T,
    pub tol_discretization: T,
    /// Absolute slack for round-off in the two grid computations.
    pub roundoff_allowance: T,
    pub young_holds: bool,
    /// `|K_N(L/2)| + |K(L/2)|` at the shortest half-period: size of the wrapped-around tail.
    pub periodization_tail: T,
}

/// Default relative slack for the grid-versus-continuum mismatch in the Young check.
pub const TOL_DISCRETIZATION: f64 = 1e-3;

pub fn error_report<T: FftReal, A: AsRef<GreenExpansion<T>>>(
    f: &GridField<T>,
    kernel: &RadialKernel<T>,
    approx: &A,
) -> Result<ErrorReport<T>> {
    let expansion = approx.as_ref();
    if kernel.dim() != expansion.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.dim(), found: expansion.dim() });
    }
    let direct = convolve_direct(f, kernel, ConvolutionRoute::Fourier)?;
    let approximate = approximate_convolution(f, expansion)?;
    let diff = direct.sub(&approximate)?;
    let kernel_l2_error = kernel_l2_distance(kernel, expansion)?;
    let input_l1 = f.norm_l1();
    let young_bound = kernel_l2_error * input_l1;
    let tol_discretization = T::lit(TOL_DISCRETIZATION);
    let scale = direct.norm_l2().max(approximate.norm_l2());
    let alpha_mass = expansion.alpha().iter().fold(T::zero(), |s, a| s + a.abs());
    let roundoff_allowance = T::lit(64.0) * T::epsilon() * (scale + alpha_mass * f.norm_l2());
    let l2_error = diff.norm_l2();
    let young_holds = l2_error <= young_bound * (T::one() + tol_discretization) + roundoff_allowance;
    Ok(ErrorReport {
        l2_error,
        linf_error: diff.norm_linf(),
        kernel_l2_error,
        input_l1,
        young_bound,
        tol_discretization,
        roundoff_allowance,
        young_holds,
        periodization_tail: periodization_tail(f, kernel, expansion),
    })
}

/// `‖K − K_N‖_{L²(ℝⁿ)}`, computed on the Fourier side.
///
/// Fitted coefficients are large and of both signs, so `K̂ − K̂_N` is formed and integrated
/// in [`Quad`] whatever `T` is. The coefficients convert exactly, so the result is the
/// distance to the expansion as stored in `T`.
pub fn kernel_l2_distance<T: Real>(kernel: &RadialKernel<T>, expansion: &GreenExpansion<T>) -> Result<T> {
    let n = kernel.dim();
    let alpha: Vec<Quad> = expansion.alpha().iter().map(|a| a.cast()).collect();
    let ds: Vec<Quad> = expansion.diffusions().iter().map(|d| d.cast()).collect();
    let scale: Quad = kernel.frequency_scale().min(expansion.diffusions().max().sqrt().recip()).cast();
    let power = n as i32 - 1;
    // `K̂` is only known to the precision of `T`; errors below that level are noise
    let noise = T::lit(64.0) * T::epsilon();
    let floor: Quad = (hm_norm_sq_tol(kernel, SobolevIndex::L2, T::lit(1e-6))? * noise * noise).cast();
    let v = integrate_semi_infinite_with_floor(
        |s: Quad| {
            let fitted = alpha.iter().zip(&ds).fold(Quad::lit(0.0), |acc, (&a, &d)| acc + a / (Quad::lit(1.0) + d * s * s));
            let e = kernel.fourier(s.cast::<T>()).cast::<Quad>() - fitted;
            s.powi(power) * e * e
        },
        scale,
        Quad::lit(1e-10),
        floor,
    )?;
    let sq = v.value.max(Quad::lit(0.0)) * standard_l2_factor::<Quad>(n);
    Ok(sq.sqrt().cast())
}

fn periodization_tail<T: Real>(f: &GridField<T>, kernel: &RadialKernel<T>, expansion: &GreenExpansion<T>) -> T {
    let half = f.box_length().iter().copied().fold(T::infinity(), T::min) / T::lit(2.0);
    let exact = kernel.physical(half).map(|v| v.abs()).unwrap_or(T::zero());
    let fitted = if expansion.dim() <= 3 { expansion.eval(half).map(|v| v.abs()).unwrap_or(T::zero()) } else { T::zero() };
    exact + fitted
}
