//! Least-squares fitting of a radial kernel by a finite sum of Green functions.
//!
//! Minimizing `E(β) = ‖K − Σ βⱼ kⱼ‖²` over `β` gives the normal equations `A β = b` with
//! `A_{jl} = ⟨kⱼ, k_l⟩` and `b_l = ⟨K, k_l⟩`. `A` is positive-definite but very badly
//! conditioned for realistic diffusion sets, so the solver reports a condition estimate and
//! callers who need the large reference fits should work in [`Quad`](crate::Quad) precision.

mod cauchy;
mod gram;
mod phi;

use std::fmt;
use std::ops::Index;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{residual, solve_refined, Cholesky, SymMatrix};
use crate::radial_kernel::{hm_norm_sq_tol, inner_products_parallel, RadialKernel, SobolevIndex};
use crate::scalar::{compensated_sum, dot2, Real};
use crate::special_fn::{green_eval, green_fourier, GreenParams};

pub use cauchy::cauchy_solve;
pub use gram::{gram_entry, gram_entry_quadrature, gram_entry_quadrature_with};
pub use phi::{phi_coefficients, required_depth, PhiBasis, GAMMA_WARNING};

/// Minimum relative gap `|dᵢ − dⱼ| / max(dᵢ, dⱼ)` between diffusion constants.
pub const MIN_RELATIVE_SEPARATION: f64 = 1e-12;
/// Condition estimates above this raise [`FitWarning::IllConditioned`].
pub const CONDITION_WARNING: f64 = 1e12;

/// Ordered list of distinct positive diffusion constants.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSet<T> {
    values: Vec<T>,
}

impl<T: Real> DiffusionSet<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDiffusionSet("at least one diffusion constant is required".into()));
        }
        for (i, &d) in values.iter().enumerate() {
            if !d.is_finite() || !(d > T::zero()) {
                return Err(Error::InvalidDiffusionSet(format!("entry {i} is {d}, expected a positive finite value")));
            }
        }
        let sep = T::lit(MIN_RELATIVE_SEPARATION);
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                let (a, b) = (values[i], values[j]);
                if (a - b).abs() < sep * a.max(b) {
                    return Err(Error::InvalidDiffusionSet(format!("entries {i} and {j} coincide ({a} vs {b})")));
                }
            }
        }
        Ok(Self { values })
    }

    /// `dⱼ = 1 + sin(j − 1)`, `j = 1..=count`.
    ///
    /// The sines are evaluated in `f64` for every scalar type so that fits in different
    /// precisions (and values written to text files) refer to the same constants.
    pub fn one_plus_sin(count: usize) -> Result<Self> {
        Self::new((0..count).map(|j| T::lit(1.0 + (j as f64).sin())).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = T> + '_ {
        self.values.iter().copied()
    }

    pub fn min(&self) -> T {
        self.iter().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.iter().fold(T::zero(), T::max)
    }

    /// The first `k` entries.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidDiffusionSet(format!("prefix length {k} outside 1..={}", self.len())));
        }
        Ok(Self { values: self.values[..k].to_vec() })
    }

    /// This set with `d` appended.
    pub fn with_appended(&self, d: T) -> Result<Self> {
        let mut v = self.values.clone();
        v.push(d);
        Self::new(v)
    }

    pub fn cast<U: Real>(&self) -> Result<DiffusionSet<U>> {
        DiffusionSet::new(self.values.iter().map(|v| v.cast()).collect())
    }
}

impl<T> Index<usize> for DiffusionSet<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

/// Normal equations `A α = b` together with `‖K‖²`.
#[derive(Debug, Clone)]
pub struct GramSystem<T> {
    pub dim: usize,
    pub sobolev: SobolevIndex,
    pub diffusions: DiffusionSet<T>,
    pub matrix: SymMatrix<T>,
    pub rhs: Vec<T>,
    pub kernel_norm_sq: T,
}

impl<T: Real> GramSystem<T> {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// The same problem with every inner product multiplied by `c > 0`.
    pub fn scaled(&self, c: T) -> Self {
        Self {
            dim: self.dim,
            sobolev: self.sobolev,
            diffusions: self.diffusions.clone(),
            matrix: self.matrix.scaled(c),
            rhs: self.rhs.iter().map(|&v| v * c).collect(),
            kernel_norm_sq: self.kernel_norm_sq * c,
        }
    }

    /// The problem restricted to the first `k` diffusion constants.
    pub fn leading(&self, k: usize) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            sobolev: self.sobolev,
            diffusions: self.diffusions.prefix(k)?,
            matrix: self.matrix.leading(k),
            rhs: self.rhs[..k].to_vec(),
            kernel_norm_sq: self.kernel_norm_sq,
        })
    }

    /// Gradient of `E` at `β`, `−2(b − Aβ)`.
    pub fn gradient(&self, beta: &[T]) -> Result<Vec<T>> {
        if beta.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: beta.len() });
        }
        Ok(residual(&self.matrix, beta, &self.rhs).into_iter().map(|r| T::lit(-2.0) * r).collect())
    }
}

/// Non-fatal diagnostics attached to a fit.
#[derive(Debug, Clone, PartialEq)]
pub enum FitWarning {
    /// The Gram condition estimate exceeds [`CONDITION_WARNING`].
    IllConditioned { estimate: f64 },
    /// Round-off drove `‖K‖² − αᵀb` below zero; the reported residual was clamped.
    NegativeResidualClamped { raw: f64 },
    /// Some partial-fraction coefficient of the regularized basis exceeds [`GAMMA_WARNING`].
    IllConditionedBasis { max_gamma: f64 },
}

impl fmt::Display for FitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitWarning::IllConditioned { estimate } => {
                write!(f, "Gram matrix is ill-conditioned (condition estimate {estimate:.3e})")
            }
            FitWarning::NegativeResidualClamped { raw } => {
                write!(f, "residual energy {raw:.3e} is negative from round-off and was clamped to 0")
            }
            FitWarning::IllConditionedBasis { max_gamma } => {
                write!(f, "regularized basis is ill-conditioned (max |gamma| = {max_gamma:.3e})")
            }
        }
    }
}

/// `K_N = Σ αⱼ k(·; dⱼ)` on ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenExpansion<T> {
    dim: usize,
    diffusions: DiffusionSet<T>,
    alpha: Vec<T>,
}

impl<T: Real> GreenExpansion<T> {
    pub fn new(dim: usize, diffusions: DiffusionSet<T>, alpha: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension { n: 0, reason: "dimension must be positive" });
        }
        if alpha.len() != diffusions.len() {
            return Err(Error::LengthMismatch { expected: diffusions.len(), found: alpha.len() });
        }
        if let Some(i) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { dim, diffusions, alpha })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diffusions(&self) -> &DiffusionSet<T> {
        &self.diffusions
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `K̂_N(s) = Σ αⱼ / (1 + dⱼ s²)`.
    pub fn fourier(&self, s: T) -> T {
        compensated_sum(self.diffusions.iter().zip(&self.alpha).map(|(d, &a)| a * green_fourier(d, s)))
    }

    /// `K_N(r)` for `n ≤ 3`; `±∞` at `r = 0` for `n ≥ 2`.
    pub fn eval(&self, r: T) -> Result<T> {
        let terms = self
            .diffusions
            .iter()
            .zip(&self.alpha)
            .map(|(d, &a)| green_eval(GreenParams::new(self.dim, d)?, r).map(|k| a * k))
            .collect::<Result<Vec<T>>>()?;
        if r == T::zero() && self.dim >= 2 {
            // k(r;d) blows up like 1/(d r) (n = 3) or −ln(r)/(2π d) (n = 2)
            let total = compensated_sum(self.alpha.iter().zip(self.diffusions.iter()).map(|(&a, d)| a / d));
            return Ok(if total >= T::zero() { T::infinity() } else { T::neg_infinity() });
        }
        Ok(compensated_sum(terms))
    }

    pub fn max_abs_alpha(&self) -> T {
        self.alpha.iter().fold(T::zero(), |m, a| m.max(a.abs()))
    }

    /// Whether the coefficients include both strictly positive and strictly negative values.
    pub fn has_mixed_signs(&self) -> bool {
        self.alpha.iter().any(|&a| a > T::zero()) && self.alpha.iter().any(|&a| a < T::zero())
    }

    pub fn as_kernel(&self) -> Result<RadialKernel<T>> {
        RadialKernel::green_sum(self.dim, self.diffusions.as_slice(), &self.alpha)
    }

    pub fn cast<U: Real>(&self) -> Result<GreenExpansion<U>> {
        GreenExpansion::new(self.dim, self.diffusions.cast()?, self.alpha.iter().map(|a| a.cast()).collect())
    }
}

impl<T> AsRef<GreenExpansion<T>> for GreenExpansion<T> {
    fn as_ref(&self) -> &GreenExpansion<T> {
        self
    }
}

/// Result of a least-squares fit.
#[derive(Debug, Clone)]
pub struct KernelApproximation<T> {
    pub expansion: GreenExpansion<T>,
    pub sobolev: SobolevIndex,
    /// `E` at the minimizer, clamped at zero.
    pub residual_sq: T,
    /// `‖K‖² − αᵀb` before clamping.
    pub raw_residual_sq: T,
    pub kernel_norm_sq: T,
    pub condition_estimate: T,
    pub warnings: Vec<FitWarning>,
}

impl<T: Real> KernelApproximation<T> {
    pub fn dim(&self) -> usize {
        self.expansion.dim()
    }

    pub fn alpha(&self) -> &[T] {
        self.expansion.alpha()
    }

    pub fn diffusions(&self) -> &DiffusionSet<T> {
        self.expansion.diffusions()
    }

    /// `√(E / ‖K‖²)`, or zero for the zero kernel.
    pub fn relative_residual(&self) -> T {
        if self.kernel_norm_sq > T::zero() {
            (self.residual_sq / self.kernel_norm_sq).sqrt()
        } else {
            T::zero()
        }
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.warnings.iter().any(|w| matches!(w, FitWarning::IllConditioned { .. }))
    }

    pub fn cast<U: Real>(&self) -> Result<KernelApproximation<U>> {
        Ok(KernelApproximation {
            expansion: self.expansion.cast()?,
            sobolev: self.sobolev,
            residual_sq: self.residual_sq.cast(),
            raw_residual_sq: self.raw_residual_sq.cast(),
            kernel_norm_sq: self.kernel_norm_sq.cast(),
            condition_estimate: self.condition_estimate.cast(),
            warnings: self.warnings.clone(),
        })
    }
}

impl<T> AsRef<GreenExpansion<T>> for KernelApproximation<T> {
    fn as_ref(&self) -> &GreenExpansion<T> {
        &self.expansion
    }
}

/// Numerical knobs shared by the fitting routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    /// Relative tolerance of every quadrature feeding the normal equations.
    pub quad_tol: T,
    /// Iterative-refinement steps after the Cholesky solve.
    pub refinement_steps: usize,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self { quad_tol: T::fit_quad_tol(), refinement_steps: 1 }
    }
}

/// Builds the normal equations of the raw Green basis (`m = 0`, `n ≤ 3`).
pub fn assemble<T: Real>(kernel: &RadialKernel<T>, ds: &DiffusionSet<T>, m: SobolevIndex) -> Result<GramSystem<T>> {
    assemble_with(kernel, ds, m, &FitOptions::default())
}

pub fn assemble_with<T: Real>(
    kernel: &RadialKernel<T>,
    ds: &DiffusionSet<T>,
    m: SobolevIndex,
    opts: &FitOptions<T>,
) -> Result<GramSystem<T>> {
    let n = kernel.dim();
    if m.get() > 0 || n >= 4 {
        return Err(Error::GreenBasisNotInSpace { n, m: m.get() });
    }
    let len = ds.len();
    let matrix = SymMatrix::from_fn(len, |i, j| gram_entry(n, ds[i], ds[j]).unwrap_or(T::nan()));
    if (0..len).any(|i| !matrix.get(i, i).is_finite()) {
        return Err(Error::Domain("non-finite Gram entry".into()));
    }
    let rhs = inner_products_parallel(
        kernel,
        m,
        len,
        |l, s| green_fourier(ds[l], s),
        |l| ds[l].sqrt().recip(),
        opts.quad_tol,
    )?;
    let kernel_norm_sq = hm_norm_sq_tol(kernel, m, opts.quad_tol)?;
    Ok(GramSystem { dim: n, sobolev: m, diffusions: ds.clone(), matrix, rhs, kernel_norm_sq })
}

/// Solves the normal equations by Cholesky factorization and compensated iterative refinement.
pub fn solve_coefficients<T: Real>(sys: &GramSystem<T>) -> Result<KernelApproximation<T>> {
    solve_coefficients_with(sys, FitOptions::<T>::default().refinement_steps)
}

pub fn solve_coefficients_with<T: Real>(sys: &GramSystem<T>, refinement_steps: usize) -> Result<KernelApproximation<T>> {
    let (alpha, raw, cond) = solve_normal_equations(&sys.matrix, &sys.rhs, sys.kernel_norm_sq, refinement_steps)?;
    let expansion = GreenExpansion::new(sys.dim, sys.diffusions.clone(), alpha)?;
    Ok(finish(expansion, sys.sobolev, raw, sys.kernel_norm_sq, cond, Vec::new()))
}

fn solve_normal_equations<T: Real>(a: &SymMatrix<T>, b: &[T], kn: T, steps: usize) -> Result<(Vec<T>, T, T)> {
    if b.len() != a.dim() {
        return Err(Error::LengthMismatch { expected: a.dim(), found: b.len() });
    }
    let chol = Cholesky::factor(a)?;
    let x = solve_refined(a, &chol, b, steps);
    let mut lhs = x.clone();
    lhs.push(kn);
    let mut rhs: Vec<T> = b.iter().map(|&v| -v).collect();
    rhs.push(T::one());
    let raw = dot2(&lhs, &rhs);
    Ok((x, raw, chol.condition_estimate()))
}

fn finish<T: Real>(
    expansion: GreenExpansion<T>,
    sobolev: SobolevIndex,
    raw: T,
    kn: T,
    cond: T,
    mut warnings: Vec<FitWarning>,
) -> KernelApproximation<T> {
    if cond > T::lit(CONDITION_WARNING) {
        warnings.push(FitWarning::IllConditioned { estimate: cond.to_f64_lossy() });
    }
    if raw < T::zero() {
        warnings.push(FitWarning::NegativeResidualClamped { raw: raw.to_f64_lossy() });
    }
    KernelApproximation {
        expansion,
        sobolev,
        residual_sq: raw.max(T::zero()),
        raw_residual_sq: raw,
        kernel_norm_sq: kn,
        condition_estimate: cond,
        warnings,
    }
}

/// `E(β) = ‖K‖² − 2βᵀb + βᵀAβ`.
///
/// Values in `[−1e-12·‖K‖², 0)` are round-off and are clamped to zero; anything more
/// negative means the system is inconsistent and is reported as an error.
pub fn residual_energy<T: Real>(sys: &GramSystem<T>, beta: &[T]) -> Result<T> {
    if beta.len() != sys.len() {
        return Err(Error::LengthMismatch { expected: sys.len(), found: beta.len() });
    }
    let ab = sys.matrix.mul_vec(beta);
    let mut lhs: Vec<T> = Vec::with_capacity(2 * beta.len() + 1);
    let mut rhs: Vec<T> = Vec::with_capacity(2 * beta.len() + 1);
    lhs.extend_from_slice(beta);
    rhs.extend(sys.rhs.iter().map(|&v| T::lit(-2.0) * v));
    lhs.extend_from_slice(beta);
    rhs.extend_from_slice(&ab);
    lhs.push(sys.kernel_norm_sq);
    rhs.push(T::one());
    let e = dot2(&lhs, &rhs);
    if e >= T::zero() {
        Ok(e)
    } else if e >= -T::lit(1e-12) * sys.kernel_norm_sq {
        Ok(T::zero())
    } else {
        Err(Error::Domain(format!("residual energy {e} is negative beyond round-off")))
    }
}

/// Fits `K` with the raw Green basis when that is legal (`m = 0`, `n ≤ 3`) and with the
/// regularized basis otherwise.
pub fn fit<T: Real>(kernel: &RadialKernel<T>, ds: &DiffusionSet<T>, m: SobolevIndex, opts: &FitOptions<T>) -> Result<KernelApproximation<T>> {
    if m.get() == 0 && kernel.dim() <= 3 {
        let sys = assemble_with(kernel, ds, m, opts)?;
        solve_coefficients_with(&sys, opts.refinement_steps)
    } else {
        fit_hm_with(kernel, ds, m, None, opts)
    }
}

/// `Hᵐ_r` fit through the regularized basis of depth [`required_depth`].
pub fn fit_hm<T: Real>(kernel: &RadialKernel<T>, ds: &DiffusionSet<T>, m: SobolevIndex) -> Result<KernelApproximation<T>> {
    fit_hm_with(kernel, ds, m, None, &FitOptions::default())
}

/// `Hᵐ_r` fit with an explicit basis depth `J` (it must still satisfy `4J > 2m + n − 1`).
///
/// The normal equations are solved in `span{φ₁, …, φ_{N₀}}`, which yields the same projection
/// as orthonormalizing the family by Gram–Schmidt, and the result is expanded back onto the
/// Green functions.
pub fn fit_hm_with<T: Real>(
    kernel: &RadialKernel<T>,
    ds: &DiffusionSet<T>,
    m: SobolevIndex,
    depth: Option<usize>,
    opts: &FitOptions<T>,
) -> Result<KernelApproximation<T>> {
    let n = kernel.dim();
    let depth = depth.unwrap_or_else(|| required_depth(n, m));
    if 4 * depth < 2 * m.get() as usize + n {
        return Err(Error::GreenBasisNotInSpace { n, m: m.get() });
    }
    let basis = PhiBasis::new(ds, depth)?;
    let (g, c, kn) = phi_system(kernel, &basis, m, opts)?;
    let (zeta, raw, cond) = solve_normal_equations(&g, &c, kn, opts.refinement_steps)?;
    let alpha = basis.expand(&zeta)?;
    let mut warnings = Vec::new();
    let max_gamma = basis.max_abs_gamma();
    if max_gamma > T::lit(GAMMA_WARNING) {
        warnings.push(FitWarning::IllConditionedBasis { max_gamma: max_gamma.to_f64_lossy() });
    }
    let expansion = GreenExpansion::new(n, ds.clone(), alpha)?;
    Ok(finish(expansion, m, raw, kn, cond, warnings))
}

/// Gram matrix, right-hand side and `‖K‖²` for the regularized basis.
pub fn phi_system<T: Real>(
    kernel: &RadialKernel<T>,
    basis: &PhiBasis<T>,
    m: SobolevIndex,
    opts: &FitOptions<T>,
) -> Result<(SymMatrix<T>, Vec<T>, T)> {
    let n = kernel.dim();
    let len = basis.len();
    let ds = basis.diffusions();
    let scale_of = |j: usize| ds[basis.depth() + j].sqrt().recip().min(ds.max().sqrt().recip());
    let pairs: Vec<(usize, usize)> = (0..len).flat_map(|i| (i..len).map(move |j| (i, j))).collect();
    let upper = pairs
        .par_iter()
        .map(|&(i, j)| {
            gram_entry_quadrature_with(
                n,
                m,
                |s| basis.fourier(i, s),
                |s| basis.fourier(j, s),
                scale_of(i).min(scale_of(j)),
                opts.quad_tol,
            )
        })
        .collect::<Result<Vec<T>>>()?;
    let g = SymMatrix::from_upper(len, &upper)?;
    let c = inner_products_parallel(kernel, m, len, |j, s| basis.fourier(j, s), scale_of, opts.quad_tol)?;
    let kn = hm_norm_sq_tol(kernel, m, opts.quad_tol)?;
    Ok((g, c, kn))
}
