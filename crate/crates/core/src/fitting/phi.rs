//! Regularized basis `φ̂ⱼ(s) = ŵ(s) / (1 + d_{J+j} s²)` with `ŵ(s) = Π_{l≤J} 1/(1 + d_l s²)`.
//!
//! Each `φⱼ` decays like `s^{-2(J+1)}`, so it lies in `Hᵐ_r(ℝⁿ)` once `4J > 2m + n − 1`,
//! and by partial fractions it is a combination of `J + 1` Green functions:
//! `φ̂ⱼ = γ₀ k̂_{J+j} + Σ_l γ_l k̂_l`.

use crate::error::{Error, Result};
use crate::radial_kernel::SobolevIndex;
use crate::scalar::Real;

use super::DiffusionSet;

/// `|γ|` above this marks the basis as ill-conditioned.
pub const GAMMA_WARNING: f64 = 1e14;

/// Smallest `J` with `4J > 2m + n − 1`.
pub fn required_depth(n: usize, m: SobolevIndex) -> usize {
    let bound = 2 * m.get() as usize + n;
    // 4J > bound - 1  ⇔  4J ≥ bound
    bound.div_ceil(4)
}

/// `(γ₀, γ₁, …, γ_J)` for the basis element whose tail diffusion is `ds[depth + index]`.
///
/// `index` counts from zero, so `index = 0` is `φ₁`.
pub fn phi_coefficients<T: Real>(depth: usize, index: usize, ds: &DiffusionSet<T>) -> Result<Vec<T>> {
    let tail = depth + index;
    if tail >= ds.len() {
        return Err(Error::InsufficientDiffusions { required: tail, found: ds.len() });
    }
    let dt = ds[tail];
    let mut gammas = Vec::with_capacity(depth + 1);
    let mut g0 = T::one();
    for l in 0..depth {
        g0 = g0 / (T::one() - ds[l] / dt);
    }
    gammas.push(g0);
    for l in 0..depth {
        let dl = ds[l];
        let mut g = T::one() / (T::one() - dt / dl);
        for other in 0..depth {
            if other != l {
                g = g / (T::one() - ds[other] / dl);
            }
        }
        gammas.push(g);
    }
    Ok(gammas)
}

/// The family `φ₁, …, φ_{N₀}` built on a diffusion set of length `J + N₀`.
#[derive(Debug, Clone)]
pub struct PhiBasis<T> {
    depth: usize,
    diffusions: DiffusionSet<T>,
    gammas: Vec<Vec<T>>,
}

impl<T: Real> PhiBasis<T> {
    pub fn new(ds: &DiffusionSet<T>, depth: usize) -> Result<Self> {
        if ds.len() <= depth {
            return Err(Error::InsufficientDiffusions { required: depth, found: ds.len() });
        }
        let gammas = (0..ds.len() - depth)
            .map(|j| phi_coefficients(depth, j, ds))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { depth, diffusions: ds.clone(), gammas })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of basis elements `N₀`.
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn diffusions(&self) -> &DiffusionSet<T> {
        &self.diffusions
    }

    pub fn base_diffusions(&self) -> &[T] {
        &self.diffusions.as_slice()[..self.depth]
    }

    pub fn tail_diffusions(&self) -> &[T] {
        &self.diffusions.as_slice()[self.depth..]
    }

    pub fn gammas(&self, j: usize) -> &[T] {
        &self.gammas[j]
    }

    pub fn max_abs_gamma(&self) -> T {
        self.gammas.iter().flatten().fold(T::zero(), |m, g| m.max(g.abs()))
    }

    /// `φ̂ⱼ(s)` in product form.
    pub fn fourier(&self, j: usize, s: T) -> T {
        let s2 = s * s;
        let mut v = T::one() / (T::one() + self.diffusions[self.depth + j] * s2);
        for &d in self.base_diffusions() {
            v = v / (T::one() + d * s2);
        }
        v
    }

    /// `φ̂ⱼ(s)` from the partial-fraction coefficients.
    pub fn fourier_expanded(&self, j: usize, s: T) -> T {
        let g = &self.gammas[j];
        let s2 = s * s;
        let mut v = g[0] / (T::one() + self.diffusions[self.depth + j] * s2);
        for (l, &d) in self.base_diffusions().iter().enumerate() {
            v = v + g[l + 1] / (T::one() + d * s2);
        }
        v
    }

    /// Converts coefficients `ζ` over `φ₁…φ_{N₀}` into coefficients over every Green function.
    pub fn expand(&self, zeta: &[T]) -> Result<Vec<T>> {
        if zeta.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: zeta.len() });
        }
        let mut alpha = vec![T::zero(); self.diffusions.len()];
        for (j, (&z, g)) in zeta.iter().zip(&self.gammas).enumerate() {
            alpha[self.depth + j] = z * g[0];
            for l in 0..self.depth {
                alpha[l] = alpha[l] + z * g[l + 1];
            }
        }
        Ok(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_rule() {
        assert_eq!(required_depth(1, SobolevIndex(0)), 1);
        assert_eq!(required_depth(3, SobolevIndex(0)), 1);
        assert_eq!(required_depth(4, SobolevIndex(0)), 1);
        assert_eq!(required_depth(5, SobolevIndex(0)), 2);
        assert_eq!(required_depth(1, SobolevIndex(1)), 1);
        assert_eq!(required_depth(2, SobolevIndex(1)), 1);
        assert_eq!(required_depth(3, SobolevIndex(1)), 2);
        for n in 1..8 {
            for m in 0..5 {
                let j = required_depth(n, SobolevIndex(m));
                assert!(4 * j > 2 * m as usize + n - 1);
                assert!(j == 0 || 4 * (j - 1) < 2 * m as usize + n);
            }
        }
    }

    #[test]
    fn partial_fractions_of_two_symbols() {
        let ds = DiffusionSet::new(vec![1.0f64, 2.0]).unwrap();
        let g = phi_coefficients(1, 0, &ds).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-15 && (g[1] + 1.0).abs() < 1e-15);
        let basis = PhiBasis::new(&ds, 1).unwrap();
        assert!((basis.fourier(0, 1.0) - 1.0 / 6.0).abs() < 1e-16);
        assert!((2.0 / 3.0 - 0.5 - 1.0 / 6.0f64).abs() < 1e-16);
    }

    #[test]
    fn depth_two_matches_product_form() {
        let ds = DiffusionSet::new(vec![1.0f64, 2.0, 4.0]).unwrap();
        let basis = PhiBasis::new(&ds, 2).unwrap();
        for s in [0.5, 1.0, 3.0] {
            let direct = 1.0 / ((1.0 + s * s) * (1.0 + 2.0 * s * s) * (1.0 + 4.0 * s * s));
            assert!((basis.fourier_expanded(0, s) - direct).abs() < 1e-14);
            assert!((basis.fourier(0, s) - direct).abs() < 1e-16);
        }
    }

    #[test]
    fn expand_places_coefficients() {
        let ds = DiffusionSet::new(vec![1.0f64, 2.0, 3.0]).unwrap();
        let basis = PhiBasis::new(&ds, 1).unwrap();
        let alpha = basis.expand(&[1.0, 0.0]).unwrap();
        assert_eq!(alpha, vec![-1.0, 2.0, 0.0]);
        assert!(basis.expand(&[1.0]).is_err());
    }

    #[test]
    fn too_few_diffusions() {
        let ds = DiffusionSet::new(vec![1.0f64]).unwrap();
        assert!(matches!(PhiBasis::new(&ds, 1), Err(Error::InsufficientDiffusions { .. })));
    }
}
