use crate::error::{Error, Result};
use crate::radial_kernel::{weighted_inner, SobolevIndex};
use crate::scalar::Real;

/// Below this relative gap the `n = 2` entry switches to its diagonal limit.
const N2_DIAGONAL_GAP: f64 = 1e-8;

/// Closed-form `⟨k(·;dⱼ), k(·;dₗ)⟩` in `L²_r(ℝⁿ)`, `n ∈ {1, 2, 3}`.
///
/// * `n = 1`: `π / (2(√dⱼ + √dₗ))`
/// * `n = 2`: `ln(dⱼ/dₗ) / (2(dⱼ − dₗ))`, and `1/(2d)` on the diagonal
/// * `n = 3`: `π / (2√(dⱼdₗ)(√dⱼ + √dₗ))`
pub fn gram_entry<T: Real>(n: usize, dj: T, dl: T) -> Result<T> {
    if !(dj > T::zero()) || !(dl > T::zero()) || !dj.is_finite() || !dl.is_finite() {
        return Err(Error::Domain(format!("diffusion constants must be positive, got {dj} and {dl}")));
    }
    let half_pi = T::pi() / T::lit(2.0);
    let (xj, xl) = (dj.sqrt(), dl.sqrt());
    match n {
        1 => Ok(half_pi / (xj + xl)),
        2 => {
            let (hi, lo) = if dj >= dl { (dj, dl) } else { (dl, dj) };
            let gap = hi - lo;
            if gap < T::lit(N2_DIAGONAL_GAP) * hi {
                // log(1+t)/t = 1 - t/2 + O(t²), so 1/(dⱼ + dₗ) matches to second order
                Ok((dj + dl).recip())
            } else {
                let t = gap / lo;
                Ok(t.ln_1p() / (T::lit(2.0) * gap))
            }
        }
        3 => Ok(half_pi / (xj * xl * (xj + xl))),
        _ => Err(Error::UnsupportedDimension { n, reason: "closed-form Gram entries exist only for n <= 3" }),
    }
}

/// `Hᵐ_r` inner product of two Fourier profiles by quadrature (relative tolerance `1e-10`).
pub fn gram_entry_quadrature<T, F, G>(n: usize, m: SobolevIndex, fhat_j: F, fhat_l: G) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
    G: Fn(T) -> T,
{
    gram_entry_quadrature_with(n, m, fhat_j, fhat_l, T::one(), T::lit(1e-10))
}

/// As [`gram_entry_quadrature`] with an explicit first-panel width and tolerance.
pub fn gram_entry_quadrature_with<T, F, G>(
    n: usize,
    m: SobolevIndex,
    fhat_j: F,
    fhat_l: G,
    scale: T,
    tol: T,
) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
    G: Fn(T) -> T,
{
    if n == 0 {
        return Err(Error::UnsupportedDimension { n, reason: "dimension must be positive" });
    }
    weighted_inner(n, m, fhat_j, fhat_l, scale, tol)
}
