use crate::error::{Error, Result};
use crate::scalar::{dot2, Real};

use super::DiffusionSet;

/// Solves `A α = b` for the `n = 1` or `n = 3` Green Gram matrix through the explicit
/// inverse of the symmetric Cauchy matrix `Cᵢⱼ = 1/(xᵢ + xⱼ)`, `xᵢ = √dᵢ`.
///
/// `(C⁻¹)ᵢⱼ = PᵢPⱼ/(xᵢ + xⱼ)` with `Pᵢ = Πₖ(xᵢ + xₖ) / Π_{k≠i}(xᵢ − xₖ)`.
/// For `n = 1`, `A = (π/2) C`; for `n = 3`, `A = (π/2) D C D` with `D = diag(1/xᵢ)`.
pub fn cauchy_solve<T: Real>(ds: &DiffusionSet<T>, b: &[T], n: usize) -> Result<Vec<T>> {
    if n != 1 && n != 3 {
        return Err(Error::UnsupportedDimension { n, reason: "the Gram matrix is Cauchy-like only for n = 1 and n = 3" });
    }
    let len = ds.len();
    if b.len() != len {
        return Err(Error::LengthMismatch { expected: len, found: b.len() });
    }
    let x: Vec<T> = ds.iter().map(|d| d.sqrt()).collect();
    for i in 0..len {
        for j in i + 1..len {
            if x[i] == x[j] {
                return Err(Error::DuplicateNodes(i, j));
            }
        }
    }
    let p: Vec<T> = (0..len)
        .map(|i| {
            let mut v = T::one();
            for k in 0..len {
                v = v * (x[i] + x[k]);
                if k != i {
                    v = v / (x[i] - x[k]);
                }
            }
            v
        })
        .collect();
    let rhs: Vec<T> = if n == 1 { b.to_vec() } else { b.iter().zip(&x).map(|(&bi, &xi)| bi * xi).collect() };
    let scale = T::lit(2.0) / T::pi();
    let mut alpha = Vec::with_capacity(len);
    let mut row = vec![T::zero(); len];
    for i in 0..len {
        for j in 0..len {
            row[j] = p[i] * p[j] / (x[i] + x[j]);
        }
        let v = scale * dot2(&row, &rhs);
        alpha.push(if n == 1 { v } else { v * x[i] });
    }
    Ok(alpha)
}
