//! Dense symmetric matrices and Cholesky solves with compensated iterative refinement.

use crate::error::{Error, Result};
use crate::scalar::{dot2, Real};

/// Dense symmetric matrix in full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    /// Fills the upper triangle from `f(i, j)`, `i ≤ j`, and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Builds from entries already computed for the upper triangle, row by row.
    pub fn from_upper(n: usize, upper: &[T]) -> Result<Self> {
        let expected = n * (n + 1) / 2;
        if upper.len() != expected {
            return Err(Error::LengthMismatch { expected, found: upper.len() });
        }
        let mut it = upper.iter().copied();
        Ok(Self::from_fn(n, |_, _| it.next().unwrap_or(T::zero())))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `A x`, each row accumulated with a compensated dot product.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| dot2(self.row(i), x)).collect()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        dot2(x, &self.mul_vec(x))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&v| v * c).collect() }
    }

    /// Leading principal submatrix of order `k`.
    pub fn leading(&self, k: usize) -> Self {
        Self::from_fn(k, |i, j| self.get(i, j))
    }

    /// Entry-wise conversion to another scalar type.
    pub fn cast<U: Real>(&self) -> SymMatrix<U> {
        SymMatrix { n: self.n, data: self.data.iter().map(|v| v.cast()).collect() }
    }
}

/// Cholesky factor `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors `a`; fails at the first pivot that is not strictly positive.
    pub fn factor(a: &SymMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d = d - l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::SingularGram { index: j, pivot: d.to_f64_lossy() });
            }
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal of `L`; its squares are the Cholesky pivots.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.l[i * self.n + i]).collect()
    }

    /// `(max Lᵢᵢ / min Lᵢᵢ)²`, a cheap lower estimate of the 2-norm condition number.
    pub fn condition_estimate(&self) -> T {
        let d = self.diagonal();
        let hi = d.iter().copied().fold(T::zero(), T::max);
        let lo = d.iter().copied().fold(T::infinity(), T::min);
        let r = hi / lo;
        r * r
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length");
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = s - self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

/// Residual `b − A x`, each row evaluated as one compensated dot product.
pub fn residual<T: Real>(a: &SymMatrix<T>, x: &[T], b: &[T]) -> Vec<T> {
    let mut rhs: Vec<T> = x.iter().map(|&v| -v).collect();
    rhs.push(T::one());
    (0..a.dim())
        .map(|i| {
            let mut lhs = a.row(i).to_vec();
            lhs.push(b[i]);
            dot2(&lhs, &rhs)
        })
        .collect()
}

/// Solves `A x = b` with `steps` rounds of refinement against compensated residuals.
pub fn solve_refined<T: Real>(a: &SymMatrix<T>, chol: &Cholesky<T>, b: &[T], steps: usize) -> Vec<T> {
    let mut x = chol.solve(b);
    for _ in 0..steps {
        let r = residual(a, &x, b);
        let dx = chol.solve(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi = *xi + di;
        }
    }
    x
}
