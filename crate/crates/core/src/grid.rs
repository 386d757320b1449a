//! Uniform periodic grids on `[0, L₁) × … × [0, Lₙ)` and their text file format.
//!
//! ```text
//! # green-conv field
//! dimension 2
//! shape 64 32
//! box_length 40 20
//! values
//! <one sample per line, row-major, last axis fastest>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAGIC: &str = "# green-conv field";
/// Smallest admissible number of samples per axis.
pub const MIN_AXIS_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    shape: Vec<usize>,
    box_length: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> GridField<T> {
    pub fn new(shape: Vec<usize>, box_length: Vec<T>, values: Vec<T>) -> Result<Self> {
        validate_geometry(&shape, &box_length)?;
        let len: usize = shape.iter().product();
        if values.len() != len {
            return Err(Error::LengthMismatch { expected: len, found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { shape, box_length, values })
    }

    /// Samples `f(x)` at the grid nodes `xₖ = iₖ hₖ`.
    pub fn from_fn(shape: Vec<usize>, box_length: Vec<T>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        validate_geometry(&shape, &box_length)?;
        let len: usize = shape.iter().product();
        let mut x = vec![T::zero(); shape.len()];
        let mut values = Vec::with_capacity(len);
        for flat in 0..len {
            coordinates_into(&shape, &box_length, flat, &mut x);
            values.push(f(&x));
        }
        Self::new(shape, box_length, values)
    }

    pub fn zeros(shape: Vec<usize>, box_length: Vec<T>) -> Result<Self> {
        Self::from_fn(shape, box_length, |_| T::zero())
    }

    /// Discrete delta at `index`: `1/hⁿ` there and zero elsewhere, so its grid integral is 1.
    pub fn delta(shape: Vec<usize>, box_length: Vec<T>, index: &[usize]) -> Result<Self> {
        let mut g = Self::zeros(shape, box_length)?;
        if index.len() != g.dim() || index.iter().zip(&g.shape).any(|(&i, &n)| i >= n) {
            return Err(Error::InvalidGrid(format!("delta index {index:?} outside shape {:?}", g.shape)));
        }
        let flat = g.flat_index(index);
        g.values[flat] = g.cell_volume().recip();
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn box_length(&self) -> &[T] {
        &self.box_length
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.box_length[axis] / T::count(self.shape[axis])
    }

    pub fn cell_volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |v, a| v * self.spacing(a))
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Node coordinates of the flat index.
    pub fn coordinates(&self, flat: usize) -> Vec<T> {
        let mut x = vec![T::zero(); self.dim()];
        coordinates_into(&self.shape, &self.box_length, flat, &mut x);
        x
    }

    /// Periodic distance of the node from the origin, `|x|` with each axis wrapped to `[-L/2, L/2)`.
    pub fn wrapped_radius(&self, flat: usize) -> T {
        let mut rem = flat;
        let mut r2 = T::zero();
        for axis in (0..self.dim()).rev() {
            let n = self.shape[axis];
            let i = rem % n;
            rem /= n;
            let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            let x = T::lit(k) * self.spacing(axis);
            r2 = r2 + x * x;
        }
        r2.sqrt()
    }

    pub fn mean(&self) -> T {
        crate::scalar::compensated_sum(self.values.iter().copied()) / T::count(self.len())
    }

    /// `hⁿ Σ |f|`.
    pub fn norm_l1(&self) -> T {
        self.cell_volume() * crate::scalar::compensated_sum(self.values.iter().map(|v| v.abs()))
    }

    /// `(hⁿ Σ f²)^{1/2}`.
    pub fn norm_l2(&self) -> T {
        (self.cell_volume() * crate::scalar::compensated_sum(self.values.iter().map(|&v| v * v))).sqrt()
    }

    pub fn norm_linf(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { shape: self.shape.clone(), box_length: self.box_length.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `a·self + b·other` on the same grid.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| a * x + b * y).collect();
        Ok(Self { shape: self.shape.clone(), box_length: self.box_length.clone(), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpby(T::one(), other, -T::one())
    }

    /// Circular shift: `out[i + offset] = self[i]`, per axis.
    pub fn shifted(&self, offset: &[usize]) -> Result<Self> {
        if offset.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: offset.len() });
        }
        let mut out = vec![T::zero(); self.len()];
        let mut idx = vec![0usize; self.dim()];
        for flat in 0..self.len() {
            let mut rem = flat;
            for axis in (0..self.dim()).rev() {
                idx[axis] = (rem % self.shape[axis] + offset[axis]) % self.shape[axis];
                rem /= self.shape[axis];
            }
            out[self.flat_index(&idx)] = self.values[flat];
        }
        Ok(Self { shape: self.shape.clone(), box_length: self.box_length.clone(), values: out })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if self.shape != other.shape || self.box_length != other.box_length {
            return Err(Error::InvalidGrid(format!(
                "grids differ: shape {:?} vs {:?}, box {:?} vs {:?}",
                self.shape, other.shape, self.box_length, other.box_length
            )));
        }
        Ok(())
    }

    pub(crate) fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.shape.clone(), self.box_length.clone(), values)
    }

    /// Serializes in the field file format with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(24 * self.len() + 128);
        let join = |v: Vec<String>| v.join(" ");
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "dimension {}", self.dim());
        let _ = writeln!(s, "shape {}", join(self.shape.iter().map(|n| n.to_string()).collect()));
        let _ = writeln!(s, "box_length {}", join(self.box_length.iter().map(|l| format_f64(l.to_f64_lossy())).collect()));
        let _ = writeln!(s, "values");
        for v in &self.values {
            let _ = writeln!(s, "{}", format_f64(v.to_f64_lossy()));
        }
        s
    }

    /// Plot-friendly columns: node coordinates followed by the value.
    pub fn to_columns(&self) -> String {
        let mut s = String::with_capacity(32 * self.len());
        let header: Vec<&str> = ["x", "y", "z"][..self.dim().min(3)].to_vec();
        let _ = writeln!(s, "# {} value", header.join(" "));
        for flat in 0..self.len() {
            for x in self.coordinates(flat) {
                let _ = write!(s, "{} ", format_f64(x.to_f64_lossy()));
            }
            let _ = writeln!(s, "{}", format_f64(self.values[flat].to_f64_lossy()));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && (!t.starts_with('#') || t == MAGIC)
        });
        let mut next = |key: &str| -> Result<(usize, Vec<String>)> {
            loop {
                let (i, l) = lines.next().ok_or(Error::Parse { line: 0, message: format!("missing `{key}`") })?;
                let t = l.trim();
                if t == MAGIC {
                    continue;
                }
                let mut parts = t.split_whitespace();
                let head = parts.next().unwrap_or("");
                if head != key {
                    return Err(Error::Parse { line: i + 1, message: format!("expected `{key}`, found `{head}`") });
                }
                return Ok((i + 1, parts.map(String::from).collect()));
            }
        };
        let (line, dim) = next("dimension")?;
        let dim: usize = single(&dim, line)?;
        let (line, shape) = next("shape")?;
        let shape: Vec<usize> = parse_all(&shape, line)?;
        let (line, box_length) = next("box_length")?;
        let box_length: Vec<f64> = parse_all(&box_length, line)?;
        if shape.len() != dim || box_length.len() != dim {
            return Err(Error::Parse { line, message: format!("dimension {dim} but shape {shape:?} and box {box_length:?}") });
        }
        let (vline, rest) = next("values")?;
        if !rest.is_empty() {
            return Err(Error::Parse { line: vline, message: "unexpected tokens after `values`".into() });
        }
        let mut values = Vec::new();
        for (i, l) in text.lines().enumerate().skip(vline) {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let v: f64 = t.parse().map_err(|e| Error::Parse { line: i + 1, message: format!("{t:?}: {e}") })?;
            values.push(T::lit(v));
        }
        Self::new(shape, box_length.into_iter().map(T::lit).collect(), values)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        Self::parse(&text)
    }

    pub fn cast<U: Real>(&self) -> GridField<U> {
        GridField {
            shape: self.shape.clone(),
            box_length: self.box_length.iter().map(|v| v.cast()).collect(),
            values: self.values.iter().map(|v| v.cast()).collect(),
        }
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn single<V: std::str::FromStr>(tokens: &[String], line: usize) -> Result<V>
where
    V::Err: std::fmt::Display,
{
    match tokens {
        [t] => t.parse().map_err(|e| Error::Parse { line, message: format!("{t:?}: {e}") }),
        _ => Err(Error::Parse { line, message: format!("expected one value, found {}", tokens.len()) }),
    }
}

fn parse_all<V: std::str::FromStr>(tokens: &[String], line: usize) -> Result<Vec<V>>
where
    V::Err: std::fmt::Display,
{
    tokens
        .iter()
        .map(|t| t.parse().map_err(|e| Error::Parse { line, message: format!("{t:?}: {e}") }))
        .collect()
}

fn validate_geometry<T: Real>(shape: &[usize], box_length: &[T]) -> Result<()> {
    if !(1..=3).contains(&shape.len()) {
        return Err(Error::InvalidGrid(format!("grids must have 1 to 3 axes, got {}", shape.len())));
    }
    if box_length.len() != shape.len() {
        return Err(Error::DimensionMismatch { expected: shape.len(), found: box_length.len() });
    }
    for (axis, &n) in shape.iter().enumerate() {
        if n < MIN_AXIS_LEN || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("axis {axis} has {n} samples; need a power of two >= {MIN_AXIS_LEN}")));
        }
    }
    for (axis, &l) in box_length.iter().enumerate() {
        if !(l > T::zero()) || !l.is_finite() {
            return Err(Error::InvalidGrid(format!("axis {axis} has box length {l}")));
        }
    }
    Ok(())
}

fn coordinates_into<T: Real>(shape: &[usize], box_length: &[T], flat: usize, x: &mut [T]) {
    let mut rem = flat;
    for axis in (0..shape.len()).rev() {
        let i = rem % shape[axis];
        rem /= shape[axis];
        x[axis] = T::count(i) * box_length[axis] / T::count(shape[axis]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_validation() {
        assert!(GridField::<f64>::zeros(vec![8], vec![1.0]).is_ok());
        assert!(GridField::<f64>::zeros(vec![12], vec![1.0]).is_err());
        assert!(GridField::<f64>::zeros(vec![4], vec![1.0]).is_err());
        assert!(GridField::<f64>::zeros(vec![8; 4], vec![1.0; 4]).is_err());
        assert!(GridField::<f64>::zeros(vec![8], vec![0.0]).is_err());
        assert!(matches!(GridField::new(vec![8], vec![1.0], vec![f64::NAN; 8]), Err(Error::NonFinite(0))));
        assert!(matches!(GridField::new(vec![8], vec![1.0], vec![0.0; 7]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn coordinates_are_row_major() {
        let g = GridField::<f64>::from_fn(vec![8, 16], vec![4.0, 8.0], |x| 100.0 * x[0] + x[1]).unwrap();
        assert_eq!(g.values()[1], 0.5);
        assert_eq!(g.values()[16], 50.0);
        assert_eq!(g.coordinates(17), vec![0.5, 0.5]);
        assert_eq!(g.wrapped_radius(15), 0.5); // last column wraps to -h
        assert_eq!(g.wrapped_radius(7), 3.5);
    }

    #[test]
    fn delta_has_unit_mass() {
        let g = GridField::<f64>::delta(vec![16, 8], vec![2.0, 3.0], &[3, 5]).unwrap();
        assert!((g.norm_l1() - 1.0).abs() < 1e-15);
        assert!(GridField::<f64>::delta(vec![16, 8], vec![2.0, 3.0], &[3, 8]).is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let g = GridField::<f64>::from_fn(vec![8, 8], vec![1.0, 3.0], |x| (x[0] * 7.1).sin() / 3.0 + x[1]).unwrap();
        let back = GridField::<f64>::parse(&g.to_text()).unwrap();
        assert_eq!(g, back);
        assert!(g.to_columns().lines().count() == 65);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "# green-conv field\ndimension 1\nshape 8\nbox_length 1\nvalues\n1\n2\nx\n";
        assert!(matches!(GridField::<f64>::parse(bad), Err(Error::Parse { line: 8, .. })));
        let missing = "dimension 1\nshape 8\n";
        assert!(matches!(GridField::<f64>::parse(missing), Err(Error::Parse { .. })));
        let short = "dimension 1\nshape 8\nbox_length 1\nvalues\n1\n";
        assert!(matches!(GridField::<f64>::parse(short), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn shift_moves_values() {
        let g = GridField::<f64>::from_fn(vec![8], vec![8.0], |x| x[0]).unwrap();
        let s = g.shifted(&[3]).unwrap();
        assert_eq!(s.values()[3], 0.0);
        assert_eq!(s.values()[0], 5.0);
    }
}
