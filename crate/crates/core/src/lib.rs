#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod convolution;
pub mod error;
pub mod fitting;
pub mod grid;
pub mod linalg;
pub mod quadrature;
pub mod radial_kernel;
pub mod scalar;
pub mod special_fn;
pub mod transform;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::{Quad, Real};

pub use convolution::{approximate_convolution, convolve_direct, error_report, screened_poisson_solve, ConvolutionRoute, ErrorReport};
pub use fitting::{fit, fit_hm, DiffusionSet, FitOptions, GramSystem, GreenExpansion, KernelApproximation};
pub use grid::GridField;
pub use radial_kernel::{gaussian_kernel, RadialKernel, SobolevIndex, TabulatedProfile};

/// Double-precision kernel.
pub type Kernel = RadialKernel<f64>;
/// Quad-precision kernel, the input type for ill-conditioned fits.
pub type QuadKernel = RadialKernel<Quad>;
pub type Diffusions = DiffusionSet<f64>;
pub type QuadDiffusions = DiffusionSet<Quad>;
pub type Approximation = KernelApproximation<f64>;
pub type QuadApproximation = KernelApproximation<Quad>;
pub type Expansion = GreenExpansion<f64>;
pub type Field = GridField<f64>;
