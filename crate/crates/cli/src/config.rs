use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use green_conv::radial_kernel::{gaussian_kernel, DecayHint, RadialKernel, SobolevIndex, TabulatedProfile};
use green_conv::{DiffusionSet, Real};
use serde::Deserialize;

/// Everything a `fit` or `convolve` run needs, as read from TOML.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub sobolev: u32,
    /// `raw` Green functions or the `regularized` φ family; defaults to raw when `sobolev = 0`.
    #[serde(default)]
    pub basis: Option<Basis>,
    #[serde(default)]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub diffusions: DiffusionSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Raw,
    Regularized,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `K(r) = e^{-r²/4}`.
    #[default]
    Gaussian,
    /// A single Green function `k(·; d)`.
    Green { d: f64 },
    /// Two columns `s K̂(s)` read from `path`, relative to the config file.
    Tabulated {
        path: PathBuf,
        #[serde(default)]
        decay: DecaySpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecaySpec {
    #[default]
    Unknown,
    Gaussian { rate: f64 },
    Exponential { rate: f64 },
    Algebraic { power: f64 },
}

impl DecaySpec {
    fn hint<T: Real>(self) -> DecayHint<T> {
        match self {
            DecaySpec::Unknown => DecayHint::Unknown,
            DecaySpec::Gaussian { rate } => DecayHint::Gaussian { rate: T::lit(rate) },
            DecaySpec::Exponential { rate } => DecayHint::Exponential { rate: T::lit(rate) },
            DecaySpec::Algebraic { power } => DecayHint::Algebraic { power: T::lit(power) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// `dⱼ = 1 + sin(j − 1)`, `j = 1..N`.
    OnePlusSin,
}

/// Either an explicit list or a formula with a count.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionSpec {
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub formula: Option<Formula>,
    #[serde(default)]
    pub count: Option<usize>,
}

impl Default for DiffusionSpec {
    fn default() -> Self {
        Self { values: None, formula: Some(Formula::OnePlusSin), count: Some(10) }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub shape: Vec<usize>,
    pub box_length: Vec<f64>,
}

fn default_dimension() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: default_dimension(),
            sobolev: 0,
            basis: None,
            kernel: KernelSpec::default(),
            diffusions: DiffusionSpec::default(),
            grid: None,
            output: default_output(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dimension: Option<usize>,
    pub num_terms: Option<usize>,
    pub out: Option<PathBuf>,
    pub grid_shape: Option<Vec<usize>>,
    pub box_length: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path` and resolves a relative tabulated-kernel path against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let KernelSpec::Tabulated { path: table, .. } = &mut cfg.kernel
            && table.is_relative()
            && let Some(dir) = path.parent()
        {
            *table = dir.join(&*table);
        }
        Ok(cfg)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(n) = o.dimension {
            self.dimension = n;
        }
        if let Some(count) = o.num_terms {
            match &mut self.diffusions.values {
                Some(values) => {
                    ensure!(count <= values.len(), "--num-terms {count} exceeds the {} listed diffusion values", values.len());
                    values.truncate(count);
                }
                None => self.diffusions.count = Some(count),
            }
        }
        if let Some(out) = &o.out {
            self.output = out.clone();
        }
        if o.grid_shape.is_some() || o.box_length.is_some() {
            let current = self.grid_spec();
            self.grid = Some(GridSpec {
                shape: o.grid_shape.clone().unwrap_or(current.shape),
                box_length: o.box_length.clone().unwrap_or(current.box_length),
            });
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        ensure!(n >= 1, "dimension must be at least 1");
        if self.basis() == Basis::Raw && (n > 3 || self.sobolev > 0) {
            bail!(
                "the raw Green basis is not in H^{m}_r for n = {n}; use n <= 3 with sobolev = 0 or basis = \"regularized\"",
                m = self.sobolev
            );
        }
        if let KernelSpec::Green { d } = self.kernel {
            ensure!(d > 0.0 && d.is_finite(), "green kernel needs d > 0, got {d}");
        }
        self.diffusion_values()?;
        if let Some(g) = &self.grid {
            ensure!(g.shape.len() == n, "grid shape {:?} does not have {n} entries", g.shape);
            ensure!(g.box_length.len() == n, "box_length {:?} does not have {n} entries", g.box_length);
        }
        Ok(())
    }

    pub fn basis(&self) -> Basis {
        self.basis.unwrap_or(if self.sobolev == 0 { Basis::Raw } else { Basis::Regularized })
    }

    pub fn sobolev_index(&self) -> SobolevIndex {
        SobolevIndex(self.sobolev)
    }

    pub fn diffusion_values(&self) -> Result<Vec<f64>> {
        let d = &self.diffusions;
        let values = match (&d.values, d.formula) {
            (Some(_), Some(_)) => bail!("give either `values` or `formula` for the diffusions, not both"),
            (Some(v), None) => {
                ensure!(d.count.is_none() || d.count == Some(v.len()), "`count` disagrees with the number of `values`");
                v.clone()
            }
            (None, Some(Formula::OnePlusSin)) => {
                let count = d.count.context("formula diffusions need a `count`")?;
                DiffusionSet::<f64>::one_plus_sin(count)?.as_slice().to_vec()
            }
            (None, None) => bail!("diffusions need `values` or `formula`"),
        };
        DiffusionSet::new(values.clone())?;
        Ok(values)
    }

    pub fn diffusion_set<T: Real>(&self) -> Result<DiffusionSet<T>> {
        Ok(DiffusionSet::new(self.diffusion_values()?.into_iter().map(T::lit).collect())?)
    }

    pub fn kernel<T: Real>(&self) -> Result<RadialKernel<T>> {
        let n = self.dimension;
        Ok(match &self.kernel {
            KernelSpec::Gaussian => gaussian_kernel(n)?,
            KernelSpec::Green { d } => RadialKernel::green(n, T::lit(*d))?,
            KernelSpec::Tabulated { path, decay } => {
                let table = TabulatedProfile::from_path(path, decay.hint())
                    .with_context(|| format!("loading tabulated kernel {}", path.display()))?;
                RadialKernel::tabulated(n, table)?
            }
        })
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.kernel, KernelSpec::Tabulated { .. })
    }

    /// The configured grid, or a default one of length 40 per axis.
    pub fn grid_spec(&self) -> GridSpec {
        self.grid.clone().unwrap_or_else(|| {
            let nodes = [4096, 256, 64].get(self.dimension - 1).copied().unwrap_or(16);
            GridSpec { shape: vec![nodes; self.dimension], box_length: vec![40.0; self.dimension] }
        })
    }
}
