use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use super::{HurstParams, VolterraOperator};
use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};

/// Member `n` of the cosine orthonormal basis of `L²[0,1]`.
pub fn cosine_mode(n: usize, t: f64) -> f64 {
    if n == 0 {
        1.0
    } else {
        SQRT_2 * (n as f64 * PI * t).cos()
    }
}

/// `k = Uh` together with the `L²` coefficients of `h` in a [`CmBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct CameronMartinVector {
    pub coeffs: Vec<f64>,
    pub path: SampledPath,
    pub hurst: HurstParams,
}

impl CameronMartinVector {
    /// Cameron–Martin inner product, i.e. the `L²` product of the preimages.
    pub fn inner(&self, other: &CameronMartinVector) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }
}

/// Images `U(e_n ε_i)` of the cosine basis, indexed mode-major
/// (`a = n·dim + i`) so that truncations are nested.
#[derive(Debug, Clone)]
pub struct CmBasis {
    grid: Arc<TimeGrid>,
    params: HurstParams,
    dim: usize,
    images: Vec<Vec<f64>>,
}

impl CmBasis {
    pub fn new(grid: Arc<TimeGrid>, params: HurstParams, dim: usize, modes: usize) -> Result<Self> {
        if dim == 0 || modes == 0 {
            return Err(Error::InvalidArgument("basis needs at least one mode and one coordinate".into()));
        }
        let width = (1.0f64 / 32.0).min(0.5 / modes as f64);
        let op = VolterraOperator::new(grid.clone(), params.hurst, width)?;
        let images = (0..modes).map(|n| op.apply_scalar(|s| cosine_mode(n, s))).collect();
        Ok(Self { grid, params, dim, images })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn params(&self) -> &HurstParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.images.len()
    }

    /// Total number of basis elements.
    pub fn len(&self) -> usize {
        self.images.len() * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Scalar image `U e_n` on the grid.
    pub fn mode_image(&self, n: usize) -> &[f64] {
        &self.images[n]
    }

    pub fn element(&self, a: usize) -> SampledPath {
        let (n, i) = (a / self.dim, a % self.dim);
        let mut out = SampledPath::zeros(self.grid.clone(), self.dim);
        for (j, v) in self.images[n].iter().enumerate() {
            out.point_mut(j)[i] = *v;
        }
        out
    }

    /// `Σ_a c_a U(e_a)`; `coeffs` may be shorter than the basis.
    pub fn path(&self, coeffs: &[f64]) -> Result<SampledPath> {
        if coeffs.len() > self.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                self.len()
            )));
        }
        let mut out = SampledPath::zeros(self.grid.clone(), self.dim);
        for (a, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let (n, i) = (a / self.dim, a % self.dim);
            for (j, v) in self.images[n].iter().enumerate() {
                out.point_mut(j)[i] += c * v;
            }
        }
        Ok(out)
    }

    pub fn vector(&self, coeffs: &[f64]) -> Result<CameronMartinVector> {
        Ok(CameronMartinVector { coeffs: coeffs.to_vec(), path: self.path(coeffs)?, hurst: self.params })
    }

    /// The `L²` preimage `h = Σ_a c_a e_a` sampled on the grid.
    pub fn preimage(&self, coeffs: &[f64]) -> SampledPath {
        let d = self.dim;
        SampledPath::from_fn(self.grid.clone(), d, |t, o| {
            o.fill(0.0);
            for (a, &c) in coeffs.iter().enumerate() {
                o[a % d] += c * cosine_mode(a / d, t);
            }
        })
    }
}

/// `k_t = ∫₀^t K(t,s) h_s ds` for a sampled `h`.
pub fn cm_map(h: &SampledPath, hurst: f64) -> Result<SampledPath> {
    let op = VolterraOperator::new(h.grid().clone(), hurst, 1.0 / 64.0)?;
    Ok(op.apply(h))
}

/// The interpolation-space basis `{ε_i} ∪ {√2 (1+n²)^{−δ/2} cos(nπt) ε_i}`,
/// `1 ≤ n ≤ n_max`, ordered mode-major.
pub fn onb_interp(grid: Arc<TimeGrid>, delta: f64, n_max: usize, dim: usize) -> Result<Vec<SampledPath>> {
    if !(delta > 0.5 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("smoothness {delta} outside (1/2, 1)")));
    }
    let mut out = Vec::with_capacity((n_max + 1) * dim);
    for n in 0..=n_max {
        let w = (1.0 + (n * n) as f64).powf(-delta / 2.0);
        let scale = if n == 0 { 1.0 } else { w };
        for i in 0..dim {
            out.push(SampledPath::from_fn(grid.clone(), dim, |t, o| {
                o.fill(0.0);
                o[i] = scale * cosine_mode(n, t);
            }));
        }
    }
    Ok(out)
}
