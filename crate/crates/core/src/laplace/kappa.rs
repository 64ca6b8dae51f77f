use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::{sample_rng, FbmSampler};
use crate::grid::TimeGrid;
use crate::ode::{heun_path, SolverConfig, VectorField};

/// `κ = n₁ + n₂/H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaEntry {
    pub value: f64,
    pub n1: u32,
    pub n2: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaLadder {
    pub hurst: f64,
    pub entries: Vec<KappaEntry>,
}

impl KappaLadder {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// Largest gap between an entry and its recorded representation.
    pub fn reconstruction_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| (e.value - (e.n1 as f64 + e.n2 as f64 / self.hurst)).abs())
            .fold(0.0, f64::max)
    }
}

fn check_ladder_hurst(h: f64) -> Result<()> {
    if !(h > 0.25 && h < 0.5) || (h - 1.0 / 3.0).abs() < 1e-12 {
        return Err(Error::ParameterWindow(format!("exponent ladder needs H in (1/4, 1/3) ∪ (1/3, 1/2), got {h}")));
    }
    Ok(())
}

/// The `count` smallest elements of `{n₁ + n₂/H : n₁, n₂ ≥ 0}`, ascending.
/// Coinciding values are merged and keep the representation with the
/// smallest `n₂`.
pub fn kappa_ladder(hurst: f64, count: usize) -> Result<KappaLadder> {
    check_ladder_hurst(hurst)?;
    let inv = 1.0 / hurst;
    // Every element below `count` has n₁ < count and n₂ < count·H + 1.
    let bound = count as f64;
    let mut all = Vec::new();
    for n2 in 0..=((bound * hurst).ceil() as u32 + 1) {
        for n1 in 0..=count as u32 {
            let value = n1 as f64 + n2 as f64 * inv;
            if value <= bound {
                all.push(KappaEntry { value, n1, n2 });
            }
        }
    }
    all.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.n2.cmp(&b.n2)));
    let mut entries: Vec<KappaEntry> = Vec::new();
    for e in all {
        match entries.last() {
            Some(last) if (e.value - last.value).abs() <= 1e-9 * (1.0 + e.value) => {}
            _ => entries.push(e),
        }
    }
    entries.truncate(count);
    Ok(KappaLadder { hurst, entries })
}

/// Small-time reading of the expansion: `ε = T^H`, and a term of order
/// `ε^κ` is of order `T^{κH}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortTime {
    pub t: f64,
    pub hurst: f64,
    pub eps: f64,
}

impl ShortTime {
    pub fn time_exponent(&self, kappa: f64) -> f64 {
        kappa * self.hurst
    }
}

pub fn short_time_transform(t: f64, hurst: f64) -> Result<ShortTime> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("time horizon {t} outside (0, 1]")));
    }
    Ok(ShortTime { t, hurst, eps: t.powf(hurst) })
}

/// Same diffusion coefficient as `inner`, drift `ε^{1/H} β(0, y)`. At `ε = 1`
/// this is the original equation; at `ε = T^H` it is the equation on `[0, T]`
/// after rescaling time to `[0, 1]`.
pub struct ShortTimeField<'a> {
    pub inner: &'a dyn VectorField,
    pub hurst: f64,
}

impl VectorField for ShortTimeField<'_> {
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }
    fn noise_dim(&self) -> usize {
        self.inner.noise_dim()
    }
    fn sigma(&self, y: &[f64], out: &mut [f64]) {
        self.inner.sigma(y, out)
    }
    fn sigma_dy(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
        self.inner.sigma_dy(y, v, out)
    }
    fn sigma_dyy(&self, y: &[f64], u: &[f64], v: &[f64], out: &mut [f64]) {
        self.inner.sigma_dyy(y, u, v, out)
    }
    fn beta(&self, eps: f64, y: &[f64], out: &mut [f64]) {
        self.inner.beta(0.0, y, out);
        let s = eps.abs().powf(1.0 / self.hurst);
        out.iter_mut().for_each(|v| *v *= s);
    }
    fn beta_dy(&self, eps: f64, y: &[f64], v: &[f64], out: &mut [f64]) {
        self.inner.beta_dy(0.0, y, v, out);
        let s = eps.abs().powf(1.0 / self.hurst);
        out.iter_mut().for_each(|x| *x *= s);
    }
}

/// First coordinate of `V_T − V_0` and of `Y^{T^H}_1 − Y_0` over two
/// independent ensembles.
///
/// `V` is solved on the original time axis with `fine_steps` uniform steps on
/// `[0, 1]` and read off at `T`, which must be a grid point. `Y^ε` is solved
/// on `[0, 1]` with `coarse_steps` steps, driver `εX'` for a fresh fBm `X'`
/// and drift `ε^{1/H} β`.
#[allow(clippy::too_many_arguments)]
pub fn short_time_ensembles(
    field: &dyn VectorField,
    hurst: f64,
    t: f64,
    y0: &[f64],
    fine_steps: usize,
    coarse_steps: usize,
    samples: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let st = short_time_transform(t, hurst)?;
    let fine = Arc::new(TimeGrid::uniform(fine_steps)?);
    let stop = fine
        .index_of(t)
        .ok_or_else(|| Error::InvalidArgument(format!("T = {t} is not a point of the {fine_steps}-step grid")))?;
    let coarse = Arc::new(TimeGrid::uniform(coarse_steps)?);
    let scaled = ShortTimeField { inner: field, hurst };
    let d = field.noise_dim();
    let fine_sampler = FbmSampler::new(fine, hurst)?;
    let coarse_sampler = FbmSampler::new(coarse, hurst)?;
    let direct = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = fine_sampler.sample(d, &mut sample_rng(seed, 2 * i as u64));
            let v = heun_path(&scaled, 1.0, &x, y0, true, SolverConfig::default())?;
            Ok(v.point(stop)[0] - y0[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    let rescaled = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = coarse_sampler.sample(d, &mut sample_rng(seed, 2 * i as u64 + 1)).scale(st.eps);
            let y = heun_path(&scaled, st.eps, &x, y0, true, SolverConfig::default())?;
            Ok(y.last()[0] - y0[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((direct, rescaled))
}
