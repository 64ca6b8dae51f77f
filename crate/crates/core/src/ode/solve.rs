use super::VectorField;
use crate::error::{Error, Result};
use crate::grid::SampledPath;

/// Tunables of the Heun integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Abort once `|y|` exceeds this.
    pub guard: f64,
    /// Equal sub-steps taken inside every grid interval.
    pub substeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { guard: 1e6, substeps: 1 }
    }
}

/// Solution path with a step-halving error estimate (sup norm).
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub path: SampledPath,
    pub error_estimate: f64,
}

/// Scratch buffers for one Heun step.
pub(crate) struct Heun {
    n: usize,
    d: usize,
    sig: Vec<f64>,
    b: Vec<f64>,
    f0: Vec<f64>,
    ytil: Vec<f64>,
}

impl Heun {
    pub(crate) fn new(n: usize, d: usize) -> Self {
        Self { n, d, sig: vec![0.0; n * d], b: vec![0.0; n], f0: vec![0.0; n], ytil: vec![0.0; n] }
    }

    /// `out = σ(y) dz + β(ε, y) dt`.
    fn rhs(&mut self, field: &dyn VectorField, eps: f64, y: &[f64], dz: &[f64], dt: f64, drift: bool, out: &mut [f64]) {
        field.sigma(y, &mut self.sig);
        for i in 0..self.n {
            out[i] = self.sig[i * self.d..(i + 1) * self.d].iter().zip(dz).map(|(s, z)| s * z).sum();
        }
        if drift {
            field.beta(eps, y, &mut self.b);
            for i in 0..self.n {
                out[i] += self.b[i] * dt;
            }
        }
    }

    /// One predictor–corrector step in place.
    pub(crate) fn step(&mut self, field: &dyn VectorField, eps: f64, y: &mut [f64], dz: &[f64], dt: f64, drift: bool) {
        let mut f0 = std::mem::take(&mut self.f0);
        self.rhs(field, eps, y, dz, dt, drift, &mut f0);
        let mut ytil = std::mem::take(&mut self.ytil);
        for i in 0..self.n {
            ytil[i] = y[i] + f0[i];
        }
        let mut f1 = vec![0.0; self.n];
        self.rhs(field, eps, &ytil, dz, dt, drift, &mut f1);
        for i in 0..self.n {
            y[i] += 0.5 * (f0[i] + f1[i]);
        }
        self.f0 = f0;
        self.ytil = ytil;
    }

    /// Predictor `ỹ = y + σ(y)dz + β dt`, written into `out`.
    pub(crate) fn predictor(
        &mut self,
        field: &dyn VectorField,
        eps: f64,
        y: &[f64],
        dz: &[f64],
        dt: f64,
        drift: bool,
        out: &mut [f64],
    ) {
        let mut f0 = std::mem::take(&mut self.f0);
        self.rhs(field, eps, y, dz, dt, drift, &mut f0);
        for i in 0..self.n {
            out[i] = y[i] + f0[i];
        }
        self.f0 = f0;
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Heun integration of `dy = σ(y) dz + β(ε, y) dt` along the piecewise-linear
/// interpolant of `driver`, reported on the driver grid.
pub fn heun_path(
    field: &dyn VectorField,
    eps: f64,
    driver: &SampledPath,
    y0: &[f64],
    drift: bool,
    cfg: SolverConfig,
) -> Result<SampledPath> {
    let (n, d) = (field.state_dim(), field.noise_dim());
    if driver.dim() != d || y0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "driver dimension {} / initial state {} do not match field ({d}, {n})",
            driver.dim(),
            y0.len()
        )));
    }
    let r = cfg.substeps.max(1);
    let mut heun = Heun::new(n, d);
    let mut out = SampledPath::zeros(driver.grid().clone(), n);
    let mut y = y0.to_vec();
    out.point_mut(0).copy_from_slice(&y);
    let mut dz = vec![0.0; d];
    for j in 0..driver.len() - 1 {
        let (a, b) = (driver.point(j), driver.point(j + 1));
        for k in 0..d {
            dz[k] = (b[k] - a[k]) / r as f64;
        }
        let dt = driver.grid().dt(j) / r as f64;
        for _ in 0..r {
            heun.step(field, eps, &mut y, &dz, dt, drift);
        }
        let nrm = norm(&y);
        if !(nrm <= cfg.guard) {
            return Err(Error::Divergence { t: driver.times()[j + 1], norm: nrm, limit: cfg.guard });
        }
        out.point_mut(j + 1).copy_from_slice(&y);
    }
    Ok(out)
}

/// Young ODE `dy = σ(y) dk (+ β(0, y) dt)` with a step-halving error estimate
/// `(4/3)·sup|y_h − y_{h/2}|` for the returned (unhalved) solution.
pub fn solve_young_ode(field: &dyn VectorField, driver: &SampledPath, y0: &[f64], with_drift: bool) -> Result<OdeSolution> {
    solve_young_ode_with(field, 0.0, driver, y0, with_drift, SolverConfig::default())
}

pub fn solve_young_ode_with(
    field: &dyn VectorField,
    eps: f64,
    driver: &SampledPath,
    y0: &[f64],
    with_drift: bool,
    cfg: SolverConfig,
) -> Result<OdeSolution> {
    let path = heun_path(field, eps, driver, y0, with_drift, cfg)?;
    let fine = heun_path(field, eps, driver, y0, with_drift, SolverConfig { substeps: 2 * cfg.substeps.max(1), ..cfg })?;
    let diff = path.sub(&fine)?.sup_norm();
    Ok(OdeSolution { path, error_estimate: 4.0 / 3.0 * diff })
}
