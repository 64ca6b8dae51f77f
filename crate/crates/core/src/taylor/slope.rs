use serde::{Deserialize, Serialize};

use super::TaylorContext;
use crate::error::{Error, Result};
use crate::grid::{pvar_exact, SampledPath};
use crate::ode::{heun_path, SolverConfig};
use crate::stats::linear_fit;

/// Remainder-slope report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub order: usize,
    pub eps_list: Vec<f64>,
    /// Geometric ensemble mean of the remainder p-variation norm per ε.
    pub norms: Vec<f64>,
    pub slope: f64,
    pub r_squared: f64,
}

/// `ε = 2^{−3}, …, 2^{−9}`.
pub fn default_eps_list() -> Vec<f64> {
    (3..=9).map(|k| 2f64.powi(-k)).collect()
}

/// Fits `log‖φ^ε − Σ_{k≤m} ε^k φ^k‖_{p-var}` against `log ε` over an ensemble
/// of drivers. `φ^ε` is the one-step-per-interval Heun solve on the driver
/// grid, i.e. the same discrete map the Taylor terms differentiate.
pub fn taylor_remainder_slope(
    ctx: &TaylorContext,
    drivers: &[SampledPath],
    order: usize,
    eps_list: &[f64],
    p: f64,
) -> Result<SlopeReport> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidArgument(format!("remainder order must be 1 or 2, got {order}")));
    }
    if eps_list.len() < 4 {
        return Err(Error::InvalidArgument(format!("slope fit needs at least 4 ε values, got {}", eps_list.len())));
    }
    if drivers.is_empty() {
        return Err(Error::InvalidArgument("empty driver ensemble".into()));
    }
    let bundles = drivers.iter().map(|x| ctx.bundle(x)).collect::<Result<Vec<_>>>()?;
    let mut log_norms = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut acc = 0.0;
        for b in &bundles {
            let z = ctx.gamma().axpy(eps, &b.driver)?;
            let sol = heun_path(ctx.field(), eps, &z, ctx.y0(), true, SolverConfig::default())?;
            let rem = sol.sub(&b.expansion(eps, order))?;
            acc += pvar_exact(&rem, p)?.value.ln();
        }
        log_norms.push(acc / bundles.len() as f64);
    }
    let log_eps: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let fit = linear_fit(&log_eps, &log_norms)?;
    Ok(SlopeReport {
        order,
        eps_list: eps_list.to_vec(),
        norms: log_norms.iter().map(|v| v.exp()).collect(),
        slope: fit.slope,
        r_squared: fit.r_squared,
    })
}
