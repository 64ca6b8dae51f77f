use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LaplaceProblem;
use crate::error::{Error, Result};
use crate::fbm::sample_rng;
use crate::ode::{heun_path, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
}

/// One line of the Monte Carlo table. `j_hat` and `se` may overflow for
/// small `ε`; `log_j_hat` and `rel_se` stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub eps: f64,
    pub j_hat: f64,
    pub se: f64,
    pub log_j_hat: f64,
    pub rel_se: f64,
    pub n: usize,
}

/// Stream index of sample `i` at position `k` of the ε list.
pub(crate) fn stream(k: usize, i: usize) -> u64 {
    ((k as u64) << 40) | i as u64
}

/// Log-domain mean of `G_i e^{w_i}` with its standard error.
pub(crate) fn log_mean(terms: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let m = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = terms.iter().map(|(g, w)| g * (w - m).exp()).collect();
    let (mean, se) = crate::stats::mean_se(&scaled);
    let log_j = if mean > 0.0 { mean.ln() + m } else { f64::NAN };
    let rel = if mean != 0.0 { se / mean.abs() } else { f64::INFINITY };
    (mean * m.exp(), se * m.exp(), log_j, rel)
}

/// Monte Carlo of `J(ε) = E[G(Y^ε) exp(−F(Y^ε)/ε²)]` for each `ε`.
///
/// With `shift = Some(γ)` the drivers are moved to `γ + εX` and reweighted
/// by `exp(−⟨γ, X⟩/ε − ‖γ‖²/(2ε²))`, the pairing being `Σ_a γ_a g_a`.
/// Sample `i` at list position `k` always uses the same random stream, so the
/// table does not depend on the number of worker threads.
pub fn mc_laplace(problem: &LaplaceProblem, eps_list: &[f64], shift: Option<&[f64]>, cfg: McConfig) -> Result<Vec<McRow>> {
    if cfg.samples < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least 2 samples".into()));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {e}")));
    }
    let gamma = match shift {
        Some(c) if c.len() != problem.len() => {
            return Err(Error::InvalidArgument(format!("shift has {} coefficients, basis has {}", c.len(), problem.len())))
        }
        Some(c) => Some((c.to_vec(), problem.basis.path(c)?, c.iter().map(|v| v * v).sum::<f64>())),
        None => None,
    };
    eps_list
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let terms = (0..cfg.samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(cfg.seed, stream(k, i));
                    let (g, x) = problem.spectral_driver(&mut rng);
                    let (z, log_shift) = match &gamma {
                        None => (x.scale(eps), 0.0),
                        Some((c, path, norm2)) => {
                            let pair: f64 = c.iter().zip(&g).map(|(a, b)| a * b).sum();
                            (path.axpy(eps, &x)?, -pair / eps - norm2 / (2.0 * eps * eps))
                        }
                    };
                    let y = heun_path(problem.field, eps, &z, problem.y0, true, SolverConfig::default())?;
                    Ok((problem.g.value(&y), log_shift - problem.f.value(&y) / (eps * eps)))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let (j_hat, se, log_j_hat, rel_se) = log_mean(&terms);
            Ok(McRow { eps, j_hat, se, log_j_hat, rel_se, n: cfg.samples })
        })
        .collect()
}
