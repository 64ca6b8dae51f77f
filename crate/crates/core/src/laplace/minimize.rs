use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::LaplaceProblem;
use crate::error::{Error, Result};
use crate::fbm::{sample_rng, CameronMartinVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptConfig {
    pub max_iter: usize,
    /// Target for the sup norm of the gradient.
    pub tol: f64,
    pub restarts: usize,
    /// Standard deviation of the random starting coefficients.
    pub restart_scale: f64,
    /// Restarts whose values differ from the best by more than this are
    /// reported as disagreeing.
    pub agree_tol: f64,
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { max_iter: 2000, tol: 1e-10, restarts: 5, restart_scale: 0.5, agree_tol: 1e-6, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub gamma: CameronMartinVector,
    /// `F_Λ(γ)`.
    pub f_lambda: f64,
    /// `max_a |⟨e_a, γ⟩ + ∇F(φ⁰)⟨χ(e_a)⟩|` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    /// Final `F_Λ` of every restart, the first one started from zero.
    pub restart_values: Vec<f64>,
    pub restarts_disagree: bool,
}

struct Run {
    coeffs: Vec<f64>,
    value: f64,
    residual: f64,
    iterations: usize,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gradient descent with Armijo backtracking. Trial steps follow the
/// Barzilai–Borwein rule and are halved until sufficient decrease holds.
fn descend(problem: &LaplaceProblem, start: Vec<f64>, cfg: &OptConfig) -> Result<Run> {
    let mut x = start;
    let (mut fx, mut g) = problem.value_and_gradient(&x)?;
    let mut step = 1.0;
    let mut iterations = 0;
    while sup(&g) > cfg.tol && iterations < cfg.max_iter {
        iterations += 1;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let mut t = step;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let ft = problem.f_lambda(&trial)?;
            if ft <= fx - 1e-4 * t * g2 {
                break Some(trial);
            }
            t *= 0.5;
            if t < 1e-14 {
                break None;
            }
        };
        let Some(next) = accepted else { break };
        let (fn_, gn) = problem.value_and_gradient(&next)?;
        let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        step = if sy > 0.0 { (ss / sy).clamp(1e-3, 1e3) } else { 1.0 };
        x = next;
        fx = fn_;
        g = gn;
    }
    Ok(Run { residual: sup(&g), coeffs: x, value: fx, iterations })
}

/// Minimises `F_Λ` over the span of `problem.basis` with several restarts.
/// Fails only when no restart reaches `cfg.tol`; disagreement between
/// converged restarts is reported in the result.
pub fn minimize_f_lambda(problem: &LaplaceProblem, cfg: &OptConfig) -> Result<MinimizeResult> {
    let n = problem.len();
    let mut runs = Vec::with_capacity(cfg.restarts.max(1));
    for r in 0..cfg.restarts.max(1) {
        let start = if r == 0 {
            vec![0.0; n]
        } else {
            let mut rng = sample_rng(cfg.seed, r as u64);
            (0..n).map(|_| cfg.restart_scale * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        runs.push(descend(problem, start, cfg)?);
    }
    let restart_values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let converged: Vec<&Run> = runs.iter().filter(|r| r.residual <= cfg.tol).collect();
    let best_of = |rs: &[&Run]| -> Option<usize> {
        (0..rs.len()).min_by(|&i, &j| rs[i].value.total_cmp(&rs[j].value))
    };
    let all: Vec<&Run> = runs.iter().collect();
    let (best, ok) = match best_of(&converged) {
        Some(i) => (converged[i], true),
        None => (all[best_of(&all).expect("at least one run")], false),
    };
    if !ok {
        return Err(Error::Numerical(format!(
            "F_Λ minimisation did not converge: best residual {:.3e} above tolerance {:.1e} after {} iterations",
            best.residual, cfg.tol, best.iterations
        )));
    }
    let scale = 1.0 + best.value.abs();
    let restarts_disagree = converged.iter().any(|r| (r.value - best.value).abs() > cfg.agree_tol * scale);
    if restarts_disagree {
        log::warn!("restarts reached different minima of F_Λ; the minimiser may not be unique");
    }
    Ok(MinimizeResult {
        gamma: problem.basis.vector(&best.coeffs)?,
        f_lambda: best.value,
        residual: best.residual,
        iterations: best.iterations,
        restart_values,
        restarts_disagree,
    })
}
