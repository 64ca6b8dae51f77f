use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mc::log_mean;
use super::{FitRecord, LaplaceProblem, McConfig, MinimizeResult};
use crate::error::Result;
use crate::fbm::sample_rng;
use crate::functional::dual_pair;
use crate::hessian::{det2, hessian_matrix, path_hash};
use crate::taylor::{compute_theta1, TaylorContext};

/// Closed-form value of `α₀` in the Gaussian-quadratic regime, where the
/// order-zero exponent is `½ gᵀHg` exactly:
/// `E[e^{−½gᵀHg}] = e^{−tr A} det₂(Id + 2A)^{−1/2}` with `A = H/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Det2Check {
    pub closed_form: f64,
    /// `(α₀ − closed_form)/se(α₀)`.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceReport {
    pub gamma_coeffs: Vec<f64>,
    pub gamma_hash: String,
    /// `a = F_Λ(γ) = F(φ⁰) + ½‖γ‖²`.
    pub f_lambda_min: f64,
    pub first_order_residual: f64,
    /// `c = ∇F(φ⁰)⟨θ¹⟩`.
    pub c_coef: f64,
    pub alpha0: f64,
    pub alpha0_se: f64,
    /// Set when the relative standard error of `α₀` exceeds 20%.
    pub alpha0_unstable: bool,
    pub hessian_min_eig: f64,
    pub hessian_n: usize,
    /// `1 + λ_min(H) > 0`.
    pub nondegenerate: bool,
    pub restarts_disagree: bool,
    pub det2_check: Option<Det2Check>,
    pub fit: Option<FitRecord>,
}

/// `a`, `c` and a Monte Carlo estimate of
/// `α₀ = G(φ⁰) E[exp(−∇F(φ⁰)⟨φ²(X)⟩ − ½∇²F(φ⁰)⟨φ¹(X), φ¹(X)⟩)]`,
/// plus the Hessian spectrum and, when the Taylor terms beyond `χ` vanish,
/// the `det₂` closed form.
pub fn expansion_constants(problem: &LaplaceProblem, min: &MinimizeResult, mc: McConfig) -> Result<LaplaceReport> {
    let gamma = &min.gamma;
    let ctx = TaylorContext::new(problem.field, gamma.path.clone(), problem.y0)?;
    let phi0 = ctx.phi0();
    let f = problem.f;
    let a = f.value(phi0) + 0.5 * gamma.norm_sq();
    let g0 = problem.g.value(phi0);
    let theta1 = compute_theta1(&ctx);
    let dual = f.grad(phi0);
    let c = dual_pair(&dual, &theta1);

    let hess = hessian_matrix(f, &ctx, problem.basis, problem.len())?;
    let eigs = hess.eigenvalues();
    let hessian_min_eig = eigs.first().copied().unwrap_or(0.0);

    let (alpha0, alpha0_se, linear_regime) = if f.is_zero() {
        (g0, 0.0, true)
    } else {
        let samples = (0..mc.samples.max(2))
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(mc.seed, i as u64);
                let (_, x) = problem.spectral_driver(&mut rng);
                let b = ctx.bundle(&x)?;
                let expo = dual_pair(&dual, &b.phi2) + 0.5 * f.hess(phi0, &b.phi1, &b.phi1);
                let scale = 1.0 + b.chi.sup_norm();
                let linear = b.psi.sup_norm() <= 1e-12 * scale
                    && b.theta1.sup_norm() <= 1e-12 * scale
                    && b.theta2.sup_norm() <= 1e-12 * scale;
                Ok(((g0, -expo), linear))
            })
            .collect::<Result<Vec<_>>>()?;
        let linear = samples.iter().all(|s| s.1);
        let terms: Vec<(f64, f64)> = samples.into_iter().map(|s| s.0).collect();
        let (mean, se, _, _) = log_mean(&terms);
        (mean, se, linear)
    };
    let rel = if alpha0 != 0.0 { alpha0_se / alpha0.abs() } else { f64::INFINITY };
    let alpha0_unstable = rel > 0.2;
    if alpha0_unstable {
        log::warn!("α₀ Monte Carlo relative standard error {rel:.2} exceeds 20%");
    }

    let det2_check = if linear_regime && !f.is_zero() {
        let half: Vec<f64> = eigs.iter().map(|l| 0.5 * l).collect();
        let trace: f64 = half.iter().sum();
        det2(&half, 2.0).ok().map(|d| {
            let closed_form = g0 * (-trace).exp() / d.sqrt();
            Det2Check { closed_form, z_score: (alpha0 - closed_form) / alpha0_se.max(f64::MIN_POSITIVE) }
        })
    } else {
        None
    };

    Ok(LaplaceReport {
        gamma_coeffs: gamma.coeffs.clone(),
        gamma_hash: path_hash(&gamma.path),
        f_lambda_min: a,
        first_order_residual: min.residual,
        c_coef: c,
        alpha0,
        alpha0_se,
        alpha0_unstable,
        hessian_min_eig,
        hessian_n: hess.n(),
        nondegenerate: 1.0 + hessian_min_eig > 0.0,
        restarts_disagree: min.restarts_disagree,
        det2_check,
        fit: None,
    })
}
