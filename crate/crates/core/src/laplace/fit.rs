use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::McRow;
use crate::error::{Error, Result};

const MAX_CONDITION: f64 = 1e8;

/// Weighted least-squares fit of `Ĵ(ε)·exp(a/ε² + c/ε)` by a polynomial in `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub degree: usize,
    pub a: f64,
    pub c: f64,
    /// `α̂₀, α̂₁, …`.
    pub coeffs: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Normalised data minus the fitted polynomial, one per table row.
    pub residuals: Vec<f64>,
    pub chi_square: f64,
    pub condition_number: f64,
    /// Independent `α₀` with its standard error, when supplied.
    pub reference_alpha0: Option<(f64, f64)>,
    /// `(α̂₀ − α₀)/√(se² + se₀²)`.
    pub z_score: Option<f64>,
}

/// Fits `Ĵ(ε) e^{a/ε² + c/ε} ≈ Σ_{k ≤ degree} α_k ε^k`, weighting each row by
/// its Monte Carlo standard error (floored at 1e−12 relative so exact rows
/// are still usable).
pub fn expansion_fit(table: &[McRow], a: f64, c: f64, degree: usize, reference_alpha0: Option<(f64, f64)>) -> Result<FitRecord> {
    let k = degree + 1;
    if table.len() < k {
        return Err(Error::InvalidArgument(format!("degree {degree} fit needs at least {k} rows, got {}", table.len())));
    }
    let rows = table.len();
    let mut y = DVector::zeros(rows);
    let mut sd = DVector::zeros(rows);
    for (j, r) in table.iter().enumerate() {
        if !r.log_j_hat.is_finite() {
            return Err(Error::Numerical(format!("Monte Carlo estimate at ε = {} is not positive", r.eps)));
        }
        let v = (r.log_j_hat + a / (r.eps * r.eps) + c / r.eps).exp();
        y[j] = v;
        sd[j] = (r.rel_se * v).max(1e-12 * v.abs()).max(f64::MIN_POSITIVE);
    }
    let design = DMatrix::from_fn(rows, k, |j, i| table[j].eps.powi(i as i32));
    let wd = DMatrix::from_fn(rows, k, |j, i| design[(j, i)] / sd[j]);
    let wy = y.component_div(&sd);
    let svd = wd.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition_number > MAX_CONDITION {
        return Err(Error::Numerical(format!("expansion fit is ill-conditioned (condition number {condition_number:.3e})")));
    }
    let beta = svd.solve(&wy, 0.0).map_err(|e| Error::Numerical(e.to_string()))?;
    let cov = (wd.transpose() * &wd)
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular normal equations".into()))?;
    let fitted = &design * &beta;
    let residuals: Vec<f64> = (0..rows).map(|j| y[j] - fitted[j]).collect();
    let chi_square = residuals.iter().zip(sd.iter()).map(|(r, s)| (r / s).powi(2)).sum();
    let coeffs: Vec<f64> = beta.iter().copied().collect();
    let std_errors: Vec<f64> = (0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let z_score = reference_alpha0.map(|(a0, se0)| (coeffs[0] - a0) / (std_errors[0].powi(2) + se0 * se0).sqrt());
    Ok(FitRecord { degree, a, c, coeffs, std_errors, residuals, chi_square, condition_number, reference_alpha0, z_score })
}
