use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fbm::sample_rng;
use crate::stats::mean_se;

/// `log det₂(Id + αA) = Σ_i (log(1 + αλ_i) − αλ_i)`.
pub fn log_det2(eigs: &[f64], alpha: f64) -> Result<f64> {
    let mut out = 0.0;
    for (i, &l) in eigs.iter().enumerate() {
        let x = alpha * l;
        if !(1.0 + x > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalue λ_{i} = {l} violates 1 + αλ > 0 (α = {alpha})"
            )));
        }
        out += x.ln_1p() - x;
    }
    Ok(out)
}

/// `det₂(Id + αA) = ∏(1 + αλ_i) e^{−αλ_i}`, evaluated in the log domain.
pub fn det2(eigs: &[f64], alpha: f64) -> Result<f64> {
    Ok(log_det2(eigs, alpha)?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Det2Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of `E[exp(−Σ λ_i (g_i² − 1))]` for independent
/// standard normals, which equals `det₂(Id + 2A)^{−1/2}`.
///
/// Every coordinate is drawn from `N(0, 4)` and reweighted, which keeps the
/// estimator's variance finite for all `λ > −7/16` (plain sampling needs
/// `λ > −1/4`).
pub fn det2_mc(eigs: &[f64], samples: usize, seed: u64) -> Result<Det2Estimate> {
    if let Some(l) = eigs.iter().find(|l| !(**l > -0.4375)) {
        return Err(Error::InvalidArgument(format!("eigenvalue {l} below the supported range (−7/16, ∞)")));
    }
    const SCALE: f64 = 2.0;
    let mut rng = sample_rng(seed, 0);
    let vals: Vec<f64> = (0..samples)
        .map(|_| {
            let mut log_w = 0.0;
            for &l in eigs {
                let z: f64 = rng.sample(StandardNormal);
                let g = SCALE * z;
                // density ratio φ(g)/φ_s(g) = s·exp(−g²/2 + z²/2)
                log_w += SCALE.ln() - 0.5 * g * g + 0.5 * z * z - l * (g * g - 1.0);
            }
            log_w.exp()
        })
        .collect();
    let (mean, std_error) = mean_se(&vals);
    Ok(Det2Estimate { mean, std_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(det2(&[], 2.0).unwrap(), 1.0);
        assert_eq!(det2(&[0.0, 0.0], 1.0).unwrap(), 1.0);
        let l: f64 = 0.3;
        assert!((det2(&[l], 1.0).unwrap() - (1.0 + l) * (-l).exp()).abs() < 1e-15);
        let e: [f64; 4] = [0.5, -0.2, 0.1, 0.05];
        let direct: f64 = e.iter().map(|l: &f64| (1.0 + 2.0 * l) * (-2.0 * l).exp()).product();
        assert!((det2(&e, 2.0).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn positivity_is_enforced() {
        let err = det2(&[0.1, -0.6], 2.0).unwrap_err().to_string();
        assert!(err.contains("λ_1 = -0.6"), "{err}");
    }

    #[test]
    fn monte_carlo_matches_identity() {
        let e = [0.5, -0.2, 0.1];
        let est = det2_mc(&e, 200_000, 3).unwrap();
        let want = det2(&e, 2.0).unwrap().powf(-0.5);
        assert!((est.mean - want).abs() < 4.0 * est.std_error, "{est:?} vs {want}");
        assert!((est.mean - want).abs() < 0.01 * want);
    }
}
