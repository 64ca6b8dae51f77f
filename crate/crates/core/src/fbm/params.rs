use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hurst index with the roughness `p` and Cameron–Martin variation exponent `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstParams {
    pub hurst: f64,
    pub p: f64,
    pub q: f64,
    /// `1/q`, the Besov smoothness index of the interpolation basis.
    pub delta: f64,
}

impl HurstParams {
    /// Default exponents `1/p = H − 2ε`, `1/q = H + 1/2 − ε` with
    /// `ε = min(0.02, (H − 1/4)/4)`.
    pub fn new(hurst: f64) -> Result<Self> {
        check_hurst(hurst)?;
        let eps = 0.02f64.min((hurst - 0.25) / 4.0);
        Self::with_exponents(hurst, 1.0 / (hurst - 2.0 * eps), 1.0 / (hurst + 0.5 - eps))
    }

    /// Explicit exponents; every violated inequality of the admissible window is
    /// listed in the error.
    pub fn with_exponents(hurst: f64, p: f64, q: f64) -> Result<Self> {
        check_hurst(hurst)?;
        let violations = window_violations(hurst, p, q);
        if !violations.is_empty() {
            return Err(Error::ParameterWindow(violations.join("; ")));
        }
        Ok(Self { hurst, p, q, delta: 1.0 / q })
    }
}

fn check_hurst(hurst: f64) -> Result<()> {
    if !(hurst > 0.25 && hurst <= 0.5) {
        return Err(Error::ParameterWindow(format!("Hurst index {hurst} outside (1/4, 1/2]")));
    }
    Ok(())
}

/// Names of the inequalities between `H`, `p` and `q` that fail. Only enforced
/// for `H < 1/2`; at `H = 1/2` just `p > 2` and `q ≥ 1` are required.
pub fn window_violations(hurst: f64, p: f64, q: f64) -> Vec<String> {
    let (ip, iq) = (1.0 / p, 1.0 / q);
    let mut out = Vec::new();
    if !(p.is_finite() && q.is_finite() && p > 0.0 && q > 0.0) {
        out.push(format!("exponents must be positive and finite (p = {p}, q = {q})"));
        return out;
    }
    if hurst < 0.5 {
        if ip >= hurst {
            out.push(format!("1/p < H fails (1/p = {ip:.6}, H = {hurst})"));
        }
        if iq <= 0.75 {
            out.push(format!("3/4 < 1/q fails (1/q = {iq:.6})"));
        }
        if iq >= hurst + 0.5 {
            out.push(format!("1/q < H + 1/2 fails (1/q = {iq:.6})"));
        }
        if ip + iq <= 1.0 {
            out.push(format!("1/p + 1/q > 1 fails (sum = {:.6})", ip + iq));
        }
        if iq - ip <= 0.5 {
            out.push(format!("1/q − 1/p > 1/2 fails (difference = {:.6})", iq - ip));
        }
    } else {
        if p <= 2.0 {
            out.push(format!("p > 2 fails (p = {p})"));
        }
        if q < 1.0 {
            out.push(format!("q ≥ 1 fails (q = {q})"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_sit_inside_the_window() {
        for h in [0.26, 0.3, 1.0 / 3.0 + 1e-3, 0.4, 0.45, 0.499] {
            let hp = HurstParams::new(h).unwrap();
            assert!(window_violations(h, hp.p, hp.q).is_empty());
            assert!((hp.delta * hp.q - 1.0).abs() < 1e-15);
        }
        let hp = HurstParams::new(0.4).unwrap();
        assert!((1.0 / hp.p - 0.36).abs() < 1e-12);
        assert!((1.0 / hp.q - 0.88).abs() < 1e-12);
    }

    #[test]
    fn violations_are_named() {
        let err = HurstParams::with_exponents(0.4, 2.0, 1.5).unwrap_err().to_string();
        assert!(err.contains("1/p < H"));
        assert!(err.contains("3/4 < 1/q"));
        assert!(HurstParams::new(0.25).is_err());
        assert!(HurstParams::new(0.6).is_err());
    }
}
