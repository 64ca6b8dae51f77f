use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};

const SERIES_TOL: f64 = 1e-14;
const SERIES_MAX_TERMS: usize = 100_000;

/// Power series of the Gauss hypergeometric function `₂F₁(a, b; c; z)` for
/// `|z| < 1`, stopped once a term drops below `1e−14` of the running sum.
/// Returns the value and the number of terms used.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<(f64, usize)> {
    if z.abs() >= 1.0 {
        return Err(Error::InvalidArgument(format!("hypergeometric series needs |z| < 1, got {z}")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() <= SERIES_TOL * sum.abs() {
            return Ok((sum, k + 2));
        }
    }
    Err(Error::Numerical(format!("hypergeometric series did not settle at z = {z}")))
}

/// `K(t,s)` for a fixed Hurst index, with the Gamma-function constants cached.
///
/// The kernel is evaluated as
/// `c_H (t−s)^{H−1/2} (t/s)^{1/2−H} ₂F₁(H−1/2, 2H; H+1/2; 1 − s/t)` with
/// `c_H = V_H^{−1/2} / Γ(H+1/2)` and `V_H = Γ(2−2H) cos(πH) / (πH(1−2H))`, so that
/// `∫₀^{s∧t} K(t,u) K(s,u) du` is the fBm covariance. For `1 − s/t > 1/2` the
/// hypergeometric function is continued through the `z ↦ 1 − z` connection
/// formula so every series converges at least like `2^{−k}`.
#[derive(Debug, Clone, Copy)]
pub struct VolterraKernel {
    hurst: f64,
    prefactor: f64,
    g1: f64,
    g2: f64,
}

impl VolterraKernel {
    pub fn new(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::InvalidArgument(format!("Hurst index {hurst} outside (0, 1)")));
        }
        if hurst == 0.5 {
            return Ok(Self { hurst, prefactor: 1.0, g1: 0.0, g2: 0.0 });
        }
        let h = hurst;
        let v = gamma(2.0 - 2.0 * h) * (PI * h).cos() / (PI * h * (1.0 - 2.0 * h));
        let (a, b, c) = (h - 0.5, 2.0 * h, h + 0.5);
        let g1 = gamma(c) * gamma(c - a - b) / (gamma(c - a) * gamma(c - b));
        let g2 = gamma(c) * gamma(a + b - c) / (gamma(a) * gamma(b));
        Ok(Self { hurst, prefactor: 1.0 / (v.sqrt() * gamma(c)), g1, g2 })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    fn hyp(&self, z: f64) -> f64 {
        let h = self.hurst;
        let (a, b, c) = (h - 0.5, 2.0 * h, h + 0.5);
        if z <= 0.5 {
            return hyp2f1_series(a, b, c, z).map(|r| r.0).unwrap_or(f64::NAN);
        }
        let w = 1.0 - z;
        let f1 = hyp2f1_series(a, b, a + b - c + 1.0, w).map(|r| r.0).unwrap_or(f64::NAN);
        let f2 = hyp2f1_series(c - a, c - b, c - a - b + 1.0, w).map(|r| r.0).unwrap_or(f64::NAN);
        self.g1 * f1 + w.powf(c - a - b) * self.g2 * f2
    }

    /// Kernel value given `s` and the gap `t − s` (passed separately so values
    /// near the diagonal keep full relative precision).
    pub fn eval_gap(&self, t: f64, s: f64, gap: f64) -> f64 {
        if gap <= 0.0 {
            return 0.0;
        }
        if self.hurst == 0.5 {
            return 1.0;
        }
        let h = self.hurst;
        self.prefactor * gap.powf(h - 0.5) * (t / s).powf(0.5 - h) * self.hyp(gap / t)
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        self.eval_gap(t, s, t - s)
    }
}

/// Single kernel evaluation; `s ≥ t` gives `0` and `s ≤ 0` is rejected.
pub fn volterra_kernel(t: f64, s: f64, hurst: f64) -> Result<f64> {
    if s <= 0.0 {
        return Err(Error::InvalidArgument(format!("kernel is singular at s = {s}")));
    }
    Ok(VolterraKernel::new(hurst)?.eval(t, s))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

const GL_POINTS: usize = 8;
const GRADING_LEVELS: usize = 40;

/// Quadrature rule for `h ↦ (Uh)_t = ∫₀^t K(t,s) h_s ds` at every grid time,
/// with the kernel folded into the weights.
///
/// `[0, t]` is cut into panels of width at most `panel_width`; the two end
/// panels are further split geometrically toward the endpoint singularities.
#[derive(Debug, Clone)]
pub struct VolterraOperator {
    grid: Arc<TimeGrid>,
    hurst: f64,
    rows: Vec<(Vec<f64>, Vec<f64>)>,
}

impl VolterraOperator {
    pub fn new(grid: Arc<TimeGrid>, hurst: f64, panel_width: f64) -> Result<Self> {
        let kernel = VolterraKernel::new(hurst)?;
        let (gx, gw) = gauss_legendre(GL_POINTS);
        let rows = grid
            .points()
            .iter()
            .map(|&t| build_row(&kernel, t, panel_width, &gx, &gw))
            .collect();
        Ok(Self { grid, hurst, rows })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// `(Uh)_t` on the grid for a scalar integrand.
    pub fn apply_scalar(&self, h: impl Fn(f64) -> f64) -> Vec<f64> {
        self.rows
            .iter()
            .map(|(s, w)| s.iter().zip(w).map(|(&si, &wi)| wi * h(si)).sum())
            .collect()
    }

    /// `Uh` for an `ℝ^dim`-valued integrand; a sampled `h` is read through its
    /// piecewise-linear interpolant.
    pub fn apply(&self, h: &SampledPath) -> SampledPath {
        let dim = h.dim();
        let mut out = SampledPath::zeros(self.grid.clone(), dim);
        for (i, (s, w)) in self.rows.iter().enumerate() {
            let acc = out.point_mut(i);
            for (&si, &wi) in s.iter().zip(w) {
                for (a, v) in acc.iter_mut().zip(h.eval(si)) {
                    *a += wi * v;
                }
            }
        }
        out
    }
}

fn build_row(kernel: &VolterraKernel, t: f64, width: f64, gx: &[f64], gw: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    if t <= 0.0 {
        return (nodes, weights);
    }
    let panels = ((t / width).ceil() as usize).max(2);
    let h = t / panels as f64;
    // Panel described by its distance range from 0 (left) or from t (right).
    let mut push = |lo: f64, hi: f64, from_right: bool| {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, w) in gx.iter().zip(gw) {
            let r = mid + half * x;
            let (s, gap) = if from_right { (t - r, r) } else { (r, t - r) };
            nodes.push(s);
            weights.push(w * half * kernel.eval_gap(t, s, gap));
        }
    };
    for l in 0..GRADING_LEVELS {
        let f = 0.5f64.powi(l as i32);
        push(h * f * 0.5, h * f, false);
    }
    for p in 1..panels - 1 {
        push(p as f64 * h, (p + 1) as f64 * h, false);
    }
    for l in 0..GRADING_LEVELS {
        let f = 0.5f64.powi(l as i32);
        push(h * f * 0.5, h * f, true);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_handles_negative_arguments() {
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn series_matches_elementary_cases() {
        // ₂F₁(1,1;2;z) = −ln(1−z)/z
        for z in [0.1, 0.4, -0.3] {
            let (v, _) = hyp2f1_series(1.0, 1.0, 2.0, z).unwrap();
            assert!((v + (1.0 - z).ln() / z).abs() < 1e-13);
        }
        assert_eq!(hyp2f1_series(0.0, 0.0, 1.0, 0.7).unwrap().0, 1.0);
        assert!(hyp2f1_series(1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn series_term_budget() {
        // Arguments actually reached by the kernel for s/t ≥ 0.05.
        let h = 0.3;
        let (a, b, c) = (h - 0.5, 2.0 * h, h + 0.5);
        for r in [0.05f64, 0.3, 0.5, 0.7, 0.99] {
            let z = 1.0 - r;
            let terms = if z <= 0.5 {
                hyp2f1_series(a, b, c, z).unwrap().1
            } else {
                hyp2f1_series(a, b, a + b - c + 1.0, r).unwrap().1
                    + hyp2f1_series(c - a, c - b, c - a - b + 1.0, r).unwrap().1
            };
            assert!(terms <= 200, "ratio {r} took {terms} terms");
        }
    }

    #[test]
    fn connection_formula_is_continuous() {
        let k = VolterraKernel::new(0.35).unwrap();
        let below = k.hyp(0.5 - 1e-12);
        let above = k.hyp(0.5 + 1e-12);
        assert!((below - above).abs() < 1e-10 * below.abs());
        let direct = hyp2f1_series(0.35 - 0.5, 0.7, 0.85, 0.8).unwrap().0;
        assert!((k.hyp(0.8) - direct).abs() < 1e-12 * direct.abs());
    }

    #[test]
    fn brownian_kernel_is_one() {
        assert_eq!(volterra_kernel(0.7, 0.2, 0.5).unwrap(), 1.0);
        assert_eq!(volterra_kernel(0.2, 0.7, 0.4).unwrap(), 0.0);
        assert!(volterra_kernel(0.2, 0.0, 0.4).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((int - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn operator_at_half_integrates() {
        let g = Arc::new(TimeGrid::uniform(32).unwrap());
        let op = VolterraOperator::new(g.clone(), 0.5, 1.0 / 64.0).unwrap();
        let k = op.apply_scalar(|s| 2f64.sqrt() * (3.0 * PI * s).cos());
        for (t, v) in g.points().iter().zip(&k) {
            let exact = 2f64.sqrt() * (3.0 * PI * t).sin() / (3.0 * PI);
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_reproduces_power_law() {
        // U1 has the closed form c_H t^{H+1/2} ∫₀¹ (1−u)^{H−1/2} u^{H−1/2} ₂F₁(…) du;
        // scale invariance alone says (U1)_t / t^{H+1/2} is constant in t.
        let g = Arc::new(TimeGrid::uniform(16).unwrap());
        let op = VolterraOperator::new(g.clone(), 0.3, 1.0 / 32.0).unwrap();
        let k = op.apply_scalar(|_| 1.0);
        let ratios: Vec<f64> = g.points()[1..].iter().zip(&k[1..]).map(|(t, v)| v / t.powf(0.8)).collect();
        for r in &ratios {
            assert!((r - ratios[0]).abs() < 1e-9 * ratios[0]);
        }
    }
}
