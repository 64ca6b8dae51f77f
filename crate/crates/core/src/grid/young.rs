use crate::error::{Error, Result};
use crate::grid::SampledPath;

/// Left-point Young sum with an error indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct YoungIntegral {
    pub value: Vec<f64>,
    /// `|left sum − midpoint sum|` in the Euclidean norm.
    pub error_estimate: f64,
}

/// `∫_s^t k_u dl_u` where `k` carries `r × dim(l)` matrices row-major (a
/// vector integrand of the same dimension as `l` gives a scalar pairing).
///
/// The value is the left-point Riemann sum over grid steps inside `[s, t]`;
/// the midpoint sum uses the average of the integrand at both step ends. The
/// regularity condition `1/p + 1/q > 1` is left to the caller.
pub fn young_integral(integrand: &SampledPath, integrator: &SampledPath, s: f64, t: f64) -> Result<YoungIntegral> {
    integrand.check_same_grid(integrator, "young_integral")?;
    if s > t {
        return Err(Error::InvalidArgument(format!("lower limit {s} exceeds upper limit {t}")));
    }
    let grid = integrator.grid();
    let is = grid
        .index_of(s)
        .ok_or_else(|| Error::InvalidArgument(format!("lower limit {s} is not a grid point")))?;
    let it = grid
        .index_of(t)
        .ok_or_else(|| Error::InvalidArgument(format!("upper limit {t} is not a grid point")))?;
    let d = integrator.dim();
    if !integrand.dim().is_multiple_of(d) {
        return Err(Error::InvalidArgument(format!(
            "integrand dimension {} is not a multiple of integrator dimension {}",
            integrand.dim(),
            d
        )));
    }
    let r = integrand.dim() / d;
    let mut left = vec![0.0; r];
    let mut mid = vec![0.0; r];
    for i in is..it {
        let a0 = integrand.point(i);
        let a1 = integrand.point(i + 1);
        let dl = integrator.increment(i, i + 1);
        for row in 0..r {
            for c in 0..d {
                let k = row * d + c;
                left[row] += a0[k] * dl[c];
                mid[row] += 0.5 * (a0[k] + a1[k]) * dl[c];
            }
        }
    }
    let error_estimate = left.iter().zip(&mid).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(YoungIntegral { value: left, error_estimate })
}

/// Piecewise-linear path through the values at `l/2^m`, sampled on the input
/// grid. Values at dyadic times off the grid come from linear interpolation.
pub fn dyadic_approx(path: &SampledPath, m: u32) -> SampledPath {
    let n = (1u64 << m) as f64;
    let mut out = path.clone();
    for (i, &t) in path.times().iter().enumerate() {
        let l = ((t * n).floor() as u64).min((1u64 << m) - 1);
        let (a, b) = (l as f64 / n, (l + 1) as f64 / n);
        let (xa, xb) = (path.eval(a), path.eval(b));
        let w = (t - a) / (b - a);
        let dst = out.point_mut(i);
        for c in 0..dst.len() {
            dst[c] = if w == 0.0 {
                xa[c]
            } else if w == 1.0 {
                xb[c]
            } else {
                xa[c] + w * (xb[c] - xa[c])
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{pvar_exact, TimeGrid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::uniform(n).unwrap())
    }

    #[test]
    fn calculus_examples() {
        let g = grid(1024);
        let id = SampledPath::scalar(g.clone(), |t| t);
        let r = young_integral(&id, &id, 0.0, 1.0).unwrap();
        assert!((r.value[0] - 0.5).abs() <= 1.01 * r.error_estimate);
        assert!((r.value[0] - 0.5).abs() < 1e-3);

        let c = SampledPath::scalar(g, |t| (PI * t).cos());
        let r = young_integral(&c, &c, 0.0, 1.0).unwrap();
        assert!(r.value[0].abs() <= 1.01 * r.error_estimate);
    }

    #[test]
    fn refined_sum_oracle() {
        let f = |t: f64| (2.0 * t).sin() + t;
        let h = |t: f64| (t * t + 0.3 * (5.0 * t).cos(), t.exp());
        let coarse = grid(2000);
        let k = SampledPath::scalar(coarse.clone(), f);
        let l = SampledPath::from_fn(coarse, 2, |t, o| (o[0], o[1]) = h(t));
        // Integrand as a 1×2 matrix: the same scalar in both columns.
        let kk = SampledPath::from_fn(k.grid().clone(), 2, |t, o| o.fill(f(t)));
        let v = young_integral(&kk, &l, 0.0, 1.0).unwrap().value[0];
        let fine = 200_000;
        let mut oracle = 0.0;
        for i in 0..fine {
            let (t0, t1) = (i as f64 / fine as f64, (i + 1) as f64 / fine as f64);
            let (a0, b0) = h(t0);
            let (a1, b1) = h(t1);
            oracle += f(t0) * ((a1 - a0) + (b1 - b0));
        }
        assert!(((v - oracle) / oracle).abs() < 1e-3);
        let _ = k;
    }

    #[test]
    fn bilinear_and_additive() {
        let g = grid(64);
        let k = SampledPath::scalar(g.clone(), |t| (3.0 * t).sin());
        let k2 = SampledPath::scalar(g.clone(), |t| t * t);
        let l = SampledPath::scalar(g, |t| (2.0 * t).cos());
        let sum = young_integral(&k.axpy(2.0, &k2).unwrap(), &l, 0.0, 1.0).unwrap().value[0];
        let sep = young_integral(&k, &l, 0.0, 1.0).unwrap().value[0] + 2.0 * young_integral(&k2, &l, 0.0, 1.0).unwrap().value[0];
        assert!((sum - sep).abs() < 1e-13);
        let whole = young_integral(&k, &l, 0.0, 1.0).unwrap().value[0];
        let parts = young_integral(&k, &l, 0.0, 0.375).unwrap().value[0] + young_integral(&k, &l, 0.375, 1.0).unwrap().value[0];
        assert!((whole - parts).abs() < 1e-14);
    }

    #[test]
    fn errors() {
        let k = SampledPath::scalar(grid(8), |t| t);
        let l = SampledPath::scalar(grid(16), |t| t);
        assert!(matches!(young_integral(&k, &l, 0.0, 1.0), Err(Error::GridMismatch(_))));
        assert!(young_integral(&k, &k, 0.5, 0.25).is_err());
        assert!(young_integral(&k, &k, 0.0, 0.3).is_err());
    }

    #[test]
    fn dyadic_examples() {
        let g = grid(16);
        let pl = SampledPath::scalar(g.clone(), |t| (t * 4.0).floor() + (t * 4.0).fract() * 2.0);
        let pl = dyadic_approx(&pl, 2); // piecewise linear on level-2 dyadics
        assert_eq!(dyadic_approx(&pl, 2), pl);
        let x = SampledPath::scalar(g.clone(), |t| (7.0 * t).sin());
        let a = dyadic_approx(&x, 2);
        // Midpoint 3/8 lies between 1/4 and 1/2.
        let mid = a.point(6)[0];
        assert!((mid - 0.5 * (x.point(4)[0] + x.point(8)[0])).abs() < 1e-15);
    }

    #[test]
    fn dyadic_error_decreases() {
        let g = grid(256);
        let x = SampledPath::scalar(g, |t| (5.0 * t).sin() + t * t);
        let mut last = f64::INFINITY;
        for m in 1..7 {
            let e = pvar_exact(&dyadic_approx(&x, m).sub(&x).unwrap(), 1.2).unwrap().value;
            assert!(e < last);
            last = e;
        }
    }
}
