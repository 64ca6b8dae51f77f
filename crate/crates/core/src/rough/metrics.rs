use super::RoughPath;
use crate::error::{Error, Result};
use crate::grid::variation_dp;

/// Homogeneous rough-path norm together with its per-level contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct XiValue {
    pub value: f64,
    /// `‖X^j‖_{p/j-var}^{1/j}` for `j = 1..=[p]`.
    pub per_level: Vec<f64>,
}

fn frob(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `Σ_j ‖X^j‖_{p/j-var}^{1/j}` over levels `1..=[p]`, each variation taken over
/// grid sub-partitions with Frobenius increments.
pub fn xi_norm(x: &RoughPath, p: f64) -> Result<XiValue> {
    if !(1.0..4.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("roughness {p} outside [1, 4)")));
    }
    let levels = p.floor() as usize;
    if levels > x.level() {
        return Err(Error::InvalidArgument(format!(
            "roughness {p} needs level {levels} but the rough path has level {}",
            x.level()
        )));
    }
    let n = x.len();
    let per_level: Vec<f64> = (1..=levels)
        .map(|j| {
            let q = p / j as f64;
            let (sum, _) = variation_dp(n, q, |a, b| frob(x.level_inc(j, a, b)));
            sum.powf(1.0 / q).powf(1.0 / j as f64)
        })
        .collect();
    Ok(XiValue { value: per_level.iter().sum(), per_level })
}

/// Dyadic seminorm `(Σ_{n ≤ n_max} n^γ Σ_l |X^j − Y^j|^{p/j})^{j/p}` over the
/// dyadic intervals `[(l−1)/2^n, l/2^n]`.
pub fn djp_seminorm(x: &RoughPath, y: &RoughPath, j: usize, p: f64, gamma: f64, n_max: u32) -> Result<f64> {
    if x.grid() != y.grid() && x.grid().points() != y.grid().points() {
        return Err(Error::GridMismatch("rough paths on different grids".into()));
    }
    if x.dim() != y.dim() || j == 0 || j > x.level().min(y.level()) {
        return Err(Error::InvalidArgument(format!("level {j} unavailable or dimension mismatch")));
    }
    if gamma <= p - 1.0 {
        return Err(Error::InvalidArgument(format!("gamma {gamma} must exceed p − 1 = {}", p - 1.0)));
    }
    let e = p / j as f64;
    let grid = x.grid();
    let mut total = 0.0;
    for n in 1..=n_max {
        let m = 1usize << n;
        let idx: Vec<usize> = (0..=m)
            .map(|l| {
                grid.index_of(l as f64 / m as f64)
                    .ok_or_else(|| Error::InvalidGrid(format!("grid lacks dyadic point {l}/{m}")))
            })
            .collect::<Result<_>>()?;
        let mut level_sum = 0.0;
        for w in idx.windows(2) {
            let (a, b) = (x.level_inc(j, w[0], w[1]), y.level_inc(j, w[0], w[1]));
            let diff: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
            level_sum += diff.powf(e);
        }
        total += (n as f64).powf(gamma) * level_sum;
    }
    Ok(total.powf(1.0 / e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{SampledPath, TimeGrid};
    use crate::rough::lift;
    use std::sync::Arc;

    fn linear(v: [f64; 2], n: usize) -> RoughPath {
        let g = Arc::new(TimeGrid::uniform(n).unwrap());
        let p = SampledPath::from_fn(g, 2, |t, o| {
            o[0] = v[0] * t;
            o[1] = v[1] * t;
        });
        lift(&p, 2).unwrap()
    }

    #[test]
    fn zero_path_has_zero_norm() {
        let x = linear([0.0, 0.0], 8);
        assert_eq!(xi_norm(&x, 2.5).unwrap().value, 0.0);
    }

    #[test]
    fn linear_path_levels() {
        // Level 1 is additive along the line, so the whole interval is optimal.
        // Level 2 scales like (t−s)², superadditive for exponent p/2 > 1/2.
        let v = [0.6, 0.8];
        let x = linear(v, 16);
        let xi = xi_norm(&x, 2.5).unwrap();
        assert!((xi.per_level[0] - 1.0).abs() < 1e-12);
        assert!((xi.per_level[1] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((xi.value - xi.per_level.iter().sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn dilation_is_homogeneous() {
        let g = Arc::new(TimeGrid::uniform(12).unwrap());
        let p = SampledPath::from_fn(g, 2, |t, o| {
            o[0] = (7.0 * t).sin();
            o[1] = (3.0 * t).cos() * t;
        });
        let x = lift(&p, 3).unwrap();
        for c in [0.3, 2.0] {
            let a = xi_norm(&x.dilate(c), 3.2).unwrap().value;
            let b = c * xi_norm(&x, 3.2).unwrap().value;
            assert!((a - b).abs() < 1e-10 * b);
        }
        assert!(xi_norm(&linear([1.0, 0.0], 4), 3.5).is_err());
    }

    #[test]
    fn dyadic_seminorm_examples() {
        let g = Arc::new(TimeGrid::dyadic(3));
        let p = SampledPath::from_scalars(g.clone(), vec![0.0, 0.2, 0.5, 0.1, -0.3, 0.0, 0.4, 0.9, 1.0]).unwrap();
        let zero = SampledPath::zeros(g, 1);
        let x = lift(&p, 2).unwrap();
        let y = lift(&zero, 2).unwrap();
        assert_eq!(djp_seminorm(&x, &x, 1, 2.5, 2.0, 3).unwrap(), 0.0);
        let got = djp_seminorm(&x, &y, 1, 2.5, 2.0, 1).unwrap();
        let hand = (0.3f64.abs().powf(2.5) + 1.3f64.powf(2.5)).powf(1.0 / 2.5);
        assert!((got - hand).abs() < 1e-12);
        let mut prev = 0.0;
        for n_max in 1..=3 {
            let v = djp_seminorm(&x, &y, 2, 2.5, 2.0, n_max).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(djp_seminorm(&x, &y, 1, 2.5, 2.0, 4).is_err());
    }
}
