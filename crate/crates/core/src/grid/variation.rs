//! Variation, Hölder and Besov norms of sampled paths.
//!
//! All suprema are taken over sub-partitions of the sampling grid, which is
//! exact for paths that are piecewise monotone between grid points and a lower
//! bound for the continuous-time quantity otherwise.

use crate::error::{Error, Result};
use crate::grid::SampledPath;

/// Value of a grid-restricted p-variation together with a maximising partition.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationResult {
    pub value: f64,
    /// Grid indices of the maximising partition, endpoints included.
    pub optimal_partition: Vec<usize>,
}

/// Dynamic programme over partition points `0 = i_0 < … < i_k = n − 1`
/// maximising `Σ dist(i_{l−1}, i_l)^p`. Returns the sum (not its `1/p` power).
///
/// Among maximisers the one with fewest points wins; remaining ties go to
/// the smallest predecessor index.
pub(crate) fn variation_dp(
    n: usize,
    p: f64,
    dist: impl Fn(usize, usize) -> f64,
) -> (f64, Vec<usize>) {
    let mut best = vec![0.0f64; n];
    let mut count = vec![1usize; n];
    let mut back = vec![0usize; n];
    for j in 1..n {
        let mut bj = f64::NEG_INFINITY;
        let mut cj = usize::MAX;
        let mut pj = 0;
        for i in 0..j {
            let cand = best[i] + dist(i, j).powf(p);
            let c = count[i] + 1;
            if cand > bj || (cand == bj && c < cj) {
                bj = cand;
                cj = c;
                pj = i;
            }
        }
        best[j] = bj;
        count[j] = cj;
        back[j] = pj;
    }
    let mut partition = vec![n - 1];
    let mut k = n - 1;
    while k > 0 {
        k = back[k];
        partition.push(k);
    }
    partition.reverse();
    (best[n - 1], partition)
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "variation exponent must be at least 1, got {p}"
        )));
    }
    Ok(())
}

/// Exact grid p-variation `sup_P (Σ |x_{t_i} − x_{t_{i−1}}|^p)^{1/p}` with the
/// Euclidean norm on `ℝ^dim`, in `O(N²)`.
pub fn pvar_exact(path: &SampledPath, p: f64) -> Result<VariationResult> {
    check_p(p)?;
    if path.len() < 2 {
        return Err(Error::InvalidPath("input path is empty".into()));
    }
    let (sum, optimal_partition) = variation_dp(path.len(), p, |i, j| path.increment_norm(i, j));
    Ok(VariationResult { value: sum.powf(1.0 / p), optimal_partition })
}

/// Indices of the turning points of a scalar sequence (endpoints included,
/// repeated values collapsed).
pub fn turning_points(values: &[f64]) -> Vec<usize> {
    if values.len() <= 2 {
        return (0..values.len()).collect();
    }
    let mut idx: Vec<usize> = vec![0];
    for i in 1..values.len() {
        if values[i] != values[*idx.last().unwrap()] {
            idx.push(i);
        }
    }
    if idx.len() <= 2 {
        if *idx.last().unwrap() != values.len() - 1 {
            idx.push(values.len() - 1);
        }
        return idx;
    }
    let mut out = vec![idx[0]];
    for w in idx.windows(3) {
        let (a, b, c) = (values[w[0]], values[w[1]], values[w[2]]);
        if (b - a) * (c - b) < 0.0 {
            out.push(w[1]);
        }
    }
    out.push(*idx.last().unwrap());
    if *out.last().unwrap() != values.len() - 1 {
        out.push(values.len() - 1);
    }
    out
}

/// Grid p-variation of a scalar sequence, computed on its turning points only.
///
/// Dropping interior points of monotone stretches never lowers a partition
/// sum when `p ≥ 1`, so this equals [`pvar_exact`] while running on far fewer
/// points for oscillating paths.
pub fn pvar_scalar(values: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if values.len() < 2 {
        return Err(Error::InvalidPath("input array is empty".into()));
    }
    let tp = turning_points(values);
    let (sum, _) = variation_dp(tp.len(), p, |i, j| (values[tp[j]] - values[tp[i]]).abs());
    Ok(sum.powf(1.0 / p))
}

/// p-variation of a scalar jog-free path from its extrema `x_{s_0} = 0, x_{s_1}, …`.
///
/// The sequence must alternate strictly and every point after the first must
/// be a forward maximum (after an up-move) or forward minimum (after a
/// down-move) of the remaining values.
pub fn pvar_jogfree(extrema: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if extrema.len() < 2 {
        return Err(Error::NotJogFree("need at least two extrema".into()));
    }
    if extrema[0] != 0.0 {
        return Err(Error::NotJogFree(format!("first value must be 0, got {}", extrema[0])));
    }
    let n = extrema.len();
    for i in 1..n {
        let d = extrema[i] - extrema[i - 1];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::NotJogFree(format!("zero or non-finite increment into point {i}")));
        }
        if i >= 2 && d.signum() == (extrema[i - 1] - extrema[i - 2]).signum() {
            return Err(Error::NotJogFree(format!("increments do not alternate at point {i}")));
        }
    }
    // Forward extremum check via running suffix max/min.
    let mut suffix_max = f64::NEG_INFINITY;
    let mut suffix_min = f64::INFINITY;
    for i in (1..n).rev() {
        suffix_max = suffix_max.max(extrema[i]);
        suffix_min = suffix_min.min(extrema[i]);
        let up = extrema[i] > extrema[i - 1];
        if up && extrema[i] < suffix_max {
            return Err(Error::NotJogFree(format!("local maximum at point {i} is not a forward maximum")));
        }
        if !up && extrema[i] > suffix_min {
            return Err(Error::NotJogFree(format!("local minimum at point {i} is not a forward minimum")));
        }
    }
    let sum: f64 = extrema.windows(2).map(|w| (w[1] - w[0]).abs().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Closed-form p-variation `2 n^{1/p}` of `cos(nπt) − 1` on `[0, 1]`.
pub fn cosine_pvar(n: u32, p: f64) -> Result<f64> {
    check_p(p)?;
    if n == 0 {
        return Err(Error::InvalidArgument("cosine frequency must be positive".into()));
    }
    Ok(2.0 * (n as f64).powf(1.0 / p))
}

/// The extrema `cos(lπ/n) − 1`, `l = 0..=n`, of `cos(nπt) − 1`.
pub fn cosine_extrema(n: u32) -> Vec<f64> {
    (0..=n).map(|l| if l % 2 == 0 { 0.0 } else { -2.0 }).collect()
}

/// `|k_0| + max_{s<t} |k_t − k_s| / (t − s)^α` over grid pairs.
pub fn holder_norm(path: &SampledPath, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent must lie in (0,1), got {alpha}")));
    }
    let t = path.times();
    let mut best = 0.0f64;
    for i in 0..path.len() {
        for j in i + 1..path.len() {
            best = best.max(path.increment_norm(i, j) / (t[j] - t[i]).powf(alpha));
        }
    }
    let k0 = path.point(0).iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(k0 + best)
}

/// `‖k‖_{L^p} + (∬ |k_t − k_s|^p / |t − s|^{1+δp} ds dt)^{1/p}`.
///
/// Off-diagonal cells of the grid product use the trapezoidal rule. Each
/// diagonal cell is integrated exactly for the linear segment it carries, and
/// the diagonal corners of neighbouring cells take the limiting value of the
/// integrand (zero when `p − 1 − δp > 0`). When that exponent is negative the
/// neighbouring cells switch to the midpoint rule.
pub fn besov_norm(path: &SampledPath, delta: f64, p: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("δ must lie in (0,1), got {delta}")));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
    }
    let t = path.times();
    let n = path.len();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let lp: f64 = (0..n - 1)
        .map(|i| 0.5 * (norm(path.point(i)).powf(p) + norm(path.point(i + 1)).powf(p)) * (t[i + 1] - t[i]))
        .sum::<f64>()
        .powf(1.0 / p);

    let a = p - 1.0 - delta * p;
    let slope = |i: usize| path.increment_norm(i, i + 1) / (t[i + 1] - t[i]);
    // Limit of the integrand on the diagonal at grid point i.
    let diag_limit = |i: usize| -> f64 {
        if a > 0.0 {
            0.0
        } else {
            let r = if i == 0 {
                slope(0)
            } else if i == n - 1 {
                slope(n - 2)
            } else {
                0.5 * (slope(i - 1) + slope(i))
            };
            r.powf(p)
        }
    };
    let g = |i: usize, j: usize| -> f64 {
        if i == j {
            diag_limit(i)
        } else {
            path.increment_norm(i, j).powf(p) / (t[j] - t[i]).abs().powf(1.0 + delta * p)
        }
    };

    let mut double = 0.0;
    for i in 0..n - 1 {
        let hi = t[i + 1] - t[i];
        // Diagonal cell: exact for the linear piece.
        double += slope(i).powf(p) * 2.0 * hi.powf(a + 2.0) / ((a + 1.0) * (a + 2.0));
        for j in i + 1..n - 1 {
            let hj = t[j + 1] - t[j];
            let cell = if j == i + 1 && a < 0.0 {
                let tm = 0.5 * (t[i] + t[i + 1]);
                let sm = 0.5 * (t[j] + t[j + 1]);
                let km = path.eval(tm);
                let ks = path.eval(sm);
                let d = norm(&km.iter().zip(&ks).map(|(x, y)| x - y).collect::<Vec<_>>());
                d.powf(p) / (sm - tm).powf(1.0 + delta * p) * hi * hj
            } else {
                0.25 * (g(i, j) + g(i, j + 1) + g(i + 1, j) + g(i + 1, j + 1)) * hi * hj
            };
            // The cell and its mirror image across the diagonal.
            double += 2.0 * cell;
        }
    }
    if !double.is_finite() || !lp.is_finite() {
        return Err(Error::Numerical("Besov quadrature produced a non-finite value".into()));
    }
    Ok(lp + double.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn scalar_path(values: Vec<f64>) -> SampledPath {
        let g = Arc::new(TimeGrid::uniform(values.len() - 1).unwrap());
        SampledPath::from_scalars(g, values).unwrap()
    }

    /// Exhaustive enumeration over all subsets of interior points, summing
    /// increments left to right.
    fn brute_force(values: &[f64], p: f64) -> f64 {
        let n = values.len();
        let interior = n - 2;
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << interior) {
            let mut last = 0;
            let mut s = 0.0;
            for k in 0..interior {
                if mask & (1 << k) != 0 {
                    s += (values[k + 1] - values[last]).abs().powf(p);
                    last = k + 1;
                }
            }
            s += (values[n - 1] - values[last]).abs().powf(p);
            best = best.max(s);
        }
        best.powf(1.0 / p)
    }

    #[test]
    fn monotone_path_keeps_only_endpoints() {
        let r = pvar_exact(&scalar_path(vec![0.0, 0.3, 1.0]), 2.0).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.optimal_partition, vec![0, 2]);
    }

    #[test]
    fn cosine_extrema_match_closed_form() {
        let r = pvar_exact(&scalar_path(cosine_extrema(4)), 2.0).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12);
        assert!((cosine_pvar(8, 2.0).unwrap() - 5.656854249492381).abs() < 1e-12);
        assert!((cosine_pvar(5, 1000.0).unwrap() - 2.00322).abs() < 1e-5);
        assert_eq!(cosine_pvar(1, 2.0).unwrap(), 2.0);
        assert!((pvar_jogfree(&cosine_extrema(7), 3.0).unwrap() - 2.0 * 7f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(pvar_exact(&scalar_path(vec![0.0, 1.0]), 0.5).is_err());
        assert!(pvar_jogfree(&[0.0, 1.0, 1.5], 2.0).is_err()); // no alternation
        assert!(pvar_jogfree(&[0.0, 1.0, 0.5, 2.0], 2.0).is_err()); // 1.0 is not a forward max
        assert!(pvar_jogfree(&[0.3, 1.0], 2.0).is_err());
        assert_eq!(pvar_jogfree(&[0.0, -0.7], 5.0).unwrap(), 0.7);
        assert!(cosine_pvar(0, 2.0).is_err());
    }

    #[test]
    fn holder_examples() {
        let g = Arc::new(TimeGrid::uniform(64).unwrap());
        let lin = SampledPath::scalar(g.clone(), |t| t);
        assert!((holder_norm(&lin, 0.5).unwrap() - 1.0).abs() < 1e-12);
        let c = SampledPath::scalar(g, |_| -2.5);
        assert_eq!(holder_norm(&c, 0.3).unwrap(), 2.5);
    }

    #[test]
    fn besov_examples() {
        let g = Arc::new(TimeGrid::uniform(128).unwrap());
        let c = SampledPath::scalar(g, |_| -1.5);
        assert!((besov_norm(&c, 0.4, 2.0).unwrap() - 1.5).abs() < 1e-12);

        let expect = (1.0f64 / 3.0).sqrt() + (2.0f64 / (1.2 * 2.2)).sqrt();
        let g = Arc::new(TimeGrid::uniform(512).unwrap());
        let lin = SampledPath::scalar(g, |t| t);
        let v = besov_norm(&lin, 0.4, 2.0).unwrap();
        assert!(((v - expect) / expect).abs() < 1e-4, "{v} vs {expect}");
    }

    #[test]
    fn besov_refinement_is_stable() {
        let f = |t: f64| (5.0 * t).sin() + t * t;
        let coarse = besov_norm(&SampledPath::scalar(Arc::new(TimeGrid::uniform(128).unwrap()), f), 0.6, 2.5).unwrap();
        let fine = besov_norm(&SampledPath::scalar(Arc::new(TimeGrid::uniform(256).unwrap()), f), 0.6, 2.5).unwrap();
        assert!(((fine - coarse) / fine).abs() < 0.01);
        // Negative exponent branch: δp > p − 1.
        let coarse = besov_norm(&SampledPath::scalar(Arc::new(TimeGrid::uniform(128).unwrap()), f), 0.7, 2.0).unwrap();
        let fine = besov_norm(&SampledPath::scalar(Arc::new(TimeGrid::uniform(256).unwrap()), f), 0.7, 2.0).unwrap();
        assert!(((fine - coarse) / fine).abs() < 0.01, "{coarse} {fine}");
    }

    #[test]
    fn turning_point_reduction_matches_full_dp() {
        let v = vec![0.0, 0.2, 0.2, 0.5, 0.1, -0.3, -0.3, 0.4, 0.6, 0.6];
        let full = pvar_exact(&scalar_path(v.clone()), 2.5).unwrap().value;
        assert!((pvar_scalar(&v, 2.5).unwrap() - full).abs() < 1e-14);
        assert_eq!(turning_points(&[1.0, 1.0, 1.0]), vec![0, 2]);
    }

    proptest! {
        #[test]
        fn dp_equals_brute_force(v in proptest::collection::vec(-1.0f64..1.0, 9), p in 1.0f64..4.0) {
            let dp = pvar_exact(&scalar_path(v.clone()), p).unwrap();
            prop_assert_eq!(dp.value, brute_force(&v, p));
            let recomputed: f64 = dp.optimal_partition.windows(2)
                .map(|w| (v[w[1]] - v[w[0]]).abs().powf(p)).sum::<f64>().powf(1.0 / p);
            prop_assert!((recomputed - dp.value).abs() <= 1e-12 * dp.value.max(1e-300));
        }

        #[test]
        fn pvar_non_increasing_in_p(v in proptest::collection::vec(-1.0f64..1.0, 2..20), p in 1.0f64..5.0, dp in 0.0f64..3.0) {
            let path = scalar_path(v);
            let a = pvar_exact(&path, p).unwrap().value;
            let b = pvar_exact(&path, p + dp).unwrap().value;
            prop_assert!(b <= a * (1.0 + 1e-12));
        }

        #[test]
        fn refinement_never_decreases(v in proptest::collection::vec(-1.0f64..1.0, 3..16), p in 1.0f64..4.0) {
            let full = pvar_exact(&scalar_path(v.clone()), p).unwrap().value;
            let sub: Vec<f64> = v.iter().step_by(2).copied().chain(std::iter::once(*v.last().unwrap())).collect();
            let coarse = pvar_exact(&scalar_path(sub), p).unwrap().value;
            prop_assert!(coarse <= full * (1.0 + 1e-12));
        }

        #[test]
        fn jogfree_agrees_with_dp(steps in proptest::collection::vec(0.05f64..1.0, 1..10), p in 1.0f64..4.0) {
            // Build a jog-free sequence: oscillations with shrinking amplitude around a drifting centre.
            let mut seq = vec![0.0];
            let mut sorted = steps.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (k, s) in sorted.iter().enumerate() {
                let last = *seq.last().unwrap();
                seq.push(if k % 2 == 0 { last + s } else { last - s });
            }
            let j = pvar_jogfree(&seq, p).unwrap();
            let d = pvar_exact(&scalar_path(seq), p).unwrap().value;
            prop_assert!((j - d).abs() <= 1e-12 * d);
        }

        #[test]
        fn besov_is_homogeneous(c in -3.0f64..3.0) {
            let g = Arc::new(TimeGrid::uniform(32).unwrap());
            let base = SampledPath::scalar(g, |t| (3.0 * t).cos());
            let a = besov_norm(&base.scale(c), 0.6, 2.0).unwrap();
            let b = c.abs() * besov_norm(&base, 0.6, 2.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}
