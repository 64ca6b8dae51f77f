use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};

/// `½(t^{2H} + s^{2H} − |t−s|^{2H})`.
pub fn fbm_cov(s: f64, t: f64, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.powf(h2) + s.powf(h2) - (t - s).abs().powf(h2))
}

/// Random stream for sample `index` under a run seed; independent of how
/// samples are distributed over workers.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

const JITTER: f64 = 1e-12;

/// Exact fBm sampler on a fixed grid via the Cholesky factor of the covariance
/// at the nonzero grid times.
#[derive(Debug, Clone)]
pub struct FbmSampler {
    grid: Arc<TimeGrid>,
    hurst: f64,
    m: usize,
    lower: Vec<f64>,
    jittered: bool,
}

impl FbmSampler {
    pub fn new(grid: Arc<TimeGrid>, hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::InvalidArgument(format!("Hurst index {hurst} outside (0, 1)")));
        }
        let times = &grid.points()[1..];
        let m = times.len();
        let cov = DMatrix::from_fn(m, m, |i, j| fbm_cov(times[i], times[j], hurst));
        let (chol, jittered) = match cov.clone().cholesky() {
            Some(c) => (c, false),
            None => {
                log::warn!("fBm covariance not numerically positive definite; adding jitter {JITTER:e}");
                let c = (cov + DMatrix::identity(m, m) * JITTER)
                    .cholesky()
                    .ok_or_else(|| Error::Numerical("Cholesky factorisation failed after jitter".into()))?;
                (c, true)
            }
        };
        let l = chol.l();
        let mut lower = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in 0..=i {
                lower.push(l[(i, j)]);
            }
        }
        Ok(Self { grid, hurst, m, lower, jittered })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Whether the factorisation needed diagonal regularisation.
    pub fn jittered(&self) -> bool {
        self.jittered
    }

    /// One `d`-dimensional path with independent coordinates.
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> SampledPath {
        let n = self.m + 1;
        let mut values = vec![0.0; n * dim];
        let mut z = vec![0.0; self.m];
        for c in 0..dim {
            z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let mut off = 0;
            for i in 0..self.m {
                let row = &self.lower[off..off + i + 1];
                values[(i + 1) * dim + c] = row.iter().zip(&z[..=i]).map(|(a, b)| a * b).sum();
                off += i + 1;
            }
        }
        SampledPath::new(self.grid.clone(), dim, values).expect("consistent shape")
    }

    /// Sample number `index` of the ensemble identified by `seed`.
    pub fn sample_indexed(&self, dim: usize, seed: u64, index: u64) -> SampledPath {
        self.sample(dim, &mut sample_rng(seed, index))
    }
}

/// Single fBm path from stream 0 of `seed`.
pub fn sample_fbm(grid: Arc<TimeGrid>, hurst: f64, dim: usize, seed: u64) -> Result<SampledPath> {
    Ok(FbmSampler::new(grid, hurst)?.sample_indexed(dim, seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    #[test]
    fn covariance_examples() {
        assert!((fbm_cov(0.3, 0.7, 0.5) - 0.3).abs() < 1e-15);
        assert!((fbm_cov(0.6, 0.6, 0.3) - 0.6f64.powf(0.6)).abs() < 1e-15);
        for h in [0.3, 0.4] {
            let g = TimeGrid::uniform(63).unwrap();
            let t = g.points();
            let m = DMatrix::from_fn(64, 64, |i, j| fbm_cov(t[i], t[j], h));
            let eig = SymmetricEigen::new(m).eigenvalues;
            assert!(eig.min() >= -1e-10);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let g = Arc::new(TimeGrid::uniform(32).unwrap());
        let a = sample_fbm(g.clone(), 0.4, 2, 7).unwrap();
        let b = sample_fbm(g.clone(), 0.4, 2, 7).unwrap();
        assert_eq!(a.values(), b.values());
        let s = FbmSampler::new(g, 0.4).unwrap();
        assert_ne!(s.sample_indexed(2, 7, 1).values(), a.values());
        assert_eq!(s.sample_indexed(2, 7, 0).values(), a.values());
        assert_eq!(a.point(0), &[0.0, 0.0]);
    }

    #[test]
    fn endpoint_moments() {
        let g = Arc::new(TimeGrid::uniform(16).unwrap());
        let s = FbmSampler::new(g, 0.3).unwrap();
        let n = 10_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for i in 0..n {
            let w = s.sample_indexed(1, 11, i).last()[0];
            m1 += w;
            m2 += w * w;
        }
        m1 /= n as f64;
        m2 /= n as f64;
        assert!(m1.abs() < 4.0 / (n as f64).sqrt());
        assert!((m2 - 1.0).abs() < 0.05);
    }
}
