//! Level-2 and level-3 rough paths on a grid.
//!
//! Increments are stored for every ordered pair of grid indices `i ≤ j` on a
//! triangular layout; tensors are flattened row-major. The tensor norm used
//! throughout is the Frobenius norm.

mod metrics;
mod ops;

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{fmt17, SampledPath, TimeGrid};

pub use metrics::{djp_seminorm, xi_norm, XiValue};
pub use ops::{pair, scale_rough, shift};

/// Two-parameter increments `X^j_{s,t}` for `j ≤ level` over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughPath {
    grid: Arc<TimeGrid>,
    dim: usize,
    level: usize,
    inc1: Vec<f64>,
    inc2: Vec<f64>,
    inc3: Vec<f64>,
}

impl RoughPath {
    pub(crate) fn empty(grid: Arc<TimeGrid>, dim: usize, level: usize) -> Result<Self> {
        if !(level == 2 || level == 3) {
            return Err(Error::InvalidArgument(format!("unsupported rough path level {level}")));
        }
        let n = grid.len();
        let pairs = n * (n + 1) / 2;
        Ok(Self {
            grid,
            dim,
            level,
            inc1: vec![0.0; pairs * dim],
            inc2: vec![0.0; pairs * dim * dim],
            inc3: if level == 3 { vec![0.0; pairs * dim * dim * dim] } else { Vec::new() },
        })
    }

    #[inline]
    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.grid.len());
        let n = self.grid.len();
        i * n - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn x1(&self, i: usize, j: usize) -> &[f64] {
        let k = self.pair_index(i, j) * self.dim;
        &self.inc1[k..k + self.dim]
    }

    pub fn x2(&self, i: usize, j: usize) -> &[f64] {
        let d2 = self.dim * self.dim;
        let k = self.pair_index(i, j) * d2;
        &self.inc2[k..k + d2]
    }

    /// Level-3 increment; empty for level-2 paths.
    pub fn x3(&self, i: usize, j: usize) -> &[f64] {
        if self.level < 3 {
            return &[];
        }
        let d3 = self.dim * self.dim * self.dim;
        let k = self.pair_index(i, j) * d3;
        &self.inc3[k..k + d3]
    }

    /// Increment of the given level (1, 2 or 3).
    pub fn level_inc(&self, level: usize, i: usize, j: usize) -> &[f64] {
        match level {
            1 => self.x1(i, j),
            2 => self.x2(i, j),
            _ => self.x3(i, j),
        }
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, z1: &[f64], z2: &[f64], z3: &[f64]) {
        let p = self.pair_index(i, j);
        let d = self.dim;
        self.inc1[p * d..(p + 1) * d].copy_from_slice(z1);
        self.inc2[p * d * d..(p + 1) * d * d].copy_from_slice(z2);
        if self.level == 3 {
            let d3 = d * d * d;
            self.inc3[p * d3..(p + 1) * d3].copy_from_slice(z3);
        }
    }

    #[cfg(test)]
    pub(crate) fn x2_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let d2 = self.dim * self.dim;
        let k = self.pair_index(i, j) * d2;
        &mut self.inc2[k..k + d2]
    }

    /// The first-level path `t ↦ X¹_{0,t}`.
    pub fn first_level(&self) -> SampledPath {
        let mut v = Vec::with_capacity(self.len() * self.dim);
        for j in 0..self.len() {
            v.extend_from_slice(self.x1(0, j));
        }
        SampledPath::new(self.grid.clone(), self.dim, v).expect("consistent shape")
    }

    /// Antisymmetric part `½(X²_{ab} − X²_{ba})` of a level-2 increment.
    pub fn area(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        let x2 = self.x2(i, j);
        0.5 * (x2[a * self.dim + b] - x2[b * self.dim + a])
    }

    /// Dilation `δ_c`: level `j` multiplied by `c^j`.
    pub fn dilate(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.inc1.iter_mut().for_each(|v| *v *= c);
        out.inc2.iter_mut().for_each(|v| *v *= c * c);
        out.inc3.iter_mut().for_each(|v| *v *= c * c * c);
        out
    }

    /// Largest deviation of the symmetric part of `X²` from `½ X¹⊗X¹`.
    pub fn symmetric_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            for j in i..self.len() {
                let (x1, x2) = (self.x1(i, j), self.x2(i, j));
                for a in 0..d {
                    for b in 0..d {
                        let sym = 0.5 * (x2[a * d + b] + x2[b * d + a]);
                        worst = worst.max((sym - 0.5 * x1[a] * x1[b]).abs());
                    }
                }
            }
        }
        worst
    }

    /// CSV for one level: columns `i,j,e0,e1,…` with flattened tensor entries.
    pub fn write_level_csv<W: Write>(&self, level: usize, writer: W) -> Result<()> {
        if level == 0 || level > self.level {
            return Err(Error::InvalidArgument(format!("level {level} not present")));
        }
        let width = self.dim.pow(level as u32);
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["i".to_string(), "j".to_string()];
        header.extend((0..width).map(|k| format!("e{k}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            for j in i..self.len() {
                let mut row = vec![i.to_string(), j.to_string()];
                row.extend(self.level_inc(level, i, j).iter().map(|&v| fmt17(v)));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Signature increment of one straight step `v`, appended to a running
/// signature `(z1, z2, z3)` via Chen's identity.
pub(crate) fn chen_step(d: usize, level: usize, z1: &mut [f64], z2: &mut [f64], z3: &mut [f64], v: &[f64]) {
    if level == 3 {
        for a in 0..d {
            for b in 0..d {
                let vb = v[b];
                for c in 0..d {
                    z3[(a * d + b) * d + c] += z2[a * d + b] * v[c]
                        + 0.5 * z1[a] * vb * v[c]
                        + v[a] * vb * v[c] / 6.0;
                }
            }
        }
    }
    for a in 0..d {
        for b in 0..d {
            z2[a * d + b] += z1[a] * v[b] + 0.5 * v[a] * v[b];
        }
    }
    for a in 0..d {
        z1[a] += v[a];
    }
}

/// Exact iterated integrals of the piecewise-linear interpolant of `path`.
pub fn lift(path: &SampledPath, level: usize) -> Result<RoughPath> {
    let d = path.dim();
    let mut out = RoughPath::empty(path.grid().clone(), d, level)?;
    let n = path.len();
    let steps: Vec<Vec<f64>> = (0..n - 1).map(|j| path.increment(j, j + 1)).collect();
    let mut z1 = vec![0.0; d];
    let mut z2 = vec![0.0; d * d];
    let mut z3 = vec![0.0; if level == 3 { d * d * d } else { 0 }];
    for i in 0..n {
        z1.fill(0.0);
        z2.fill(0.0);
        z3.fill(0.0);
        out.set(i, i, &z1, &z2, &z3);
        for j in i..n - 1 {
            chen_step(d, level, &mut z1, &mut z2, &mut z3, &steps[j]);
            out.set(i, j + 1, &z1, &z2, &z3);
        }
    }
    Ok(out)
}

/// `max |X^j_{s,t} − Σ_i X^i_{s,u} ⊗ X^{j−i}_{u,t}|` over grid triples and levels.
pub fn chen_residual(x: &RoughPath) -> f64 {
    let d = x.dim;
    let n = x.len();
    let mut worst = 0.0f64;
    for s in 0..n {
        for u in s..n {
            for t in u..n {
                let (a1, b1, c1) = (x.x1(s, u), x.x1(u, t), x.x1(s, t));
                let (a2, b2, c2) = (x.x2(s, u), x.x2(u, t), x.x2(s, t));
                for p in 0..d {
                    worst = worst.max((c1[p] - a1[p] - b1[p]).abs());
                    for q in 0..d {
                        let k = p * d + q;
                        worst = worst.max((c2[k] - a2[k] - b2[k] - a1[p] * b1[q]).abs());
                    }
                }
                if x.level == 3 {
                    let (a3, b3, c3) = (x.x3(s, u), x.x3(u, t), x.x3(s, t));
                    for p in 0..d {
                        for q in 0..d {
                            for r in 0..d {
                                let k = (p * d + q) * d + r;
                                let chen = a3[k] + b3[k] + a2[p * d + q] * b1[r] + a1[p] * b2[q * d + r];
                                worst = worst.max((c3[k] - chen).abs());
                            }
                        }
                    }
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::uniform(n).unwrap())
    }

    #[test]
    fn pair_index_is_a_bijection() {
        let x = RoughPath::empty(grid(6), 1, 2).unwrap();
        let mut seen = vec![];
        for i in 0..7 {
            for j in i..7 {
                seen.push(x.pair_index(i, j));
            }
        }
        let expect: Vec<usize> = (0..28).collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn straight_line_levels() {
        let v = [0.7, -1.3];
        let p = SampledPath::from_fn(grid(8), 2, |t, o| {
            o[0] = v[0] * t;
            o[1] = v[1] * t;
        });
        let x = lift(&p, 3).unwrap();
        let (s, t) = (2usize, 7usize);
        let h = (t - s) as f64 / 8.0;
        for a in 0..2 {
            for b in 0..2 {
                assert!((x.x2(s, t)[a * 2 + b] - h * h / 2.0 * v[a] * v[b]).abs() < 1e-14);
                for c in 0..2 {
                    let e = h.powi(3) / 6.0 * v[a] * v[b] * v[c];
                    assert!((x.x3(s, t)[(a * 2 + b) * 2 + c] - e).abs() < 1e-14);
                }
            }
        }
        assert!(chen_residual(&x) < 1e-12);
        assert!(x.symmetric_defect() < 1e-12);
    }

    #[test]
    fn circle_encloses_signed_area() {
        let p = SampledPath::from_fn(grid(4096), 2, |t, o| {
            o[0] = (2.0 * PI * t).cos() - 1.0;
            o[1] = (2.0 * PI * t).sin();
        });
        let x = lift(&p, 2).unwrap();
        let n = p.len() - 1;
        let x2 = x.x2(0, n);
        assert!((0.5 * (x2[1] - x2[2]) - PI).abs() < 1e-3);
        assert!((0.5 * (x2[2] - x2[1]) + PI).abs() < 1e-3);
        // Fine double Riemann sum oracle for ∫ x¹ dx² over the loop.
        let m = 200_000;
        let mut area = 0.0;
        for k in 0..m {
            let t0 = k as f64 / m as f64;
            let t1 = (k + 1) as f64 / m as f64;
            let xm = ((2.0 * PI * t0).cos() + (2.0 * PI * t1).cos()) / 2.0 - 1.0;
            area += xm * ((2.0 * PI * t1).sin() - (2.0 * PI * t0).sin());
        }
        assert!((x2[1] - area).abs() < 1e-3);
    }

    #[test]
    fn corruption_is_detected() {
        let p = SampledPath::from_fn(grid(6), 2, |t, o| {
            o[0] = t.sin();
            o[1] = t * t;
        });
        let mut x = lift(&p, 2).unwrap();
        x.x2_mut(1, 4)[1] += 0.1;
        assert!(chen_residual(&x) >= 0.1 - 1e-9);
    }

    #[test]
    fn level_csv_has_all_pairs() {
        let p = SampledPath::scalar(grid(3), |t| t);
        let x = lift(&p, 3).unwrap();
        let mut buf = Vec::new();
        x.write_level_csv(3, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 10);
        assert!(text.starts_with("i,j,e0\n"));
        assert!(x.write_level_csv(4, Vec::new()).is_err());
    }
}
