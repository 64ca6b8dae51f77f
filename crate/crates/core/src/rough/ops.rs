use std::sync::Arc;

use super::RoughPath;
use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};

/// Running cross integrals between a rough path `X` (dimension `d`) and a
/// bounded-variation path `k` (dimension `e`) from a fixed start index.
///
/// Each grid step contributes the exact integral of the piecewise-linear
/// interpolants; the level-3 block `∫∫ dk ⊗ dx ⊗ dx` is assembled as
/// `∫ (k − k_s) ⊗ dX² − ∫ (∫ dk ⊗ (x − x_s)) ⊗ dx`, which only needs
/// `X²` itself and not a second-order expansion of `x`.
struct Cross {
    d: usize,
    e: usize,
    kh: Vec<f64>,
    k2: Vec<f64>,
    xk: Vec<f64>,
    kx: Vec<f64>,
    j: Vec<f64>,
    kkk: Vec<f64>,
    xxk: Vec<f64>,
    xkx: Vec<f64>,
    kxk: Vec<f64>,
    kkx: Vec<f64>,
    xkk: Vec<f64>,
    kxx_a: Vec<f64>,
    kxx_b: Vec<f64>,
}

impl Cross {
    fn new(d: usize, e: usize) -> Self {
        Self {
            d,
            e,
            kh: vec![0.0; e],
            k2: vec![0.0; e * e],
            xk: vec![0.0; d * e],
            kx: vec![0.0; e * d],
            j: vec![0.0; e * d],
            kkk: vec![0.0; e * e * e],
            xxk: vec![0.0; d * d * e],
            xkx: vec![0.0; d * e * d],
            kxk: vec![0.0; e * d * e],
            kkx: vec![0.0; e * e * d],
            xkk: vec![0.0; d * e * e],
            kxx_a: vec![0.0; e * d * d],
            kxx_b: vec![0.0; e * d * d],
        }
    }

    /// Advance over one grid step. `xh`, `x2h` are `X¹`, `X²` from the start
    /// to the left end of the step; `dx`, `x2s` are the step's own increments.
    fn step(&mut self, xh: &[f64], x2h: &[f64], dx: &[f64], x2s: &[f64], dk: &[f64], level3: bool) {
        let (d, e) = (self.d, self.e);
        if level3 {
            for a in 0..e {
                for b in 0..e {
                    for c in 0..e {
                        self.kkk[(a * e + b) * e + c] += self.k2[a * e + b] * dk[c]
                            + 0.5 * self.kh[a] * dk[b] * dk[c]
                            + dk[a] * dk[b] * dk[c] / 6.0;
                    }
                }
            }
            for a in 0..d {
                for b in 0..d {
                    for c in 0..e {
                        self.xxk[(a * d + b) * e + c] += x2h[a * d + b] * dk[c]
                            + 0.5 * xh[a] * dx[b] * dk[c]
                            + x2s[a * d + b] * dk[c] / 3.0;
                    }
                }
            }
            for a in 0..d {
                for b in 0..e {
                    for c in 0..d {
                        self.xkx[(a * e + b) * d + c] += self.xk[a * e + b] * dx[c]
                            + 0.5 * xh[a] * dk[b] * dx[c]
                            + dx[a] * dk[b] * dx[c] / 6.0;
                    }
                    for c in 0..e {
                        self.xkk[(a * e + b) * e + c] += self.xk[a * e + b] * dk[c]
                            + 0.5 * xh[a] * dk[b] * dk[c]
                            + dx[a] * dk[b] * dk[c] / 6.0;
                    }
                }
            }
            for a in 0..e {
                for b in 0..d {
                    for c in 0..e {
                        self.kxk[(a * d + b) * e + c] += self.kx[a * d + b] * dk[c]
                            + 0.5 * self.kh[a] * dx[b] * dk[c]
                            + dk[a] * dx[b] * dk[c] / 6.0;
                    }
                }
                for b in 0..e {
                    for c in 0..d {
                        self.kkx[(a * e + b) * d + c] += self.k2[a * e + b] * dx[c]
                            + 0.5 * self.kh[a] * dk[b] * dx[c]
                            + dk[a] * dk[b] * dx[c] / 6.0;
                    }
                }
                for b in 0..d {
                    for c in 0..d {
                        let bc = b * d + c;
                        let dx2 = xh[b] * dx[c] + x2s[bc];
                        let weighted = 0.5 * xh[b] * dx[c] + 2.0 * x2s[bc] / 3.0;
                        self.kxx_a[a * d * d + bc] += self.kh[a] * dx2 + dk[a] * weighted;
                        self.kxx_b[a * d * d + bc] += self.j[a * d + b] * dx[c]
                            + 0.5 * dk[a] * xh[b] * dx[c]
                            + dk[a] * x2s[bc] / 3.0;
                    }
                }
            }
        }
        for a in 0..d {
            for b in 0..e {
                self.xk[a * e + b] += xh[a] * dk[b] + 0.5 * dx[a] * dk[b];
            }
        }
        for a in 0..e {
            for b in 0..d {
                self.kx[a * d + b] += self.kh[a] * dx[b] + 0.5 * dk[a] * dx[b];
                self.j[a * d + b] += dk[a] * xh[b] + 0.5 * dk[a] * dx[b];
            }
            for b in 0..e {
                self.k2[a * e + b] += self.kh[a] * dk[b] + 0.5 * dk[a] * dk[b];
            }
        }
        for a in 0..e {
            self.kh[a] += dk[a];
        }
    }

    /// Block lookup by component type (`false` = x, `true` = k) and local indices.
    fn l2(&self, x2: &[f64], ta: bool, tb: bool, a: usize, b: usize) -> f64 {
        let (d, e) = (self.d, self.e);
        match (ta, tb) {
            (false, false) => x2[a * d + b],
            (false, true) => self.xk[a * e + b],
            (true, false) => self.kx[a * d + b],
            (true, true) => self.k2[a * e + b],
        }
    }

    fn l3(&self, x3: &[f64], t: [bool; 3], a: usize, b: usize, c: usize) -> f64 {
        let (d, e) = (self.d, self.e);
        match t {
            [false, false, false] => x3[(a * d + b) * d + c],
            [false, false, true] => self.xxk[(a * d + b) * e + c],
            [false, true, false] => self.xkx[(a * e + b) * d + c],
            [true, false, false] => {
                let k = (a * d + b) * d + c;
                self.kxx_a[k] - self.kxx_b[k]
            }
            [false, true, true] => self.xkk[(a * e + b) * e + c],
            [true, false, true] => self.kxk[(a * d + b) * e + c],
            [true, true, false] => self.kkx[(a * e + b) * d + c],
            [true, true, true] => self.kkk[(a * e + b) * e + c],
        }
    }
}

/// Rough path over `(x, k)` in dimension `d + e`, the first `d` coordinates
/// carrying `X` and the last `e` carrying the bounded-variation path `k`.
pub fn pair(x: &RoughPath, k: &SampledPath) -> Result<RoughPath> {
    if x.grid().points() != k.grid().points() {
        return Err(Error::GridMismatch("rough path and shift path use different grids".into()));
    }
    let (d, e, level) = (x.dim(), k.dim(), x.level());
    let dd = d + e;
    let mut out = RoughPath::empty(x.grid().clone(), dd, level)?;
    let n = x.len();
    let comp = |i: usize| if i < d { (false, i) } else { (true, i - d) };
    let mut z1 = vec![0.0; dd];
    let mut z2 = vec![0.0; dd * dd];
    let mut z3 = vec![0.0; if level == 3 { dd * dd * dd } else { 0 }];
    let steps: Vec<Vec<f64>> = (0..n.saturating_sub(1)).map(|j| k.increment(j, j + 1)).collect();
    for s in 0..n {
        let mut cr = Cross::new(d, e);
        for t in s..n {
            if t > s {
                let j = t - 1;
                cr.step(x.x1(s, j), x.x2(s, j), x.x1(j, t), x.x2(j, t), &steps[j], level == 3);
            }
            let (x1, x2, x3) = (x.x1(s, t), x.x2(s, t), x.x3(s, t));
            for a in 0..dd {
                let (ta, ia) = comp(a);
                z1[a] = if ta { cr.kh[ia] } else { x1[ia] };
                for b in 0..dd {
                    let (tb, ib) = comp(b);
                    z2[a * dd + b] = cr.l2(x2, ta, tb, ia, ib);
                    if level == 3 {
                        for c in 0..dd {
                            let (tc, ic) = comp(c);
                            z3[(a * dd + b) * dd + c] = cr.l3(x3, [ta, tb, tc], ia, ib, ic);
                        }
                    }
                }
            }
            out.set(s, t, &z1, &z2, &z3);
        }
    }
    Ok(out)
}

/// Translation of `X` by a bounded-variation path `k` of the same dimension:
/// the image of `pair(X, k)` under the summing map `(x, k) ↦ x + k`.
pub fn shift(x: &RoughPath, k: &SampledPath) -> Result<RoughPath> {
    if k.dim() != x.dim() {
        return Err(Error::InvalidArgument(format!(
            "shift dimension {} differs from rough path dimension {}",
            k.dim(),
            x.dim()
        )));
    }
    let paired = pair(x, k)?;
    let d = x.dim();
    let dd = 2 * d;
    let level = x.level();
    let mut out = RoughPath::empty(x.grid().clone(), d, level)?;
    let mut z1 = vec![0.0; d];
    let mut z2 = vec![0.0; d * d];
    let mut z3 = vec![0.0; if level == 3 { d * d * d } else { 0 }];
    for s in 0..x.len() {
        for t in s..x.len() {
            let (p1, p2, p3) = (paired.x1(s, t), paired.x2(s, t), paired.x3(s, t));
            for a in 0..d {
                z1[a] = p1[a] + p1[a + d];
                for b in 0..d {
                    let mut acc = 0.0;
                    for sa in [a, a + d] {
                        for sb in [b, b + d] {
                            acc += p2[sa * dd + sb];
                        }
                    }
                    z2[a * d + b] = acc;
                    if level == 3 {
                        for c in 0..d {
                            let mut acc = 0.0;
                            for sa in [a, a + d] {
                                for sb in [b, b + d] {
                                    for sc in [c, c + d] {
                                        acc += p3[(sa * dd + sb) * dd + sc];
                                    }
                                }
                            }
                            z3[(a * d + b) * d + c] = acc;
                        }
                    }
                }
            }
            out.set(s, t, &z1, &z2, &z3);
        }
    }
    Ok(out)
}

/// `(c^{−jH} X^j_{cs,ct})` reindexed to `[0, 1]`; `c` must be a grid point.
pub fn scale_rough(x: &RoughPath, c: f64, hurst: f64) -> Result<RoughPath> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidArgument(format!("scale {c} outside (0, 1]")));
    }
    let m = x
        .grid()
        .index_of(c)
        .ok_or_else(|| Error::InvalidGrid(format!("scale {c} is not a grid point")))?;
    if m == 0 {
        return Err(Error::InvalidGrid("scale collapses the grid".into()));
    }
    let mut pts: Vec<f64> = x.grid().points()[..=m].iter().map(|t| t / c).collect();
    pts[m] = 1.0;
    let grid = Arc::new(TimeGrid::new(pts)?);
    let level = x.level();
    let mut out = RoughPath::empty(grid, x.dim(), level)?;
    let f: Vec<f64> = (1..=3).map(|j| c.powf(-(j as f64) * hurst)).collect();
    for s in 0..=m {
        for t in s..=m {
            let z1: Vec<f64> = x.x1(s, t).iter().map(|v| v * f[0]).collect();
            let z2: Vec<f64> = x.x2(s, t).iter().map(|v| v * f[1]).collect();
            let z3: Vec<f64> = x.x3(s, t).iter().map(|v| v * f[2]).collect();
            out.set(s, t, &z1, &z2, &z3);
        }
    }
    Ok(out)
}
