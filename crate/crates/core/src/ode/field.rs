//! Vector fields `σ: ℝⁿ → Mat(n,d)` and drifts `β: [0,1] × ℝⁿ → ℝⁿ`.

/// Coefficients of `dy = σ(y) dz + β(ε, y) dt`.
///
/// `σ(y)` is written row-major into an `n × d` buffer. Derivatives are
/// directional; the provided defaults use centred finite differences with
/// Richardson refinement, so implementors only need `sigma` and `beta`.
pub trait VectorField: Send + Sync {
    fn state_dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn sigma(&self, y: &[f64], out: &mut [f64]);
    fn beta(&self, eps: f64, y: &[f64], out: &mut [f64]);

    /// `∇σ(y)⟨v⟩`, an `n × d` matrix.
    fn sigma_dy(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
        fd_first(|p, o| self.sigma(p, o), y, v, out);
    }

    /// `∇²σ(y)⟨u, v⟩`, an `n × d` matrix.
    fn sigma_dyy(&self, y: &[f64], u: &[f64], v: &[f64], out: &mut [f64]) {
        fd_second(|p, o| self.sigma(p, o), y, u, v, out);
    }

    /// `∇_y β(ε, y)⟨v⟩`.
    fn beta_dy(&self, eps: f64, y: &[f64], v: &[f64], out: &mut [f64]) {
        fd_first(|p, o| self.beta(eps, p, o), y, v, out);
    }

    /// `∇²_y β(ε, y)⟨u, v⟩`.
    fn beta_dyy(&self, eps: f64, y: &[f64], u: &[f64], v: &[f64], out: &mut [f64]) {
        fd_second(|p, o| self.beta(eps, p, o), y, u, v, out);
    }

    /// `∂_ε β(ε, y)`.
    fn beta_de(&self, eps: f64, y: &[f64], out: &mut [f64]) {
        fd_first(|e, o| self.beta(e[0], y, o), &[eps], &[1.0], out);
    }

    /// `∇_y ∂_ε β(ε, y)⟨v⟩`.
    fn beta_dey(&self, eps: f64, y: &[f64], v: &[f64], out: &mut [f64]) {
        let mut ext = Vec::with_capacity(y.len() + 1);
        ext.push(eps);
        ext.extend_from_slice(y);
        let mut e0 = vec![0.0; y.len() + 1];
        e0[0] = 1.0;
        let mut ev = vec![0.0];
        ev.extend_from_slice(v);
        fd_second(|p, o| self.beta(p[0], &p[1..], o), &ext, &e0, &ev, out);
    }

    /// `∂²_ε β(ε, y)`.
    fn beta_dee(&self, eps: f64, y: &[f64], out: &mut [f64]) {
        fd_second(|e, o| self.beta(e[0], y, o), &[eps], &[1.0], &[1.0], out);
    }
}

const FD_STEP: f64 = 1e-5;
const FD_STEP_SECOND: f64 = 1e-3;

fn shifted(y: &[f64], dirs: &[(&[f64], f64)]) -> Vec<f64> {
    let mut p = y.to_vec();
    for (d, h) in dirs {
        for (pi, di) in p.iter_mut().zip(d.iter()) {
            *pi += h * di;
        }
    }
    p
}

/// Centred difference of `g` along `v`, Richardson-refined from steps `h` and `h/2`.
pub fn fd_first(g: impl Fn(&[f64], &mut [f64]), y: &[f64], v: &[f64], out: &mut [f64]) {
    let m = out.len();
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    let mut central = |h: f64| -> Vec<f64> {
        g(&shifted(y, &[(v, h)]), &mut plus);
        g(&shifted(y, &[(v, -h)]), &mut minus);
        plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    let coarse = central(FD_STEP);
    let fine = central(FD_STEP / 2.0);
    for ((o, c), f) in out.iter_mut().zip(&coarse).zip(&fine) {
        *o = (4.0 * f - c) / 3.0;
    }
}

/// Mixed second difference `∂_u ∂_v g`, Richardson-refined.
pub fn fd_second(g: impl Fn(&[f64], &mut [f64]), y: &[f64], u: &[f64], v: &[f64], out: &mut [f64]) {
    let m = out.len();
    let mut buf = vec![0.0; m];
    let mut mixed = |h: f64| -> Vec<f64> {
        let mut acc = vec![0.0; m];
        for (su, sv, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
            g(&shifted(y, &[(u, su * h), (v, sv * h)]), &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += w * b;
            }
        }
        acc.iter().map(|a| a / (4.0 * h * h)).collect()
    };
    let coarse = mixed(FD_STEP_SECOND);
    let fine = mixed(FD_STEP_SECOND / 2.0);
    for ((o, c), f) in out.iter_mut().zip(&coarse).zip(&fine) {
        *o = (4.0 * f - c) / 3.0;
    }
}

/// `σ(y)e_k = A_k y + s_k`, `β(ε, y) = B y + c₀ + ε c₁ + ε² c₂`.
///
/// Covers constant diffusion (`A_k = 0`), scalar linear equations and
/// rotation-type fields.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    n: usize,
    d: usize,
    /// `d` matrices `A_k`, each `n × n` row-major.
    pub a: Vec<f64>,
    /// `n × d` row-major.
    pub s: Vec<f64>,
    /// `n × n` row-major.
    pub b: Vec<f64>,
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

impl AffineField {
    pub fn zero(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            a: vec![0.0; d * n * n],
            s: vec![0.0; n * d],
            b: vec![0.0; n * n],
            c0: vec![0.0; n],
            c1: vec![0.0; n],
            c2: vec![0.0; n],
        }
    }

    /// `σ ≡ S` with no drift.
    pub fn constant(n: usize, d: usize, s: Vec<f64>) -> Self {
        assert_eq!(s.len(), n * d, "S must be n × d");
        Self { s, ..Self::zero(n, d) }
    }

    /// Scalar `dy = a·y dz` (plus `s dz`).
    pub fn scalar_linear(a: f64, s: f64) -> Self {
        Self { a: vec![a], s: vec![s], ..Self::zero(1, 1) }
    }

    /// Planar rotation `σ(y) = ω J y + s` with `J` the quarter turn, one noise.
    pub fn rotation(omega: f64, s: [f64; 2]) -> Self {
        Self { a: vec![0.0, -omega, omega, 0.0], s: s.to_vec(), ..Self::zero(2, 1) }
    }

    pub fn with_drift(mut self, b: Vec<f64>, c0: Vec<f64>, c1: Vec<f64>, c2: Vec<f64>) -> Self {
        assert!(b.len() == self.n * self.n && c0.len() == self.n && c1.len() == self.n && c2.len() == self.n);
        self.b = b;
        self.c0 = c0;
        self.c1 = c1;
        self.c2 = c2;
        self
    }

    fn lin_sigma(&self, y: &[f64], out: &mut [f64], with_s: bool) {
        let (n, d) = (self.n, self.d);
        for i in 0..n {
            for k in 0..d {
                let ak = &self.a[k * n * n + i * n..k * n * n + (i + 1) * n];
                let lin: f64 = ak.iter().zip(y).map(|(a, y)| a * y).sum();
                out[i * d + k] = lin + if with_s { self.s[i * d + k] } else { 0.0 };
            }
        }
    }

    fn matvec_b(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            out[i] = self.b[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }
}

impl VectorField for AffineField {
    fn state_dim(&self) -> usize {
        self.n
    }
    fn noise_dim(&self) -> usize {
        self.d
    }
    fn sigma(&self, y: &[f64], out: &mut [f64]) {
        self.lin_sigma(y, out, true);
    }
    fn beta(&self, eps: f64, y: &[f64], out: &mut [f64]) {
        self.matvec_b(y, out);
        for i in 0..self.n {
            out[i] += self.c0[i] + eps * self.c1[i] + eps * eps * self.c2[i];
        }
    }
    fn sigma_dy(&self, _y: &[f64], v: &[f64], out: &mut [f64]) {
        self.lin_sigma(v, out, false);
    }
    fn sigma_dyy(&self, _y: &[f64], _u: &[f64], _v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn beta_dy(&self, _eps: f64, _y: &[f64], v: &[f64], out: &mut [f64]) {
        self.matvec_b(v, out);
    }
    fn beta_dyy(&self, _eps: f64, _y: &[f64], _u: &[f64], _v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn beta_de(&self, eps: f64, _y: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = self.c1[i] + 2.0 * eps * self.c2[i];
        }
    }
    fn beta_dey(&self, _eps: f64, _y: &[f64], _v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn beta_dee(&self, _eps: f64, _y: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = 2.0 * self.c2[i];
        }
    }
}

/// One entry `σ_ik(y) = s + a·tanh(c + ⟨w, y⟩ + Σ_j q_j y_j²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TanhEntry {
    pub s: f64,
    pub a: f64,
    pub c: f64,
    pub w: Vec<f64>,
    /// Nonnegative, so the argument grows in every direction and all
    /// derivatives stay bounded.
    pub q: Vec<f64>,
}

/// Bounded smooth field: tanh-saturated quadratic diffusion entries and drift
/// `β_i(ε, y) = −κ_i tanh(y_i) + ε b1_i (1 + ½ tanh(y_i)) + ε² b2_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TanhField {
    n: usize,
    d: usize,
    entries: Vec<TanhEntry>,
    pub kappa: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
}

impl TanhField {
    pub fn new(n: usize, d: usize, entries: Vec<TanhEntry>, kappa: Vec<f64>, b1: Vec<f64>, b2: Vec<f64>) -> Self {
        assert_eq!(entries.len(), n * d);
        assert!(entries.iter().all(|e| e.w.len() == n && e.q.len() == n && e.q.iter().all(|&q| q >= 0.0)));
        assert!(kappa.len() == n && b1.len() == n && b2.len() == n);
        Self { n, d, entries, kappa, b1, b2 }
    }

    /// The fixed two-dimensional test field used throughout the test suite.
    pub fn standard() -> Self {
        let e = |s: f64, a: f64, c: f64, w: [f64; 2], q: [f64; 2]| TanhEntry { s, a, c, w: w.to_vec(), q: q.to_vec() };
        Self::new(
            2,
            2,
            vec![
                e(1.0, 0.4, 0.1, [0.8, -0.3], [0.2, 0.0]),
                e(0.1, 0.3, -0.2, [0.2, 0.6], [0.0, 0.1]),
                e(-0.2, 0.35, 0.3, [-0.5, 0.4], [0.1, 0.1]),
                e(0.9, 0.25, 0.0, [0.3, 0.7], [0.0, 0.3]),
            ],
            vec![0.5, 0.3],
            vec![0.2, -0.1],
            vec![0.05, 0.1],
        )
    }

    fn arg(e: &TanhEntry, y: &[f64]) -> f64 {
        e.c + e.w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() + e.q.iter().zip(y).map(|(q, y)| q * y * y).sum::<f64>()
    }

    fn grad_dot(e: &TanhEntry, y: &[f64], u: &[f64]) -> f64 {
        e.w.iter().zip(e.q.iter()).zip(y.iter().zip(u)).map(|((w, q), (y, u))| (w + 2.0 * q * y) * u).sum()
    }
}

impl VectorField for TanhField {
    fn state_dim(&self) -> usize {
        self.n
    }
    fn noise_dim(&self) -> usize {
        self.d
    }
    fn sigma(&self, y: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.entries) {
            *o = e.s + e.a * Self::arg(e, y).tanh();
        }
    }
    fn beta(&self, eps: f64, y: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let t = y[i].tanh();
            out[i] = -self.kappa[i] * t + eps * self.b1[i] * (1.0 + 0.5 * t) + eps * eps * self.b2[i];
        }
    }
    fn sigma_dy(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.entries) {
            let t = Self::arg(e, y).tanh();
            *o = e.a * (1.0 - t * t) * Self::grad_dot(e, y, v);
        }
    }
    fn sigma_dyy(&self, y: &[f64], u: &[f64], v: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.entries) {
            let t = Self::arg(e, y).tanh();
            let d1 = 1.0 - t * t;
            let d2 = -2.0 * t * d1;
            let curv: f64 = e.q.iter().zip(u.iter().zip(v)).map(|(q, (u, v))| 2.0 * q * u * v).sum();
            *o = e.a * (d2 * Self::grad_dot(e, y, u) * Self::grad_dot(e, y, v) + d1 * curv);
        }
    }
    fn beta_dy(&self, eps: f64, y: &[f64], v: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let t = y[i].tanh();
            let d1 = 1.0 - t * t;
            out[i] = (-self.kappa[i] + 0.5 * eps * self.b1[i]) * d1 * v[i];
        }
    }
    fn beta_dyy(&self, eps: f64, y: &[f64], u: &[f64], v: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let t = y[i].tanh();
            let d2 = -2.0 * t * (1.0 - t * t);
            out[i] = (-self.kappa[i] + 0.5 * eps * self.b1[i]) * d2 * u[i] * v[i];
        }
    }
    fn beta_de(&self, eps: f64, y: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = self.b1[i] * (1.0 + 0.5 * y[i].tanh()) + 2.0 * eps * self.b2[i];
        }
    }
    fn beta_dey(&self, _eps: f64, y: &[f64], v: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let t = y[i].tanh();
            out[i] = 0.5 * self.b1[i] * (1.0 - t * t) * v[i];
        }
    }
    fn beta_dee(&self, _eps: f64, _y: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = 2.0 * self.b2[i];
        }
    }
}
