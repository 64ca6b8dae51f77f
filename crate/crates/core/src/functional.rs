//! Path functionals `F`, `G` with first and second derivatives, plus the
//! serialisable descriptions of built-in functionals and vector fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampledPath;
use crate::ode::{AffineField, TanhEntry, TanhField, VectorField};

/// A twice differentiable functional on sampled paths.
///
/// Gradients are represented by a dual path `g`, with `∇F(y)⟨u⟩ = Σ_i g_i·u_i`.
pub trait Functional: Send + Sync {
    fn value(&self, y: &SampledPath) -> f64;
    fn grad(&self, y: &SampledPath) -> SampledPath;
    /// `∇²F(y)⟨u, v⟩`.
    fn hess(&self, y: &SampledPath, u: &SampledPath, v: &SampledPath) -> f64;
    /// `∇³F(y)⟨u, v, w⟩`, by central differences of `hess` unless overridden.
    fn third(&self, y: &SampledPath, u: &SampledPath, v: &SampledPath, w: &SampledPath) -> f64 {
        let h = 1e-4;
        let plus = y.axpy(h, w).expect("same grid");
        let minus = y.axpy(-h, w).expect("same grid");
        (self.hess(&plus, u, v) - self.hess(&minus, u, v)) / (2.0 * h)
    }
    /// `∇F(y)⟨u⟩`.
    fn directional(&self, y: &SampledPath, u: &SampledPath) -> f64 {
        dual_pair(&self.grad(y), u)
    }
    /// True when the functional is identically zero; lets callers skip work.
    fn is_zero(&self) -> bool {
        false
    }
}

/// `Σ_i g_i·u_i`.
pub fn dual_pair(g: &SampledPath, u: &SampledPath) -> f64 {
    g.values().iter().zip(u.values()).map(|(a, b)| a * b).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `F ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Functional for Constant {
    fn value(&self, _y: &SampledPath) -> f64 {
        self.0
    }
    fn grad(&self, y: &SampledPath) -> SampledPath {
        SampledPath::zeros(y.grid().clone(), y.dim())
    }
    fn hess(&self, _y: &SampledPath, _u: &SampledPath, _v: &SampledPath) -> f64 {
        0.0
    }
    fn third(&self, _y: &SampledPath, _u: &SampledPath, _v: &SampledPath, _w: &SampledPath) -> f64 {
        0.0
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
}

/// `F(y) = c₀ + ⟨v, y₁⟩ + ½⟨Q y₁, y₁⟩` on the terminal value; `Q` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointQuadratic {
    pub c0: f64,
    pub v: Vec<f64>,
    /// Row-major `n×n`; empty for the purely linear case.
    pub q: Vec<f64>,
}

impl EndpointQuadratic {
    pub fn linear(v: Vec<f64>) -> Self {
        Self { c0: 0.0, v, q: Vec::new() }
    }

    fn qv(&self, y: &[f64]) -> Vec<f64> {
        let n = self.v.len();
        if self.q.is_empty() {
            return vec![0.0; n];
        }
        (0..n).map(|i| dot(&self.q[i * n..(i + 1) * n], y)).collect()
    }
}

impl Functional for EndpointQuadratic {
    fn value(&self, y: &SampledPath) -> f64 {
        let e = y.last();
        self.c0 + dot(&self.v, e) + 0.5 * dot(&self.qv(e), e)
    }
    fn grad(&self, y: &SampledPath) -> SampledPath {
        let mut g = SampledPath::zeros(y.grid().clone(), y.dim());
        let qe = self.qv(y.last());
        let last = g.len() - 1;
        for (o, (a, b)) in g.point_mut(last).iter_mut().zip(self.v.iter().zip(&qe)) {
            *o = a + b;
        }
        g
    }
    fn hess(&self, _y: &SampledPath, u: &SampledPath, v: &SampledPath) -> f64 {
        dot(&self.qv(u.last()), v.last())
    }
    fn third(&self, _y: &SampledPath, _u: &SampledPath, _v: &SampledPath, _w: &SampledPath) -> f64 {
        0.0
    }
    fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.v.iter().all(|x| *x == 0.0) && self.q.iter().all(|x| *x == 0.0)
    }
}

/// `F(y) = ∫₀¹ Σ_i f_i(y^i_t) dt` with polynomials `f_i(x) = Σ_k a_{ik} x^k`,
/// integrated with the trapezoid rule on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralPoly {
    pub coeffs: Vec<Vec<f64>>,
}

impl IntegralPoly {
    fn eval(&self, i: usize, x: f64, deriv: usize) -> f64 {
        let mut out = 0.0;
        for (k, &a) in self.coeffs[i].iter().enumerate().skip(deriv) {
            let fall: f64 = (0..deriv).map(|j| (k - j) as f64).product();
            out += a * fall * x.powi((k - deriv) as i32);
        }
        out
    }

    fn weights(y: &SampledPath) -> Vec<f64> {
        let g = y.grid();
        let mut w = vec![0.0; y.len()];
        for j in 0..g.steps() {
            let h = 0.5 * g.dt(j);
            w[j] += h;
            w[j + 1] += h;
        }
        w
    }

    fn contract(&self, y: &SampledPath, deriv: usize, dirs: &[&SampledPath]) -> f64 {
        let w = Self::weights(y);
        let mut out = 0.0;
        for (j, wj) in w.iter().enumerate() {
            for (i, &x) in y.point(j).iter().enumerate() {
                let prod: f64 = dirs.iter().map(|p| p.point(j)[i]).product();
                out += wj * self.eval(i, x, deriv) * prod;
            }
        }
        out
    }
}

impl Functional for IntegralPoly {
    fn value(&self, y: &SampledPath) -> f64 {
        self.contract(y, 0, &[])
    }
    fn grad(&self, y: &SampledPath) -> SampledPath {
        let w = Self::weights(y);
        let mut g = SampledPath::zeros(y.grid().clone(), y.dim());
        for (j, wj) in w.iter().enumerate() {
            for i in 0..y.dim() {
                g.point_mut(j)[i] = wj * self.eval(i, y.point(j)[i], 1);
            }
        }
        g
    }
    fn hess(&self, y: &SampledPath, u: &SampledPath, v: &SampledPath) -> f64 {
        self.contract(y, 2, &[u, v])
    }
    fn third(&self, y: &SampledPath, u: &SampledPath, v: &SampledPath, w: &SampledPath) -> f64 {
        self.contract(y, 3, &[u, v, w])
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|a| *a == 0.0)
    }
}

/// Pointwise sum of functionals.
pub struct Sum(pub Vec<Box<dyn Functional>>);

impl Functional for Sum {
    fn value(&self, y: &SampledPath) -> f64 {
        self.0.iter().map(|f| f.value(y)).sum()
    }
    fn grad(&self, y: &SampledPath) -> SampledPath {
        self.0.iter().fold(SampledPath::zeros(y.grid().clone(), y.dim()), |acc, f| acc.add(&f.grad(y)).expect("same grid"))
    }
    fn hess(&self, y: &SampledPath, u: &SampledPath, v: &SampledPath) -> f64 {
        self.0.iter().map(|f| f.hess(y, u, v)).sum()
    }
    fn third(&self, y: &SampledPath, u: &SampledPath, v: &SampledPath, w: &SampledPath) -> f64 {
        self.0.iter().map(|f| f.third(y, u, v, w)).sum()
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|f| f.is_zero())
    }
}

/// Serialisable description of a built-in functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalSpec {
    Zero,
    Constant { value: f64 },
    EndpointLinear { v: Vec<f64> },
    EndpointQuadratic {
        #[serde(default)]
        c0: f64,
        v: Vec<f64>,
        q: Vec<f64>,
    },
    IntegralPoly { coeffs: Vec<Vec<f64>> },
    Sum { terms: Vec<FunctionalSpec> },
}

impl FunctionalSpec {
    /// Builds the functional for paths in `ℝ^n`.
    pub fn build(&self, n: usize) -> Result<Box<dyn Functional>> {
        let bad = |what: &str| Error::InvalidArgument(format!("functional: {what} (state dimension {n})"));
        Ok(match self {
            Self::Zero => Box::new(Constant(0.0)),
            Self::Constant { value } => Box::new(Constant(*value)),
            Self::EndpointLinear { v } => {
                if v.len() != n {
                    return Err(bad("v has the wrong length"));
                }
                Box::new(EndpointQuadratic::linear(v.clone()))
            }
            Self::EndpointQuadratic { c0, v, q } => {
                if v.len() != n || q.len() != n * n {
                    return Err(bad("v must have n entries and q n² entries"));
                }
                if (0..n).any(|i| (0..n).any(|j| (q[i * n + j] - q[j * n + i]).abs() > 1e-14)) {
                    return Err(bad("q must be symmetric"));
                }
                Box::new(EndpointQuadratic { c0: *c0, v: v.clone(), q: q.clone() })
            }
            Self::IntegralPoly { coeffs } => {
                if coeffs.len() != n {
                    return Err(bad("one coefficient list per coordinate expected"));
                }
                Box::new(IntegralPoly { coeffs: coeffs.clone() })
            }
            Self::Sum { terms } => Box::new(Sum(terms.iter().map(|t| t.build(n)).collect::<Result<_>>()?)),
        })
    }
}

/// Serialisable description of a built-in vector field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    /// `σ ≡ S` (row-major `n×d`), optional linear drift `B y`.
    Constant {
        n: usize,
        d: usize,
        s: Vec<f64>,
        #[serde(default)]
        b: Option<Vec<f64>>,
    },
    /// `σ(y) = ω J y + s` in the plane with one noise.
    Rotation { omega: f64, s: [f64; 2] },
    /// The general affine family `σ(y)e_k = A_k y + s_k`, `β = By + c₀ + εc₁ + ε²c₂`.
    Affine {
        n: usize,
        d: usize,
        a: Vec<f64>,
        s: Vec<f64>,
        b: Vec<f64>,
        c0: Vec<f64>,
        c1: Vec<f64>,
        c2: Vec<f64>,
    },
    /// The standard bounded tanh-saturated two-dimensional field.
    TanhStandard,
    Tanh {
        n: usize,
        d: usize,
        entries: Vec<TanhEntrySpec>,
        kappa: Vec<f64>,
        b1: Vec<f64>,
        b2: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanhEntrySpec {
    pub s: f64,
    pub a: f64,
    pub c: f64,
    pub w: Vec<f64>,
    pub q: Vec<f64>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<Box<dyn VectorField>> {
        let bad = |what: String| Error::InvalidArgument(format!("field: {what}"));
        Ok(match self {
            Self::Constant { n, d, s, b } => {
                if s.len() != n * d {
                    return Err(bad(format!("s needs {} entries", n * d)));
                }
                let mut f = AffineField::constant(*n, *d, s.clone());
                if let Some(b) = b {
                    if b.len() != n * n {
                        return Err(bad(format!("b needs {} entries", n * n)));
                    }
                    f = f.with_drift(b.clone(), vec![0.0; *n], vec![0.0; *n], vec![0.0; *n]);
                }
                Box::new(f)
            }
            Self::Rotation { omega, s } => Box::new(AffineField::rotation(*omega, *s)),
            Self::Affine { n, d, a, s, b, c0, c1, c2 } => {
                let (n, d) = (*n, *d);
                if a.len() != d * n * n || s.len() != n * d || b.len() != n * n || [c0, c1, c2].iter().any(|c| c.len() != n) {
                    return Err(bad("affine coefficient shapes do not match n and d".into()));
                }
                let mut f = AffineField::constant(n, d, s.clone()).with_drift(b.clone(), c0.clone(), c1.clone(), c2.clone());
                f.a = a.clone();
                Box::new(f)
            }
            Self::TanhStandard => Box::new(TanhField::standard()),
            Self::Tanh { n, d, entries, kappa, b1, b2 } => {
                let (n, d) = (*n, *d);
                if entries.len() != n * d || [kappa, b1, b2].iter().any(|c| c.len() != n) {
                    return Err(bad("tanh coefficient shapes do not match n and d".into()));
                }
                if entries.iter().any(|e| e.w.len() != n || e.q.len() != n || e.q.iter().any(|q| *q < 0.0)) {
                    return Err(bad("each entry needs n weights and n nonnegative quadratic weights".into()));
                }
                let entries = entries
                    .iter()
                    .map(|e| TanhEntry { s: e.s, a: e.a, c: e.c, w: e.w.clone(), q: e.q.clone() })
                    .collect();
                Box::new(TanhField::new(n, d, entries, kappa.clone(), b1.clone(), b2.clone()))
            }
        })
    }
}
