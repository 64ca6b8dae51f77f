use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};
use crate::ode::{heun_path, linear_flow, LinearFlow, SolverConfig, VectorField};

/// Everything the Taylor terms share for a fixed shift `γ`: the base
/// solution `φ⁰`, the linearised flow and derivative tensors of the
/// coefficients along `φ⁰`.
pub struct TaylorContext<'a> {
    pub(crate) field: &'a dyn VectorField,
    pub(crate) gamma: SampledPath,
    pub(crate) phi0: SampledPath,
    pub(crate) flow: LinearFlow,
    pub(crate) y0: Vec<f64>,
    /// `σ(φ⁰_i)`.
    pub(crate) sig: Vec<DMatrix<f64>>,
    /// `∂_m σ(φ⁰_i)` for each state coordinate `m`.
    pub(crate) dsig: Vec<Vec<DMatrix<f64>>>,
    /// `∂²_{m m'} σ(φ⁰_i)`, index `m * n + m'`.
    pub(crate) d2sig: Vec<Vec<DMatrix<f64>>>,
    /// `∂²_{m m'} β(0, φ⁰_i)`.
    pub(crate) d2beta: Vec<Vec<DVector<f64>>>,
}

fn unit(n: usize, m: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[m] = 1.0;
    e
}

impl<'a> TaylorContext<'a> {
    /// Solves for `φ⁰` along `γ` from `y0` and prepares the flow.
    pub fn new(field: &'a dyn VectorField, gamma: SampledPath, y0: &[f64]) -> Result<Self> {
        let phi0 = heun_path(field, 0.0, &gamma, y0, true, SolverConfig::default())?;
        let flow = linear_flow(&gamma, &phi0, field)?;
        let (n, d) = (field.state_dim(), field.noise_dim());
        let len = phi0.len();
        let mut sig = Vec::with_capacity(len);
        let mut dsig = Vec::with_capacity(len);
        let mut d2sig = Vec::with_capacity(len);
        let mut d2beta = Vec::with_capacity(len);
        let mut buf = vec![0.0; n * d];
        let mut bb = vec![0.0; n];
        for i in 0..len {
            let y = phi0.point(i);
            field.sigma(y, &mut buf);
            sig.push(DMatrix::from_row_slice(n, d, &buf));
            let mut first = Vec::with_capacity(n);
            let mut second = Vec::with_capacity(n * n);
            let mut second_b = Vec::with_capacity(n * n);
            for m in 0..n {
                field.sigma_dy(y, &unit(n, m), &mut buf);
                first.push(DMatrix::from_row_slice(n, d, &buf));
                for mp in 0..n {
                    field.sigma_dyy(y, &unit(n, m), &unit(n, mp), &mut buf);
                    second.push(DMatrix::from_row_slice(n, d, &buf));
                    field.beta_dyy(0.0, y, &unit(n, m), &unit(n, mp), &mut bb);
                    second_b.push(DVector::from_column_slice(&bb));
                }
            }
            dsig.push(first);
            d2sig.push(second);
            d2beta.push(second_b);
        }
        Ok(Self { field, gamma, phi0, flow, y0: y0.to_vec(), sig, dsig, d2sig, d2beta })
    }

    pub fn field(&self) -> &dyn VectorField {
        self.field
    }

    pub fn gamma(&self) -> &SampledPath {
        &self.gamma
    }

    pub fn phi0(&self) -> &SampledPath {
        &self.phi0
    }

    pub fn flow(&self) -> &LinearFlow {
        &self.flow
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        self.gamma.grid()
    }

    pub fn state_dim(&self) -> usize {
        self.field.state_dim()
    }

    pub fn noise_dim(&self) -> usize {
        self.field.noise_dim()
    }

    pub(crate) fn check_driver(&self, k: &SampledPath, what: &str) -> Result<()> {
        self.gamma.check_same_grid(k, what)?;
        if k.dim() != self.noise_dim() {
            return Err(Error::InvalidArgument(format!(
                "{what} has dimension {}, expected {}",
                k.dim(),
                self.noise_dim()
            )));
        }
        Ok(())
    }

    /// `∇σ(φ⁰_i)⟨v⟩` as an `n×d` matrix.
    pub(crate) fn dsig_dir(&self, i: usize, v: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.state_dim(), self.noise_dim());
        for (m, &c) in v.iter().enumerate() {
            if c != 0.0 {
                out += &self.dsig[i][m] * c;
            }
        }
        out
    }

    /// `∇²σ(φ⁰_i)⟨u, v⟩`.
    pub(crate) fn d2sig_dir(&self, i: usize, u: &[f64], v: &[f64]) -> DMatrix<f64> {
        let n = self.state_dim();
        let mut out = DMatrix::zeros(n, self.noise_dim());
        for m in 0..n {
            for mp in 0..n {
                let c = u[m] * v[mp];
                if c != 0.0 {
                    out += &self.d2sig[i][m * n + mp] * c;
                }
            }
        }
        out
    }

    /// `∇²β(0, φ⁰_i)⟨u, v⟩`.
    pub(crate) fn d2beta_dir(&self, i: usize, u: &[f64], v: &[f64]) -> DVector<f64> {
        let n = self.state_dim();
        let mut out = DVector::zeros(n);
        for m in 0..n {
            for mp in 0..n {
                let c = u[m] * v[mp];
                if c != 0.0 {
                    out += &self.d2beta[i][m * n + mp] * c;
                }
            }
        }
        out
    }

    /// The shared linear recursion `c_{j+1} = J_j c_j + s_j`, `c_0 = 0`,
    /// behind every Taylor term.
    pub fn propagate(&self, sources: &[DVector<f64>]) -> SampledPath {
        let n = self.state_dim();
        let mut out = SampledPath::zeros(self.grid().clone(), n);
        let mut c = DVector::zeros(n);
        for (j, s) in sources.iter().enumerate() {
            c = self.flow.step(j) * c + s;
            out.point_mut(j + 1).copy_from_slice(c.as_slice());
        }
        out
    }

    /// `M_i Σ_{l<i} w_l` for per-step weights already multiplied by `M⁻¹`.
    pub(crate) fn accumulate(&self, weights: impl Iterator<Item = DVector<f64>>) -> SampledPath {
        let n = self.state_dim();
        let mut out = SampledPath::zeros(self.grid().clone(), n);
        let mut acc = DVector::zeros(n);
        for (l, w) in weights.enumerate() {
            acc += w;
            let v = self.flow.m(l + 1) * &acc;
            out.point_mut(l + 1).copy_from_slice(v.as_slice());
        }
        out
    }
}

pub(crate) fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
