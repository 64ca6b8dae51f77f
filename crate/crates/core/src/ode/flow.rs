use std::sync::Arc;

use nalgebra::DMatrix;

use super::solve::Heun;
use super::VectorField;
use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};

/// Linearisation of one Heun step at `y`:
/// `J = I + ½(A(y) + A(ỹ)(I + A(y)))` with `A(y)v = ∇σ(y)⟨v⟩dz + ∇β(0,y)⟨v⟩dt`.
pub(crate) fn step_jacobian(
    field: &dyn VectorField,
    heun: &mut Heun,
    y: &[f64],
    dz: &[f64],
    dt: f64,
    drift: bool,
) -> DMatrix<f64> {
    let (n, d) = (field.state_dim(), field.noise_dim());
    let mut ytil = vec![0.0; n];
    heun.predictor(field, 0.0, y, dz, dt, drift, &mut ytil);
    let mut dsig = vec![0.0; n * d];
    let mut db = vec![0.0; n];
    let mut apply = |at: &[f64], v: &[f64], out: &mut [f64]| {
        field.sigma_dy(at, v, &mut dsig);
        for i in 0..n {
            out[i] = dsig[i * d..(i + 1) * d].iter().zip(dz).map(|(s, z)| s * z).sum();
        }
        if drift {
            field.beta_dy(0.0, at, v, &mut db);
            for i in 0..n {
                out[i] += db[i] * dt;
            }
        }
    };
    let mut jac = DMatrix::zeros(n, n);
    let (mut e, mut a0, mut w, mut a1) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for c in 0..n {
        e.fill(0.0);
        e[c] = 1.0;
        apply(y, &e, &mut a0);
        for i in 0..n {
            w[i] = e[i] + a0[i];
        }
        apply(&ytil, &w, &mut a1);
        for i in 0..n {
            jac[(i, c)] = e[i] + 0.5 * (a0[i] + a1[i]);
        }
    }
    jac
}

/// Discrete flow `M_{j+1} = J_j M_j` of the linearised scheme along `(γ, φ⁰)`
/// and its inverse built from exact step inverses.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    grid: Arc<TimeGrid>,
    jac: Vec<DMatrix<f64>>,
    m: Vec<DMatrix<f64>>,
    minv: Vec<DMatrix<f64>>,
}

impl LinearFlow {
    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn state_dim(&self) -> usize {
        self.m[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn m(&self, j: usize) -> &DMatrix<f64> {
        &self.m[j]
    }

    pub fn minv(&self, j: usize) -> &DMatrix<f64> {
        &self.minv[j]
    }

    /// Step Jacobian from grid point `j` to `j + 1`.
    pub fn step(&self, j: usize) -> &DMatrix<f64> {
        &self.jac[j]
    }

    /// `M_{t←u}` for grid indices `u ≤ t`.
    pub fn transition(&self, u: usize, t: usize) -> DMatrix<f64> {
        let n = self.state_dim();
        let mut out = DMatrix::identity(n, n);
        for j in u..t {
            out = &self.jac[j] * out;
        }
        out
    }

    fn as_path(&self, mats: &[DMatrix<f64>]) -> SampledPath {
        let n = self.state_dim();
        let values = mats.iter().flat_map(|m| m.transpose().as_slice().to_vec()).collect();
        SampledPath::new(self.grid.clone(), n * n, values).expect("consistent shape")
    }

    /// `M` as a path of row-major `n×n` matrices.
    pub fn m_path(&self) -> SampledPath {
        self.as_path(&self.m)
    }

    pub fn minv_path(&self) -> SampledPath {
        self.as_path(&self.minv)
    }

    /// Largest entry of `M_j M_j⁻¹ − I` over the grid.
    pub fn inverse_defect(&self) -> f64 {
        let n = self.state_dim();
        let id = DMatrix::<f64>::identity(n, n);
        self.m.iter().zip(&self.minv).map(|(a, b)| (a * b - &id).amax()).fold(0.0, f64::max)
    }
}

/// Flow of `dM = dΩ·M` with `dΩ = ∇σ(φ⁰)⟨·, dγ⟩ + ∇β(0, φ⁰)⟨·⟩dt`, discretised
/// as the exact derivative of the Heun scheme that produced `phi0`.
pub fn linear_flow(gamma: &SampledPath, phi0: &SampledPath, field: &dyn VectorField) -> Result<LinearFlow> {
    linear_flow_with(gamma, phi0, field, true)
}

pub fn linear_flow_with(gamma: &SampledPath, phi0: &SampledPath, field: &dyn VectorField, drift: bool) -> Result<LinearFlow> {
    gamma.check_same_grid(phi0, "flow driver and base solution")?;
    let (n, d) = (field.state_dim(), field.noise_dim());
    if gamma.dim() != d || phi0.dim() != n {
        return Err(Error::InvalidArgument("flow inputs do not match field dimensions".into()));
    }
    let grid = gamma.grid().clone();
    let steps = grid.steps();
    let mut heun = Heun::new(n, d);
    let mut jac = Vec::with_capacity(steps);
    let mut m = vec![DMatrix::identity(n, n)];
    let mut minv = vec![DMatrix::identity(n, n)];
    for j in 0..steps {
        let dz = gamma.increment(j, j + 1);
        let jj = step_jacobian(field, &mut heun, phi0.point(j), &dz, grid.dt(j), drift);
        let inv = jj
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical(format!("singular step Jacobian at t = {}", grid.points()[j])))?;
        m.push(&jj * &m[j]);
        minv.push(&minv[j] * inv);
        jac.push(jj);
    }
    Ok(LinearFlow { grid, jac, m, minv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{heun_path, AffineField, SolverConfig, TanhField};

    fn smooth_gamma(g: Arc<TimeGrid>) -> SampledPath {
        SampledPath::from_fn(g, 2, |t, o| {
            o[0] = (3.0 * t).sin() * 0.8;
            o[1] = t * t - 0.5 * t;
        })
    }

    #[test]
    fn zero_generator_gives_identity() {
        let g = Arc::new(TimeGrid::uniform(16).unwrap());
        let f = TanhField::standard();
        let zero = SampledPath::zeros(g.clone(), 2);
        let flow = linear_flow_with(&zero, &zero, &f, false).unwrap();
        for j in 0..flow.len() {
            assert!((flow.m(j) - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
        }
    }

    fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
        // Scaling and squaring with a long Taylor tail.
        let s = 10;
        let b = a / 2f64.powi(s);
        let mut term = DMatrix::identity(a.nrows(), a.ncols());
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &b / k as f64;
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn constant_generator_matches_exponential() {
        let g = Arc::new(TimeGrid::uniform(2048).unwrap());
        let a = vec![0.3, -0.7, 0.5, 0.1];
        let f = AffineField::zero(2, 2).with_drift(a.clone(), vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]);
        let zero = SampledPath::zeros(g.clone(), 2);
        let flow = linear_flow(&zero, &zero, &f).unwrap();
        let want = expm(&DMatrix::from_row_slice(2, 2, &a));
        assert!((flow.m(g.steps()) - want).amax() < 1e-6);
    }

    #[test]
    fn inverse_and_flow_property() {
        let g = Arc::new(TimeGrid::uniform(256).unwrap());
        let f = TanhField::standard();
        let gamma = smooth_gamma(g.clone());
        let phi0 = heun_path(&f, 0.0, &gamma, &[0.1, -0.2], true, SolverConfig::default()).unwrap();
        let flow = linear_flow(&gamma, &phi0, &f).unwrap();
        assert!(flow.inverse_defect() < 1e-8);
        for (u, t) in [(0, 100), (64, 256), (200, 201)] {
            let lhs = flow.m(t);
            let rhs = flow.transition(u, t) * flow.m(u);
            assert!((lhs - rhs).amax() < 1e-7);
        }
        assert_eq!(flow.m_path().dim(), 4);
    }

    #[test]
    fn jacobian_matches_solution_sensitivity() {
        let g = Arc::new(TimeGrid::uniform(128).unwrap());
        let f = TanhField::standard();
        let gamma = smooth_gamma(g.clone());
        let y0 = [0.1, -0.2];
        let base = heun_path(&f, 0.0, &gamma, &y0, true, SolverConfig::default()).unwrap();
        let flow = linear_flow(&gamma, &base, &f).unwrap();
        let h = 1e-6;
        for c in 0..2 {
            let mut y = y0;
            y[c] += h;
            let bumped = heun_path(&f, 0.0, &gamma, &y, true, SolverConfig::default()).unwrap();
            for i in 0..2 {
                let fd = (bumped.last()[i] - base.last()[i]) / h;
                assert!((fd - flow.m(128)[(i, c)]).abs() < 1e-5);
            }
        }
    }
}
