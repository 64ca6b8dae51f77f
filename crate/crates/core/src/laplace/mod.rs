//! Laplace asymptotics of `E[G(Y^ε) exp(−F(Y^ε)/ε²)]`: the minimiser `γ` of
//! `F_Λ = F∘Ψ + ½‖·‖²` over a truncated Cameron–Martin basis, the expansion
//! constants `a`, `c`, `α₀`, importance-sampled Monte Carlo, polynomial fits
//! and the fractional exponent ladder.
//!
//! Monte Carlo drivers use the spectral model `X = Σ_a g_a U(e_a)` over the
//! same truncated basis that carries `γ`, so that `⟨γ, X⟩ = Σ_a γ_a g_a`
//! holds exactly and the first-order condition cancels the `1/ε` terms.

mod constants;
mod fit;
mod kappa;
mod mc;
mod minimize;

pub use constants::{expansion_constants, Det2Check, LaplaceReport};
pub use fit::{expansion_fit, FitRecord};
pub use kappa::{
    kappa_ladder, short_time_ensembles, short_time_transform, KappaEntry, KappaLadder, ShortTime, ShortTimeField,
};
pub use mc::{mc_laplace, McConfig, McRow};
pub use minimize::{minimize_f_lambda, MinimizeResult, OptConfig};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fbm::CmBasis;
use crate::functional::{dual_pair, Functional};
use crate::grid::SampledPath;
use crate::ode::{heun_path, SolverConfig, VectorField};
use crate::taylor::TaylorContext;

/// The data of one Laplace problem: coefficients, functionals `F` and `G`,
/// the truncated basis and the initial point.
#[derive(Clone, Copy)]
pub struct LaplaceProblem<'a> {
    pub field: &'a dyn VectorField,
    pub f: &'a dyn Functional,
    pub g: &'a dyn Functional,
    pub basis: &'a CmBasis,
    pub y0: &'a [f64],
}

impl<'a> LaplaceProblem<'a> {
    pub fn new(
        field: &'a dyn VectorField,
        f: &'a dyn Functional,
        g: &'a dyn Functional,
        basis: &'a CmBasis,
        y0: &'a [f64],
    ) -> Result<Self> {
        if basis.dim() != field.noise_dim() {
            return Err(Error::InvalidArgument(format!(
                "basis dimension {} does not match noise dimension {}",
                basis.dim(),
                field.noise_dim()
            )));
        }
        if y0.len() != field.state_dim() {
            return Err(Error::InvalidArgument(format!(
                "initial point has length {}, state dimension is {}",
                y0.len(),
                field.state_dim()
            )));
        }
        Ok(Self { field, f, g, basis, y0 })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// `F_Λ(Σ c_a U e_a) = F(Ψ(γ)) + ½|c|²`.
    pub fn f_lambda(&self, coeffs: &[f64]) -> Result<f64> {
        let gamma = self.basis.path(coeffs)?;
        let phi0 = heun_path(self.field, 0.0, &gamma, self.y0, true, SolverConfig::default())?;
        Ok(self.f.value(&phi0) + 0.5 * coeffs.iter().map(|c| c * c).sum::<f64>())
    }

    /// Value and gradient of `F_Λ`. The component along `e_a` is
    /// `c_a + ∇F(φ⁰)⟨χ(e_a)⟩`, with `χ` the derivative of the discrete solver,
    /// so it is the exact gradient of [`Self::f_lambda`].
    pub fn value_and_gradient(&self, coeffs: &[f64]) -> Result<(f64, Vec<f64>)> {
        use rayon::prelude::*;
        let gamma = self.basis.path(coeffs)?;
        let ctx = TaylorContext::new(self.field, gamma, self.y0)?;
        let value = self.f.value(ctx.phi0()) + 0.5 * coeffs.iter().map(|c| c * c).sum::<f64>();
        if self.f.is_zero() {
            return Ok((value, coeffs.to_vec()));
        }
        let dual = self.f.grad(ctx.phi0());
        let grad = (0..coeffs.len())
            .into_par_iter()
            .map(|a| Ok(coeffs[a] + dual_pair(&dual, &ctx.chi_direct(&self.basis.element(a))?)))
            .collect::<Result<Vec<f64>>>()?;
        Ok((value, grad))
    }

    /// One spectral driver `Σ_a g_a U(e_a)` and its Gaussian coordinates.
    pub fn spectral_driver<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, SampledPath) {
        let g: Vec<f64> = (0..self.basis.len()).map(|_| rng.sample(StandardNormal)).collect();
        let x = self.basis.path(&g).expect("coefficient count equals basis size");
        (g, x)
    }
}

#[cfg(test)]
mod tests;
