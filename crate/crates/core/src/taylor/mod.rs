//! RDE solves driven by piecewise-linear representatives and the stochastic
//! Taylor terms of the solution around a Cameron–Martin shift.
//!
//! Conventions: `φ^ε` solves `dY = σ(Y)(ε dX + dγ) + β(ε, Y) dt` and
//! `φ^ε = φ⁰ + εφ¹ + ε²φ² + …`. `χ(k)` is the derivative of the Itô map at
//! `γ` in direction `k`, and `ψ(f,k)` is half its second derivative, so that
//! `φ¹ = χ(X) + θ¹` and `φ² = ψ(X,X) + θ²`.

mod context;
mod forms;
mod jets;
mod rde;
mod slope;

use nalgebra::DVector;

pub use context::TaylorContext;
pub use rde::{solve_rde, RdeOptions, RdeSolution};
pub use slope::{default_eps_list, taylor_remainder_slope, SlopeReport};

use crate::error::Result;
use crate::grid::SampledPath;
use crate::ode::{heun_path, SolverConfig, VectorField};

/// All Taylor terms for one driver. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorBundle {
    pub phi0: SampledPath,
    pub chi: SampledPath,
    pub psi: SampledPath,
    pub phi1: SampledPath,
    pub phi2: SampledPath,
    pub theta1: SampledPath,
    pub theta2: SampledPath,
    pub gamma: SampledPath,
    pub driver: SampledPath,
}

impl TaylorBundle {
    /// `Σ_{k ≤ order} ε^k φ^k`.
    pub fn expansion(&self, eps: f64, order: usize) -> SampledPath {
        let mut out = self.phi0.clone();
        if order >= 1 {
            out = out.axpy(eps, &self.phi1).expect("same grid");
        }
        if order >= 2 {
            out = out.axpy(eps * eps, &self.phi2).expect("same grid");
        }
        out
    }
}

/// `φ⁰`: the solution along `γ` alone, with drift `β(0, ·)`.
pub fn compute_phi0(field: &dyn VectorField, gamma: &SampledPath, y0: &[f64]) -> Result<SampledPath> {
    heun_path(field, 0.0, gamma, y0, true, SolverConfig::default())
}

/// `χ(k)` in flow form.
pub fn compute_chi(ctx: &TaylorContext, k: &SampledPath) -> Result<SampledPath> {
    ctx.chi(k)
}

/// `ψ(f,k)` in flow form.
pub fn compute_psi(ctx: &TaylorContext, f: &SampledPath, k: &SampledPath) -> Result<SampledPath> {
    ctx.psi(f, k)
}

pub fn compute_phi1(ctx: &TaylorContext, driver: &SampledPath) -> Result<SampledPath> {
    ctx.check_driver(driver, "driver")?;
    Ok(ctx.propagate(&ctx.first_sources(Some(driver), true)))
}

/// `θ¹`, the response to the ε-dependence of the drift; it does not see the driver.
pub fn compute_theta1(ctx: &TaylorContext) -> SampledPath {
    ctx.propagate(&ctx.first_sources(None, true))
}

pub fn compute_phi2(ctx: &TaylorContext, driver: &SampledPath) -> Result<SampledPath> {
    let phi1 = compute_phi1(ctx, driver)?;
    Ok(ctx.propagate(&ctx.second_sources(&phi1, Some(driver), true)))
}

pub fn compute_theta2(ctx: &TaylorContext, driver: &SampledPath) -> Result<SampledPath> {
    Ok(ctx.bundle(driver)?.theta2)
}

impl TaylorContext<'_> {
    /// `χ(k)` as the linearised scheme driven by `k` (no flow inversion).
    pub fn chi_direct(&self, k: &SampledPath) -> Result<SampledPath> {
        self.check_driver(k, "direction")?;
        Ok(self.propagate(&self.first_sources(Some(k), false)))
    }

    /// `ψ(f,k)` by polarising the second-order scheme derivative.
    pub fn psi_direct(&self, f: &SampledPath, k: &SampledPath) -> Result<SampledPath> {
        let quad = |h: &SampledPath| -> Result<SampledPath> {
            let c1 = self.chi_direct(h)?;
            Ok(self.propagate(&self.second_sources(&c1, Some(h), false)))
        };
        let both = quad(&f.add(k)?)?;
        Ok(both.sub(&quad(f)?)?.sub(&quad(k)?)?.scale(0.5))
    }

    pub fn bundle(&self, driver: &SampledPath) -> Result<TaylorBundle> {
        self.check_driver(driver, "driver")?;
        let chi = self.propagate(&self.first_sources(Some(driver), false));
        let theta1 = self.propagate(&self.first_sources(None, true));
        let phi1 = self.propagate(&self.first_sources(Some(driver), true));
        let s_phi = self.second_sources(&phi1, Some(driver), true);
        let s_psi = self.second_sources(&chi, Some(driver), false);
        let s_theta: Vec<DVector<f64>> = s_phi.iter().zip(&s_psi).map(|(a, b)| a - b).collect();
        Ok(TaylorBundle {
            phi0: self.phi0.clone(),
            psi: self.propagate(&s_psi),
            phi2: self.propagate(&s_phi),
            theta2: self.propagate(&s_theta),
            chi,
            phi1,
            theta1,
            gamma: self.gamma.clone(),
            driver: driver.clone(),
        })
    }
}
