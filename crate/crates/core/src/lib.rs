//! Numerics for fractional Brownian rough paths and Laplace-type asymptotics
//! of rough differential equations.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: time grids, sampled paths, variation norms, Young integrals.
//! * [`rough`]: level-2/3 rough paths, Chen's identity, shift, pairing, scaling.
//! * [`fbm`]: fBm sampling, the Volterra kernel and the Cameron–Martin map.
//! * [`ode`]: vector fields, the Heun solver and linear flows.
//! * [`taylor`]: RDE solves and the stochastic Taylor terms.
//! * [`hessian`]: second-order forms, truncated Hessians and `det₂`.
//! * [`laplace`]: minimisation, expansion constants, Monte Carlo and fits.

pub mod error;
pub mod grid;
pub mod hessian;
pub mod laplace;
pub mod fbm;
pub mod functional;
pub mod ode;
pub mod rough;
pub mod stats;
pub mod taylor;

pub use error::{Error, Result};
