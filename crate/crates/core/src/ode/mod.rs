//! Controlled ODEs in the Young regime and their linearised flows.

mod field;
mod flow;
mod solve;

pub use field::{fd_first, fd_second, AffineField, TanhEntry, TanhField, VectorField};
pub use flow::{linear_flow, linear_flow_with, LinearFlow};
pub use solve::{heun_path, solve_young_ode, solve_young_ode_with, OdeSolution, SolverConfig};
