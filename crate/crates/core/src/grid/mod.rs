//! Time grids, sampled paths, variation norms, dyadic approximation and
//! Young integration.

mod path;
mod variation;
mod young;

pub use path::{fmt17, SampledPath, TimeGrid};
pub use variation::{
    besov_norm, cosine_extrema, cosine_pvar, holder_norm, pvar_exact, pvar_jogfree, pvar_scalar, turning_points,
    VariationResult,
};
pub(crate) use variation::variation_dp;
pub use young::{dyadic_approx, young_integral, YoungIntegral};
