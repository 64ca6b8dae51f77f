//! Fractional Brownian motion: exact sampling, the Volterra kernel, the
//! Cameron–Martin map `U` and the cosine bases used on `ℋ^H`.

mod cm;
mod kernel;
mod params;
mod sample;

pub use cm::{cm_map, cosine_mode, onb_interp, CameronMartinVector, CmBasis};
pub use kernel::{hyp2f1_series, volterra_kernel, VolterraKernel, VolterraOperator};
pub use params::{window_violations, HurstParams};
pub use sample::{fbm_cov, sample_fbm, sample_rng, FbmSampler};
