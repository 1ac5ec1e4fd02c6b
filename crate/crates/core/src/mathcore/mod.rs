//! Deterministic numerical kernels.
//!
//! Everything here is a pure function of its inputs.

mod normal;
mod passage;
mod quadrature;
mod stats;

pub(crate) use normal::{cdf, sf};
pub use normal::{
    exp_abs_normal_moment, norm_cdf, norm_pdf, norm_sf, norm_tail_mean_excess, NormalArg,
    SQRT_2_OVER_PI,
};
pub(crate) use passage::inverse_gaussian_density;
pub use passage::{first_passage_density, passage_integration_floor};
pub use quadrature::{integrate, Integrator, QuadratureResult, EVALUATION_BUDGET};
pub use stats::{StreamingStats, WeightedStats};
