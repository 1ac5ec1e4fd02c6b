//! Reproducible path generation in log space and samplers for the law of a
//! path conditioned on its running maximum reaching a barrier.

mod engine;
mod params;
mod path;
mod rng;
mod sampler;

pub use engine::{with_thread_count, PathEngine, BLOCK_SIZE};
pub use params::{BarrierSpec, LogDynamics, ModelParams, TimeGrid};
pub(crate) use path::sup_distance_log;
pub use path::{
    bridge_crossing_probability, detect_crossing, sample_gbm_path, sample_gbm_path_with,
    sup_distance, Path,
};
pub use rng::{derive_seed, RngStream};
pub use sampler::{
    sample_conditioned_rejection, sample_conditioned_tilted, ConditionalEstimate, Conditioning,
    McEstimate, RejectionSample, SamplerChoice, SamplerKind, TiltedSample,
    AUTO_REJECTION_THRESHOLD, DEGENERATE_WEIGHT_SHARE, REJECTION_GUARD,
};
