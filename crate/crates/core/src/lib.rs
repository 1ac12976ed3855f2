//! Foundation crate for the rlkit reinforcement-learning toolkit.
//!
//! Everything swappable in an rlkit agent (encoder, distribution, storage,
//! reward module, augmentation) is programmed against the contracts defined
//! here: observation/action spaces, transitions, deterministic rng streams,
//! the flat-array MLP engine, and the primitive registry used to validate a
//! composition before any training starts.

pub mod array;
pub mod error;
pub mod nn;
pub mod registry;
pub mod rng;
pub mod space;
pub mod transition;

pub use array::DenseArray;
pub use error::{CoreError, Result};
pub use nn::{
    grad_check, AdamHyper, AdamState, Activation, ForwardCache, InitScheme, LossTag, ParamSet,
};
pub use registry::{ConfigKind, ConfigParam, ConfigValue, PrimitiveKind, PrimitiveSpec, Registry};
pub use rng::{Pcg64, RngStreams};
pub use space::{sample_space, validate, SpaceSpec, Value};
pub use transition::{Action, Transition};

/// Shared trait for intrinsic-reward modules so agents can mix and match them.
///
/// `compute` returns one nonnegative bonus per row of `next_obs` and may
/// update internal archives; `update` performs one learning step (a no-op for
/// non-parametric modules) and returns the pre-step loss.
pub trait RewardModule {
    fn compute(&mut self, next_obs: &DenseArray) -> Result<Vec<f32>>;
    fn update(&mut self, obs: &DenseArray) -> Result<f32>;
}
