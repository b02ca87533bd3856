//! Layered diffractive forward model with optical skip channels.

mod checkpoint;
mod forward;
mod skip;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, OptimizerMoments, CHECKPOINT_MAGIC};
pub use forward::{argmax, forward, predict, ForwardPass, Network, NetworkConfig};
pub use skip::{build_setup, SkipChannel, SkipSetup};
