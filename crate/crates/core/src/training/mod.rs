//! Loss, reverse-mode gradients through the optical chain, Adam and the
//! training loop.

mod adam;
mod backward;
mod fit;
mod gradcheck;
mod loss;

pub use adam::{step, Adam, TrainState};
pub use backward::{backward, batch_gradient, Gradients};
pub use fit::{
    evaluate, fit, init_masks, metrics_csv, write_metrics_csv, EpochMetrics, FitOutcome, HyperParams, SampleSource,
    METRICS_HEADER,
};
pub use gradcheck::{
    error_floor, grad_check, relative_error, GradCheckConfig, GradCheckEntry, GradCheckReport, REL_ERR_FLOOR,
};
pub use loss::{loss, loss_with_gradient, softmax, LossReport, Readout};
