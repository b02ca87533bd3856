//! Scalar-diffraction primitives.
//!
//! Fields are sampled on an `n x n` grid, row-major, with the row index
//! running along `y` and the column index along `x`. Free-space propagation
//! uses the closed-form Fresnel transfer function applied in the frequency
//! domain, so propagation by any distance is unitary on the periodic grid.

mod detector;
mod fft;
mod grid;
mod propagation;

pub use detector::{detect, DetectorLayout, Region};
pub use fft::Fft2;
pub use grid::{ComplexField, GridSpec, Intensity, PhaseMask};
pub use propagation::{diff_msg, fresnel_transfer, modulate, propagate, Padding, Propagator, Transfer};

/// Per-pixel `|f|^2`.
pub fn intensity(field: &ComplexField) -> Intensity {
    Intensity {
        n: field.grid().n,
        values: field.values().iter().map(|v| v.norm_sqr()).collect(),
    }
}
