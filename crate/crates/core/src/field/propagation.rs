use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::Fft2;
use super::grid::{ComplexField, GridSpec, PhaseMask};
use crate::{Error, Result};

/// Whether propagation runs on the bare periodic grid or on a grid
/// zero-padded to twice the side, which suppresses wrap-around at the cost
/// of discarding light that leaves the aperture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    #[default]
    None,
    Double,
}

impl Padding {
    fn working_size(self, n: usize) -> usize {
        match self {
            Padding::None => n,
            Padding::Double => 2 * n,
        }
    }
}

/// Frequency index of FFT bin `i` for an `m`-point transform:
/// `0, 1, .., m/2 - 1, -m/2, .., -1` for even `m`.
fn frequency_index(i: usize, m: usize) -> f64 {
    if i < m.div_ceil(2) {
        i as f64
    } else {
        i as f64 - m as f64
    }
}

/// `e^{ikz} exp(-i pi lambda z (fx^2 + fy^2))` on an `m x m` FFT-ordered grid.
fn transfer_samples(m: usize, pitch: f64, wavelength: f64, distance: f64) -> Vec<Complex64> {
    let df = 1.0 / (m as f64 * pitch);
    // k z mod 2pi, reduced before the trig call to keep the phase accurate
    // for distances of many wavelengths.
    let global = TAU * (distance / wavelength).fract();
    let chirp = PI * wavelength * distance;
    let f2: Vec<f64> = (0..m)
        .map(|i| {
            let f = frequency_index(i, m) * df;
            f * f
        })
        .collect();
    let mut out = Vec::with_capacity(m * m);
    for fy2 in &f2 {
        for fx2 in &f2 {
            out.push(Complex64::cis(global - chirp * (fy2 + fx2)));
        }
    }
    out
}

fn check_distance(distance: f64) -> Result<()> {
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(Error::invalid(format!(
            "propagation distance must be finite and >= 0, got {distance}"
        )));
    }
    Ok(())
}

/// Samples of the Fresnel transfer function `H(fx, fy; distance)` on the
/// grid's FFT frequency lattice, in FFT order.
pub fn fresnel_transfer(grid: &GridSpec, distance: f64) -> Result<ComplexField> {
    grid.validate()?;
    check_distance(distance)?;
    Ok(ComplexField::from_raw(
        *grid,
        transfer_samples(grid.n, grid.pitch, grid.wavelength, distance),
    ))
}

/// Precomputed transfer function for one distance on a propagator's
/// working grid.
#[derive(Debug, Clone)]
pub struct Transfer {
    distance: f64,
    values: Vec<Complex64>,
}

impl Transfer {
    pub fn distance(&self) -> f64 {
        self.distance
    }
}

/// Spectral free-space propagator for one grid.
///
/// Holds FFT plans and is cheap to share across threads; all methods take
/// `&self`.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: GridSpec,
    padding: Padding,
    fft: Fft2,
}

impl Propagator {
    pub fn new(grid: GridSpec, padding: Padding) -> Self {
        Propagator {
            grid,
            padding,
            fft: Fft2::new(padding.working_size(grid.n)),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn padding(&self) -> Padding {
        self.padding
    }

    pub fn transfer(&self, distance: f64) -> Result<Transfer> {
        check_distance(distance)?;
        Ok(Transfer {
            distance,
            values: transfer_samples(self.fft.n(), self.grid.pitch, self.grid.wavelength, distance),
        })
    }

    pub fn propagate(&self, field: &ComplexField, distance: f64) -> Result<ComplexField> {
        self.check_grid(field)?;
        let t = self.transfer(distance)?;
        Ok(self.apply(field, &t))
    }

    /// `iFFT(FFT(f) * H)`.
    pub fn apply(&self, field: &ComplexField, transfer: &Transfer) -> ComplexField {
        self.filter(field, transfer, false)
    }

    /// Hermitian adjoint of [`Propagator::apply`]: the same pipeline with the
    /// conjugate transfer function.
    pub fn apply_adjoint(&self, field: &ComplexField, transfer: &Transfer) -> ComplexField {
        self.filter(field, transfer, true)
    }

    fn filter(&self, field: &ComplexField, transfer: &Transfer, conjugate: bool) -> ComplexField {
        let n = self.grid.n;
        let mut work = self.embed(field.values());
        self.fft.forward(&mut work);
        if conjugate {
            for (w, h) in work.iter_mut().zip(&transfer.values) {
                *w *= h.conj();
            }
        } else {
            for (w, h) in work.iter_mut().zip(&transfer.values) {
                *w *= h;
            }
        }
        self.fft.inverse(&mut work);
        let values = self.crop(work);
        debug_assert_eq!(values.len(), n * n);
        ComplexField::from_raw(self.grid, values)
    }

    fn offset(&self) -> usize {
        (self.fft.n() - self.grid.n) / 2
    }

    fn embed(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n;
        let m = self.fft.n();
        if m == n {
            return values.to_vec();
        }
        let off = self.offset();
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        for r in 0..n {
            let dst = (r + off) * m + off;
            out[dst..dst + n].copy_from_slice(&values[r * n..(r + 1) * n]);
        }
        out
    }

    fn crop(&self, work: Vec<Complex64>) -> Vec<Complex64> {
        let n = self.grid.n;
        let m = self.fft.n();
        if m == n {
            return work;
        }
        let off = self.offset();
        let mut out = Vec::with_capacity(n * n);
        for r in 0..n {
            let src = (r + off) * m + off;
            out.extend_from_slice(&work[src..src + n]);
        }
        out
    }

    fn check_grid(&self, field: &ComplexField) -> Result<()> {
        if !field.grid().same_sampling(&self.grid) {
            return Err(Error::invalid("field grid does not match propagator grid"));
        }
        Ok(())
    }
}

/// Free-space propagation of `field` over `distance` on its own periodic grid.
pub fn propagate(field: &ComplexField, distance: f64) -> Result<ComplexField> {
    Propagator::new(*field.grid(), Padding::None).propagate(field, distance)
}

/// Pointwise multiplication by `e^{i theta}`.
pub fn modulate(field: &ComplexField, mask: &PhaseMask) -> Result<ComplexField> {
    if !field.grid().same_sampling(mask.grid()) {
        return Err(Error::invalid("mask grid does not match field grid"));
    }
    let values = field
        .values()
        .iter()
        .zip(mask.theta())
        .map(|(f, &t)| f * Complex64::cis(t))
        .collect();
    Ok(ComplexField::from_raw(*field.grid(), values))
}

/// One diffractive stage: propagate by `distance`, then apply the mask.
pub fn diff_msg(field: &ComplexField, mask: &PhaseMask, distance: f64) -> Result<ComplexField> {
    if !field.grid().same_sampling(mask.grid()) {
        return Err(Error::invalid("mask grid does not match field grid"));
    }
    modulate(&propagate(field, distance)?, mask)
}
