use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Physical sampling of an optical plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Grid side in pixels.
    pub n: usize,
    /// Pixel pitch in meters.
    pub pitch: f64,
    /// Wavelength in meters.
    pub wavelength: f64,
    /// Distance between consecutive planes in meters.
    pub layer_distance: f64,
}

impl GridSpec {
    pub fn new(n: usize, pitch: f64, wavelength: f64, layer_distance: f64) -> Result<Self> {
        let grid = GridSpec {
            n,
            pitch,
            wavelength,
            layer_distance,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// 200 x 200 pixels of 36 um, 532 nm light and 27.94 cm between planes.
    pub fn default_system() -> Self {
        GridSpec {
            n: 200,
            pitch: 36e-6,
            wavelength: 532e-9,
            layer_distance: 0.2794,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("grid size must be >= 2, got {}", self.n)));
        }
        for (name, v) in [
            ("pitch", self.pitch),
            ("wavelength", self.wavelength),
            ("layer_distance", self.layer_distance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// Spacing of the FFT frequency grid, `1 / (n * pitch)`.
    pub fn frequency_spacing(&self) -> f64 {
        1.0 / (self.n as f64 * self.pitch)
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub(crate) fn same_sampling(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// Complex amplitudes on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: GridSpec) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field has {} samples, grid expects {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("field contains non-finite samples"));
        }
        Ok(ComplexField { grid, values })
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ComplexField { grid, values }
    }

    /// Random complex field with independent uniform real and imaginary
    /// parts in `[-1, 1)`, scaled to unit energy.
    pub fn random_unit<R: Rng + ?Sized>(grid: GridSpec, rng: &mut R) -> Self {
        let values: Vec<Complex64> = (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut field = ComplexField { grid, values };
        let e = field.energy();
        field.scale(1.0 / e.sqrt());
        field
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.grid.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.values[row * self.grid.n + col] = v;
    }

    /// Total energy `sum |f|^2`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &ComplexField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Trainable phase profile of one diffractive layer, applied as `e^{i theta}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    grid: GridSpec,
    theta: Vec<f64>,
}

impl PhaseMask {
    pub fn zeros(grid: GridSpec) -> Self {
        PhaseMask {
            grid,
            theta: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: GridSpec, theta: f64) -> Self {
        PhaseMask {
            grid,
            theta: vec![theta; grid.len()],
        }
    }

    pub fn from_theta(grid: GridSpec, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != grid.len() {
            return Err(Error::invalid(format!(
                "mask has {} values, grid expects {}",
                theta.len(),
                grid.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("mask contains non-finite phase"));
        }
        Ok(PhaseMask { grid, theta })
    }

    /// I.i.d. uniform phases on `[0, 2pi)`.
    pub fn random<R: Rng + ?Sized>(grid: GridSpec, rng: &mut R) -> Self {
        PhaseMask {
            grid,
            theta: (0..grid.len()).map(|_| rng.random_range(0.0..TAU)).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    /// Pointwise `e^{i theta}`.
    pub fn phasors(&self) -> Vec<Complex64> {
        self.theta.iter().map(|&t| Complex64::cis(t)).collect()
    }
}

/// Real `n x n` map of detected intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct Intensity {
    pub n: usize,
    pub values: Vec<f64>,
}

impl Intensity {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}
