//! Wave functions on a uniform grid, the oscillator eigenbasis and spectral
//! propagator, and the symmetrized two-boson amplitude.

mod modes;
mod oscillator;
mod two_boson;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid1D;

pub use modes::OscillatorModes;
pub use oscillator::{displaced_ground_state, ho_eigenstate, propagate_ho, HOEigenbasis};
pub use two_boson::{build_two_slit_wavefunction, two_slit_bracket};

/// Mass, angular frequency and ħ of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    mass: f64,
    omega: f64,
    hbar: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("omega", omega), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { mass, omega, hbar })
    }

    /// `ħ = m = ω = 1`.
    pub fn natural() -> Self {
        Self { mass: 1.0, omega: 1.0, hbar: 1.0 }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Oscillator length `sqrt(ħ / mω)`.
    pub fn length(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.hbar * self.omega * (n as f64 + 0.5)
    }

    /// Classical turning point of level `n`.
    pub fn turning_point(&self, n: usize) -> f64 {
        self.length() * (2.0 * n as f64 + 1.0).sqrt()
    }

    /// `ħ/m`, the prefactor of the guidance law.
    pub fn hbar_over_mass(&self) -> f64 {
        self.hbar / self.mass
    }
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self::natural()
    }
}

/// Complex amplitudes `ψ(x_i)` on a grid, stamped with the time they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction1D {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl WaveFunction1D {
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.len()
            )));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        if !time.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite time {time}")));
        }
        Ok(Self { grid, amplitudes, time })
    }

    pub fn from_fn(grid: Grid1D, time: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amplitudes = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::new(grid, amplitudes, time)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// `Σ |ψ_i|² · spacing`.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sq() - 1.0).abs() <= tol
    }

    pub fn require_normalized(&self, tol: f64) -> Result<()> {
        if self.is_normalized(tol) {
            Ok(())
        } else {
            Err(Error::Unnormalized { norm: self.norm_sq() })
        }
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sq();
        if !(norm > 0.0) {
            return Err(Error::Unnormalized { norm });
        }
        let s = 1.0 / norm.sqrt();
        self.amplitudes.iter_mut().for_each(|z| *z *= s);
        Ok(self)
    }

    /// Discrete inner product `⟨self|other⟩ = Σ conj(self_i)·other_i·spacing`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: Complex64 =
            self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.spacing())
    }

    /// `|ψ_i|²` at every grid point.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `Σ f(x_i)|ψ_i|²·spacing`.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.grid.spacing();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| f(self.grid.point(i)) * z.norm_sqr())
            .sum::<f64>()
            * h
    }

    pub fn max_abs(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Discrete position-ket components `⟨x_i|ψ⟩ = ψ(x_i)·sqrt(spacing)`.
    pub fn kets(&self) -> Vec<Complex64> {
        let s = self.grid.spacing().sqrt();
        self.amplitudes.iter().map(|z| z * s).collect()
    }

    pub fn from_kets(grid: Grid1D, kets: &[Complex64], time: f64) -> Result<Self> {
        let s = 1.0 / grid.spacing().sqrt();
        Self::new(grid, kets.iter().map(|z| z * s).collect(), time)
    }

    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|z| z.im == 0.0)
    }
}
