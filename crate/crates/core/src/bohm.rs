//! Pilot-wave dynamics of a single particle in one dimension: guidance
//! velocities, trajectories, ensembles drawn from `|ψ|²`, and the ensemble
//! checks built on them.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::ode::{self, OdeOptions};
use crate::sampling::{ks_statistic, GridCdf};
use crate::wavefunction::{propagate_ho, HOEigenbasis, OscillatorParams, WaveFunction1D};

/// Velocities are refused where `|ψ(x)| <= NODE_FLOOR · (amplitude scale)`.
pub const NODE_FLOOR: f64 = 1e-10;

/// Default per-step tolerance for trajectory integration.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Anything that can report `ψ(x_i, t)` on a window of grid points.
pub trait WaveSource: Sync {
    fn grid(&self) -> &Grid1D;

    /// Writes `ψ(x_{start+k}, t)` into `out[k]`.
    fn fill(&self, t: f64, start: usize, out: &mut [Complex64]);

    /// Reference magnitude for the node floor.
    fn amplitude_scale(&self) -> f64;
}

/// A fixed snapshot; the time argument is ignored.
impl WaveSource for WaveFunction1D {
    fn grid(&self) -> &Grid1D {
        WaveFunction1D::grid(self)
    }

    fn fill(&self, _t: f64, start: usize, out: &mut [Complex64]) {
        out.copy_from_slice(&self.amplitudes()[start..start + out.len()]);
    }

    fn amplitude_scale(&self) -> f64 {
        self.max_abs()
    }
}

/// `ψ(t)` evaluated on demand from its oscillator expansion.
#[derive(Debug, Clone)]
pub struct SpectralSource<'a> {
    basis: &'a HOEigenbasis,
    coeffs: Vec<Complex64>,
    origin: f64,
    scale: f64,
}

impl<'a> SpectralSource<'a> {
    pub fn new(psi: &WaveFunction1D, basis: &'a HOEigenbasis) -> Result<Self> {
        let coeffs = basis.adequate_coefficients(psi)?;
        Ok(Self { basis, coeffs, origin: psi.time(), scale: psi.max_abs() })
    }

    pub fn at(&self, t: f64) -> WaveFunction1D {
        let w = self.weighted(t);
        WaveFunction1D::new(*self.basis.grid(), self.basis.synthesize(&w), t)
            .expect("finite synthesis")
    }

    fn weighted(&self, t: f64) -> Vec<Complex64> {
        self.coeffs.iter().zip(self.basis.phases(t - self.origin)).map(|(c, p)| c * p).collect()
    }
}

impl WaveSource for SpectralSource<'_> {
    fn grid(&self) -> &Grid1D {
        self.basis.grid()
    }

    fn fill(&self, t: f64, start: usize, out: &mut [Complex64]) {
        let w = self.weighted(t);
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.basis.value_at(&w, start + k);
        }
    }

    fn amplitude_scale(&self) -> f64 {
        self.scale
    }
}

// Stencil reach: cubic interpolation uses x_{j-1}..x_{j+2}, and each of those
// needs a five-point derivative.
const BELOW: usize = 3;
const ABOVE: usize = 4;

/// `(ħ/m)·Im(ψ'/ψ)` at `x` and time `t`, with ψ' from fourth-order centred
/// differences and both ψ and ψ' carried off-grid by cubic interpolation.
pub fn velocity_at<S: WaveSource + ?Sized>(
    source: &S,
    t: f64,
    x: f64,
    hbar_over_mass: f64,
) -> Result<f64> {
    let grid = source.grid();
    let n = grid.len();
    let h = grid.spacing();
    let out_of_domain = || {
        let (lo, hi) = if n > BELOW + ABOVE + 1 {
            (grid.point(BELOW + 1), grid.point(n - 1 - ABOVE))
        } else {
            (f64::NAN, f64::NAN)
        };
        Error::OutOfDomain { x, min: lo, max: hi }
    };
    let j = grid.cell(x).ok_or_else(out_of_domain)?;
    if j < BELOW || j + ABOVE >= n {
        return Err(out_of_domain());
    }

    let mut v = [Complex64::new(0.0, 0.0); BELOW + ABOVE + 1];
    source.fill(t, j - BELOW, &mut v);
    // local index q <-> grid index j - 3 + q; interpolation nodes are q = 2..=5
    let deriv = |q: usize| (v[q - 2] - v[q - 1] * 8.0 + v[q + 1] * 8.0 - v[q + 2]) / (12.0 * h);

    let s = (x - grid.point(j)) / h;
    let w = [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ];
    let psi: Complex64 = (0..4).map(|k| v[k + 2] * w[k]).sum();
    let dpsi: Complex64 = (0..4).map(|k| deriv(k + 2) * w[k]).sum();

    let floor = NODE_FLOOR * source.amplitude_scale();
    if !(psi.norm() > floor) {
        return Err(Error::NearNode { at: format!("x = {x}, t = {t}"), amplitude: psi.norm(), floor });
    }
    Ok(hbar_over_mass * (dpsi / psi).im)
}

/// Guidance velocity of a particle at `x` in the state `psi`.
pub fn guidance_velocity(psi: &WaveFunction1D, x: f64, params: &OscillatorParams) -> Result<f64> {
    velocity_at(psi, psi.time(), x, params.hbar_over_mass())
}

/// Positions of one particle at a strictly increasing list of times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    positions: Vec<f64>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        if times.len() != positions.len() || times.is_empty() {
            return Err(Error::InvalidArgument("times and positions must match and be non-empty".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("trajectory times must be strictly increasing".into()));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite trajectory position".into()));
        }
        Ok(Self { times, positions })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn last(&self) -> f64 {
        self.positions[self.positions.len() - 1]
    }

    pub fn max_displacement(&self) -> f64 {
        let x0 = self.positions[0];
        self.positions.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max)
    }
}

/// Integrates `dx/dt = v(ψ(t), x)` from `times[0]`, reporting `x` at every time.
pub fn integrate_trajectory<S: WaveSource + ?Sized>(
    x0: f64,
    source: &S,
    times: &[f64],
    params: &OscillatorParams,
    tol: f64,
) -> Result<Trajectory> {
    let hm = params.hbar_over_mass();
    velocity_at(source, times.first().copied().unwrap_or(0.0), x0, hm)?;
    let states = ode::integrate(
        |t, y: &[f64; 1]| Ok([velocity_at(source, t, y[0], hm)?]),
        [x0],
        times,
        &OdeOptions::with_tol(tol),
        |_, _| Ok(()),
    )?;
    Trajectory::new(times.to_vec(), states.into_iter().map(|s| s[0]).collect())
}

/// Positions drawn from `|ψ|²` under a fixed seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub seed: u64,
    pub initial_positions: Vec<f64>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.initial_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial_positions.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.initial_positions.iter().sum::<f64>() / self.len() as f64
    }
}

/// Draws `n` positions by inverting the piecewise-linear cumulative of `|ψ|²`.
pub fn sample_ensemble(psi: &WaveFunction1D, n: usize, seed: u64) -> Result<Ensemble> {
    psi.require_normalized(1e-8)?;
    if n == 0 {
        return Err(Error::InvalidArgument("ensemble size must be at least 1".into()));
    }
    let cdf = GridCdf::from_density(psi.grid(), &psi.density())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Ensemble { seed, initial_positions: cdf.sample(&mut rng, n) })
}

/// Integrates every member over the same output times, in parallel.
pub fn transport_ensemble<S: WaveSource + ?Sized>(
    positions: &[f64],
    source: &S,
    times: &[f64],
    params: &OscillatorParams,
    tol: f64,
) -> Result<Vec<Trajectory>> {
    positions
        .par_iter()
        .map(|&x0| integrate_trajectory(x0, source, times, params, tol))
        .collect()
}

/// Outcome of transporting an ensemble and comparing it with `|ψ(t_end)|²`.
#[derive(Debug, Clone)]
pub struct EquivarianceRun {
    pub initial: Vec<f64>,
    pub transported: Vec<f64>,
    pub ks: f64,
}

pub fn equivariance_run(
    psi0: &WaveFunction1D,
    t_end: f64,
    n: usize,
    seed: u64,
    basis: &HOEigenbasis,
    tol: f64,
) -> Result<EquivarianceRun> {
    if n < 1000 {
        return Err(Error::InvalidArgument(format!("equivariance needs at least 1000 samples, got {n}")));
    }
    if !(t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be non-negative, got {t_end}")));
    }
    let ensemble = sample_ensemble(psi0, n, seed)?;
    let source = SpectralSource::new(psi0, basis)?;
    let t0 = psi0.time();
    let transported = if t_end > 0.0 {
        transport_ensemble(&ensemble.initial_positions, &source, &[t0, t0 + t_end], basis.params(), tol)?
            .iter()
            .map(Trajectory::last)
            .collect()
    } else {
        ensemble.initial_positions.clone()
    };
    let target = propagate_ho(psi0, t_end, basis)?;
    let cdf = GridCdf::from_density(target.grid(), &target.density())?;
    let ks = ks_statistic(&transported, |x| cdf.cdf(x));
    Ok(EquivarianceRun { initial: ensemble.initial_positions, transported, ks })
}

/// KS distance between an ensemble drawn from `|ψ₀|²` and carried to `t_end`
/// along pilot-wave trajectories, and the quantum density `|ψ(t_end)|²`.
pub fn equivariance_check(
    psi0: &WaveFunction1D,
    t_end: f64,
    n: usize,
    seed: u64,
    basis: &HOEigenbasis,
) -> Result<f64> {
    Ok(equivariance_run(psi0, t_end, n, seed, basis, DEFAULT_TOL)?.ks)
}

/// Ensemble average of `x(t₁+τ)·x(t₁)` over true positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BohmianCorrelation {
    pub monte_carlo: f64,
    /// `Σ x²|ψ₀|²·spacing`, available when every trajectory is constant.
    pub quadrature: Option<f64>,
}

impl BohmianCorrelation {
    /// The quadrature value when available, otherwise the Monte Carlo estimate.
    pub fn best(&self) -> f64 {
        self.quadrature.unwrap_or(self.monte_carlo)
    }
}

fn is_real_eigenstate(psi: &WaveFunction1D, basis: &HOEigenbasis) -> Result<bool> {
    if !psi.is_real() {
        return Ok(false);
    }
    let coeffs = basis.coefficients(psi)?;
    let largest = coeffs.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    Ok(largest >= (1.0 - 1e-10) * psi.norm_sq())
}

/// Two-time product of true positions, averaged over `|ψ₀|²`.
///
/// A real eigenstate has zero velocity everywhere, so its trajectories are
/// constant and the average reduces to `Σ x²|ψ₀|²·spacing`; otherwise each
/// sampled trajectory is integrated through `t₁` and `t₁+τ`.
pub fn bohmian_two_time_expectation(
    psi0: &WaveFunction1D,
    t1: f64,
    tau: f64,
    n: usize,
    seed: u64,
    basis: &HOEigenbasis,
) -> Result<BohmianCorrelation> {
    if !(t1 >= 0.0 && tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t1, tau >= 0, got {t1}, {tau}")));
    }
    let ensemble = sample_ensemble(psi0, n, seed)?;
    if is_real_eigenstate(psi0, basis)? {
        let quadrature = psi0.expectation(|x| x * x);
        let mc = ensemble.initial_positions.iter().map(|x| x * x).sum::<f64>() / n as f64;
        return Ok(BohmianCorrelation { monte_carlo: mc, quadrature: Some(quadrature) });
    }

    let t0 = psi0.time();
    let mut times = vec![t0];
    for t in [t0 + t1, t0 + t1 + tau] {
        if t > times[times.len() - 1] {
            times.push(t);
        }
    }
    let index_of = |t: f64| times.iter().position(|&s| s == t).expect("time present");
    let (i1, i2) = (index_of(t0 + t1), index_of(t0 + t1 + tau));
    let source = SpectralSource::new(psi0, basis)?;
    let trajectories = if times.len() > 1 {
        transport_ensemble(&ensemble.initial_positions, &source, &times, basis.params(), DEFAULT_TOL)?
    } else {
        ensemble
            .initial_positions
            .iter()
            .map(|&x| Trajectory::new(vec![t0], vec![x]))
            .collect::<Result<_>>()?
    };
    let mc = trajectories.iter().map(|tr| tr.positions()[i1] * tr.positions()[i2]).sum::<f64>()
        / n as f64;
    Ok(BohmianCorrelation { monte_carlo: mc, quadrature: None })
}
