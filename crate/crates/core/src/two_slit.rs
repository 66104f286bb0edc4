//! Two identical bosons behind a double slit, observed in the screen plane.
//!
//! The symmetrized amplitude factors as `Ψ ∝ e^{iσ}·2cos δ` with
//! `σ = k(x1² + x2² + 2a²)/2L` and `δ = ka(x1 - x2)/L`. Every evaluation
//! below works relative to the common phase `e^{iσ}` at the point of
//! interest, since that phase reaches tens of radians and would otherwise
//! dominate the rounding.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bohm::{Trajectory, NODE_FLOOR};
use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};

/// Step of the finite-difference velocity path.
pub const FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitParams {
    k: f64,
    a: f64,
    l: f64,
    mass: f64,
    hbar: f64,
}

impl SlitParams {
    pub fn new(k: f64, a: f64, l: f64, mass: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("k", k), ("a", a), ("L", l), ("mass", mass), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if l < 20.0 * a {
            return Err(Error::InvalidParams(format!("need L >= 20a, got L = {l}, a = {a}")));
        }
        if k * a < 1.0 {
            return Err(Error::InvalidParams(format!("need k·a >= 1, got {}", k * a)));
        }
        Ok(Self { k, a, l, mass, hbar })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Half-width of the paraxial window, `L/10`.
    pub fn window(&self) -> f64 {
        self.l / 10.0
    }

    /// `ħk/(mL)`, the rate in `d(x1+x2)/dt = ħk/(mL)·(x1+x2)`.
    pub fn sum_rate(&self) -> f64 {
        self.hbar * self.k / (self.mass * self.l)
    }

    /// Magnitude of `Ψ` away from interference zeros, `2/L²`.
    pub fn amplitude_scale(&self) -> f64 {
        2.0 / (self.l * self.l)
    }

    /// `ħk/(mL)` times the window width: the natural size of a sum velocity.
    pub fn velocity_scale(&self) -> f64 {
        self.sum_rate() * 2.0 * self.window()
    }
}

impl Default for SlitParams {
    /// `k = 100, a = 1, L = 100, ħ = m = 1`.
    fn default() -> Self {
        Self { k: 100.0, a: 1.0, l: 100.0, mass: 1.0, hbar: 1.0 }
    }
}

/// Transverse positions of both particles in the screen plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConfiguration {
    pub x1: f64,
    pub x2: f64,
}

impl PairConfiguration {
    pub fn new(x1: f64, x2: f64, params: &SlitParams) -> Result<Self> {
        let limit = params.window();
        for x in [x1, x2] {
            if !(x.abs() <= limit) {
                return Err(Error::ParaxialViolation { x: x.abs(), limit });
            }
        }
        Ok(Self { x1, x2 })
    }

    pub fn swapped(&self) -> Self {
        Self { x1: self.x2, x2: self.x1 }
    }

    pub fn sum(&self) -> f64 {
        self.x1 + self.x2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairVelocity {
    pub v1: f64,
    pub v2: f64,
}

impl PairVelocity {
    pub fn sum(&self) -> f64 {
        self.v1 + self.v2
    }
}

// e^{∓iδ}; cos is taken of |δ| so that δ → -δ conjugates bitwise
fn half_phases(x1: f64, x2: f64, p: &SlitParams) -> (Complex64, Complex64) {
    let delta = p.k * p.a * (x1 - x2) / p.l;
    let c = delta.abs().cos();
    let s = delta.abs().sin().copysign(delta);
    (Complex64::new(c, -s), Complex64::new(c, s))
}

fn node_check(x1: f64, x2: f64, bracket: Complex64, p: &SlitParams) -> Result<()> {
    let amplitude = bracket.norm() / (p.l * p.l);
    let floor = NODE_FLOOR * p.amplitude_scale();
    if amplitude > floor {
        Ok(())
    } else {
        Err(Error::NearNode { at: format!("(x1, x2) = ({x1}, {x2})"), amplitude, floor })
    }
}

fn analytic_velocity(x1: f64, x2: f64, p: &SlitParams) -> Result<PairVelocity> {
    let (e1, e2) = half_phases(x1, x2, p);
    let bracket = e1 + e2;
    node_check(x1, x2, bracket, p)?;
    let ik = Complex64::new(0.0, p.k / p.l);
    let d1 = ik * (e1 * (x1 - p.a) + e2 * (x1 + p.a));
    let d2 = ik * (e1 * (x2 + p.a) + e2 * (x2 - p.a));
    let hm = p.hbar / p.mass;
    Ok(PairVelocity { v1: hm * (d1 / bracket).im, v2: hm * (d2 / bracket).im })
}

/// `v_i = (ħ/m)·Im(∂Ψ/∂x_i / Ψ)` from the closed-form derivatives of the amplitude.
pub fn pair_velocity_field(config: &PairConfiguration, params: &SlitParams) -> Result<PairVelocity> {
    let c = PairConfiguration::new(config.x1, config.x2, params)?;
    analytic_velocity(c.x1, c.x2, params)
}

/// `Ψ(x1 + d1, x2 + d2)·L²·e^{-iσ(x1, x2)}`, i.e. the amplitude near a base
/// point with the base point's common phase removed.
pub fn relative_amplitude(x1: f64, x2: f64, d1: f64, d2: f64, p: &SlitParams) -> Complex64 {
    let g = p.k / (2.0 * p.l);
    let d_sigma = g * (d1 * (2.0 * x1 + d1) + d2 * (2.0 * x2 + d2));
    let (e_minus, _) = half_phases(x1, x2, p);
    let (cos0, sin0) = (e_minus.re, -e_minus.im);
    let d_delta = p.k * p.a * (d1 - d2) / p.l;
    let cos_delta = cos0 * d_delta.cos() - sin0 * d_delta.sin();
    Complex64::from_polar(2.0 * cos_delta, d_sigma)
}

/// Finite-difference cross-check of [`pair_velocity_field`]: sixth-order
/// centred differences of the amplitude with step `step`.
pub fn pair_velocity_field_fd_with_step(
    config: &PairConfiguration,
    params: &SlitParams,
    step: f64,
) -> Result<PairVelocity> {
    let c = PairConfiguration::new(config.x1, config.x2, params)?;
    let (x1, x2) = (c.x1, c.x2);
    let psi0 = relative_amplitude(x1, x2, 0.0, 0.0, params);
    node_check(x1, x2, psi0, params)?;
    const W: [(f64, f64); 3] = [(1.0, 45.0), (2.0, -9.0), (3.0, 1.0)];
    let derivative = |dir: (f64, f64)| -> Complex64 {
        W.iter()
            .map(|&(m, w)| {
                let d = m * step;
                (relative_amplitude(x1, x2, d * dir.0, d * dir.1, params)
                    - relative_amplitude(x1, x2, -d * dir.0, -d * dir.1, params))
                    * w
            })
            .sum::<Complex64>()
            / (60.0 * step)
    };
    let hm = params.hbar / params.mass;
    Ok(PairVelocity {
        v1: hm * (derivative((1.0, 0.0)) / psi0).im,
        v2: hm * (derivative((0.0, 1.0)) / psi0).im,
    })
}

pub fn pair_velocity_field_fd(config: &PairConfiguration, params: &SlitParams) -> Result<PairVelocity> {
    pair_velocity_field_fd_with_step(config, params, FD_STEP)
}

#[derive(Debug, Clone)]
pub struct PairTrajectories {
    pub first: Trajectory,
    pub second: Trajectory,
}

impl PairTrajectories {
    pub fn sums(&self) -> Vec<f64> {
        self.first.positions().iter().zip(self.second.positions()).map(|(a, b)| a + b).collect()
    }
}

/// Integrates both particles through the stationary screen-plane velocity
/// field, reporting positions at each requested time (`times[0]` is the start).
pub fn integrate_pair_trajectories(
    initial: &PairConfiguration,
    params: &SlitParams,
    times: &[f64],
    tol: f64,
) -> Result<PairTrajectories> {
    let start = PairConfiguration::new(initial.x1, initial.x2, params)?;
    let window = params.window();
    let states = ode::integrate(
        |_, y: &[f64; 2]| {
            let v = analytic_velocity(y[0], y[1], params)?;
            Ok([v.v1, v.v2])
        },
        [start.x1, start.x2],
        times,
        &OdeOptions::with_tol(tol),
        |t, y| {
            if y[0].abs() > window || y[1].abs() > window {
                Err(Error::WindowExit { t })
            } else {
                Ok(())
            }
        },
    )?;
    Ok(PairTrajectories {
        first: Trajectory::new(times.to_vec(), states.iter().map(|s| s[0]).collect())?,
        second: Trajectory::new(times.to_vec(), states.iter().map(|s| s[1]).collect())?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocitySample {
    pub x1: f64,
    pub x2: f64,
    pub v1: f64,
    pub v2: f64,
    pub predicted_sum: f64,
}

impl VelocitySample {
    pub fn sum(&self) -> f64 {
        self.v1 + self.v2
    }
}

/// Outcome of sampling the sum identity over the paraxial window.
#[derive(Debug, Clone)]
pub struct GhoseReport {
    pub requested: usize,
    pub skipped_near_node: usize,
    /// `ħk/(mL)·(window width)`; deviations are quoted against it.
    pub scale: f64,
    pub max_abs_dev_analytic: f64,
    pub median_abs_dev_analytic: f64,
    pub max_abs_dev_fd: f64,
    pub median_abs_dev_fd: f64,
    /// Samples with `|x1 + x2| > 1e-6`.
    pub eligible: usize,
    /// Eligible samples with `|v1 + v2| > (ħk/2mL)·|x1 + x2|`.
    pub nonvanishing: usize,
    /// Finite-difference velocities of every retained sample.
    pub samples: Vec<VelocitySample>,
}

impl GhoseReport {
    pub fn nonvanishing_fraction(&self) -> f64 {
        if self.eligible == 0 {
            1.0
        } else {
            self.nonvanishing as f64 / self.eligible as f64
        }
    }

    pub fn skipped_fraction(&self) -> f64 {
        self.skipped_near_node as f64 / self.requested as f64
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

/// Samples configurations uniformly over the paraxial window and measures how
/// far `v1 + v2` strays from `ħk/(mL)·(x1 + x2)`.
pub fn ghose_claim_check(params: &SlitParams, n_samples: usize, seed: u64) -> Result<GhoseReport> {
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {n_samples}")));
    }
    let w = params.window();
    let rate = params.sum_rate();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev_a = Vec::with_capacity(n_samples);
    let mut dev_fd = Vec::with_capacity(n_samples);
    let mut samples = Vec::with_capacity(n_samples);
    let (mut skipped, mut eligible, mut nonvanishing) = (0, 0, 0);

    for _ in 0..n_samples {
        let x1 = rng.gen_range(-w..=w);
        let x2 = rng.gen_range(-w..=w);
        let config = PairConfiguration { x1, x2 };
        let (analytic, fd) = match (pair_velocity_field(&config, params), pair_velocity_field_fd(&config, params)) {
            (Ok(a), Ok(f)) => (a, f),
            (Err(Error::NearNode { .. }), _) | (_, Err(Error::NearNode { .. })) => {
                skipped += 1;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let predicted = rate * (x1 + x2);
        dev_a.push((analytic.sum() - predicted).abs());
        dev_fd.push((fd.sum() - predicted).abs());
        if (x1 + x2).abs() > 1e-6 {
            eligible += 1;
            if fd.sum().abs() > 0.5 * rate * (x1 + x2).abs() {
                nonvanishing += 1;
            }
        }
        samples.push(VelocitySample { x1, x2, v1: fd.v1, v2: fd.v2, predicted_sum: predicted });
    }

    Ok(GhoseReport {
        requested: n_samples,
        skipped_near_node: skipped,
        scale: params.velocity_scale(),
        max_abs_dev_analytic: dev_a.iter().copied().fold(0.0, f64::max),
        median_abs_dev_analytic: median(dev_a),
        max_abs_dev_fd: dev_fd.iter().copied().fold(0.0, f64::max),
        median_abs_dev_fd: median(dev_fd),
        eligible,
        nonvanishing,
        samples,
    })
}
