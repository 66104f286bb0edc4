use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{OscillatorParams, WaveFunction1D};
use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Largest boundary amplitude tolerated by [`ho_eigenstate`].
pub const TAIL_LIMIT: f64 = 1e-12;

/// Minimum fraction of the norm an expansion must capture to be propagated.
pub const CAPTURE_THRESHOLD: f64 = 1.0 - 1e-8;

// Normalized Hermite functions 0..=nmax at every grid point, via the
// three-term recurrence in the scaled coordinate ξ = x/ℓ.
fn hermite_functions(params: &OscillatorParams, grid: &Grid1D, nmax: usize) -> Vec<Vec<f64>> {
    let ell = params.length();
    let norm0 = PI.powf(-0.25) / ell.sqrt();
    let xi: Vec<f64> = grid.points().iter().map(|x| x / ell).collect();

    let mut out = Vec::with_capacity(nmax + 1);
    out.push(xi.iter().map(|&s| norm0 * (-0.5 * s * s).exp()).collect::<Vec<_>>());
    if nmax >= 1 {
        out.push(xi.iter().zip(&out[0]).map(|(&s, &p)| 2f64.sqrt() * s * p).collect());
    }
    for n in 1..nmax {
        let a = (2.0 / (n + 1) as f64).sqrt();
        let b = (n as f64 / (n + 1) as f64).sqrt();
        let next = (0..xi.len()).map(|i| a * xi[i] * out[n][i] - b * out[n - 1][i]).collect();
        out.push(next);
    }

    let h = grid.spacing();
    for f in &mut out {
        let norm = (f.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
        f.iter_mut().for_each(|v| *v /= norm);
    }
    out
}

fn orthonormalize_by_parity(states: &mut [Vec<f64>], h: f64) {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * h;
    for n in 0..states.len() {
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for m in (n % 2..n).step_by(2) {
                let (lower, upper) = states.split_at_mut(n);
                let c = dot(&lower[m], &upper[0]);
                for (v, w) in upper[0].iter_mut().zip(&lower[m]) {
                    *v -= c * w;
                }
            }
        }
        let norm = dot(&states[n], &states[n]).sqrt();
        states[n].iter_mut().for_each(|v| *v /= norm);
    }
}

fn real_wavefunction(grid: Grid1D, values: &[f64]) -> WaveFunction1D {
    let amps = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    WaveFunction1D::new(grid, amps, 0.0).expect("hermite functions are finite")
}

/// Oscillator eigenstate `n` on the grid, discretely normalized and purely real.
///
/// Fails with [`Error::DomainTooSmall`] when the amplitude at either end of the
/// grid exceeds [`TAIL_LIMIT`].
pub fn ho_eigenstate(n: usize, params: &OscillatorParams, grid: &Grid1D) -> Result<WaveFunction1D> {
    let states = hermite_functions(params, grid, n);
    let f = &states[n];
    let tail = f[0].abs().max(f[f.len() - 1].abs());
    if tail > TAIL_LIMIT {
        return Err(Error::DomainTooSmall { n, amplitude: tail, limit: TAIL_LIMIT });
    }
    Ok(real_wavefunction(*grid, f))
}

/// Ground state displaced by `shift`, i.e. `ψ₀(x - shift)`, renormalized on the grid.
pub fn displaced_ground_state(
    shift: f64,
    params: &OscillatorParams,
    grid: &Grid1D,
) -> Result<WaveFunction1D> {
    let ell = params.length();
    WaveFunction1D::from_fn(*grid, 0.0, |x| {
        let s = (x - shift) / ell;
        Complex64::new((-0.5 * s * s).exp(), 0.0)
    })?
    .normalized()
}

/// Truncated oscillator eigenbasis `|0⟩ … |nmax⟩` sampled on a grid.
#[derive(Debug, Clone)]
pub struct HOEigenbasis {
    params: OscillatorParams,
    grid: Grid1D,
    states: Vec<Vec<f64>>,
    energies: Vec<f64>,
}

impl HOEigenbasis {
    /// Builds every level up to `nmax`. No tail check is applied here. Levels
    /// that do not fit on the grid lose discrete orthogonality, so the set is
    /// re-orthonormalized in order of increasing `n` within each parity
    /// sector; levels that fit are unchanged to rounding and parity stays exact.
    pub fn new(params: OscillatorParams, grid: Grid1D, nmax: usize) -> Self {
        let mut states = hermite_functions(&params, &grid, nmax);
        orthonormalize_by_parity(&mut states, grid.spacing());
        let energies = (0..=nmax).map(|n| params.energy(n)).collect();
        Self { params, grid, states, energies }
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn nmax(&self) -> usize {
        self.states.len() - 1
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Real sampled values of level `n`.
    pub fn state_values(&self, n: usize) -> &[f64] {
        &self.states[n]
    }

    pub fn state(&self, n: usize) -> WaveFunction1D {
        real_wavefunction(self.grid, &self.states[n])
    }

    /// `max |⟨n|n'⟩ - δ|` over all pairs, using the discrete inner product.
    pub fn orthonormality_error(&self) -> f64 {
        let h = self.grid.spacing();
        let mut worst = 0.0f64;
        for (n, a) in self.states.iter().enumerate() {
            for (m, b) in self.states.iter().enumerate().skip(n) {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * h;
                let target = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn coefficients(&self, psi: &WaveFunction1D) -> Result<Vec<Complex64>> {
        if psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let h = self.grid.spacing();
        Ok(self
            .states
            .iter()
            .map(|f| {
                let s: Complex64 = f.iter().zip(psi.amplitudes()).map(|(&a, z)| z * a).sum();
                s * h
            })
            .collect())
    }

    /// Expansion coefficients, after checking that they capture at least
    /// [`CAPTURE_THRESHOLD`] of the norm of `psi`.
    pub fn adequate_coefficients(&self, psi: &WaveFunction1D) -> Result<Vec<Complex64>> {
        let coeffs = self.coefficients(psi)?;
        let captured = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / psi.norm_sq();
        if !(captured >= CAPTURE_THRESHOLD) {
            return Err(Error::TruncationInadequate { captured, required: CAPTURE_THRESHOLD });
        }
        Ok(coeffs)
    }

    pub fn captured_fraction(&self, psi: &WaveFunction1D) -> Result<f64> {
        let coeffs = self.coefficients(psi)?;
        Ok(coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / psi.norm_sq())
    }

    /// `e^{-i E_n dt / ħ}` for every level.
    pub fn phases(&self, dt: f64) -> Vec<Complex64> {
        let hbar = self.params.hbar();
        self.energies.iter().map(|e| Complex64::from_polar(1.0, -e * dt / hbar)).collect()
    }

    /// `Σ_n c_n e^{-iE_n dt/ħ} φ_n(x_i)` at grid index `i`.
    pub fn value_at(&self, weighted: &[Complex64], i: usize) -> Complex64 {
        weighted.iter().zip(&self.states).map(|(c, f)| c * f[i]).sum()
    }

    /// Amplitudes of `Σ_n c_n φ_n`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (c, f) in coeffs.iter().zip(&self.states) {
            for (o, &v) in out.iter_mut().zip(f) {
                *o += c * v;
            }
        }
        out
    }

    /// Normalized superposition `Σ c_n |n⟩` (coefficients beyond `nmax` are rejected).
    pub fn superposition(&self, coeffs: &[Complex64]) -> Result<WaveFunction1D> {
        if coeffs.len() > self.states.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a basis of {} states",
                coeffs.len(),
                self.states.len()
            )));
        }
        WaveFunction1D::new(self.grid, self.synthesize(coeffs), 0.0)?.normalized()
    }

    /// Matrix elements `⟨n|X|m⟩` by discrete quadrature.
    pub fn position_matrix(&self) -> DMatrix<f64> {
        let h = self.grid.spacing();
        let xs = self.grid.points();
        let dim = self.states.len();
        DMatrix::from_fn(dim, dim, |n, m| {
            self.states[n]
                .iter()
                .zip(&self.states[m])
                .zip(&xs)
                .map(|((a, b), x)| a * x * b)
                .sum::<f64>()
                * h
        })
    }

    /// Heisenberg position operator `U†(t) X U(t)` in the truncated basis.
    pub fn heisenberg_position(&self, t: f64) -> DMatrix<Complex64> {
        let x = self.position_matrix();
        let hbar = self.params.hbar();
        DMatrix::from_fn(x.nrows(), x.ncols(), |n, m| {
            let phase = (self.energies[n] - self.energies[m]) * t / hbar;
            Complex64::from_polar(x[(n, m)], phase)
        })
    }
}

/// Spectral propagation `Σ_n e^{-iE_nτ/ħ} ⟨n|ψ⟩ |n⟩`, with the time stamp advanced by `tau`.
pub fn propagate_ho(psi: &WaveFunction1D, tau: f64, basis: &HOEigenbasis) -> Result<WaveFunction1D> {
    let coeffs = basis.adequate_coefficients(psi)?;
    let weighted: Vec<Complex64> =
        coeffs.iter().zip(basis.phases(tau)).map(|(c, p)| c * p).collect();
    WaveFunction1D::new(*basis.grid(), basis.synthesize(&weighted), psi.time() + tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural_grid(n: usize) -> Grid1D {
        Grid1D::symmetric(8.0, n).unwrap()
    }

    // Independent normalization of exp(-x²/2) by a plain Riemann sum.
    fn gaussian_peak_oracle(grid: &Grid1D) -> f64 {
        let h = grid.spacing();
        let norm: f64 = grid.points().iter().map(|x| (-x * x).exp()).sum::<f64>() * h;
        1.0 / norm.sqrt()
    }

    #[test]
    fn ground_state_peak_matches_quadrature() {
        let grid = natural_grid(513);
        let psi = ho_eigenstate(0, &OscillatorParams::natural(), &grid).unwrap();
        let peak = psi.amplitudes()[256];
        assert_eq!(grid.point(256), 0.0);
        assert!((peak.re - gaussian_peak_oracle(&grid)).abs() < 1e-13);
        assert!((peak.re - PI.powf(-0.25)).abs() < 1e-12);
        assert!((peak.re - 0.7511).abs() < 1e-4);
        assert!(psi.is_real());
    }

    #[test]
    fn ground_state_is_even_and_first_level_orthogonal() {
        let grid = natural_grid(512);
        let p = OscillatorParams::natural();
        let g = ho_eigenstate(0, &p, &grid).unwrap();
        let e = ho_eigenstate(1, &p, &grid).unwrap();
        for i in 0..grid.len() {
            assert_eq!(g.amplitudes()[i], g.amplitudes()[grid.mirror(i)]);
        }
        assert!(g.inner(&e).unwrap().norm() < 1e-10);
        assert!(g.is_normalized(1e-12));
    }

    #[test]
    fn tail_check_rejects_narrow_domains() {
        let p = OscillatorParams::natural();
        let narrow = Grid1D::symmetric(3.0, 128).unwrap();
        assert!(matches!(ho_eigenstate(0, &p, &narrow), Err(Error::DomainTooSmall { n: 0, .. })));
        let grid = natural_grid(512);
        assert!(matches!(ho_eigenstate(10, &p, &grid), Err(Error::DomainTooSmall { n: 10, .. })));
    }

    #[test]
    fn cramped_basis_is_still_orthonormal_and_keeps_low_levels() {
        let p = OscillatorParams::natural();
        let grid = natural_grid(512);
        let basis = HOEigenbasis::new(p, grid, 40);
        assert!(basis.orthonormality_error() < 1e-12);
        let raw = hermite_functions(&p, &grid, 40);
        for (n, level) in raw.iter().enumerate().take(13) {
            let worst = level.iter().zip(basis.state_values(n)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-9, "level {n}: {worst}");
        }
        for n in 0..=40 {
            let f = basis.state_values(n);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((0..grid.len()).all(|i| f[grid.mirror(i)] == sign * f[i]));
        }
    }

    #[test]
    fn basis_is_orthonormal_on_a_wide_grid() {
        let p = OscillatorParams::natural();
        let reach = p.turning_point(40) + 4.0;
        let grid = Grid1D::symmetric(reach, 1024).unwrap();
        let basis = HOEigenbasis::new(p, grid, 40);
        assert!(basis.orthonormality_error() < 1e-8, "{}", basis.orthonormality_error());
    }

    #[test]
    fn dimensional_units_scale_the_ground_state() {
        let p = OscillatorParams::new(2.0, 3.0, 1.5).unwrap();
        let grid = Grid1D::symmetric(6.0, 401).unwrap();
        let psi = ho_eigenstate(0, &p, &grid).unwrap();
        let x2 = psi.expectation(|x| x * x);
        // ⟨X²⟩ = ħ/(2mω)
        assert!((x2 - 1.5 / (2.0 * 2.0 * 3.0)).abs() < 1e-12);
    }

    fn sample_superposition(basis: &HOEigenbasis) -> WaveFunction1D {
        let c: Vec<Complex64> = (0..6)
            .map(|n| Complex64::new(1.0 / (n + 1) as f64, 0.2 * n as f64))
            .collect();
        basis.superposition(&c).unwrap()
    }

    #[test]
    fn zero_time_propagation_is_identity() {
        let p = OscillatorParams::natural();
        let basis = HOEigenbasis::new(p, natural_grid(512), 40);
        let psi = sample_superposition(&basis);
        let out = propagate_ho(&psi, 0.0, &basis).unwrap();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12, "{}", (a - b).norm());
        }
    }

    #[test]
    fn half_period_is_parity_times_minus_i() {
        let p = OscillatorParams::natural();
        let grid = natural_grid(512);
        let basis = HOEigenbasis::new(p, grid, 40);
        let psi = sample_superposition(&basis);
        let out = propagate_ho(&psi, p.period() / 2.0, &basis).unwrap();
        assert!((out.time() - PI).abs() < 1e-15);
        let minus_i = Complex64::new(0.0, -1.0);
        for i in 0..grid.len() {
            let expect = minus_i * psi.amplitudes()[grid.mirror(i)];
            assert!((out.amplitudes()[i] - expect).norm() < 1e-8);
        }
    }

    #[test]
    fn half_period_oracle_by_direct_spectral_sum() {
        // Oracle: evaluate each level's phase e^{-iπ(n+1/2)} directly and sum.
        let p = OscillatorParams::natural();
        let grid = natural_grid(256);
        let basis = HOEigenbasis::new(p, grid, 20);
        let c = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let psi = basis.superposition(&c).unwrap();
        let out = propagate_ho(&psi, PI, &basis).unwrap();
        for i in (0..grid.len()).step_by(7) {
            let direct: Complex64 = c
                .iter()
                .enumerate()
                .map(|(n, cn)| {
                    cn * Complex64::from_polar(1.0, -PI * (n as f64 + 0.5))
                        * basis.state_values(n)[i]
                })
                .sum();
            assert!((out.amplitudes()[i] - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn stationary_ground_state_keeps_its_density() {
        let p = OscillatorParams::natural();
        let grid = natural_grid(512);
        let basis = HOEigenbasis::new(p, grid, 40);
        let g = ho_eigenstate(0, &p, &grid).unwrap();
        let out = propagate_ho(&g, p.period() / 2.0, &basis).unwrap();
        for (a, b) in out.density().iter().zip(g.density()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn full_period_recurrence_and_unitarity() {
        let p = OscillatorParams::natural();
        let grid = natural_grid(512);
        let basis = HOEigenbasis::new(p, grid, 40);
        let psi = displaced_ground_state(2.0, &p, &grid).unwrap();
        let out = propagate_ho(&psi, p.period(), &basis).unwrap();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a + b).norm() < 1e-8);
        }
        for k in 0..=16 {
            let tau = 2.0 * p.period() * k as f64 / 16.0;
            let out = propagate_ho(&psi, tau, &basis).unwrap();
            assert!((out.norm_sq() - psi.norm_sq()).abs() < 1e-10);
        }
    }

    #[test]
    fn truncation_inadequacy_is_reported() {
        let p = OscillatorParams::natural();
        let grid = natural_grid(512);
        let basis = HOEigenbasis::new(p, grid, 4);
        let psi = displaced_ground_state(4.0, &p, &grid).unwrap();
        assert!(matches!(
            propagate_ho(&psi, 1.0, &basis),
            Err(Error::TruncationInadequate { .. })
        ));
    }

    #[test]
    fn heisenberg_position_flips_sign_at_half_period() {
        let p = OscillatorParams::natural();
        let basis = HOEigenbasis::new(p, natural_grid(512), 40);
        let x = basis.position_matrix();
        let xt = basis.heisenberg_position(p.period() / 2.0);
        let worst = (0..x.nrows())
            .flat_map(|n| (0..x.ncols()).map(move |m| (n, m)))
            .map(|(n, m)| (xt[(n, m)] + x[(n, m)]).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        assert!((x[(0, 1)] - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
