//! Two-time position correlations on the measurement side: the sequential
//! (Wigner) joint probability of two position measurements and the
//! Heisenberg-picture product expectation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::wavefunction::{HOEigenbasis, OscillatorModes, WaveFunction1D};

/// Largest tolerated norm deficit of a propagated position ket.
pub const KET_DEFICIT_LIMIT: f64 = 0.05;

/// Density matrix in function convention, `matrix[(i, j)] = ρ(x_i, x_j)`, so
/// that `trace · spacing = 1`.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    grid: Grid1D,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    pub fn new(grid: Grid1D, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = grid.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::GridMismatch);
        }
        for i in 0..n {
            for j in i..n {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("density matrix not Hermitian at ({i}, {j})")));
                }
            }
        }
        let trace: f64 = (0..n).map(|i| matrix[(i, i)].re).sum::<f64>() * grid.spacing();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("density trace·spacing = {trace}, expected 1")));
        }
        Ok(Self { grid, matrix })
    }

    /// `ρ = |ψ⟩⟨ψ|`.
    pub fn pure(psi: &WaveFunction1D) -> Result<Self> {
        psi.require_normalized(1e-10)?;
        let v = DVector::from_column_slice(psi.amplitudes());
        Self::new(*psi.grid(), &v * v.adjoint())
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `⟨x_i|ρ|x_j⟩`, i.e. the matrix scaled by the spacing.
    pub fn ket_matrix(&self) -> DMatrix<Complex64> {
        &self.matrix * Complex64::new(self.grid.spacing(), 0.0)
    }
}

/// `p[(i, j)] = P(x_i, t₁; x_j, t₁+τ)`, summing (not integrating) to one.
#[derive(Debug, Clone)]
pub struct TwoTimeJointDistribution {
    pub grid: Grid1D,
    pub t1: f64,
    pub tau: f64,
    pub p: DMatrix<f64>,
    /// Largest `1 - Σ_j |⟨x_j|U(τ)|x_i⟩|²` over the first-outcome kets.
    pub max_ket_deficit: f64,
}

impl TwoTimeJointDistribution {
    pub fn total(&self) -> f64 {
        self.p.sum()
    }

    /// Distribution of the first outcome, `Σ_j p[(i, j)]`.
    pub fn first_marginal(&self) -> Vec<f64> {
        self.p.row_iter().map(|r| r.sum()).collect()
    }
}

/// Clamps rounding-level negatives and checks the total mass.
pub(crate) fn finalize_probabilities(p: &mut DMatrix<f64>) -> Result<()> {
    for v in p.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-14 {
                return Err(Error::InvalidArgument(format!("negative probability {v}")));
            }
            *v = 0.0;
        }
    }
    let total = p.sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::TruncationInadequate { captured: total, required: 1.0 - 1e-8 });
    }
    Ok(())
}

/// Norm deficit of every propagated ket (column of the kernel).
pub(crate) fn ket_deficits(kernel: &DMatrix<Complex64>) -> Vec<f64> {
    kernel.column_iter().map(|c| 1.0 - c.iter().map(|z| z.norm_sqr()).sum::<f64>()).collect()
}

pub(crate) fn check_deficits(deficits: &[f64]) -> Result<f64> {
    let worst = deficits.iter().copied().fold(0.0, f64::max);
    if worst > KET_DEFICIT_LIMIT {
        return Err(Error::TruncationInadequate { captured: 1.0 - worst, required: 1.0 - KET_DEFICIT_LIMIT });
    }
    Ok(worst)
}

/// Joint probability of position outcomes `x_i` at `t₁` and `x_j` at `t₁+τ`:
///
/// `Tr{ |x_j⟩⟨x_j| U(τ) |x_i⟩⟨x_i| U(t₁)ρU†(t₁) |x_i⟩⟨x_i| U†(τ) }
///   = |⟨x_j|U(τ)|x_i⟩|² · ⟨x_i|U(t₁)ρU†(t₁)|x_i⟩`.
pub fn joint_two_time_distribution(
    rho: &DensityOperator,
    t1: f64,
    tau: f64,
    modes: &OscillatorModes,
) -> Result<TwoTimeJointDistribution> {
    if rho.grid() != modes.grid() {
        return Err(Error::GridMismatch);
    }
    if !(t1 >= 0.0 && tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t1, tau >= 0, got {t1}, {tau}")));
    }
    let n = rho.grid().len();

    // ⟨x_i|U(t₁)ρU†(t₁)|x_i⟩
    let u1 = modes.kernel(t1);
    let evolved = &u1 * rho.ket_matrix();
    let first: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|k| evolved[(i, k)] * u1[(i, k)].conj()).sum::<Complex64>().re)
        .collect();

    let kernel = modes.kernel(tau);
    let max_ket_deficit = check_deficits(&ket_deficits(&kernel))?;
    let mut p = DMatrix::from_fn(n, n, |i, j| kernel[(j, i)].norm_sqr() * first[i]);
    finalize_probabilities(&mut p)?;
    Ok(TwoTimeJointDistribution { grid: *rho.grid(), t1, tau, p, max_ket_deficit })
}

/// `Σ_ij x_i x_j p[(i, j)]`.
pub fn correlation_from_distribution(dist: &TwoTimeJointDistribution) -> f64 {
    let xs = dist.grid.points();
    let mut total = 0.0;
    for (i, xi) in xs.iter().enumerate() {
        for (j, xj) in xs.iter().enumerate() {
            total += xi * xj * dist.p[(i, j)];
        }
    }
    total
}

/// `⟨ψ₀| X(t₁+τ) X(t₁) |ψ₀⟩` with Heisenberg operators `X(t) = U†(t) X U(t)` in
/// the truncated eigenbasis. The product is not Hermitian, so the value is
/// complex in general.
pub fn heisenberg_two_time_product(
    psi0: &WaveFunction1D,
    t1: f64,
    tau: f64,
    basis: &HOEigenbasis,
) -> Result<Complex64> {
    let c = DVector::from_vec(basis.adequate_coefficients(psi0)?);
    let later = basis.heisenberg_position(t1 + tau);
    let earlier = basis.heisenberg_position(t1);
    let v = later * (earlier * &c);
    Ok(c.dotc(&v))
}

/// Real part of [`heisenberg_two_time_product`].
pub fn heisenberg_two_time_expectation(
    psi0: &WaveFunction1D,
    t1: f64,
    tau: f64,
    basis: &HOEigenbasis,
) -> Result<f64> {
    Ok(heisenberg_two_time_product(psi0, t1, tau, basis)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::{ho_eigenstate, OscillatorParams};
    use std::f64::consts::PI;

    struct Setup {
        p: OscillatorParams,
        grid: Grid1D,
        psi: WaveFunction1D,
        modes: OscillatorModes,
        basis: HOEigenbasis,
    }

    fn setup(n: usize) -> Setup {
        let p = OscillatorParams::natural();
        let grid = Grid1D::symmetric(8.0, n).unwrap();
        let psi = ho_eigenstate(0, &p, &grid).unwrap();
        let modes = OscillatorModes::new(p, grid).unwrap();
        let basis = HOEigenbasis::new(p, grid, 40);
        Setup { p, grid, psi, modes, basis }
    }

    // ⟨X²⟩ of the ground state by direct quadrature of x²e^{-x²}.
    fn x2_oracle(grid: &Grid1D) -> f64 {
        let xs = grid.points();
        xs.iter().map(|x| x * x * (-x * x).exp()).sum::<f64>() / xs.iter().map(|x| (-x * x).exp()).sum::<f64>()
    }

    #[test]
    fn density_operator_validation() {
        let s = setup(64);
        let rho = DensityOperator::pure(&s.psi).unwrap();
        let tr: f64 = (0..64).map(|i| rho.matrix()[(i, i)].re).sum::<f64>() * s.grid.spacing();
        assert!((tr - 1.0).abs() < 1e-12);
        let mut bad = rho.matrix().clone();
        bad[(0, 1)] += Complex64::new(0.0, 1.0);
        assert!(DensityOperator::new(s.grid, bad).is_err());
        let half = rho.matrix() * Complex64::new(0.5, 0.0);
        assert!(DensityOperator::new(s.grid, half).is_err());
    }

    #[test]
    fn immediate_remeasurement_repeats_the_outcome() {
        let s = setup(128);
        let rho = DensityOperator::pure(&s.psi).unwrap();
        let d = joint_two_time_distribution(&rho, 0.0, 0.0, &s.modes).unwrap();
        let h = s.grid.spacing();
        for i in 0..128 {
            for j in 0..128 {
                let want = if i == j { s.psi.amplitudes()[i].norm_sqr() * h } else { 0.0 };
                assert!((d.p[(i, j)] - want).abs() < 1e-12);
            }
        }
        let c = correlation_from_distribution(&d);
        assert!((c - x2_oracle(&s.grid)).abs() < 1e-10);
        assert!((c - 0.5).abs() < 1e-6);
    }

    #[test]
    fn marginal_and_normalization() {
        let s = setup(128);
        let rho = DensityOperator::pure(&s.psi).unwrap();
        let h = s.grid.spacing();
        for (t1, tau) in [(0.0, 0.0), (0.0, s.p.period() / 8.0), (s.p.period() / 3.0, s.p.period() / 4.0), (s.p.period() / 3.0, PI)] {
            let d = joint_two_time_distribution(&rho, t1, tau, &s.modes).unwrap();
            assert!((d.total() - 1.0).abs() < 1e-8);
            assert!(d.p.iter().all(|&v| v >= 0.0));
            for (i, m) in d.first_marginal().iter().enumerate() {
                assert!((m - s.psi.amplitudes()[i].norm_sqr() * h).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn half_period_mirrors_the_first_outcome() {
        let s = setup(128);
        let rho = DensityOperator::pure(&s.psi).unwrap();
        for t1 in [0.0, 1.3] {
            let d = joint_two_time_distribution(&rho, t1, PI, &s.modes).unwrap();
            let mirrored: f64 = (0..128)
                .map(|i| {
                    let m = s.grid.mirror(i) as i64;
                    (0..128).filter(|&j| (j as i64 - m).abs() <= 3).map(|j| d.p[(i, j)]).sum::<f64>()
                })
                .sum();
            assert!(mirrored >= 0.99, "{mirrored}");
        }
    }

    #[test]
    fn sequential_and_heisenberg_agree_at_zero_and_half_period() {
        let s = setup(256);
        let rho = DensityOperator::pure(&s.psi).unwrap();
        let x2 = x2_oracle(&s.grid);
        for (tau, sign) in [(0.0, 1.0), (PI, -1.0)] {
            let seq = correlation_from_distribution(&joint_two_time_distribution(&rho, 0.0, tau, &s.modes).unwrap());
            let heis = heisenberg_two_time_expectation(&s.psi, 0.0, tau, &s.basis).unwrap();
            assert!((seq - sign * x2).abs() < 1e-6);
            assert!((heis - sign * x2).abs() < 1e-6);
            assert!((seq - heis).abs() < 1e-6);
        }
    }

    #[test]
    fn heisenberg_value_is_stationary_and_real_at_half_period() {
        let s = setup(512);
        let t = s.p.period();
        let vals: Vec<f64> = [0.0, t / 7.0, t / 3.0]
            .iter()
            .map(|&t1| heisenberg_two_time_expectation(&s.psi, t1, t / 2.0, &s.basis).unwrap())
            .collect();
        for v in &vals {
            assert!((v - vals[0]).abs() < 1e-9);
            assert!((v + 0.5).abs() < 1e-6);
        }
        let z = heisenberg_two_time_product(&s.psi, 0.4, t / 2.0, &s.basis).unwrap();
        assert!(z.im.abs() < 1e-10);
        // at a generic lag the product is complex: ½e^{-iτ}
        let z = heisenberg_two_time_product(&s.psi, 0.0, 1.0, &s.basis).unwrap();
        assert!((z - Complex64::from_polar(0.5, -1.0)).norm() < 1e-9);
    }

    #[test]
    fn grid_refinement_leaves_half_period_correlation_unchanged() {
        let coarse = setup(256);
        let fine = setup(512);
        let corr = |s: &Setup| {
            let rho = DensityOperator::pure(&s.psi).unwrap();
            correlation_from_distribution(&joint_two_time_distribution(&rho, 0.0, PI, &s.modes).unwrap())
        };
        assert!((corr(&coarse) - corr(&fine)).abs() < 1e-6);
    }

    #[test]
    fn rejects_mismatched_grids_and_negative_times() {
        let s = setup(64);
        let other = setup(128);
        let rho = DensityOperator::pure(&s.psi).unwrap();
        assert!(matches!(joint_two_time_distribution(&rho, 0.0, 1.0, &other.modes), Err(Error::GridMismatch)));
        assert!(joint_two_time_distribution(&rho, -1.0, 1.0, &s.modes).is_err());
    }
}
