//! Ideal sequential position measurements with two pointer apparatus.
//!
//! The global state lives on (oscillator cell, pointer A, pointer B). Pointer
//! labels are exactly orthogonal tags in bijection with grid cells, plus the
//! "ready" label each apparatus starts in. Measurements are instantaneous
//! relabelings; between them only the oscillator factor evolves.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::correlations::{check_deficits, finalize_probabilities, ket_deficits};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::wavefunction::{OscillatorModes, WaveFunction1D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pointer {
    Ready,
    /// Pointer recording grid cell `i`.
    At(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Initial,
    AfterFirst,
    AfterEvolution,
    AfterSecond,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Initial => "initial",
            Stage::AfterFirst => "after-first",
            Stage::AfterEvolution => "after-evolution",
            Stage::AfterSecond => "after-second",
        })
    }
}

pub type Branch = (usize, Pointer, Pointer);

#[derive(Debug, Clone)]
pub struct GlobalState {
    grid: Grid1D,
    stage: Stage,
    amplitudes: BTreeMap<Branch, Complex64>,
    truncation_deficit: f64,
}

impl GlobalState {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    /// Amplitude of `|x_i⟩|a⟩|b⟩`; zero for unoccupied triples.
    pub fn amplitude(&self, i: usize, a: Pointer, b: Pointer) -> Complex64 {
        self.amplitudes.get(&(i, a, b)).copied().unwrap_or_default()
    }

    pub fn branches(&self) -> impl Iterator<Item = (&Branch, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn occupied(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn total_probability(&self) -> f64 {
        self.amplitudes.values().map(|z| z.norm_sqr()).sum()
    }

    /// Largest norm deficit of any evolved branch (zero before evolution).
    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    fn expect(&self, expected: Stage) -> Result<()> {
        if self.stage == expected {
            Ok(())
        } else {
            Err(Error::WrongStage { expected, found: self.stage })
        }
    }

    fn relabel(&self, next: Stage, f: impl Fn(&Branch) -> Branch) -> Self {
        Self {
            grid: self.grid,
            stage: next,
            amplitudes: self.amplitudes.iter().map(|(k, v)| (f(k), *v)).collect(),
            truncation_deficit: self.truncation_deficit,
        }
    }
}

/// `|ψ₀⟩|α₀⟩|β₀⟩`, with amplitudes `ψ₀(x_i)·sqrt(spacing)`.
pub fn prepare_global(psi0: &WaveFunction1D) -> Result<GlobalState> {
    psi0.require_normalized(1e-10)?;
    let amplitudes = psi0
        .kets()
        .into_iter()
        .enumerate()
        .map(|(i, z)| ((i, Pointer::Ready, Pointer::Ready), z))
        .collect();
    Ok(GlobalState { grid: *psi0.grid(), stage: Stage::Initial, amplitudes, truncation_deficit: 0.0 })
}

/// First pointer records the oscillator cell: `|x_i⟩|α₀⟩ → |x_i⟩|α_i⟩`.
pub fn apply_first_measurement(state: &GlobalState) -> Result<GlobalState> {
    state.expect(Stage::Initial)?;
    Ok(state.relabel(Stage::AfterFirst, |&(i, _, b)| (i, Pointer::At(i), b)))
}

/// Oscillator factor of every branch evolves by `U(τ)`; pointers are spectators.
pub fn evolve_between_measurements(
    state: &GlobalState,
    tau: f64,
    modes: &OscillatorModes,
) -> Result<GlobalState> {
    state.expect(Stage::AfterFirst)?;
    if &state.grid != modes.grid() {
        return Err(Error::GridMismatch);
    }
    let kernel = modes.kernel(tau);
    let deficits = ket_deficits(&kernel);
    let occupied: Vec<usize> = state.amplitudes.keys().map(|k| k.0).collect();
    let branch_deficits: Vec<f64> = occupied.iter().map(|&i| deficits[i]).collect();
    let worst = check_deficits(&branch_deficits)?;

    let n = state.grid.len();
    let spread: Vec<Vec<(Branch, Complex64)>> = state
        .amplitudes
        .par_iter()
        .map(|(&(i, a, b), &c)| (0..n).map(|j| ((j, a, b), kernel[(j, i)] * c)).collect())
        .collect();
    let mut amplitudes = BTreeMap::new();
    for (key, z) in spread.into_iter().flatten() {
        *amplitudes.entry(key).or_insert_with(Complex64::default) += z;
    }
    Ok(GlobalState {
        grid: state.grid,
        stage: Stage::AfterEvolution,
        amplitudes,
        truncation_deficit: state.truncation_deficit.max(worst),
    })
}

/// Second pointer records the oscillator cell: `|x_j⟩|β₀⟩ → |x_j⟩|β_j⟩`.
pub fn apply_second_measurement(state: &GlobalState) -> Result<GlobalState> {
    state.expect(Stage::AfterEvolution)?;
    Ok(state.relabel(Stage::AfterSecond, |&(j, a, _)| (j, a, Pointer::At(j))))
}

/// `p[(a, b)]`: probability that pointer A reads cell `a` and pointer B reads cell `b`.
#[derive(Debug, Clone)]
pub struct PointerJointDistribution {
    pub grid: Grid1D,
    pub p: DMatrix<f64>,
}

impl PointerJointDistribution {
    pub fn correlation(&self) -> f64 {
        let xs = self.grid.points();
        let mut total = 0.0;
        for (a, xa) in xs.iter().enumerate() {
            for (b, xb) in xs.iter().enumerate() {
                total += xa * xb * self.p[(a, b)];
            }
        }
        total
    }
}

/// Born weights of the orthogonal pointer branches.
pub fn joint_pointer_distribution(state: &GlobalState) -> Result<PointerJointDistribution> {
    state.expect(Stage::AfterSecond)?;
    let n = state.grid.len();
    let mut p = DMatrix::zeros(n, n);
    for (&(_, a, b), z) in &state.amplitudes {
        match (a, b) {
            (Pointer::At(a), Pointer::At(b)) => p[(a, b)] += z.norm_sqr(),
            _ => unreachable!("both pointers are set after the second measurement"),
        }
    }
    finalize_probabilities(&mut p)?;
    Ok(PointerJointDistribution { grid: state.grid, p })
}

/// Runs the whole chain: prepare, measure, evolve by `tau`, measure.
pub fn run_pipeline(
    psi0: &WaveFunction1D,
    tau: f64,
    modes: &OscillatorModes,
) -> Result<(GlobalState, PointerJointDistribution)> {
    let state = prepare_global(psi0)?;
    let state = apply_first_measurement(&state)?;
    let state = evolve_between_measurements(&state, tau, modes)?;
    let state = apply_second_measurement(&state)?;
    let dist = joint_pointer_distribution(&state)?;
    Ok((state, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::{ho_eigenstate, OscillatorParams};
    use std::f64::consts::PI;

    fn setup(n: usize) -> (WaveFunction1D, OscillatorModes) {
        let p = OscillatorParams::natural();
        let g = Grid1D::symmetric(8.0, n).unwrap();
        (ho_eigenstate(0, &p, &g).unwrap(), OscillatorModes::new(p, g).unwrap())
    }

    #[test]
    fn prepared_state_is_a_product() {
        let (psi, _) = setup(64);
        let s = prepare_global(&psi).unwrap();
        assert_eq!(s.stage(), Stage::Initial);
        assert!((s.total_probability() - 1.0).abs() < 1e-10);
        for i in 0..64 {
            let z = s.amplitude(i, Pointer::Ready, Pointer::Ready);
            assert!(z.im == 0.0 && z.re > 0.0);
            assert_eq!(s.amplitude(i, Pointer::At(i), Pointer::Ready), Complex64::default());
            assert_eq!(s.amplitude(i, Pointer::Ready, Pointer::At(0)), Complex64::default());
        }
        let unnormalized = WaveFunction1D::new(*psi.grid(), psi.amplitudes().iter().map(|z| z * 2.0).collect(), 0.0).unwrap();
        assert!(matches!(prepare_global(&unnormalized), Err(Error::Unnormalized { .. })));
    }

    #[test]
    fn first_measurement_correlates_pointer_with_position() {
        let (psi, _) = setup(64);
        let s0 = prepare_global(&psi).unwrap();
        let s1 = apply_first_measurement(&s0).unwrap();
        assert_eq!(s1.stage(), Stage::AfterFirst);
        assert_eq!(s1.total_probability(), s0.total_probability());
        let h = psi.grid().spacing();
        for (&(i, a, b), z) in s1.branches() {
            assert_eq!(a, Pointer::At(i));
            assert_eq!(b, Pointer::Ready);
            assert!((z.norm_sqr() - psi.amplitudes()[i].norm_sqr() * h).abs() < 1e-15);
        }
        assert!(matches!(apply_first_measurement(&s1), Err(Error::WrongStage { .. })));
    }

    #[test]
    fn stage_machine_rejects_out_of_order_calls() {
        let (psi, modes) = setup(64);
        let s0 = prepare_global(&psi).unwrap();
        assert!(evolve_between_measurements(&s0, 1.0, &modes).is_err());
        assert!(apply_second_measurement(&s0).is_err());
        assert!(joint_pointer_distribution(&s0).is_err());
        let s1 = apply_first_measurement(&s0).unwrap();
        assert!(apply_second_measurement(&s1).is_err());
        let s2 = evolve_between_measurements(&s1, 1.0, &modes).unwrap();
        assert!(evolve_between_measurements(&s2, 1.0, &modes).is_err());
        assert!(joint_pointer_distribution(&s2).is_err());
        let s3 = apply_second_measurement(&s2).unwrap();
        assert!(apply_first_measurement(&s3).is_err());
        assert!(apply_second_measurement(&s3).is_err());
    }

    #[test]
    fn evolution_keeps_pointers_and_norm() {
        let (psi, modes) = setup(64);
        let s1 = apply_first_measurement(&prepare_global(&psi).unwrap()).unwrap();
        let same = evolve_between_measurements(&s1, 0.0, &modes).unwrap();
        for i in 0..64 {
            let before = s1.amplitude(i, Pointer::At(i), Pointer::Ready);
            assert!((same.amplitude(i, Pointer::At(i), Pointer::Ready) - before).norm() < 1e-12);
        }
        let full = evolve_between_measurements(&s1, 2.0 * PI, &modes).unwrap();
        for i in 0..64 {
            let before = s1.amplitude(i, Pointer::At(i), Pointer::Ready);
            assert!((full.amplitude(i, Pointer::At(i), Pointer::Ready) + before).norm() < 1e-12);
        }
        let s2 = evolve_between_measurements(&s1, 0.9, &modes).unwrap();
        assert!((s2.total_probability() - 1.0).abs() < 1e-10 + s2.truncation_deficit());
        for (&(_, a, b), _) in s2.branches() {
            assert!(matches!(a, Pointer::At(_)));
            assert_eq!(b, Pointer::Ready);
        }
        assert_eq!(s2.occupied(), 64 * 64);
    }

    #[test]
    fn second_measurement_records_the_final_cell() {
        let (psi, modes) = setup(64);
        let s1 = apply_first_measurement(&prepare_global(&psi).unwrap()).unwrap();
        let s2 = evolve_between_measurements(&s1, 0.7, &modes).unwrap();
        let s3 = apply_second_measurement(&s2).unwrap();
        assert_eq!(s3.total_probability(), s2.total_probability());
        for (&(j, _, b), _) in s3.branches() {
            assert_eq!(b, Pointer::At(j));
        }
        // Born weights on the second index
        let d = joint_pointer_distribution(&s3).unwrap();
        for j in 0..64 {
            let born: f64 = s2.branches().filter(|(k, _)| k.0 == j).map(|(_, z)| z.norm_sqr()).sum();
            let col: f64 = d.p.column(j).sum();
            assert!((born - col).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_lag_distribution_is_diagonal() {
        let (psi, modes) = setup(64);
        let (_, d) = run_pipeline(&psi, 0.0, &modes).unwrap();
        let h = psi.grid().spacing();
        for a in 0..64 {
            for b in 0..64 {
                let want = if a == b { psi.amplitudes()[a].norm_sqr() * h } else { 0.0 };
                assert!((d.p[(a, b)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn half_period_correlation_is_negative() {
        let (psi, modes) = setup(128);
        let (_, d) = run_pipeline(&psi, PI, &modes).unwrap();
        assert!((d.correlation() + 0.5).abs() < 1e-5);
        assert!((d.p.sum() - 1.0).abs() < 1e-8);
    }
}
