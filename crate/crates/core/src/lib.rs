//! Numerical laboratory for pilot-wave trajectories, sequential position
//! measurements on the harmonic oscillator, and the velocity field of two
//! bosons behind a double slit.
//!
//! Everything works in explicit units carried by [`OscillatorParams`] and
//! [`SlitParams`]; the natural-unit constructors (`ħ = m = ω = 1`) are what the
//! command-line scenarios and the acceptance suite use.

// Negated float comparisons are deliberate so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bohm;
pub mod correlations;
pub mod error;
pub mod grid;
pub mod measurement;
pub mod ode;
pub mod sampling;
pub mod two_slit;
pub mod wavefunction;

pub use bohm::{
    bohmian_two_time_expectation, equivariance_check, guidance_velocity, integrate_trajectory,
    sample_ensemble, transport_ensemble, BohmianCorrelation, Ensemble, SpectralSource,
    Trajectory, WaveSource,
};
pub use correlations::{
    correlation_from_distribution, heisenberg_two_time_expectation, joint_two_time_distribution,
    DensityOperator, TwoTimeJointDistribution,
};
pub use error::{Error, Result};
pub use grid::Grid1D;
pub use measurement::{
    apply_first_measurement, apply_second_measurement, evolve_between_measurements,
    joint_pointer_distribution, prepare_global, GlobalState, Pointer, PointerJointDistribution,
    Stage,
};
pub use two_slit::{
    ghose_claim_check, integrate_pair_trajectories, pair_velocity_field,
    pair_velocity_field_fd, GhoseReport, PairConfiguration, PairTrajectories, PairVelocity,
    SlitParams,
};
pub use wavefunction::{
    build_two_slit_wavefunction, ho_eigenstate, propagate_ho, HOEigenbasis, OscillatorModes,
    OscillatorParams, WaveFunction1D,
};

pub use num_complex::Complex64;
