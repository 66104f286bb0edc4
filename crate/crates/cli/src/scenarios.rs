//! The four experiments, each producing metrics, observations and tables.

use pwlab_core::bohm::{equivariance_run, integrate_trajectory, DEFAULT_TOL};
use pwlab_core::correlations::heisenberg_two_time_product;
use pwlab_core::measurement::run_pipeline;
use pwlab_core::wavefunction::displaced_ground_state;
use pwlab_core::{
    bohmian_two_time_expectation, correlation_from_distribution, ghose_claim_check, ho_eigenstate,
    integrate_pair_trajectories, joint_two_time_distribution, pair_velocity_field, sample_ensemble,
    Complex64, DensityOperator, Grid1D, HOEigenbasis, OscillatorModes, OscillatorParams,
    PairConfiguration, Result, SpectralSource, TwoTimeJointDistribution, WaveFunction1D,
};

use crate::config::{Scenario, ScenarioConfig};
use crate::output::CsvTable;
use crate::report::{Metric, RunReport};

/// Number of ensemble members written to trajectory tables.
const TRAJECTORY_MEMBERS: usize = 16;
const TRAJECTORY_TIMES: usize = 65;
const PAIR_COUNT: usize = 8;
const PAIR_TIMES: usize = 101;

pub(crate) fn run(config: &ScenarioConfig, report: &mut RunReport, tables: &mut Vec<CsvTable>) -> Result<()> {
    match config.scenario {
        Scenario::NeumaierCorrelations => neumaier(config, report, tables),
        Scenario::MeasurementChain => measurement_chain(config, report, tables),
        Scenario::GhoseTwoSlit => ghose(config, report, tables),
        Scenario::Equivariance => equivariance(config, report, tables),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()
}

fn ground_spread(p: &OscillatorParams) -> f64 {
    p.hbar() / (2.0 * p.mass() * p.omega())
}

fn setup(config: &ScenarioConfig) -> (OscillatorParams, Grid1D) {
    let p = config.oscillator().expect("validated config");
    let g = config.grid().expect("validated config");
    (p, g)
}

fn distribution_table(name: &str, grid: &Grid1D, p: &impl Fn(usize, usize) -> f64) -> CsvTable {
    let xs = grid.points();
    let mut t = CsvTable::new(name, ["x", "x_prime", "p"]);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &xp) in xs.iter().enumerate() {
            t.push(vec![x, xp, p(i, j)]);
        }
    }
    t
}

fn trace_table(name: &str, d: &TwoTimeJointDistribution) -> CsvTable {
    distribution_table(name, &d.grid, &|i, j| d.p[(i, j)])
}

fn trajectory_table<'a>(
    name: &str,
    starts: &[f64],
    source: &SpectralSource<'a>,
    times: &[f64],
    params: &OscillatorParams,
) -> Result<CsvTable> {
    let header = std::iter::once("t".to_string()).chain((0..starts.len()).map(|k| format!("x{k}")));
    let mut t = CsvTable::new(name, header);
    let paths = starts
        .iter()
        .map(|&x0| integrate_trajectory(x0, source, times, params, DEFAULT_TOL))
        .collect::<Result<Vec<_>>>()?;
    for (k, &time) in times.iter().enumerate() {
        t.push(std::iter::once(time).chain(paths.iter().map(|p| p.positions()[k])).collect());
    }
    Ok(t)
}

fn max_abs_diff(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn neumaier(config: &ScenarioConfig, report: &mut RunReport, tables: &mut Vec<CsvTable>) -> Result<()> {
    let (params, grid) = setup(config);
    let basis = HOEigenbasis::new(params, grid, config.nmax);
    let modes = OscillatorModes::new(params, grid)?;
    let psi0 = ho_eigenstate(0, &params, &grid)?;
    let period = params.period();
    let half = 0.5 * period;
    let t1 = config.t1_frac * period;
    let tau = config.tau_frac * period;
    let spread = ground_spread(&params);

    report.metric("x2_quadrature", Metric::new(psi0.expectation(|x| x * x), spread, 1e-10));

    let xm = basis.position_matrix();
    let xh = basis.heisenberg_position(half);
    let identity_dev = xh.iter().zip(xm.iter()).map(|(h, x)| (h + Complex64::new(*x, 0.0)).norm()).fold(0.0, f64::max);
    report.metric("heisenberg_identity_max_abs_dev", Metric::at_most(identity_dev, 1e-8));

    let quantum = heisenberg_two_time_product(&psi0, t1, half, &basis)?;
    report.metric("quantum_corr_halfT", Metric::new(quantum.re, -spread, 1e-6));
    report.observe("quantum_corr_halfT_imag", quantum.im);

    let bohm = bohmian_two_time_expectation(&psi0, t1, half, config.samples, config.seed, &basis)?;
    report.metric("bohmian_corr_halfT", Metric::new(bohm.best(), spread, 1e-6));
    report.observe("bohmian_corr_halfT_monte_carlo", bohm.monte_carlo);

    let rho = DensityOperator::pure(&psi0)?;
    let at_half = joint_two_time_distribution(&rho, t1, half, &modes)?;
    report.metric("trace_corr_halfT", Metric::new(correlation_from_distribution(&at_half), -spread, 1e-5));

    let at_tau = joint_two_time_distribution(&rho, t1, tau, &modes)?;
    let heis_tau = heisenberg_two_time_product(&psi0, t1, tau, &basis)?;
    report.observe("sequential_corr_tau", correlation_from_distribution(&at_tau));
    report.observe("heisenberg_corr_tau_real", heis_tau.re);
    report.observe("heisenberg_corr_tau_imag", heis_tau.im);
    report.observe("max_ket_deficit", at_tau.max_ket_deficit);
    tables.push(trace_table("distribution.csv", &at_tau));

    let members = sample_ensemble(&psi0, TRAJECTORY_MEMBERS, config.seed)?;
    let source = SpectralSource::new(&psi0, &basis)?;
    let end = t1 + half.max(tau);
    let times = linspace(0.0, end, TRAJECTORY_TIMES);
    tables.push(trajectory_table("trajectories.csv", &members.initial_positions, &source, &times, &params)?);
    Ok(())
}

fn measurement_chain(config: &ScenarioConfig, report: &mut RunReport, tables: &mut Vec<CsvTable>) -> Result<()> {
    let (params, grid) = setup(config);
    let modes = OscillatorModes::new(params, grid)?;
    let basis = HOEigenbasis::new(params, grid, config.nmax);
    let psi0 = ho_eigenstate(0, &params, &grid)?;
    let rho = DensityOperator::pure(&psi0)?;
    let half = 0.5 * params.period();
    let tau = config.tau_frac * params.period();
    let spread = ground_spread(&params);

    let (state, pointer) = run_pipeline(&psi0, tau, &modes)?;
    let trace = joint_two_time_distribution(&rho, 0.0, tau, &modes)?;
    let dev = max_abs_diff(pointer.p.iter().copied(), trace.p.iter().copied());
    report.metric("pipeline_vs_trace_max_abs_dev", Metric::at_most(dev, 1e-8));
    report.observe("pointer_corr_tau", pointer.correlation());
    report.observe("trace_corr_tau", correlation_from_distribution(&trace));
    report.observe("heisenberg_corr_tau_real", heisenberg_two_time_product(&psi0, 0.0, tau, &basis)?.re);
    report.observe("pipeline_branches", state.occupied() as f64);
    report.observe("pipeline_total_probability", state.total_probability());
    report.observe("pipeline_truncation_deficit", state.truncation_deficit());

    let (pointer_half, trace_half) = if tau == half {
        (pointer.clone(), trace.clone())
    } else {
        (run_pipeline(&psi0, half, &modes)?.1, joint_two_time_distribution(&rho, 0.0, half, &modes)?)
    };
    report.metric("pointer_corr_halfT", Metric::new(pointer_half.correlation(), -spread, 1e-5));
    report.metric("trace_corr_halfT", Metric::new(correlation_from_distribution(&trace_half), -spread, 1e-5));

    tables.push(distribution_table("pointer_distribution.csv", &grid, &|i, j| pointer.p[(i, j)]));
    tables.push(trace_table("trace_distribution.csv", &trace));
    Ok(())
}

fn ghose(config: &ScenarioConfig, report: &mut RunReport, tables: &mut Vec<CsvTable>) -> Result<()> {
    let params = config.slit().expect("validated config");
    let check = ghose_claim_check(&params, config.samples, config.seed)?;
    let scale = check.scale;
    report.metric("sum_identity_max_abs_dev", Metric::at_most(check.max_abs_dev_analytic, 1e-12 * scale));
    report.metric("fd_sum_identity_max_abs_dev", Metric::at_most(check.max_abs_dev_fd, 1e-8 * scale));
    report.metric("nonvanishing_sum_fraction", Metric::new(check.nonvanishing_fraction(), 1.0, 0.0));
    report.observe("velocity_scale", scale);
    report.observe("sum_identity_median_abs_dev", check.median_abs_dev_analytic);
    report.observe("fd_sum_identity_median_abs_dev", check.median_abs_dev_fd);
    report.observe("skipped_near_node_fraction", check.skipped_fraction());
    report.observe("eligible_samples", check.eligible as f64);

    let mut field = CsvTable::new("velocity_field.csv", ["x1", "x2", "v1", "v2", "vsum", "predicted_vsum"]);
    for s in &check.samples {
        let v = pair_velocity_field(&PairConfiguration::new(s.x1, s.x2, &params)?, &params)?;
        field.push(vec![s.x1, s.x2, v.v1, v.v2, v.sum(), s.predicted_sum]);
    }
    tables.push(field);

    // Pairs that stay inside the paraxial window up to pair_t_end.
    let rate = params.sum_rate();
    let growth = (rate * config.pair_t_end).exp();
    let times = linspace(0.0, config.pair_t_end, PAIR_TIMES);
    let starts: Vec<_> = check
        .samples
        .iter()
        .filter(|s| s.x1.abs().max(s.x2.abs()) * growth < 0.9 * params.window() && (s.x1 + s.x2).abs() > 1e-3)
        .take(PAIR_COUNT)
        .collect();
    let mut worst: f64 = 0.0;
    let mut first = None;
    for s in &starts {
        let tr = integrate_pair_trajectories(&PairConfiguration::new(s.x1, s.x2, &params)?, &params, &times, 1e-12)?;
        let s0 = s.x1 + s.x2;
        for (t, sum) in times.iter().zip(tr.sums()) {
            let exact = s0 * (rate * t).exp();
            worst = worst.max(((sum - exact) / exact).abs());
        }
        first.get_or_insert(tr);
    }
    report.metric("sum_trajectory_max_rel_dev", Metric::at_most(if starts.is_empty() { f64::NAN } else { worst }, 1e-6));
    report.observe("sum_trajectory_pairs", starts.len() as f64);
    if let Some(tr) = first {
        let mut t = CsvTable::new("pair_trajectories.csv", ["t", "x1", "x2"]);
        for (k, &time) in times.iter().enumerate() {
            t.push(vec![time, tr.first.positions()[k], tr.second.positions()[k]]);
        }
        tables.push(t);
    }
    Ok(())
}

fn equivariance(config: &ScenarioConfig, report: &mut RunReport, tables: &mut Vec<CsvTable>) -> Result<()> {
    let (params, grid) = setup(config);
    let basis = HOEigenbasis::new(params, grid, config.nmax);
    let period = params.period();
    let one = Complex64::new(1.0, 0.0);
    let ground = ho_eigenstate(0, &params, &grid)?;
    let two_state = basis.superposition(&[one, one])?;
    let displaced = displaced_ground_state(config.shift, &params, &grid)?;

    let cases: [(&str, &WaveFunction1D, f64); 3] =
        [("ground", &ground, period), ("two_state", &two_state, 0.5 * period), ("displaced", &displaced, period)];
    for (k, (name, psi, t_end)) in cases.iter().enumerate() {
        let run = equivariance_run(psi, *t_end, config.samples, config.seed.wrapping_add(k as u64), &basis, DEFAULT_TOL)?;
        report.metric(&format!("ks_{name}"), Metric::at_most(run.ks, 0.03));
    }

    let starts = sample_ensemble(&ground, 100, config.seed.wrapping_add(3))?;
    let source = SpectralSource::new(&ground, &basis)?;
    let times = linspace(0.0, period, 17);
    let mut drift: f64 = 0.0;
    for &x0 in &starts.initial_positions {
        drift = drift.max(integrate_trajectory(x0, &source, &times, &params, DEFAULT_TOL)?.max_displacement());
    }
    report.metric("ground_trajectory_max_displacement", Metric::at_most(drift, 1e-9));

    let members = sample_ensemble(&two_state, TRAJECTORY_MEMBERS, config.seed.wrapping_add(1))?;
    let source = SpectralSource::new(&two_state, &basis)?;
    let times = linspace(0.0, 0.5 * period, TRAJECTORY_TIMES);
    tables.push(trajectory_table("trajectories.csv", &members.initial_positions, &source, &times, &params)?);
    Ok(())
}
