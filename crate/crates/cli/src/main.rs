use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pwlab::{
    config::parse_domain, configure_threads, emit_plot_data, fmt_g17, run_scenario, Overrides, Scenario,
    ScenarioConfig, EXIT_INVALID_CONFIG, EXIT_NUMERICAL_FAILURE,
};

/// Pilot-wave and sequential-measurement scenarios with JSON and CSV output.
#[derive(Debug, Parser)]
#[command(name = "pwlab", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    scenario: Scenario,
    /// Flat key = value file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Symmetric interval, e.g. -8,8.
    #[arg(long, value_parser = parse_domain_arg, allow_hyphen_values = true)]
    domain: Option<[f64; 2]>,
    #[arg(long)]
    nmax: Option<usize>,
    /// Delay between measurements as a fraction of the oscillator period.
    #[arg(long = "tau-frac")]
    tau_frac: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_domain_arg(s: &str) -> Result<[f64; 2], String> {
    parse_domain(s).map_err(|e| e.to_string())
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("pwlab: invalid configuration: {msg}");
    ExitCode::from(EXIT_INVALID_CONFIG as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_INVALID_CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    if let Err(e) = configure_threads(std::env::var("PWLAB_THREADS").ok().as_deref()) {
        return config_error(e);
    }
    let file = match &cli.config {
        None => Overrides::default(),
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match Overrides::parse_file(&text) {
                Ok(o) => o,
                Err(e) => return config_error(format!("{}: {e}", path.display())),
            },
            Err(e) => return config_error(format!("{}: {e}", path.display())),
        },
    };
    let flags = Overrides {
        seed: cli.seed,
        grid_n: cli.grid_n,
        domain: cli.domain,
        nmax: cli.nmax,
        tau_frac: cli.tau_frac,
        samples: cli.samples,
        out: cli.out,
        ..Default::default()
    };
    let config = match ScenarioConfig::resolve(cli.scenario, &file, &flags) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };

    let outcome = run_scenario(&config);
    if let Err(e) = emit_plot_data(&outcome, &config.out) {
        eprintln!("pwlab: writing outputs failed: {e}");
        return ExitCode::from(EXIT_NUMERICAL_FAILURE as u8);
    }
    let report = &outcome.report;
    for (name, m) in &report.metrics {
        let verdict = if m.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name} = {} (expected {} ± {})", fmt_g17(m.value), fmt_g17(m.expected), fmt_g17(m.tolerance));
    }
    if let Some(err) = &report.error {
        eprintln!("pwlab: {}: {}", err.kind, err.message);
    }
    println!("{} finished in {:.3} s; outputs in {}", report.scenario, report.wall_time_s, config.out.display());
    ExitCode::from(outcome.exit_code() as u8)
}
