//! Scenario configuration: built-in defaults, a flat `key = value` file, and
//! command-line overrides, resolved in that order.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use pwlab_core::{Grid1D, OscillatorParams, SlitParams};
use serde::Serialize;

/// Bumped whenever a built-in default changes.
pub const DEFAULTS_VERSION: &str = "pwlab-defaults/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    NeumaierCorrelations,
    MeasurementChain,
    GhoseTwoSlit,
    Equivariance,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::NeumaierCorrelations => "neumaier-correlations",
            Scenario::MeasurementChain => "measurement-chain",
            Scenario::GhoseTwoSlit => "ghose-two-slit",
            Scenario::Equivariance => "equivariance",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Scenario::NeumaierCorrelations, Scenario::MeasurementChain, Scenario::GhoseTwoSlit, Scenario::Equivariance]
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| invalid(format!("unknown scenario '{s}'")))
    }
}

/// Every parameter a scenario may read. Unused ones are still echoed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub grid_n: usize,
    pub domain: [f64; 2],
    pub nmax: usize,
    pub tau_frac: f64,
    pub t1_frac: f64,
    pub samples: usize,
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
    pub shift: f64,
    pub slit_k: f64,
    pub slit_a: f64,
    pub slit_l: f64,
    pub pair_t_end: f64,
    pub out: PathBuf,
}

/// Optional values from one layer (file or flags).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid_n: Option<usize>,
    pub domain: Option<[f64; 2]>,
    pub nmax: Option<usize>,
    pub tau_frac: Option<f64>,
    pub t1_frac: Option<f64>,
    pub samples: Option<usize>,
    pub mass: Option<f64>,
    pub omega: Option<f64>,
    pub hbar: Option<f64>,
    pub shift: Option<f64>,
    pub slit_k: Option<f64>,
    pub slit_a: Option<f64>,
    pub slit_l: Option<f64>,
    pub pair_t_end: Option<f64>,
    pub out: Option<PathBuf>,
}

pub const CONFIG_KEYS: &[&str] = &[
    "seed", "grid-n", "domain", "nmax", "tau-frac", "t1-frac", "samples", "mass", "omega", "hbar",
    "shift", "slit-k", "slit-a", "slit-l", "pair-t-end", "out",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| invalid(format!("bad value '{value}' for '{key}'")))
}

pub fn parse_domain(value: &str) -> Result<[f64; 2], ConfigError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([parse_value("domain", a)?, parse_value("domain", b)?]),
        _ => Err(invalid(format!("domain must be MIN,MAX, got '{value}'"))),
    }
}

impl Overrides {
    /// Parses a flat `key = value` file. `#` starts a comment; keys may not repeat.
    pub fn parse_file(text: &str) -> Result<Self, ConfigError> {
        let mut o = Overrides::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            if seen.contains(&key) {
                return Err(invalid(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            o.set(&key, value).map_err(|e| invalid(format!("line {}: {e}", lineno + 1)))?;
            seen.push(key);
        }
        Ok(o)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "seed" => self.seed = Some(parse_value(key, value)?),
            "grid-n" => self.grid_n = Some(parse_value(key, value)?),
            "domain" => self.domain = Some(parse_domain(value)?),
            "nmax" => self.nmax = Some(parse_value(key, value)?),
            "tau-frac" => self.tau_frac = Some(parse_value(key, value)?),
            "t1-frac" => self.t1_frac = Some(parse_value(key, value)?),
            "samples" => self.samples = Some(parse_value(key, value)?),
            "mass" => self.mass = Some(parse_value(key, value)?),
            "omega" => self.omega = Some(parse_value(key, value)?),
            "hbar" => self.hbar = Some(parse_value(key, value)?),
            "shift" => self.shift = Some(parse_value(key, value)?),
            "slit-k" => self.slit_k = Some(parse_value(key, value)?),
            "slit-a" => self.slit_a = Some(parse_value(key, value)?),
            "slit-l" => self.slit_l = Some(parse_value(key, value)?),
            "pair-t-end" => self.pair_t_end = Some(parse_value(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(invalid(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

impl ScenarioConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        let grid_n = match scenario {
            Scenario::MeasurementChain => 128,
            _ => 512,
        };
        ScenarioConfig {
            scenario,
            seed: 20_240_601,
            grid_n,
            domain: [-8.0, 8.0],
            nmax: 40,
            tau_frac: 0.5,
            t1_frac: 0.0,
            samples: 10_000,
            mass: 1.0,
            omega: 1.0,
            hbar: 1.0,
            shift: 2.0,
            slit_k: 100.0,
            slit_a: 1.0,
            slit_l: 100.0,
            pair_t_end: 1.0,
            out: PathBuf::from(format!("pwlab-out/{scenario}")),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        take!(seed, grid_n, domain, nmax, tau_frac, t1_frac, samples, mass, omega, hbar, shift, slit_k, slit_a, slit_l, pair_t_end, out);
    }

    /// Defaults, then the file layer, then the flag layer; validated.
    pub fn resolve(scenario: Scenario, file: &Overrides, flags: &Overrides) -> Result<Self, ConfigError> {
        let mut c = Self::defaults(scenario);
        c.apply(file);
        c.apply(flags);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(16..=2048).contains(&self.grid_n) {
            return Err(invalid(format!("grid-n must be in 16..=2048, got {}", self.grid_n)));
        }
        if self.scenario == Scenario::MeasurementChain && self.grid_n > 512 {
            return Err(invalid(format!("measurement-chain grid-n must be at most 512, got {}", self.grid_n)));
        }
        let [lo, hi] = self.domain;
        if !(lo.is_finite() && hi.is_finite() && hi > 0.0 && lo == -hi) {
            return Err(invalid(format!("domain must be symmetric -L,L with L > 0, got {lo},{hi}")));
        }
        if !(1..=200).contains(&self.nmax) {
            return Err(invalid(format!("nmax must be in 1..=200, got {}", self.nmax)));
        }
        for (name, v) in [("tau-frac", self.tau_frac), ("t1-frac", self.t1_frac), ("pair-t-end", self.pair_t_end)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if !self.shift.is_finite() || self.shift.abs() >= 0.5 * hi {
            return Err(invalid(format!("shift must satisfy |shift| < half the domain, got {}", self.shift)));
        }
        let min_samples = match self.scenario {
            Scenario::Equivariance => 1000,
            Scenario::GhoseTwoSlit => 100,
            _ => 1,
        };
        if self.samples < min_samples || self.samples > 10_000_000 {
            return Err(invalid(format!(
                "samples must be in {min_samples}..=10000000 for {}, got {}",
                self.scenario, self.samples
            )));
        }
        self.grid()?;
        self.oscillator()?;
        self.slit()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid1D, ConfigError> {
        Grid1D::new(self.domain[0], self.domain[1], self.grid_n).map_err(|e| invalid(e.to_string()))
    }

    pub fn oscillator(&self) -> Result<OscillatorParams, ConfigError> {
        OscillatorParams::new(self.mass, self.omega, self.hbar).map_err(|e| invalid(e.to_string()))
    }

    pub fn slit(&self) -> Result<SlitParams, ConfigError> {
        SlitParams::new(self.slit_k, self.slit_a, self.slit_l, 1.0, 1.0).map_err(|e| invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = Overrides::parse_file("# comment\nseed = 7\ngrid_n=256 # trailing\n\ndomain = -6, 6\n").unwrap();
        let flags = Overrides { seed: Some(9), ..Default::default() };
        let c = ScenarioConfig::resolve(Scenario::NeumaierCorrelations, &file, &flags).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.grid_n, 256);
        assert_eq!(c.domain, [-6.0, 6.0]);
        assert_eq!(c.nmax, 40);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(Overrides::parse_file("colour = red").unwrap_err().0.contains("unknown key"));
        assert!(Overrides::parse_file("seed=1\nseed=2").unwrap_err().0.contains("duplicate"));
        assert!(Overrides::parse_file("seed").is_err());
        assert!(Overrides::parse_file("seed = x").is_err());
    }

    #[test]
    fn validation() {
        let none = Overrides::default();
        let bad = |o: Overrides| ScenarioConfig::resolve(Scenario::Equivariance, &o, &none).is_err();
        assert!(bad(Overrides { domain: Some([-8.0, 7.0]), ..Default::default() }));
        assert!(bad(Overrides { grid_n: Some(4), ..Default::default() }));
        assert!(bad(Overrides { samples: Some(10), ..Default::default() }));
        assert!(bad(Overrides { tau_frac: Some(-1.0), ..Default::default() }));
        assert!(bad(Overrides { slit_l: Some(5.0), ..Default::default() }));
        assert!(bad(Overrides { mass: Some(0.0), ..Default::default() }));
        assert!(!bad(Overrides::default()));
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in ["neumaier-correlations", "measurement-chain", "ghose-two-slit", "equivariance"] {
            assert_eq!(s.parse::<Scenario>().unwrap().name(), s);
        }
        assert_eq!(ScenarioConfig::defaults(Scenario::MeasurementChain).grid_n, 128);
    }
}
