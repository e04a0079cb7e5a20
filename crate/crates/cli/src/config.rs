//! Experiment configuration: a flat, sectioned key = value file in which
//! every key has a default, so an empty or missing file is a valid setup.
//!
//! Recognized sections and keys (with defaults):
//!
//! ```ini
//! [run]
//! pulses = 10000        # realizations per run
//! master_seed = 1       # seeds every pulse deterministically
//! threads = 0           # worker threads; 0 = machine parallelism
//! solver = fd           # fd | analytic (analytic needs pump_offset_deg = 0)
//!
//! [crystal]
//! pump_offset_deg = 0.0 # pump polarization offset from the symmetric axis
//!
//! [grid]
//! n_z = 348             # axial steps
//! n_tau = 200           # time steps across the window
//! length = 1.0          # crystal length, normalized units
//! window = 5.0          # time window in phonon lifetimes
//!
//! [gain]
//! total_gain = 34.0     # dimensionless G = gain rate x window x length
//! gamma = 1.0           # phonon decay rate
//! rho = 1.0             # phonon mode density entering the noise strength
//!
//! [digitizer]
//! enabled = false
//! floor_rel = 0.02      # acceptance floor, relative to the mean pulse energy
//! ceiling_rel = 5.0     # acceptance ceiling, same scale
//! noise_rel = 0.0       # additive read-noise sigma, same scale
//!
//! [calibration]
//! eta = 1.0                   # channel balance applied when estimating angles
//! vertical_transmission = 1.0 # synthetic loss on the vertical arm
//! ```
//!
//! Blank lines and lines starting with `#` or `;` are ignored. Unknown
//! sections or keys, duplicate keys, and unparseable values are errors that
//! name the offending line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ramanpol_core::engine::{defaults, SimConfig, SimGrid, Solver};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    FiniteDifference,
    Analytic,
}

/// Fully resolved configuration: file values over defaults, flag overrides
/// over file values.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ExperimentConfig {
    pub pulses: usize,
    pub master_seed: u64,
    /// Worker threads; 0 means machine parallelism. Not part of the config
    /// hash because it cannot change any output byte.
    pub threads: usize,
    pub solver: String,
    pub pump_offset_deg: f64,
    pub n_z: usize,
    pub n_tau: usize,
    pub length: f64,
    pub window: f64,
    pub total_gain: f64,
    pub gamma: f64,
    pub rho: f64,
    pub digitizer_enabled: bool,
    pub digitizer_floor_rel: f64,
    pub digitizer_ceiling_rel: f64,
    pub digitizer_noise_rel: f64,
    pub eta: f64,
    pub vertical_transmission: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pulses: 10_000,
            master_seed: 1,
            threads: 0,
            solver: "fd".to_owned(),
            pump_offset_deg: 0.0,
            n_z: defaults::N_Z,
            n_tau: defaults::N_TAU,
            length: defaults::LENGTH,
            window: defaults::WINDOW,
            total_gain: defaults::TOTAL_GAIN,
            gamma: defaults::GAMMA,
            rho: defaults::RHO,
            digitizer_enabled: false,
            digitizer_floor_rel: 0.02,
            digitizer_ceiling_rel: 5.0,
            digitizer_noise_rel: 0.0,
            eta: 1.0,
            vertical_transmission: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            cfg.apply_text(&text)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Flag overrides; `full` raises the pulse count to the full-scale run
    /// unless an explicit `--pulses` was given.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        pulses: Option<usize>,
        threads: Option<usize>,
        full: bool,
    ) -> Result<()> {
        if let Some(s) = seed {
            self.master_seed = s;
        }
        match (pulses, full) {
            (Some(n), _) => self.pulses = n,
            (None, true) => self.pulses = 100_000,
            (None, false) => {}
        }
        if let Some(t) = threads {
            self.threads = t;
        }
        self.validate()
    }

    fn validate(&self) -> Result<()> {
        if self.pulses == 0 {
            return Err(CliError::usage("run.pulses must be at least 1"));
        }
        if self.solver != "fd" && self.solver != "analytic" {
            return Err(CliError::usage(format!(
                "run.solver must be 'fd' or 'analytic', got '{}'",
                self.solver
            )));
        }
        Ok(())
    }

    fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::usage(format!("config line {line_no}: unclosed section header '{line}'")))?
                    .trim();
                if !KNOWN_SECTIONS.contains(&name) {
                    return Err(CliError::usage(format!(
                        "config line {line_no}: unknown section [{name}]; expected one of {}",
                        KNOWN_SECTIONS.join(", ")
                    )));
                }
                section = name.to_owned();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!("config line {line_no}: expected 'key = value', got '{line}'"))
            })?;
            let key = key.trim();
            let value = value.trim();
            if section.is_empty() {
                return Err(CliError::usage(format!(
                    "config line {line_no}: key '{key}' appears before any [section] header"
                )));
            }
            let field = format!("{section}.{key}");
            if let Some(first) = seen.insert(field.clone(), line_no) {
                return Err(CliError::usage(format!(
                    "config line {line_no}: duplicate key {field} (first set on line {first})"
                )));
            }
            self.set(&field, value, line_no)?;
        }
        Ok(())
    }

    fn set(&mut self, field: &str, value: &str, line_no: usize) -> Result<()> {
        fn parse<T: std::str::FromStr>(field: &str, value: &str, line_no: usize, kind: &str) -> Result<T> {
            value.parse().map_err(|_| {
                CliError::usage(format!(
                    "config line {line_no}: invalid value '{value}' for {field} (expected {kind})"
                ))
            })
        }
        match field {
            "run.pulses" => self.pulses = parse(field, value, line_no, "a positive integer")?,
            "run.master_seed" => self.master_seed = parse(field, value, line_no, "an unsigned integer")?,
            "run.threads" => self.threads = parse(field, value, line_no, "an unsigned integer")?,
            "run.solver" => self.solver = value.to_owned(),
            "crystal.pump_offset_deg" => self.pump_offset_deg = parse(field, value, line_no, "a number")?,
            "grid.n_z" => self.n_z = parse(field, value, line_no, "a positive integer")?,
            "grid.n_tau" => self.n_tau = parse(field, value, line_no, "a positive integer")?,
            "grid.length" => self.length = parse(field, value, line_no, "a number")?,
            "grid.window" => self.window = parse(field, value, line_no, "a number")?,
            "gain.total_gain" => self.total_gain = parse(field, value, line_no, "a number")?,
            "gain.gamma" => self.gamma = parse(field, value, line_no, "a number")?,
            "gain.rho" => self.rho = parse(field, value, line_no, "a number")?,
            "digitizer.enabled" => self.digitizer_enabled = parse(field, value, line_no, "true or false")?,
            "digitizer.floor_rel" => self.digitizer_floor_rel = parse(field, value, line_no, "a number")?,
            "digitizer.ceiling_rel" => self.digitizer_ceiling_rel = parse(field, value, line_no, "a number")?,
            "digitizer.noise_rel" => self.digitizer_noise_rel = parse(field, value, line_no, "a number")?,
            "calibration.eta" => self.eta = parse(field, value, line_no, "a number")?,
            "calibration.vertical_transmission" => {
                self.vertical_transmission = parse(field, value, line_no, "a number")?
            }
            _ => {
                return Err(CliError::usage(format!(
                    "config line {line_no}: unknown key {field}"
                )))
            }
        }
        Ok(())
    }

    /// Canonical listing of every hashed field. Thread count and output
    /// paths are excluded: they cannot affect output bytes.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "calibration.eta = {}", self.eta);
        let _ = writeln!(s, "calibration.vertical_transmission = {}", self.vertical_transmission);
        let _ = writeln!(s, "crystal.pump_offset_deg = {}", self.pump_offset_deg);
        let _ = writeln!(s, "digitizer.ceiling_rel = {}", self.digitizer_ceiling_rel);
        let _ = writeln!(s, "digitizer.enabled = {}", self.digitizer_enabled);
        let _ = writeln!(s, "digitizer.floor_rel = {}", self.digitizer_floor_rel);
        let _ = writeln!(s, "digitizer.noise_rel = {}", self.digitizer_noise_rel);
        let _ = writeln!(s, "gain.gamma = {}", self.gamma);
        let _ = writeln!(s, "gain.rho = {}", self.rho);
        let _ = writeln!(s, "gain.total_gain = {}", self.total_gain);
        let _ = writeln!(s, "grid.length = {}", self.length);
        let _ = writeln!(s, "grid.n_tau = {}", self.n_tau);
        let _ = writeln!(s, "grid.n_z = {}", self.n_z);
        let _ = writeln!(s, "grid.window = {}", self.window);
        let _ = writeln!(s, "run.master_seed = {}", self.master_seed);
        let _ = writeln!(s, "run.pulses = {}", self.pulses);
        let _ = writeln!(s, "run.solver = {}", self.solver);
        s
    }

    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    pub fn solver_kind(&self) -> SolverKind {
        if self.solver == "analytic" {
            SolverKind::Analytic
        } else {
            SolverKind::FiniteDifference
        }
    }

    /// Builds the engine configuration this experiment describes.
    pub fn sim_config(&self) -> Result<SimConfig<f64>> {
        let grid = SimGrid::new(self.n_z, self.n_tau, self.length, self.window)?;
        let mut sim =
            SimConfig::with_total_gain(self.pump_offset_deg.to_radians(), self.total_gain, grid)?;
        sim.gamma = self.gamma;
        sim.rho = self.rho;
        sim.solver = match self.solver_kind() {
            SolverKind::FiniteDifference => Solver::FiniteDifference,
            SolverKind::Analytic => Solver::Analytic,
        };
        Ok(sim)
    }
}

const KNOWN_SECTIONS: [&str; 6] = ["run", "crystal", "grid", "gain", "digitizer", "calibration"];

#[cfg(test)]
mod tests {
    use super::*;

    fn from_text(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn empty_text_yields_the_documented_defaults() {
        let cfg = from_text("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.pulses, 10_000);
        assert_eq!(cfg.n_tau, 200);
    }

    #[test]
    fn values_parse_and_comments_are_ignored() {
        let cfg = from_text(
            "# experiment\n[run]\npulses = 250\nsolver = analytic\n; note\n[gain]\ntotal_gain = 4.5\n",
        )
        .unwrap();
        assert_eq!(cfg.pulses, 250);
        assert_eq!(cfg.solver_kind(), SolverKind::Analytic);
        assert_eq!(cfg.total_gain, 4.5);
    }

    #[test]
    fn errors_name_the_offending_line_and_field() {
        let err = from_text("[run]\npulses = soon\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("run.pulses"), "{msg}");

        let err = from_text("[orbit]\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");

        let err = from_text("[run]\nwat = 1\n").unwrap_err();
        assert!(err.to_string().contains("run.wat"), "{err}");

        let err = from_text("pulses = 3\n").unwrap_err();
        assert!(err.to_string().contains("before any [section]"), "{err}");

        let err = from_text("[run]\npulses = 3\npulses = 4\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duplicate") && msg.contains("line 3") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn overrides_take_precedence_and_full_scales_up() {
        let mut cfg = from_text("[run]\npulses = 7\nmaster_seed = 3\n").unwrap();
        cfg.apply_overrides(Some(9), None, Some(2), true).unwrap();
        assert_eq!(cfg.master_seed, 9);
        assert_eq!(cfg.pulses, 100_000);
        assert_eq!(cfg.threads, 2);

        let mut cfg = from_text("").unwrap();
        cfg.apply_overrides(None, Some(55), None, true).unwrap();
        assert_eq!(cfg.pulses, 55, "--pulses wins over --full");
    }

    #[test]
    fn hash_covers_physics_but_not_threads() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.threads = 8;
        assert_eq!(a.sha256(), b.sha256());
        b.total_gain += 1e-9;
        assert_ne!(a.sha256(), b.sha256());
        let mut c = a.clone();
        c.master_seed = 2;
        assert_ne!(a.sha256(), c.sha256());
    }

    #[test]
    fn zero_pulses_is_rejected() {
        assert!(from_text("[run]\npulses = 0\n").is_err());
    }

    #[test]
    fn sim_config_mirrors_the_fields() {
        let cfg = from_text("[grid]\nn_z = 64\nn_tau = 64\n[gain]\ntotal_gain = 4\n").unwrap();
        let sim = cfg.sim_config().unwrap();
        assert!((sim.total_gain().unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(sim.solver, Solver::FiniteDifference);
    }
}
