//! Scenario configuration: a plain `key = value` file with section headers.
//!
//! ```text
//! # comment
//! [geometry]
//! length = 1.0
//! nz = 40
//! ```
//!
//! Every key is optional and defaults to [`ScenarioConfig::default`].
//! Unknown sections or keys, duplicates and unparsable values are errors
//! carrying the offending line number.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::coupler::CouplingConfig;
use crate::fluid::{FluidConfig, InflowPulse};
use crate::params::PhysicalParams;
use crate::simulation::WallMode;
use crate::windkessel::WindkesselParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub length: f64,
    pub radius: f64,
    pub nz: usize,
    pub nr: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseConfig {
    pub amplitude: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Steps between VTK snapshots; 0 disables them.
    pub snapshot_interval: usize,
    /// Axial positions of the wall displacement probes, cm.
    pub probes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: Geometry,
    pub physical: PhysicalParams,
    pub coupling: CouplingConfig,
    pub wall_mode: WallMode,
    pub stab_delta: f64,
    pub pulse: PulseConfig,
    pub windkessel: WindkesselParams,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let physical = PhysicalParams::default();
        let fluid = FluidConfig::default();
        let (amplitude, duration) = match fluid.inflow_pulse {
            InflowPulse::HalfSine {
                amplitude,
                duration,
            } => (amplitude, duration),
            InflowPulse::Constant(p) => (p, 0.0),
        };
        Self {
            geometry: Geometry {
                length: physical.length,
                radius: physical.r0,
                nz: 40,
                nr: 16,
            },
            physical,
            coupling: CouplingConfig::default(),
            wall_mode: WallMode::Compliant,
            stab_delta: fluid.stab_delta,
            pulse: PulseConfig {
                amplitude,
                duration,
            },
            windkessel: WindkesselParams {
                r_p: 200.0,
                c: 1e-4,
                r_d: 2000.0,
                p_venous: 0.0,
            },
            output: OutputConfig {
                directory: PathBuf::from("output"),
                snapshot_interval: 50,
                probes: vec![0.25, 0.5, 0.75],
            },
        }
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        let mut seen: Vec<(String, String)> = Vec::new();

        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let err = |message: String| ConfigError::Parse { line, message };
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{content}`")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(format!("unknown section `[{name}]`")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .clone()
                .ok_or_else(|| err(format!("key `{key}` appears before any section header")))?;
            if seen.iter().any(|(s, k)| *s == sec && k == key) {
                return Err(err(format!("duplicate key `{key}` in [{sec}]")));
            }
            cfg.set(&sec, key, value).map_err(err)?;
            seen.push((sec, key.to_string()));
        }
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        let f = || parse_f64(key, value);
        match (section, key) {
            ("geometry", "length") => self.geometry.length = f()?,
            ("geometry", "radius") => self.geometry.radius = f()?,
            ("geometry", "nz") => self.geometry.nz = parse_usize(key, value)?,
            ("geometry", "nr") => self.geometry.nr = parse_usize(key, value)?,
            ("physical", "rho") => self.physical.rho = f()?,
            ("physical", "rho_w") => self.physical.rho_w = f()?,
            ("physical", "h0") => self.physical.h0 = f()?,
            ("physical", "nu") => self.physical.nu = f()?,
            ("physical", "a") => self.physical.a = f()?,
            ("physical", "b") => self.physical.b = f()?,
            ("physical", "c") => self.physical.c = f()?,
            ("physical", "p0") => self.physical.p0 = f()?,
            ("coupling", "tau") => self.coupling.tau = f()?,
            ("coupling", "theta") => self.coupling.theta = f()?,
            ("coupling", "max_subiters") => self.coupling.max_subiters = parse_usize(key, value)?,
            ("coupling", "dt") => self.coupling.dt = f()?,
            ("coupling", "t_end") => self.coupling.t_end = f()?,
            ("coupling", "wall") => {
                self.wall_mode = match value {
                    "compliant" => WallMode::Compliant,
                    "rigid" => WallMode::Rigid,
                    _ => {
                        return Err(format!(
                            "`wall` must be `compliant` or `rigid`, got `{value}`"
                        ))
                    }
                }
            }
            ("fluid", "stab_delta") => self.stab_delta = f()?,
            ("fluid", "pulse_amplitude") => self.pulse.amplitude = f()?,
            ("fluid", "pulse_duration") => self.pulse.duration = f()?,
            ("windkessel", "r_p") => self.windkessel.r_p = f()?,
            ("windkessel", "c") => self.windkessel.c = f()?,
            ("windkessel", "r_d") => self.windkessel.r_d = f()?,
            ("windkessel", "p_venous") => self.windkessel.p_venous = f()?,
            ("output", "directory") => self.output.directory = PathBuf::from(value),
            ("output", "snapshot_interval") => {
                self.output.snapshot_interval = parse_usize(key, value)?
            }
            ("output", "probes") => {
                self.output.probes = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|v| parse_f64(key, v.trim()))
                        .collect::<Result<_, _>>()?
                }
            }
            _ => return Err(format!("unknown key `{key}` in [{section}]")),
        }
        Ok(())
    }

    /// Physical parameters with the geometry folded in.
    pub fn physical_params(&self) -> PhysicalParams {
        PhysicalParams {
            r0: self.geometry.radius,
            length: self.geometry.length,
            ..self.physical
        }
    }

    pub fn fluid_config(&self) -> FluidConfig {
        FluidConfig {
            nu: self.physical.nu,
            rho: self.physical.rho,
            stab_delta: self.stab_delta,
            inflow_pulse: if self.pulse.amplitude == 0.0 {
                InflowPulse::Constant(0.0)
            } else {
                InflowPulse::HalfSine {
                    amplitude: self.pulse.amplitude,
                    duration: self.pulse.duration,
                }
            },
            p0: self.physical.p0,
            ..FluidConfig::default()
        }
    }

    /// Number of CSV rows, the initial state included.
    pub fn num_records(&self) -> usize {
        self.coupling.num_steps() + 1
    }
}

const SECTIONS: [&str; 6] = [
    "geometry",
    "physical",
    "coupling",
    "fluid",
    "windkessel",
    "output",
];

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("`{key}` expects a number, got `{value}`"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, String> {
    value
        .parse::<usize>()
        .map_err(|_| format!("`{key}` expects a non-negative integer, got `{value}`"))
}

/// Every violated constraint, as `section.key: rule`. Empty when valid.
pub fn validate_config(cfg: &ScenarioConfig) -> Vec<String> {
    let mut out = Vec::new();
    let mut push =
        |section: &str, key: &str, rule: &str| out.push(format!("{section}.{key}: {rule}"));

    let g = &cfg.geometry;
    if !(g.length > 0.0 && g.length.is_finite()) {
        push("geometry", "length", "must be positive");
    }
    if !(g.radius > 0.0 && g.radius.is_finite()) {
        push("geometry", "radius", "must be positive");
    }
    if g.nz < 1 {
        push("geometry", "nz", "must be at least 1");
    }
    if g.nr < 1 {
        push("geometry", "nr", "must be at least 1");
    }
    for (key, rule) in cfg.physical.violations() {
        if key != "radius" && key != "length" {
            push("physical", key, rule);
        }
    }
    for (key, rule) in cfg.coupling.violations() {
        push("coupling", key, rule);
    }
    if !(cfg.stab_delta >= 0.0 && cfg.stab_delta.is_finite()) {
        push("fluid", "stab_delta", "must be non-negative");
    }
    if !cfg.pulse.amplitude.is_finite() {
        push("fluid", "pulse_amplitude", "must be finite");
    }
    if cfg.pulse.amplitude != 0.0 && !(cfg.pulse.duration > 0.0 && cfg.pulse.duration.is_finite()) {
        push("fluid", "pulse_duration", "must be positive");
    }
    if let Err(e) = cfg.windkessel.validate() {
        let text = e.to_string();
        let rule = text.trim_start_matches("invalid Windkessel parameter: ");
        let key = rule.split_whitespace().next().unwrap_or("");
        push("windkessel", key, rule);
    }
    for &z in &cfg.output.probes {
        if !(0.0..=g.length).contains(&z) {
            push(
                "output",
                "probes",
                "probe locations must lie in [0, length]",
            );
            break;
        }
    }
    out
}

impl fmt::Display for ScenarioConfig {
    /// The resolved configuration in the input format; parses back to `self`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let g = &self.geometry;
        let p = &self.physical;
        let c = &self.coupling;
        let w = &self.windkessel;
        let mode = match self.wall_mode {
            WallMode::Compliant => "compliant",
            WallMode::Rigid => "rigid",
        };
        let probes: Vec<String> = self.output.probes.iter().map(|z| z.to_string()).collect();
        let _ = writeln!(
            s,
            "[geometry]\nlength = {}\nradius = {}\nnz = {}\nnr = {}\n",
            g.length, g.radius, g.nz, g.nr
        );
        let _ = writeln!(
            s,
            "[physical]\nrho = {}\nrho_w = {}\nh0 = {}\nnu = {}\na = {}\nb = {}\nc = {}\np0 = {}\n",
            p.rho, p.rho_w, p.h0, p.nu, p.a, p.b, p.c, p.p0
        );
        let _ = writeln!(
            s,
            "[coupling]\ntau = {}\ntheta = {}\nmax_subiters = {}\ndt = {}\nt_end = {}\nwall = {mode}\n",
            c.tau, c.theta, c.max_subiters, c.dt, c.t_end
        );
        let _ = writeln!(
            s,
            "[fluid]\nstab_delta = {}\npulse_amplitude = {}\npulse_duration = {}\n",
            self.stab_delta, self.pulse.amplitude, self.pulse.duration
        );
        let _ = writeln!(
            s,
            "[windkessel]\nr_p = {}\nc = {}\nr_d = {}\np_venous = {}\n",
            w.r_p, w.c, w.r_d, w.p_venous
        );
        let _ = write!(
            s,
            "[output]\ndirectory = {}\nsnapshot_interval = {}\nprobes = {}\n",
            self.output.directory.display(),
            self.output.snapshot_interval,
            probes.join(", ")
        );
        f.write_str(&s)
    }
}
