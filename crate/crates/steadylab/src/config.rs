//! Run configuration: TOML (or JSON) on disk, validated field by field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use steadylab_core::admissibility::NonlinearWeight;
use steadylab_core::rkrlw::preset;
use steadylab_core::{GrkrlwParams, Grid, Integrator, ModelParams, PerturbedParams, StepOptions};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    Rkrlw,
    Perturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub equation: EquationKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rkrlw: Option<RkrlwSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed: Option<PerturbedSection>,
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(default)]
    pub initial_data: InitialData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RkrlwSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbedSection {
    #[serde(default)]
    pub a: [f64; 5],
    #[serde(default)]
    pub b: [f64; 12],
    #[serde(default = "one")]
    pub m: u32,
    #[serde(default = "two")]
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "one_usize")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    Zero,
    Sech2,
    Gaussian,
    Trig,
    RandomSymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Preset {
        name: PresetName,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c3: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c4: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modes: Option<usize>,
    },
    /// One value per grid node.
    Samples { values: Vec<f64> },
    /// A trajectory JSON file (last snapshot is used) or a whitespace-separated
    /// column of node values; relative paths resolve against the config file.
    File { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        Self::Preset {
            name: PresetName::Zero,
            amplitude: None,
            center: None,
            width: None,
            c3: None,
            c4: None,
            omega: None,
            modes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    /// Overrides `perturbed.b[0]`, `b[1]`, `b[9]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b10: Option<f64>,
    /// Sample values at the case's abscissae instead of reading `initial_data`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Default `v0(0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
    /// Default `v0(pi / (2 omega))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c4: Option<f64>,
    /// Default `sqrt(-z-)` from `b1, b2, b10`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Solved from the frequency-one equations when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_dot: Option<f64>,
    #[serde(default)]
    pub weight: NonlinearWeight,
    /// Simulate the profile and compare the measured speed.
    #[serde(default = "yes")]
    pub dynamic: bool,
    /// Wavelength transits simulated.
    #[serde(default = "five")]
    pub periods: f64,
    #[serde(default = "one_percent")]
    pub speed_tol: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            c3: None,
            c4: None,
            omega: None,
            lambda_dot: None,
            weight: NonlinearWeight::default(),
            dynamic: true,
            periods: 5.0,
            speed_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSection {
    #[serde(default = "twenty")]
    pub bumps: usize,
    #[serde(default = "defect_tol")]
    pub defect_tol: f64,
}

impl Default for MonitorSection {
    fn default() -> Self {
        Self {
            bumps: 20,
            defect_tol: 1e-6,
        }
    }
}

fn one() -> u32 {
    1
}
fn two() -> u32 {
    2
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn five() -> f64 {
    5.0
}
fn one_percent() -> f64 {
    0.01
}
fn twenty() -> usize {
    20
}
fn defect_tol() -> f64 {
    1e-6
}

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let cfg = Self::parse(&text, path.extension().is_some_and(|e| e == "json"))
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok((cfg, base))
    }

    pub fn parse(text: &str, json: bool) -> Result<Self, String> {
        if json {
            serde_json::from_str(text).map_err(|e| e.to_string())
        } else {
            toml::from_str(text).map_err(|e| e.to_string())
        }
    }

    /// Re-checks every module-level invariant, naming the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        Grid::new(self.grid.l, self.grid.n).map_err(|e| bad("grid", e))?;
        match self.equation {
            EquationKind::Rkrlw => {
                self.rkrlw_params()?;
            }
            EquationKind::Perturbed => {
                self.perturbed_params()?;
            }
        }
        if let Some(t) = &self.time {
            if !(t.t_end.is_finite() && t.t_end >= 0.0) {
                return Err(bad("time.t_end", format!("must be finite and nonnegative, got {}", t.t_end)));
            }
            if !(t.dt.is_finite() && t.dt > 0.0) {
                return Err(bad("time.dt", format!("must be positive, got {}", t.dt)));
            }
            if t.snapshot_every == 0 {
                return Err(bad("time.snapshot_every", "must be at least 1"));
            }
            if let Some(f) = t.dealias_fraction {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(bad("time.dealias_fraction", format!("must lie in (0, 1], got {f}")));
                }
            }
        }
        match &self.initial_data {
            InitialData::Samples { values } => {
                if values.len() != self.grid.n {
                    return Err(bad(
                        "initial_data.values",
                        format!("expected {} values (grid.N), got {}", self.grid.n, values.len()),
                    ));
                }
                if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                    return Err(bad(&format!("initial_data.values[{i}]"), "not finite"));
                }
            }
            InitialData::Preset {
                width, omega, modes, ..
            } => {
                if let Some(w) = width {
                    if !(w.is_finite() && *w > 0.0) {
                        return Err(bad("initial_data.width", format!("must be positive, got {w}")));
                    }
                }
                if let Some(w) = omega {
                    if !(w.is_finite() && *w > 0.0) {
                        return Err(bad("initial_data.omega", format!("must be positive, got {w}")));
                    }
                }
                if *modes == Some(0) {
                    return Err(bad("initial_data.modes", "must be at least 1"));
                }
            }
            InitialData::File { .. } => {}
        }
        if let Some(v) = &self.verify {
            if let Some(w) = v.omega {
                if !(w.is_finite() && w > 0.0) {
                    return Err(bad("verify.omega", format!("must be positive, got {w}")));
                }
            }
            if !(v.periods.is_finite() && v.periods > 0.0) {
                return Err(bad("verify.periods", format!("must be positive, got {}", v.periods)));
            }
            if v.speed_tol.is_nan() || v.speed_tol <= 0.0 {
                return Err(bad("verify.speed_tol", "must be positive"));
            }
        }
        if let Some(m) = &self.monitor {
            if m.defect_tol.is_nan() || m.defect_tol <= 0.0 {
                return Err(bad("monitor.defect_tol", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.grid.l, self.grid.n).expect("validated grid")
    }

    pub fn rkrlw_params(&self) -> Result<GrkrlwParams, CliError> {
        let s = self
            .rkrlw
            .as_ref()
            .ok_or_else(|| bad("rkrlw", "section required for equation = \"rkrlw\""))?;
        let p = GrkrlwParams::new(s.a, s.b, s.kappa, s.mu, s.alpha, s.beta, s.m)
            .map_err(|e| bad("rkrlw", e))?;
        if let Some(name) = &s.preset {
            preset(name)
                .and_then(|mask| mask.check(&p))
                .map_err(|e| bad("rkrlw.preset", e))?;
        }
        Ok(p)
    }

    pub fn perturbed_params(&self) -> Result<PerturbedParams, CliError> {
        let s = self
            .perturbed
            .as_ref()
            .ok_or_else(|| bad("perturbed", "section required for equation = \"perturbed\""))?;
        PerturbedParams::new(s.a, s.b, s.m, s.n).map_err(|e| bad("perturbed", e))
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        Ok(match self.equation {
            EquationKind::Rkrlw => ModelParams::Rkrlw(self.rkrlw_params()?),
            EquationKind::Perturbed => ModelParams::Perturbed(self.perturbed_params()?),
        })
    }

    pub fn time(&self) -> Result<TimeSection, CliError> {
        self.time.ok_or_else(|| bad("time", "section required for this command"))
    }

    pub fn step_options(&self) -> StepOptions {
        self.time.map_or_else(StepOptions::default, |t| StepOptions {
            integrator: t.integrator,
            dealias_fraction: t.dealias_fraction,
        })
    }

    /// Sets a named coefficient (`a1..a5`, `b1..b12`, `c3`, `c4`, `omega`,
    /// `lambda_dot`, `m`, `n`); used by sweeps.
    pub fn set_coefficient(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        let field = |s: &str, max: usize| -> Option<usize> {
            let i: usize = name.strip_prefix(s)?.parse().ok()?;
            (1..=max).contains(&i).then_some(i - 1)
        };
        let integer = || -> Result<u32, CliError> {
            if value.fract() == 0.0 && value >= 0.0 {
                Ok(value as u32)
            } else {
                Err(bad(&format!("sweep.{name}"), "must be a nonnegative integer"))
            }
        };
        match name {
            "c3" | "c4" | "omega" | "lambda_dot" => {
                let v = self.verify.get_or_insert_with(VerifySection::default);
                let slot = match name {
                    "c3" => &mut v.c3,
                    "c4" => &mut v.c4,
                    "omega" => &mut v.omega,
                    _ => &mut v.lambda_dot,
                };
                *slot = Some(value);
                return Ok(());
            }
            _ => {}
        }
        let p = self.perturbed.get_or_insert(PerturbedSection {
            a: [0.0; 5],
            b: [0.0; 12],
            m: 1,
            n: 2,
        });
        if let Some(i) = field("a", 5) {
            p.a[i] = value;
        } else if let Some(i) = field("b", 12) {
            p.b[i] = value;
            // keep an explicit classify section in step
            if let Some(c) = self.classify.as_mut() {
                match i {
                    0 => c.b1 = Some(value),
                    1 => c.b2 = Some(value),
                    9 => c.b10 = Some(value),
                    _ => {}
                }
            }
        } else if name == "m" {
            p.m = integer()?;
        } else if name == "n" {
            p.n = integer()?;
        } else {
            return Err(bad("sweep", format!("unknown coefficient '{name}'")));
        }
        Ok(())
    }
}
