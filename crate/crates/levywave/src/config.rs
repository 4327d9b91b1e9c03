//! Experiment configuration files.
//!
//! A config is a TOML document with a `command` key, shared sections
//! (`measure`, `scenario`, `geometry`, `policy`, `output`) and one section
//! per command. Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Moments,
    Picard,
    Oracle,
    Bounds,
    Rosenthal,
    NoiseTest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Moments => "moments",
            Self::Picard => "picard",
            Self::Oracle => "oracle",
            Self::Bounds => "bounds",
            Self::Rosenthal => "rosenthal",
            Self::NoiseTest => "noise-test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    #[serde(default)]
    pub policy: PolicySpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rosenthal: Option<RosenthalSpec>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    Gamma {
        alpha: f64,
        beta: f64,
    },
    Dirac {
        atoms: Vec<AtomSpec>,
    },
    Tabulated {
        abscissae: Vec<f64>,
        positive: Vec<f64>,
        negative: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_index: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub mass: f64,
    pub location: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub v0: DisplacementSpec,
    #[serde(default)]
    pub v1: VelocitySpec,
    pub sigma: CoefficientSpec,
    #[serde(default)]
    pub b: CoefficientSpec,
    /// Overrides the default Lipschitz constant L.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DisplacementSpec {
    Constant { value: f64 },
    Cosine { amplitude: f64, frequency: f64 },
    Tabulated { x: Vec<f64>, y: Vec<f64> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VelocitySpec {
    #[default]
    Zero,
    Indicator {
        left: f64,
        right: f64,
    },
    Tabulated {
        x: Vec<f64>,
        y: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Linear {
        slope: f64,
    },
    Affine {
        slope: f64,
        intercept: f64,
    },
    Constant {
        value: f64,
    },
    #[default]
    Zero,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSpec {
    ConeSum,
    #[default]
    Diamond,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub horizon: f64,
    pub half_width: f64,
    pub step: f64,
    #[serde(default)]
    pub scheme: SchemeSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default = "default_cutoff")]
    pub cutoff: CutoffSpec,
    #[serde(default)]
    pub mode: ModeSpec,
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self { cutoff: default_cutoff(), mode: ModeSpec::default() }
    }
}

fn default_cutoff() -> CutoffSpec {
    CutoffSpec::Auto { target_variance_fraction: 1e-3 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CutoffSpec {
    Fixed { eps: f64 },
    Auto { target_variance_fraction: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    Drop,
    #[default]
    GaussianSubstitute,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for artifacts; created if missing. Defaults to `out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// File stem for `<stem>.csv` and `<stem>.json`; defaults to the command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    #[serde(default)]
    pub replicate: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModeSpec {
    #[default]
    Sup,
    Inf,
    AtX,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsSpec {
    /// Fit window `[t0, t1]`; defaults to the last half of the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<(f64, f64)>,
    #[serde(default)]
    pub fit_mode: FitModeSpec,
    /// Position for `fit_mode = "at-x"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_x: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSpec {
    pub iterations: usize,
    #[serde(default)]
    pub replicate: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub horizon: f64,
    pub step: f64,
    pub kernel: KernelSpec,
    /// Forcing a²; taken from the scenario when the kernel is `scenario`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    Linear {
        c: f64,
    },
    Constant {
        c: f64,
    },
    Tabulated {
        t: Vec<f64>,
        g: Vec<f64>,
    },
    /// The second-moment kernel of the linear scenario and measure.
    Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    #[serde(default = "default_c0")]
    pub c0: f64,
    pub horizon: f64,
    pub step: f64,
}

fn default_c0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosenthalSpec {
    pub horizon: f64,
    pub integrand: Vec<PieceSpec>,
    #[serde(default = "default_time_steps")]
    pub time_steps: usize,
}

fn default_time_steps() -> usize {
    levywave_core::oracle_bounds::PROBE_TIME_STEPS
}

/// `value` on `(t0, t1] × (x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
    pub value: f64,
}
