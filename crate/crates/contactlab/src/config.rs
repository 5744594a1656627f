//! Experiment configuration.
//!
//! A config file is TOML with three top-level keys besides the parameter table:
//!
//! ```toml
//! command = "sweep"
//! seed = 7
//! output_dir = "runs/sweep"
//!
//! [params]
//! epsilons = [0.4, 0.2, 0.1, 0.05]
//! ```
//!
//! Every table rejects unknown keys. Missing keys take the defaults below, and the
//! resolved config (defaults filled in) is what the report echoes.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

use contactlab_core::contact::ModelKind;
use contactlab_core::convergence::{CompositePotential, SweepObservables};
use contactlab_core::meanfield::MeanFieldConfig;
use contactlab_core::numerics::{EigenRequest, GridError, RadialGrid, SpacingLaw};
use contactlab_core::twobody::{OuterBoundary, PotentialSpec, ScalingClass, Shape};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error("invalid parameters for {command}: {message}")]
    Invalid { command: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Twobody,
    Resonance,
    ContactSpectrum,
    Critical,
    GpGroundstate,
    GpEvolve,
    Sweep,
    BsKernel,
    CrossTerm,
}

impl CommandKind {
    pub const ALL: [CommandKind; 9] = [
        CommandKind::Twobody,
        CommandKind::Resonance,
        CommandKind::ContactSpectrum,
        CommandKind::Critical,
        CommandKind::GpGroundstate,
        CommandKind::GpEvolve,
        CommandKind::Sweep,
        CommandKind::BsKernel,
        CommandKind::CrossTerm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Twobody => "twobody",
            CommandKind::Resonance => "resonance",
            CommandKind::ContactSpectrum => "contact-spectrum",
            CommandKind::Critical => "critical",
            CommandKind::GpGroundstate => "gp-groundstate",
            CommandKind::GpEvolve => "gp-evolve",
            CommandKind::Sweep => "sweep",
            CommandKind::BsKernel => "bs-kernel",
            CommandKind::CrossTerm => "cross-term",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Radial grid description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// Nodes `h, 2h, .., n h` with `h = r_max / n`.
    OriginAligned { n: usize, r_max: f64 },
    Uniform { n: usize, r_min: f64, r_max: f64 },
    Logarithmic { n: usize, r_min: f64, r_max: f64 },
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid, GridError> {
        match *self {
            GridSpec::OriginAligned { n, r_max } => RadialGrid::origin_aligned(n, r_max),
            GridSpec::Uniform { n, r_min, r_max } => RadialGrid::new(n, r_min, r_max, SpacingLaw::Uniform),
            GridSpec::Logarithmic { n, r_min, r_max } => RadialGrid::new(n, r_min, r_max, SpacingLaw::Logarithmic),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenParams {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenParams {
    fn default() -> Self {
        Self {
            k: 5,
            tol: 1e-6,
            max_iter: 20_000,
        }
    }
}

impl EigenParams {
    pub fn request(&self, seed: u64) -> EigenRequest {
        EigenRequest::new(self.k)
            .with_tol(self.tol)
            .with_max_iter(self.max_iter)
            .with_seed(seed)
    }
}

fn unit_well(g: f64) -> PotentialSpec {
    PotentialSpec::unscaled(Shape::SquareWell { radius: 1.0 }, g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwobodyParams {
    pub potential: PotentialSpec,
    pub grid: GridSpec,
    pub eigen: EigenParams,
    pub outer_boundary: OuterBoundary,
    pub scattering_length: bool,
}

impl Default for TwobodyParams {
    fn default() -> Self {
        Self {
            potential: unit_well(12.0),
            grid: GridSpec::OriginAligned { n: 4000, r_max: 10.0 },
            eigen: EigenParams::default(),
            outer_boundary: OuterBoundary::Dirichlet,
            scattering_length: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceParams {
    /// The coupling field is ignored; only shape and scaling are used.
    pub potential: PotentialSpec,
    pub bracket: [f64; 2],
    pub grid: GridSpec,
}

impl Default for ResonanceParams {
    fn default() -> Self {
        Self {
            potential: unit_well(0.0),
            bracket: [1.0, 4.0],
            grid: GridSpec::OriginAligned { n: 4000, r_max: 2.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactSpectrumParams {
    pub kind: ModelKind,
    pub c: f64,
    /// Must be origin aligned.
    pub grid: GridSpec,
    pub eigen: EigenParams,
    pub fit: bool,
}

impl Default for ContactSpectrumParams {
    fn default() -> Self {
        Self {
            kind: ModelKind::Strong,
            c: 4.0,
            grid: GridSpec::OriginAligned { n: 2000, r_max: 0.2 },
            eigen: EigenParams {
                k: 20,
                ..EigenParams::default()
            },
            fit: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalParams {
    pub kind: ModelKind,
    pub r_max: f64,
    /// Coarsest inner cutoff; each further level halves it.
    pub r_min0: f64,
    pub levels: usize,
    pub probe_tol: f64,
    pub c_max: f64,
    pub scan_step: f64,
    pub probe_c: Option<f64>,
}

impl Default for CriticalParams {
    fn default() -> Self {
        Self {
            kind: ModelKind::Strong,
            r_max: 1.0,
            r_min0: 1e-2,
            levels: 4,
            probe_tol: 1e-6,
            c_max: 10.0,
            scan_step: 0.05,
            probe_c: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialField {
    /// `exp(-|x - center|^2 / (2 width^2) + i velocity . x)` plus seeded complex noise
    /// of relative amplitude `noise`, normalized to the configured mass.
    Gaussian {
        width: f64,
        center: [f64; 3],
        velocity: [f64; 3],
        noise: f64,
    },
    /// A field file written by `write_field`; it is renormalized to the configured mass.
    File { path: PathBuf },
}

impl Default for InitialField {
    fn default() -> Self {
        InitialField::Gaussian {
            width: 1.0,
            center: [0.0; 3],
            velocity: [0.0; 3],
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpParams {
    /// Points per axis (power of two).
    pub m: usize,
    pub side: f64,
    pub system: MeanFieldConfig,
    pub init: InitialField,
    /// Write the final field as a binary field file.
    pub write_field: bool,
}

impl Default for GpParams {
    fn default() -> Self {
        Self {
            m: 32,
            side: 16.0,
            system: MeanFieldConfig::default(),
            init: InitialField::default(),
            write_field: true,
        }
    }
}

fn default_composite() -> CompositePotential {
    CompositePotential {
        v1: PotentialSpec::new(Shape::SquareWell { radius: 1.0 }, 1.0, ScalingClass::Strong, 1.0)
            .expect("valid default"),
        v2: PotentialSpec::new(Shape::SquareWell { radius: 1.0 }, 0.0, ScalingClass::Weak, 1.0)
            .expect("valid default"),
        v3: PotentialSpec::unscaled(Shape::Gaussian { sigma: 1.0 }, 0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub composite: CompositePotential,
    pub epsilons: Vec<f64>,
    pub grid: GridSpec,
    pub observables: SweepObservables,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            composite: default_composite(),
            epsilons: vec![0.4, 0.2, 0.1, 0.05],
            grid: GridSpec::OriginAligned { n: 8000, r_max: 8.0 },
            observables: SweepObservables::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BsKernelParams {
    /// `V`; the kernel weight is `-V` against the free operator.
    pub potential: PotentialSpec,
    pub grid: GridSpec,
    /// Spectral parameters at which the kernel spectrum is reported.
    pub z: Vec<f64>,
    /// Also locate the bound state as the crossing `lambda_max(K(z)) = 1`.
    pub crossing: bool,
    pub crossing_tol: f64,
    /// Number of leading kernel eigenvalues written per `z`.
    pub top: usize,
}

impl Default for BsKernelParams {
    fn default() -> Self {
        Self {
            potential: unit_well(12.0),
            grid: GridSpec::OriginAligned { n: 2000, r_max: 6.0 },
            z: vec![1.0],
            crossing: true,
            crossing_tol: 1e-10,
            top: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossTermParams {
    pub composite: CompositePotential,
    pub epsilons: Vec<f64>,
}

impl Default for CrossTermParams {
    fn default() -> Self {
        let mut composite = default_composite();
        composite.v2 = composite.v2.with_coupling(1.0);
        Self {
            composite,
            epsilons: vec![0.4, 0.2, 0.1, 0.05],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum CommandParams {
    Twobody(TwobodyParams),
    Resonance(ResonanceParams),
    ContactSpectrum(ContactSpectrumParams),
    Critical(CriticalParams),
    GpGroundstate(GpParams),
    GpEvolve(GpParams),
    Sweep(SweepParams),
    BsKernel(BsKernelParams),
    CrossTerm(CrossTermParams),
}

impl CommandParams {
    pub fn kind(&self) -> CommandKind {
        match self {
            CommandParams::Twobody(_) => CommandKind::Twobody,
            CommandParams::Resonance(_) => CommandKind::Resonance,
            CommandParams::ContactSpectrum(_) => CommandKind::ContactSpectrum,
            CommandParams::Critical(_) => CommandKind::Critical,
            CommandParams::GpGroundstate(_) => CommandKind::GpGroundstate,
            CommandParams::GpEvolve(_) => CommandKind::GpEvolve,
            CommandParams::Sweep(_) => CommandKind::Sweep,
            CommandParams::BsKernel(_) => CommandKind::BsKernel,
            CommandParams::CrossTerm(_) => CommandKind::CrossTerm,
        }
    }

    pub fn defaults(kind: CommandKind) -> Self {
        match kind {
            CommandKind::Twobody => CommandParams::Twobody(Default::default()),
            CommandKind::Resonance => CommandParams::Resonance(Default::default()),
            CommandKind::ContactSpectrum => CommandParams::ContactSpectrum(Default::default()),
            CommandKind::Critical => CommandParams::Critical(Default::default()),
            CommandKind::GpGroundstate => CommandParams::GpGroundstate(Default::default()),
            CommandKind::GpEvolve => CommandParams::GpEvolve(GpParams {
                system: MeanFieldConfig {
                    g: 1.0,
                    dt: 5e-4,
                    sample_every: 10,
                    ..MeanFieldConfig::default()
                },
                ..Default::default()
            }),
            CommandKind::Sweep => CommandParams::Sweep(Default::default()),
            CommandKind::BsKernel => CommandParams::BsKernel(Default::default()),
            CommandKind::CrossTerm => CommandParams::CrossTerm(Default::default()),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(flatten)]
    pub params: CommandParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: CommandKind,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    params: Option<toml::Table>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("contactlab-out")
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let table = raw.params.unwrap_or_default();
        let command = raw.command;
        let wrap = |r: Result<CommandParams, String>| {
            r.map_err(|message| ConfigError::Invalid {
                command: command.name(),
                message,
            })
        };
        let params = wrap(overlay(CommandParams::defaults(command), table))?;
        Ok(Self {
            seed: raw.seed,
            output_dir: raw.output_dir,
            params,
        })
    }

    /// Same layout as the TOML form, written as a JSON object.
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let toml::Value::Table(t) = json_to_toml(v)? else {
            return Err(ConfigError::Parse("top level must be an object".into()));
        };
        Self::from_toml_str(&toml::to_string(&t).map_err(|e| ConfigError::Parse(e.to_string()))?)
    }

    /// Reads a config, as JSON when the extension is `.json` and as TOML otherwise.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes to JSON")
    }

    pub fn command(&self) -> CommandKind {
        self.params.kind()
    }
}

fn json_to_toml(v: serde_json::Value) -> Result<toml::Value, ConfigError> {
    use serde_json::Value as J;
    Ok(match v {
        J::Null => return Err(ConfigError::Parse("null is only allowed for optional keys".into())),
        J::Bool(b) => toml::Value::Boolean(b),
        J::Number(n) if n.to_string().contains(['.', 'e', 'E']) => toml::Value::Float(
            n.as_f64()
                .ok_or_else(|| ConfigError::Parse(format!("number {n} out of range")))?,
        ),
        J::Number(n) => toml::Value::Integer(
            n.as_i64()
                .ok_or_else(|| ConfigError::Parse(format!("integer {n} does not fit in 64 signed bits")))?,
        ),
        J::String(s) => toml::Value::String(s),
        J::Array(a) => toml::Value::Array(a.into_iter().map(json_to_toml).collect::<Result<_, _>>()?),
        // an explicit null reads as an absent optional key
        J::Object(o) => toml::Value::Table(
            o.into_iter()
                .filter(|(_, v)| !v.is_null())
                .map(|(k, v)| Ok((k, json_to_toml(v)?)))
                .collect::<Result<_, ConfigError>>()?,
        ),
    })
}

/// Overlays a user table on the command defaults. Top-level keys replace the default
/// value, except `system`, whose keys are replaced one at a time.
fn overlay(defaults: CommandParams, table: toml::Table) -> Result<CommandParams, String> {
    let wrapped = toml::Value::try_from(&defaults).map_err(|e| e.to_string())?;
    let toml::Value::Table(mut wrapped) = wrapped else { unreachable!() };
    let mut merged = match wrapped.remove("params") {
        Some(toml::Value::Table(t)) => t,
        _ => toml::Table::new(),
    };
    for (key, value) in table {
        match (key.as_str(), value, merged.get_mut(&key)) {
            ("system", toml::Value::Table(user), Some(toml::Value::Table(sys))) => {
                for (k, v) in user {
                    sys.insert(k, v);
                }
            }
            (_, value, _) => {
                merged.insert(key, value);
            }
        }
    }
    wrapped.insert("params".into(), toml::Value::Table(merged));
    CommandParams::deserialize(toml::Value::Table(wrapped)).map_err(|e| e.to_string())
}
