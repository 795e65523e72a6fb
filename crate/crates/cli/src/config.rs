//! File-backed run configuration. Every run writes the fully merged
//! configuration next to its outputs; that file reloads to the same value.

use std::fs;
use std::path::{Path, PathBuf};

use chaogate_core::gate::{AxisSpec, DacSpec};
use chaogate_core::SurrogateConstants;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const CONFIG_FILE: &str = "run_config.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub out: PathBuf,
    /// `None` picks the command's natural format.
    #[serde(default)]
    pub format: Option<Format>,
    /// `None` uses one worker per core.
    #[serde(default)]
    pub workers: Option<usize>,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    Orbit(OrbitParams),
    Bifurcation(SweepParams),
    Lyapunov(SweepParams),
    GateSearch(SearchParams),
    Funcspace(SpaceParamsFile),
    MapDump(MapDumpParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Orbit(_) => "orbit",
            Command::Bifurcation(_) => "bifurcation",
            Command::Lyapunov(_) => "lyapunov",
            Command::GateSearch(_) => "gate-search",
            Command::Funcspace(_) => "funcspace",
            Command::MapDump(_) => "map-dump",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MapName {
    Logistic,
    Tent,
    Sine,
    Gnm,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapParams {
    pub kind: MapName,
    pub r: f64,
    pub m: f64,
    pub a: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub table: Option<PathBuf>,
    pub constants: SurrogateConstants,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            kind: MapName::Gnm,
            r: 4.0,
            m: 2.0,
            a: 1.0,
            mu1: 1.0,
            mu2: 0.0,
            mu3: 0.0,
            table: None,
            constants: SurrogateConstants::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackKind {
    Buffer,
    Gnm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeedbackParams {
    pub kind: FeedbackKind,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
}

impl Default for FeedbackParams {
    fn default() -> Self {
        Self {
            kind: FeedbackKind::Buffer,
            mu1: 1.0,
            mu2: 0.0,
            mu3: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitParams {
    pub map: MapParams,
    pub feedback: FeedbackParams,
    /// Seed in volts; `None` seeds at the domain midpoint.
    pub x0: Option<f64>,
    pub n: usize,
    pub transient: usize,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self {
            map: MapParams::default(),
            feedback: FeedbackParams::default(),
            x0: None,
            n: 1000,
            transient: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub map: MapParams,
    pub feedback: FeedbackParams,
    pub axis: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: usize,
    pub x0: Option<f64>,
    pub transient: usize,
    pub retained: usize,
    pub lyapunov_iterations: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            map: MapParams::default(),
            feedback: FeedbackParams::default(),
            axis: None,
            from: None,
            to: None,
            steps: 100,
            x0: None,
            transient: 1000,
            retained: 3000,
            lyapunov_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridParams {
    pub mu1: AxisSpec,
    pub mu2: AxisSpec,
    pub mu3: AxisSpec,
    pub cb: Vec<u8>,
    pub vref: AxisSpec,
    pub n_min: usize,
    pub n_max: usize,
    pub allow_clipped: bool,
    pub cap: u128,
    pub constants: SurrogateConstants,
    pub dac: DacSpec,
}

impl Default for GridParams {
    fn default() -> Self {
        let g = chaogate_core::SearchGrid::default();
        Self {
            mu1: g.mu1,
            mu2: g.mu2,
            mu3: g.mu3,
            cb: g.cb,
            vref: g.vref,
            n_min: g.n_min,
            n_max: g.n_max,
            allow_clipped: g.allow_clipped,
            cap: g.cap,
            constants: g.constants,
            dac: g.dac,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchParams {
    pub target: Option<String>,
    pub min_margin: f64,
    pub limit: usize,
    pub grid: GridParams,
    pub feedback: FeedbackParams,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            target: None,
            min_margin: 0.05,
            limit: 20,
            grid: GridParams::default(),
            feedback: FeedbackParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceParamsFile {
    pub c: u32,
    pub nmu: u64,
    /// Unset level counts fall back to `nmu`.
    pub nmu1: Option<u64>,
    pub nmu2: Option<u64>,
    pub nmu3: Option<u64>,
    pub nvref: u64,
    pub n_min: u32,
    pub n_max: Option<u32>,
}

impl Default for SpaceParamsFile {
    fn default() -> Self {
        Self {
            c: 0,
            nmu: 1,
            nmu1: None,
            nmu2: None,
            nmu3: None,
            nvref: 1,
            n_min: 1,
            n_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapDumpParams {
    pub map: MapParams,
    pub points: usize,
}

impl Default for MapDumpParams {
    fn default() -> Self {
        Self {
            map: MapParams::default(),
            points: 1001,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "--config {}: unsupported schema_version {} (expected {SCHEMA_VERSION})",
                path.display(),
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    }
}
