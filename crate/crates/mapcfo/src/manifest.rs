//! Run manifests: the fully resolved configuration of one command, enough to
//! reproduce its output exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::simulation::{Method, SweepConfig, TrackingConfig};
use crate::spec::{CfoPriorSpec, PilotSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenPilotConfig {
    pub pilot: PilotSpec,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub pilot: PilotSpec,
    pub rx_antennas: usize,
    pub channel_variance: f64,
    pub snr_db: Vec<f64>,
    /// `None` is the flat prior.
    pub cfo_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PilotSource {
    Spec { spec: PilotSpec, power: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModeName {
    Mmse,
    Ls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub frame: PathBuf,
    pub pilot: PilotSource,
    pub tx_antennas: usize,
    pub channel_variance: f64,
    pub cfo: CfoPriorSpec,
    pub channel_mode: ChannelModeName,
    pub method: Method,
    /// `(f_min, f_max, step)` of the grid search, when requested.
    pub oracle: Option<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesizeConfig {
    pub pilot: PilotSpec,
    pub power: f64,
    pub rx_antennas: usize,
    pub channel_variance: f64,
    pub cfo: f64,
    pub noise_scale: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum Resolved {
    GenPilot(GenPilotConfig),
    Bounds(BoundsConfig),
    SimulateSnr(SweepConfig),
    SimulateRange(SweepConfig),
    SimulateTrack(TrackingConfig),
    Estimate(EstimateConfig),
    Synthesize(SynthesizeConfig),
}

impl Resolved {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Resolved::SimulateSnr(c) | Resolved::SimulateRange(c) => Some(c.seed),
            Resolved::SimulateTrack(c) => Some(c.seed),
            Resolved::Synthesize(c) => Some(c.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub run: Resolved,
    pub seed: Option<u64>,
    pub version: String,
    /// Where the primary output went; `None` for standard output.
    pub output: Option<PathBuf>,
    /// Derived quantities worth keeping next to the output.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn new(run: Resolved, output: Option<PathBuf>, summary: serde_json::Value) -> Self {
        Self { seed: run.seed(), run, version: env!("CARGO_PKG_VERSION").to_string(), output, summary }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// `<output>.manifest.json`.
pub fn default_manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
