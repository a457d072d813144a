//! Argument parsing, config-file layering and command dispatch for the
//! `mapcfo` binary.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use mapcfo_core::{
    beta_general, beta_iid, build_workspace, estimate_channel, estimate_frame, grid_search_oracle, make_bounds,
    sample_channel, synthesize_frame, ChannelMode, ChannelPrior, Error as CoreError, PilotMatrix, Seed,
};
use serde_json::json;

use crate::io::{fmt_f64, matrix_csv, parse_frame_csv, parse_matrix_csv, parse_range, parse_variance};
use crate::manifest::{
    default_manifest_path, BoundsConfig, ChannelModeName, EstimateConfig, GenPilotConfig, PilotSource, Resolved,
    RunManifest, SynthesizeConfig,
};
use crate::simulation::{
    run_acquisition_sweep, run_mse_vs_snr, run_tracking, Method, Mode, SweepConfig, TrackingConfig,
};
use crate::spec::{power_for_snr, CfoPriorSpec, PilotKind, PilotSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SingularPilot
            | CoreError::NonOrthogonalPilot(_)
            | CoreError::NoFrequencyInformation
            | CoreError::NotUnwrapped => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "mapcfo", version, about = "MAP joint CFO and MIMO channel estimation")]
pub struct Cli {
    /// Worker threads for simulations (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat TOML file of defaults, keyed by flag name; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Re-run the command recorded in a manifest.
    #[arg(long, conflicts_with = "config")]
    pub from_manifest: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Manifest path, `<out>.manifest.json` by default. Printed to standard
    /// error when writing to standard output.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a structured pilot matrix as `row,col,re,im` CSV.
    GenPilot(GenPilotArgs),
    /// Tabulate beta, CRLB and BCRLB over SNR.
    Bounds(BoundsArgs),
    /// Monte-Carlo experiments.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Estimate CFO and channel from one received frame.
    Estimate(EstimateArgs),
    /// Generate a received frame for testing `estimate`.
    Synthesize(SynthesizeArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// MSE against SNR with the CFO drawn from its prior.
    Snr(SnrArgs),
    /// MSE against a fixed true CFO.
    Range(RangeArgs),
    /// AR(1) CFO tracking across frames.
    Track(TrackArgs),
}

#[derive(Debug, Args, Default)]
pub struct PilotArgs {
    /// periodic, td or combined.
    #[arg(long = "pilot", visible_alias = "layout")]
    pub pilot: Option<PilotKind>,
    /// Pilot length in symbols.
    #[arg(long)]
    pub n: Option<usize>,
    /// Repetitions per antenna; sets `n = m * lt`.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub lt: Option<usize>,
    /// Periodic head length of a combined pilot.
    #[arg(long)]
    pub head: Option<usize>,
    /// TD tail length of a combined pilot.
    #[arg(long)]
    pub tail: Option<usize>,
    /// Scramble with the Zadoff-Chu sequence of this root.
    #[arg(long)]
    pub zc_root: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenPilotArgs {
    #[command(flatten)]
    pub pilot: PilotArgs,
    /// Per-symbol power rho.
    #[arg(long)]
    pub power: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub pilot: PilotArgs,
    #[arg(long)]
    pub lr: Option<usize>,
    /// SNR in dB: a value or `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// CFO prior variance, or `inf`.
    #[arg(long)]
    pub cfo_var: Option<String>,
    #[arg(long)]
    pub channel_var: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub pilot: PilotArgs,
    #[arg(long)]
    pub lr: Option<usize>,
    #[arg(long)]
    pub channel_var: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub cfo_mean: Option<f64>,
    #[arg(long)]
    pub cfo_var: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// 100 trials per point.
    #[arg(long)]
    pub smoke: bool,
    /// Comma separated: map, ml.
    #[arg(long)]
    pub modes: Option<String>,
    /// general, periodic or td.
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long, env = "MAPCFO_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SnrArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// True CFO values: a value or `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub cfo: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[command(flatten)]
    pub pilot: PilotArgs,
    #[arg(long)]
    pub lr: Option<usize>,
    #[arg(long)]
    pub channel_var: Option<f64>,
    #[arg(long)]
    pub ar_rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ar_mean: Option<f64>,
    #[arg(long)]
    pub ar_noise_var: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long, env = "MAPCFO_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Received frame CSV (`row` = symbol, `col` = receive antenna).
    #[arg(long)]
    pub frame: Option<PathBuf>,
    /// Pilot CSV; overrides the structured pilot flags.
    #[arg(long)]
    pub pilot_file: Option<PathBuf>,
    #[command(flatten)]
    pub pilot: PilotArgs,
    /// Per-symbol power; derived from `--snr-db` when omitted.
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub channel_var: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub cfo_mean: Option<f64>,
    #[arg(long)]
    pub cfo_var: Option<String>,
    /// `ml` forces a flat CFO prior.
    #[arg(long)]
    pub mode: Option<Mode>,
    /// mmse or ls.
    #[arg(long)]
    pub channel_mode: Option<String>,
    #[arg(long)]
    pub method: Option<Method>,
    /// Also report the grid-search argmax of the objective.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub oracle_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub pilot: PilotArgs,
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub lr: Option<usize>,
    #[arg(long)]
    pub channel_var: Option<f64>,
    /// True CFO.
    #[arg(long, allow_hyphen_values = true)]
    pub cfo: Option<f64>,
    /// Noise standard deviation scale; 0 gives a noiseless frame.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, env = "MAPCFO_SEED")]
    pub seed: Option<u64>,
}

/// Values from the config file, looked up by flag name with `-` or `_`.
struct Layer {
    table: toml::Table,
}

impl Layer {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self { table: toml::Table::new() }) };
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("reading {}: {e}", path.display())))?;
        let table: toml::Table =
            text.parse().map_err(|e| config_err(format!("parsing {}: {e}", path.display())))?;
        Ok(Self { table })
    }

    fn raw(&self, key: &str) -> Option<String> {
        let v = self.table.get(key).or_else(|| self.table.get(&key.replace('-', "_")))?;
        Some(match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => other.to_string(),
        })
    }

    fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|e| config_err(format!("config key `{key}`: {e}"))),
        }
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.opt(None::<bool>, key)?.unwrap_or(false))
    }
}

fn resolve_pilot(args: &PilotArgs, layer: &Layer) -> Result<PilotSpec, CliError> {
    let kind = match layer.opt(args.pilot, "pilot")? {
        Some(k) => k,
        None => layer.get(None, "layout", PilotKind::Periodic)?,
    };
    let lt = layer.get(args.lt, "lt", 2)?;
    if lt == 0 {
        return Err(config_err("--lt must be at least 1"));
    }
    let n = layer.opt(args.n, "n")?;
    let m = layer.opt(args.m, "m")?;
    let zc_root = layer.opt(args.zc_root, "zc-root")?;
    let spec = match kind {
        PilotKind::Combined => {
            let head = layer.opt(args.head, "head")?;
            let tail = layer.opt(args.tail, "tail")?;
            let (head, tail) = match (n, head, tail) {
                (_, Some(h), Some(t)) => (h, t),
                (Some(n), Some(h), None) => (h, n.saturating_sub(h)),
                (Some(n), None, Some(t)) => (n.saturating_sub(t), t),
                (Some(n), None, None) => (n / 2, n - n / 2),
                (None, h, t) => (h.unwrap_or(8), t.unwrap_or(8)),
            };
            if let Some(n) = n {
                if n != head + tail {
                    return Err(config_err(format!("combined pilot: head {head} + tail {tail} != n {n}")));
                }
            }
            PilotSpec { kind, tx_antennas: lt, symbols: head + tail, head: Some(head), zc_root }
        }
        _ => {
            let symbols = match (n, m) {
                (Some(n), Some(m)) if n != m * lt => {
                    return Err(config_err(format!("n = {n} disagrees with m * lt = {}", m * lt)))
                }
                (Some(n), _) => n,
                (None, Some(m)) => m * lt,
                (None, None) => 16,
            };
            if symbols % lt != 0 {
                return Err(config_err(format!("n = {symbols} must be a multiple of l_t = {lt} for a {} pilot", kind.name())));
            }
            PilotSpec { kind, tx_antennas: lt, symbols, head: None, zc_root }
        }
    };
    Ok(spec)
}

fn variance(layer: &Layer, flag: &Option<String>, key: &str, default: &str) -> Result<Option<f64>, CliError> {
    let raw = layer.get(flag.clone(), key, default.to_string())?;
    parse_variance(&raw).map_err(config_err)
}

fn positive(x: f64, what: &str) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(config_err(format!("{what} must be positive and finite, got {x}")))
    }
}

fn parse_modes(s: &str) -> Result<Vec<Mode>, CliError> {
    let modes: Vec<Mode> = s.split(',').map(|m| m.trim().parse::<Mode>()).collect::<Result<_, _>>().map_err(config_err)?;
    if modes.is_empty() {
        return Err(config_err("--modes is empty"));
    }
    Ok(modes)
}

fn resolve_sim(args: &SimArgs, layer: &Layer) -> Result<SweepConfig, CliError> {
    let trials = if layer.flag(args.smoke, "smoke")? { 100 } else { layer.get(args.trials, "trials", 10_000)? };
    if trials == 0 {
        return Err(config_err("--trials must be at least 1"));
    }
    Ok(SweepConfig {
        rx_antennas: layer.get(args.lr, "lr", 2)?,
        pilot: resolve_pilot(&args.pilot, layer)?,
        channel_variance: positive(layer.get(args.channel_var, "channel-var", 1.0)?, "--channel-var")?,
        cfo: CfoPriorSpec {
            mean: layer.get(args.cfo_mean, "cfo-mean", 0.01)?,
            variance: variance(layer, &args.cfo_var, "cfo-var", "1e-5")?,
        },
        points: Vec::new(),
        snr_db: 20.0,
        trials,
        modes: parse_modes(&layer.get(args.modes.clone(), "modes", "map,ml".to_string())?)?,
        method: layer.get(args.method, "method", Method::General)?,
        seed: layer.get(args.seed, "seed", 0)?,
    })
}

fn pilot_power(layer: &Layer, power: Option<f64>, snr_db: Option<f64>, channel_var: f64, default_snr: f64) -> Result<f64, CliError> {
    match layer.opt(power, "power")? {
        Some(p) if p >= 0.0 && p.is_finite() => Ok(p),
        Some(p) => Err(config_err(format!("--power must be finite and >= 0, got {p}"))),
        None => Ok(power_for_snr(layer.get(snr_db, "snr-db", default_snr)?, channel_var)),
    }
}

/// Builds the resolved configuration of a subcommand.
pub fn resolve(command: &Command, config: Option<&Path>) -> Result<Resolved, CliError> {
    let layer = Layer::load(config)?;
    let l = &layer;
    Ok(match command {
        Command::GenPilot(a) => Resolved::GenPilot(GenPilotConfig {
            pilot: resolve_pilot(&a.pilot, l)?,
            power: l.get(a.power, "power", 1.0)?,
        }),
        Command::Bounds(a) => Resolved::Bounds(BoundsConfig {
            pilot: resolve_pilot(&a.pilot, l)?,
            rx_antennas: l.get(a.lr, "lr", 2)?,
            channel_variance: positive(l.get(a.channel_var, "channel-var", 1.0)?, "--channel-var")?,
            snr_db: parse_range(&l.get(a.snr_db.clone(), "snr-db", "0:30:5".to_string())?).map_err(config_err)?,
            cfo_variance: variance(l, &a.cfo_var, "cfo-var", "1e-5")?,
        }),
        Command::Simulate(SimulateCommand::Snr(a)) => {
            let mut cfg = resolve_sim(&a.sim, l)?;
            cfg.points = parse_range(&l.get(a.snr_db.clone(), "snr-db", "-5:30:5".to_string())?).map_err(config_err)?;
            Resolved::SimulateSnr(cfg)
        }
        Command::Simulate(SimulateCommand::Range(a)) => {
            let mut cfg = resolve_sim(&a.sim, l)?;
            cfg.snr_db = l.get(a.snr_db, "snr-db", 20.0)?;
            cfg.points = parse_range(&l.get(a.cfo.clone(), "cfo", "-0.6:0.6:0.01".to_string())?).map_err(config_err)?;
            Resolved::SimulateRange(cfg)
        }
        Command::Simulate(SimulateCommand::Track(a)) => Resolved::SimulateTrack(TrackingConfig {
            rx_antennas: l.get(a.lr, "lr", 2)?,
            pilot: resolve_pilot(&a.pilot, l)?,
            channel_variance: positive(l.get(a.channel_var, "channel-var", 1.0)?, "--channel-var")?,
            ar_rho: l.get(a.ar_rho, "ar-rho", 0.9)?,
            ar_mean: l.get(a.ar_mean, "ar-mean", 0.1)?,
            ar_noise_var: l.get(a.ar_noise_var, "ar-noise-var", 1e-8)?,
            frames: l.get(a.frames, "frames", 100)?,
            runs: l.get(a.runs, "runs", 500)?,
            snr_db: l.get(a.snr_db, "snr-db", 10.0)?,
            method: l.get(a.method, "method", Method::General)?,
            seed: l.get(a.seed, "seed", 0)?,
        }),
        Command::Estimate(a) => {
            let frame = l.opt(a.frame.clone(), "frame")?.ok_or_else(|| config_err("--frame is required"))?;
            let channel_variance = positive(l.get(a.channel_var, "channel-var", 1.0)?, "--channel-var")?;
            let (pilot, tx_antennas) = match l.opt(a.pilot_file.clone(), "pilot-file")? {
                Some(path) => {
                    let lt = read_pilot_file(&path)?.tx_antennas();
                    (PilotSource::File { path }, lt)
                }
                None => {
                    let spec = resolve_pilot(&a.pilot, l)?;
                    let lt = spec.tx_antennas;
                    let power = pilot_power(l, a.power, a.snr_db, channel_variance, 20.0)?;
                    (PilotSource::Spec { spec, power }, lt)
                }
            };
            let mode = l.get(a.mode, "mode", Mode::Map)?;
            let cfo = CfoPriorSpec {
                mean: l.get(a.cfo_mean, "cfo-mean", 0.0)?,
                variance: match mode {
                    Mode::Ml => None,
                    Mode::Map => variance(l, &a.cfo_var, "cfo-var", "inf")?,
                },
            };
            let channel_mode = match l.get(a.channel_mode.clone(), "channel-mode", "mmse".to_string())?.as_str() {
                "mmse" => ChannelModeName::Mmse,
                "ls" => ChannelModeName::Ls,
                other => return Err(config_err(format!("unknown channel mode `{other}` (expected mmse or ls)"))),
            };
            let oracle = if l.flag(a.oracle, "oracle")? {
                let step = positive(l.get(a.oracle_step, "oracle-step", 1e-5)?, "--oracle-step")?;
                Some((-0.5, 0.5, step))
            } else {
                None
            };
            Resolved::Estimate(EstimateConfig {
                frame,
                pilot,
                tx_antennas,
                channel_variance,
                cfo,
                channel_mode,
                method: l.get(a.method, "method", Method::General)?,
                oracle,
            })
        }
        Command::Synthesize(a) => {
            let channel_variance = positive(l.get(a.channel_var, "channel-var", 1.0)?, "--channel-var")?;
            let noise_scale = l.get(a.noise, "noise", 1.0)?;
            if !(noise_scale >= 0.0) || !noise_scale.is_finite() {
                return Err(config_err("--noise must be finite and >= 0"));
            }
            Resolved::Synthesize(SynthesizeConfig {
                pilot: resolve_pilot(&a.pilot, l)?,
                power: pilot_power(l, a.power, a.snr_db, channel_variance, 20.0)?,
                rx_antennas: l.get(a.lr, "lr", 2)?,
                channel_variance,
                cfo: l.get(a.cfo, "cfo", 0.0)?,
                noise_scale,
                seed: l.get(a.seed, "seed", 0)?,
            })
        }
    })
}

fn read_pilot_file(path: &Path) -> Result<PilotMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("reading {}: {e}", path.display())))?;
    let m = parse_matrix_csv(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    Ok(PilotMatrix::custom(m)?)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Primary output text plus a summary for the manifest.
pub struct Output {
    pub text: String,
    pub summary: serde_json::Value,
}

fn bounds_table(cfg: &BoundsConfig) -> Result<String, CliError> {
    let prior = CfoPriorSpec { mean: 0.0, variance: cfg.cfo_variance }.prior()?;
    let mut out = String::from("pilot_kind,n,l_t,l_r,snr_db,beta,crlb,bcrlb\n");
    for &snr in &cfg.snr_db {
        let pilot = cfg.pilot.build(power_for_snr(snr, cfg.channel_variance))?;
        let beta = beta_iid(&pilot, cfg.channel_variance, cfg.rx_antennas)?;
        let b = make_bounds(beta, &prior)?;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            cfg.pilot.kind.name(),
            cfg.pilot.symbols,
            cfg.pilot.tx_antennas,
            cfg.rx_antennas,
            fmt_f64(snr),
            fmt_f64(b.beta),
            fmt_f64(b.crlb),
            fmt_f64(b.bcrlb)
        ));
    }
    Ok(out)
}

fn estimate(cfg: &EstimateConfig) -> Result<Output, CliError> {
    let pilot = match &cfg.pilot {
        PilotSource::Spec { spec, power } => spec.build(*power)?,
        PilotSource::File { path } => read_pilot_file(path)?,
    };
    let text = std::fs::read_to_string(&cfg.frame)
        .map_err(|e| config_err(format!("reading {}: {e}", cfg.frame.display())))?;
    let frame = parse_frame_csv(&text, pilot.tx_antennas()).map_err(|e| config_err(format!("{}: {e}", cfg.frame.display())))?;
    let lr = frame.rx_antennas();
    let channel = ChannelPrior::iid(lr, pilot.tx_antennas(), cfg.channel_variance)?;
    let mode = match cfg.channel_mode {
        ChannelModeName::Mmse => ChannelMode::Mmse,
        ChannelModeName::Ls => ChannelMode::LeastSquares,
    };
    let ws = build_workspace(&pilot, &channel, mode)?;
    let prior = cfg.cfo.prior()?;
    let method = match cfg.method {
        Method::General => mapcfo_core::CorrelationMethod::General,
        Method::Periodic => mapcfo_core::CorrelationMethod::Periodic,
        Method::Td => mapcfo_core::CorrelationMethod::TimeDivision,
    };
    let est = estimate_frame(&frame, &ws, &prior, method)?;
    let h = estimate_channel(&frame, &ws, &est)?;
    let oracle = match cfg.oracle {
        Some((lo, hi, step)) => Some(grid_search_oracle(&frame, &ws, &prior, lo, hi, step)?.value),
        None => None,
    };
    let bounds = beta_general(&pilot, &channel).ok().map(|beta| make_bounds(beta, &prior)).transpose()?;
    let lt = pilot.tx_antennas();
    let channel_rows: Vec<serde_json::Value> = h
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, z)| json!({ "rx": i / lt, "tx": i % lt, "re": z.re, "im": z.im }))
        .collect();
    let report = json!({
        "mode": match est.mode { mapcfo_core::EstimatorMode::Map => "map", mapcfo_core::EstimatorMode::Ml => "ml" },
        "cfo": est.value,
        "oracle_cfo": oracle,
        "lags": est.correlation.as_ref().map_or(0, |c| c.len()),
        "beta": bounds.map(|b| b.beta),
        "bcrlb": bounds.and_then(|b| finite(b.bcrlb)),
        "crlb": bounds.and_then(|b| finite(b.crlb)),
        "channel": channel_rows,
        "channel_error_trace": h.error_covariance.trace().re,
    });
    Ok(Output { text: serde_json::to_string_pretty(&report).expect("report serializes") + "\n", summary: serde_json::Value::Null })
}

/// Runs a resolved configuration and returns its output.
pub fn execute(run: &Resolved) -> Result<Output, CliError> {
    let none = serde_json::Value::Null;
    Ok(match run {
        Resolved::GenPilot(c) => {
            let p = c.pilot.build(c.power)?;
            Output {
                text: matrix_csv(p.entries()),
                summary: json!({ "orthogonal": p.is_orthogonal(), "symbols": p.symbols(), "tx_antennas": p.tx_antennas() }),
            }
        }
        Resolved::Bounds(c) => Output { text: bounds_table(c)?, summary: none },
        Resolved::SimulateSnr(c) => Output { text: run_mse_vs_snr(c)?.csv(), summary: none },
        Resolved::SimulateRange(c) => Output { text: run_acquisition_sweep(c)?.csv(), summary: none },
        Resolved::SimulateTrack(c) => {
            let r = run_tracking(c)?;
            Output {
                text: r.csv(),
                summary: json!({
                    "stationary_bcrlb": finite(r.stationary_bcrlb),
                    "perfect_previous_bcrlb": finite(r.perfect_previous_bcrlb),
                }),
            }
        }
        Resolved::Estimate(c) => estimate(c)?,
        Resolved::Synthesize(c) => {
            let pilot = c.pilot.build(c.power)?;
            let channel = ChannelPrior::iid(c.rx_antennas, c.pilot.tx_antennas, c.channel_variance)?;
            let seed = Seed(c.seed);
            let h = sample_channel(&channel, seed.derive(1));
            let frame = synthesize_frame(&pilot, &h, c.cfo, c.noise_scale, seed.derive(2))?;
            let lt = c.pilot.tx_antennas;
            let gains: Vec<serde_json::Value> = h
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, z)| json!({ "rx": i / lt, "tx": i % lt, "re": z.re, "im": z.im }))
                .collect();
            Output { text: matrix_csv(frame.samples()), summary: json!({ "cfo": c.cfo, "channel": gains }) }
        }
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| config_err(format!("writing {}: {e}", path.display())))
}

fn emit(run: Resolved, out: Option<PathBuf>, manifest: Option<PathBuf>) -> Result<(), CliError> {
    let output = execute(&run)?;
    match &out {
        Some(path) => write_file(path, &output.text)?,
        None => print!("{}", output.text),
    }
    let m = RunManifest::new(run, out.clone(), output.summary);
    match manifest.or_else(|| out.as_deref().map(default_manifest_path)) {
        Some(path) => write_file(&path, &(m.to_json() + "\n"))?,
        None => eprintln!("{}", serde_json::to_string(&m).expect("manifest serializes")),
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(config_err("--threads must be at least 1"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| config_err(format!("thread pool: {e}")))?;
    pool.install(|| {
        if let Some(path) = &cli.from_manifest {
            let text =
                std::fs::read_to_string(path).map_err(|e| config_err(format!("reading {}: {e}", path.display())))?;
            let m = RunManifest::from_json(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let out = cli.out.clone().or(m.output.clone());
            return emit(m.run, out, cli.manifest.clone());
        }
        let command = cli.command.as_ref().ok_or_else(|| config_err("a subcommand or --from-manifest is required"))?;
        let run = resolve(command, cli.config.as_deref())?;
        emit(run, cli.out.clone(), cli.manifest.clone())
    })
}
