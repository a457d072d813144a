//! Monte-Carlo experiments: MSE against SNR, acquisition range and AR(1)
//! tracking.
//!
//! Trial `i` of point `p` draws everything from `seed.derive_path(&[p, i])`,
//! with sub-streams 0 (CFO), 1 (channel) and 2 (noise). Trials run on the
//! rayon pool and are reduced in index order, so results do not depend on the
//! thread count.

use mapcfo_core::{
    beta_iid, build_workspace, estimate_frame, make_bounds, sample_cfo, sample_channel, synthesize_frame, CfoPrior,
    ChannelMode, ChannelPrior, CorrelationMethod, Error, EstimatorWorkspace, PilotMatrix, Result, Seed,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spec::{power_for_snr, CfoPriorSpec, PilotSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Gaussian CFO and channel priors.
    Map,
    /// Flat CFO prior and least-squares channel; the prior mean is kept only
    /// as the derotation center.
    Ml,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Map => "map",
            Mode::Ml => "ml",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "map" => Ok(Mode::Map),
            "ml" => Ok(Mode::Ml),
            other => Err(format!("unknown estimator mode `{other}` (expected map or ml)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    General,
    Periodic,
    Td,
}

impl Method {
    fn core(self) -> CorrelationMethod {
        match self {
            Method::General => CorrelationMethod::General,
            Method::Periodic => CorrelationMethod::Periodic,
            Method::Td => CorrelationMethod::TimeDivision,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "general" => Ok(Method::General),
            "periodic" => Ok(Method::Periodic),
            "td" => Ok(Method::Td),
            other => Err(format!("unknown correlation method `{other}` (expected general, periodic or td)")),
        }
    }
}

/// Shared by the SNR sweep (`points` are SNRs in dB) and the acquisition sweep
/// (`points` are true CFOs, simulated at `snr_db`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub rx_antennas: usize,
    pub pilot: PilotSpec,
    /// Zero-mean i.i.d. channel variance `sigma_h^2`.
    pub channel_variance: f64,
    pub cfo: CfoPriorSpec,
    pub points: Vec<f64>,
    pub snr_db: f64,
    pub trials: u64,
    pub modes: Vec<Mode>,
    pub method: Method,
    pub seed: u64,
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.points.is_empty() || self.modes.is_empty() {
            return Err(Error::InvalidParameter("trials, points and modes must be non-empty".into()));
        }
        if self.rx_antennas == 0 {
            return Err(Error::InvalidParameter("need at least one receive antenna".into()));
        }
        if !(self.channel_variance > 0.0) || !self.channel_variance.is_finite() {
            return Err(Error::InvalidParameter("channel variance must be positive".into()));
        }
        if self.points.iter().any(|p| !p.is_finite()) || !self.snr_db.is_finite() {
            return Err(Error::InvalidParameter("sweep points must be finite".into()));
        }
        self.cfo.prior()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub x: f64,
    pub mode: Mode,
    pub mse: f64,
    pub trials: u64,
    pub bcrlb: f64,
    pub crlb: f64,
    /// Trials where the estimator returned an error; they are scored with the
    /// derotation center as the estimate.
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn get(&self, x: f64, mode: Mode) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.x == x && r.mode == mode)
    }

    pub fn csv(&self) -> String {
        crate::io::sweep_csv(&self.records)
    }
}

struct Estimators<'a> {
    map: EstimatorWorkspace<'a>,
    ml: EstimatorWorkspace<'a>,
}

impl<'a> Estimators<'a> {
    fn new(pilot: &'a PilotMatrix, channel: &'a ChannelPrior) -> Result<Self> {
        Ok(Self {
            map: build_workspace(pilot, channel, ChannelMode::Mmse)?,
            ml: build_workspace(pilot, channel, ChannelMode::LeastSquares)?,
        })
    }

    /// Squared error and whether the estimator failed.
    fn squared_error(&self, y: &mapcfo_core::Frame, mode: Mode, prior: &CfoPrior, method: Method, f: f64) -> (f64, bool) {
        let (ws, prior) = match mode {
            Mode::Map => (&self.map, *prior),
            Mode::Ml => (&self.ml, CfoPrior::flat(prior.mean())),
        };
        match estimate_frame(y, ws, &prior, method.core()) {
            Ok(est) => ((est.value - f).powi(2), false),
            Err(_) => ((prior.mean() - f).powi(2), true),
        }
    }
}

fn mode_bounds(beta: f64, prior: &CfoPrior, mode: Mode) -> Result<(f64, f64)> {
    let b = match mode {
        Mode::Map => make_bounds(beta, prior)?,
        Mode::Ml => make_bounds(beta, &CfoPrior::flat(prior.mean()))?,
    };
    Ok((b.bcrlb, b.crlb))
}

#[derive(Clone, Copy)]
enum Truth {
    FromPrior,
    Fixed(f64),
}

fn run_point(
    cfg: &SweepConfig,
    point: usize,
    x: f64,
    snr_db: f64,
    truth: Truth,
) -> Result<Vec<SweepRecord>> {
    let channel = ChannelPrior::iid(cfg.rx_antennas, cfg.pilot.tx_antennas, cfg.channel_variance)?;
    let pilot = cfg.pilot.build(power_for_snr(snr_db, cfg.channel_variance))?;
    let prior = cfg.cfo.prior()?;
    if matches!(truth, Truth::FromPrior) && prior.is_flat() {
        return Err(Error::FlatPrior);
    }
    let est = Estimators::new(&pilot, &channel)?;
    let master = Seed(cfg.seed);
    let modes = &cfg.modes;
    let per_trial: Vec<Result<Vec<(f64, bool)>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let s = master.derive_path(&[point as u64, trial]);
            let f = match truth {
                Truth::FromPrior => sample_cfo(&prior, s.derive(0))?,
                Truth::Fixed(f) => f,
            };
            let h = sample_channel(&channel, s.derive(1));
            let y = synthesize_frame(&pilot, &h, f, 1.0, s.derive(2))?;
            Ok(modes.iter().map(|&m| est.squared_error(&y, m, &prior, cfg.method, f)).collect())
        })
        .collect();

    let beta = beta_iid(&pilot, cfg.channel_variance, cfg.rx_antennas)?;
    let mut sums = vec![(0.0f64, 0u64); modes.len()];
    for trial in per_trial {
        for (acc, (e, failed)) in sums.iter_mut().zip(trial?) {
            acc.0 += e;
            acc.1 += failed as u64;
        }
    }
    modes
        .iter()
        .zip(sums)
        .map(|(&mode, (sum, failures))| {
            let (bcrlb, crlb) = mode_bounds(beta, &prior, mode)?;
            Ok(SweepRecord { x, mode, mse: sum / cfg.trials as f64, trials: cfg.trials, bcrlb, crlb, failures })
        })
        .collect()
}

/// CFO drawn from the prior at every trial; `cfg.points` are SNRs in dB.
pub fn run_mse_vs_snr(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut records = Vec::new();
    for (i, &snr) in cfg.points.iter().enumerate() {
        records.extend(run_point(cfg, i, snr, snr, Truth::FromPrior)?);
    }
    Ok(SweepResult { records })
}

/// Fixed true CFO per point (`cfg.points`), at `cfg.snr_db`.
pub fn run_acquisition_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut records = Vec::new();
    for (i, &f) in cfg.points.iter().enumerate() {
        records.extend(run_point(cfg, i, f, cfg.snr_db, Truth::Fixed(f))?);
    }
    Ok(SweepResult { records })
}

/// Largest `d` on the grid such that every point with `|x - center| <= d` has
/// `mse <= factor * bound`, where the bound is the record's BCRLB.
pub fn usable_range(result: &SweepResult, mode: Mode, center: f64, factor: f64) -> f64 {
    let mut recs: Vec<&SweepRecord> = result.records.iter().filter(|r| r.mode == mode).collect();
    recs.sort_by(|a, b| (a.x - center).abs().total_cmp(&(b.x - center).abs()));
    let mut range = 0.0;
    for (i, r) in recs.iter().enumerate() {
        let d = (r.x - center).abs();
        if r.mse > factor * r.bcrlb {
            break;
        }
        // A distance only counts once every point at that distance passes.
        if recs.get(i + 1).is_none_or(|next| (next.x - center).abs() > d + 1e-12) {
            range = d;
        }
    }
    range
}

/// Prior for frame `nu + 1` from the estimate of frame `nu`.
pub fn ar1_prior_update(f_hat: f64, bcrlb: f64, ar_rho: f64, ar_mean: f64, ar_noise_var: f64) -> Result<CfoPrior> {
    if !(bcrlb >= 0.0) {
        return Err(Error::InvalidParameter(format!("bcrlb must be >= 0, got {bcrlb}")));
    }
    let carried = if ar_rho == 0.0 { 0.0 } else { ar_rho * ar_rho * bcrlb };
    let mean = if ar_rho == 0.0 { ar_mean } else { ar_rho * f_hat + (1.0 - ar_rho) * ar_mean };
    CfoPrior::new(mean, carried + ar_noise_var)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingConfig {
    pub rx_antennas: usize,
    pub pilot: PilotSpec,
    pub channel_variance: f64,
    pub ar_rho: f64,
    pub ar_mean: f64,
    pub ar_noise_var: f64,
    pub frames: usize,
    pub runs: u64,
    pub snr_db: f64,
    pub method: Method,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingRecord {
    /// One based.
    pub frame: usize,
    pub map_mse: f64,
    pub ml_mse: f64,
    /// BCRLB of the prior used at this frame; `1/beta` at frame one.
    pub bcrlb: f64,
    pub crlb: f64,
    pub prior_variance: f64,
    pub map_failures: u64,
    pub ml_failures: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingResult {
    pub records: Vec<TrackingRecord>,
    pub runs: u64,
    /// BCRLB at the fixed point of the prior-variance recursion.
    pub stationary_bcrlb: f64,
    /// BCRLB when the previous frame is known exactly, `1 / (beta + 1/sigma_w^2)`.
    pub perfect_previous_bcrlb: f64,
}

impl TrackingResult {
    pub fn csv(&self) -> String {
        let rows: Vec<SweepRecord> = self
            .records
            .iter()
            .flat_map(|r| {
                [
                    SweepRecord {
                        x: r.frame as f64,
                        mode: Mode::Map,
                        mse: r.map_mse,
                        trials: self.runs,
                        bcrlb: r.bcrlb,
                        crlb: r.crlb,
                        failures: r.map_failures,
                    },
                    SweepRecord {
                        x: r.frame as f64,
                        mode: Mode::Ml,
                        mse: r.ml_mse,
                        trials: self.runs,
                        bcrlb: r.crlb,
                        crlb: r.crlb,
                        failures: r.ml_failures,
                    },
                ]
            })
            .collect();
        crate::io::sweep_csv(&rows)
    }
}

/// Fixed point of `v -> rho^2 / (beta + 1/v) + sigma_w^2`, found by iteration.
pub fn stationary_prior_variance(beta: f64, ar_rho: f64, ar_noise_var: f64) -> f64 {
    let mut v = ar_noise_var.max(f64::MIN_POSITIVE);
    for _ in 0..10_000 {
        let next = ar_rho * ar_rho / (beta + 1.0 / v) + ar_noise_var;
        if (next - v).abs() <= 1e-15 * v {
            return next;
        }
        v = next;
    }
    v
}

pub fn run_tracking(cfg: &TrackingConfig) -> Result<TrackingResult> {
    if !(0.0..=1.0).contains(&cfg.ar_rho) || !(cfg.ar_noise_var >= 0.0) || !cfg.ar_mean.is_finite() {
        return Err(Error::InvalidParameter("need 0 <= ar_rho <= 1, ar_noise_var >= 0 and a finite mean".into()));
    }
    if cfg.frames == 0 || cfg.runs == 0 {
        return Err(Error::InvalidParameter("frames and runs must be positive".into()));
    }
    if !(cfg.channel_variance > 0.0) || cfg.rx_antennas == 0 {
        return Err(Error::InvalidParameter("channel variance and receive antennas must be positive".into()));
    }
    let channel = ChannelPrior::iid(cfg.rx_antennas, cfg.pilot.tx_antennas, cfg.channel_variance)?;
    let pilot = cfg.pilot.build(power_for_snr(cfg.snr_db, cfg.channel_variance))?;
    let est = Estimators::new(&pilot, &channel)?;
    let beta = beta_iid(&pilot, cfg.channel_variance, cfg.rx_antennas)?;
    let crlb = make_bounds(beta, &CfoPrior::flat(0.0))?.crlb;
    let stationary_sd = if cfg.ar_rho < 1.0 { (cfg.ar_noise_var / (1.0 - cfg.ar_rho * cfg.ar_rho)).sqrt() } else { 0.0 };
    let master = Seed(cfg.seed);

    // Per frame: (map error, ml error, map failed, ml failed, prior variance, bcrlb).
    type Row = (f64, f64, bool, bool, f64, f64);
    let runs: Vec<Result<Vec<Row>>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let s = master.derive(run);
            let mut noise = s.derive(0).rng();
            let normal = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 { rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng) };
            let mut f = cfg.ar_mean + stationary_sd * normal(&mut noise);
            let mut prior = CfoPrior::flat(cfg.ar_mean);
            let mut rows = Vec::with_capacity(cfg.frames);
            for frame in 0..cfg.frames {
                if frame > 0 {
                    f = cfg.ar_rho * f + (1.0 - cfg.ar_rho) * cfg.ar_mean + cfg.ar_noise_var.sqrt() * normal(&mut noise);
                }
                let fs = s.derive_path(&[1, frame as u64]);
                let h = sample_channel(&channel, fs.derive(1));
                let y = synthesize_frame(&pilot, &h, f, 1.0, fs.derive(2))?;
                let bcrlb = make_bounds(beta, &prior)?.bcrlb;
                let (map_f, map_failed) = match estimate_frame(&y, &est.map, &prior, cfg.method.core()) {
                    Ok(e) => (e.value, false),
                    Err(_) => (prior.mean(), true),
                };
                let (ml_err, ml_failed) =
                    est.squared_error(&y, Mode::Ml, &CfoPrior::flat(cfg.ar_mean), cfg.method, f);
                rows.push(((map_f - f).powi(2), ml_err, map_failed, ml_failed, prior.variance(), bcrlb));
                prior = ar1_prior_update(map_f, bcrlb, cfg.ar_rho, cfg.ar_mean, cfg.ar_noise_var)?;
            }
            Ok(rows)
        })
        .collect();

    let mut records: Vec<TrackingRecord> = (0..cfg.frames)
        .map(|i| TrackingRecord {
            frame: i + 1,
            map_mse: 0.0,
            ml_mse: 0.0,
            bcrlb: 0.0,
            crlb,
            prior_variance: 0.0,
            map_failures: 0,
            ml_failures: 0,
        })
        .collect();
    for run in runs {
        for (rec, (map_e, ml_e, map_fail, ml_fail, var, bcrlb)) in records.iter_mut().zip(run?) {
            rec.map_mse += map_e;
            rec.ml_mse += ml_e;
            rec.map_failures += map_fail as u64;
            rec.ml_failures += ml_fail as u64;
            // The prior variance and its bound follow a deterministic recursion.
            rec.prior_variance = var;
            rec.bcrlb = bcrlb;
        }
    }
    let n = cfg.runs as f64;
    for rec in &mut records {
        rec.map_mse /= n;
        rec.ml_mse /= n;
    }
    let v = stationary_prior_variance(beta, cfg.ar_rho, cfg.ar_noise_var);
    Ok(TrackingResult {
        records,
        runs: cfg.runs,
        stationary_bcrlb: 1.0 / (beta + 1.0 / v),
        perfect_previous_bcrlb: if cfg.ar_noise_var > 0.0 { 1.0 / (beta + 1.0 / cfg.ar_noise_var) } else { 0.0 },
    })
}
