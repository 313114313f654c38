//! JSON experiment configs. Unknown fields are rejected, every field with a
//! default is filled in before hashing, and the resolved form is echoed in
//! each report.

use anyhow::{Context, Result};
use htlob::diffusion::DiffusionParams;
use htlob::estimation::EstimateOptions;
use htlob::flow::FlowSpec;
use htlob::lob::{BookState, DepthSampler, ReinitRule, ReinitVariant};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("config {}", path.display()))
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let v = T::deserialize(&mut de).map_err(|e| anyhow::anyhow!("schema error: {e}"))?;
    de.end().map_err(|e| anyhow::anyhow!("schema error: {e}"))?;
    Ok(v)
}

/// Example config shipped for each command, as printed by `htlob schema`.
pub fn example(command: &str) -> Option<&'static str> {
    Some(match command {
        "simulate-lob" => include_str!("../../../configs/simulate_lob.json"),
        "validate-fclt" => include_str!("../../../configs/validate_fclt_poisson.json"),
        "pup" => include_str!("../../../configs/pup.json"),
        "duration" => include_str!("../../../configs/duration.json"),
        "estimate" => include_str!("../../../configs/estimate.json"),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReinitConfig {
    Iid {
        up: DepthSampler,
        down: DepthSampler,
    },
    Pegged {
        beta_bid: f64,
        beta_ask: f64,
        up: DepthSampler,
        down: DepthSampler,
    },
}

impl ReinitConfig {
    pub fn build(&self) -> Result<ReinitRule> {
        Ok(match self {
            ReinitConfig::Iid { up, down } => ReinitRule::iid(up.clone(), down.clone())?,
            ReinitConfig::Pegged { beta_bid, beta_ask, up, down } => ReinitRule::new(
                ReinitVariant::Pegged { beta_bid: *beta_bid, beta_ask: *beta_ask },
                up.clone(),
                down.clone(),
            )?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBook {
    pub bid_price_ticks: i64,
    pub tick: f64,
    pub q_bid: f64,
    pub q_ask: f64,
}

impl Default for InitialBook {
    fn default() -> Self {
        InitialBook { bid_price_ticks: 10_000, tick: 0.01, q_bid: 10.0, q_ask: 10.0 }
    }
}

impl InitialBook {
    pub fn build(&self) -> Result<BookState> {
        Ok(BookState::new(self.bid_price_ticks, self.tick, self.q_bid, self.q_ask)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub flow: FlowSpec,
    /// Seconds of order flow to generate.
    pub horizon: f64,
    #[serde(default)]
    pub initial: InitialBook,
    pub reinit: ReinitConfig,
    /// Relative tolerance of the observed against the configured event rate.
    #[serde(default = "default_rate_tolerance")]
    pub rate_tolerance: f64,
    /// The rate check runs only when at least this many events are expected.
    #[serde(default = "default_min_events")]
    pub rate_check_min_events: f64,
}

fn default_rate_tolerance() -> f64 {
    0.05
}

fn default_min_events() -> f64 {
    10_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcltCommandConfig {
    pub flow: FlowSpec,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<u64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Unit intervals of rescaled time per replication.
    #[serde(default = "default_unit_intervals")]
    pub horizon: usize,
    /// Bound on the relative covariance error at the top of the ladder.
    #[serde(default = "default_cov_tolerance")]
    pub cov_tolerance: f64,
    #[serde(default)]
    pub queue_check: Option<QueueCheckConfig>,
}

fn default_ladder() -> Vec<u64> {
    vec![100, 1_000, 10_000]
}

fn default_replications() -> usize {
    1_000
}

fn default_unit_intervals() -> usize {
    4
}

fn default_cov_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueCheckConfig {
    pub n: u64,
    pub replications: usize,
    /// Start point of the limit process; the discrete book starts at √n·x0.
    pub x0: [f64; 2],
    pub reinit: ReinitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PupConfig {
    pub params: DiffusionParams,
    /// Correlations to sweep; replaces `params.rho` when present.
    #[serde(default)]
    pub rho: Option<Vec<f64>>,
    #[serde(default = "default_axis")]
    pub x: Vec<f64>,
    #[serde(default = "default_axis")]
    pub y: Vec<f64>,
    /// Additional single points evaluated after the grid.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default = "default_paths")]
    pub paths: u64,
    /// Allowed gap in Monte Carlo standard errors.
    #[serde(default = "default_z")]
    pub z: f64,
}

fn default_axis() -> Vec<f64> {
    vec![0.5, 1.375, 2.25, 3.125, 4.0]
}

fn default_paths() -> u64 {
    100_000
}

fn default_z() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationConfig {
    pub params: DiffusionParams,
    #[serde(default)]
    pub rho: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub x: f64,
    #[serde(default = "one")]
    pub y: f64,
    /// Evaluation times; default is 40 log-spaced points over [0.01, 100]·r₀².
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default = "default_paths")]
    pub paths: u64,
    #[serde(default = "default_sup_tolerance")]
    pub sup_tolerance: f64,
    /// Only times where the analytic survival lies in this band enter the sup.
    #[serde(default = "default_band")]
    pub band: [f64; 2],
    #[serde(default)]
    pub tail: Option<TailConfig>,
}

fn one() -> f64 {
    1.0
}

fn default_sup_tolerance() -> f64 {
    0.02
}

fn default_band() -> [f64; 2] {
    [0.05, 0.95]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    #[serde(default = "default_tail_paths")]
    pub paths: u64,
    /// Censoring time of the tail paths.
    #[serde(default = "default_tail_t_max")]
    pub t_max: f64,
    /// Left end of the fit window in units of r₀².
    #[serde(default = "default_window_start")]
    pub window_start: f64,
    /// The window ends where this many paths are still alive.
    #[serde(default = "default_min_survivors")]
    pub min_survivors: u64,
    #[serde(default = "default_rel_tolerance")]
    pub rel_tolerance: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig {
            paths: default_tail_paths(),
            t_max: default_tail_t_max(),
            window_start: default_window_start(),
            min_survivors: default_min_survivors(),
            rel_tolerance: default_rel_tolerance(),
        }
    }
}

fn default_tail_paths() -> u64 {
    1_000_000
}

fn default_tail_t_max() -> f64 {
    1e4
}

fn default_window_start() -> f64 {
    5.0
}

fn default_min_survivors() -> u64 {
    200
}

fn default_rel_tolerance() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    #[serde(default)]
    pub options: EstimateOptions,
    /// Known parameters of a synthetic input; enables the recovery checks.
    #[serde(default)]
    pub truth: Option<DiffusionParams>,
    #[serde(default = "default_rate_tolerance")]
    pub rel_tolerance: f64,
    #[serde(default = "default_cov_tolerance_rho")]
    pub rho_tolerance: f64,
}

fn default_cov_tolerance_rho() -> f64 {
    0.1
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            options: EstimateOptions::default(),
            truth: None,
            rel_tolerance: default_rate_tolerance(),
            rho_tolerance: default_cov_tolerance_rho(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIM: &str = r#"{
        "flow": {"model": "poisson", "lambda_limit": 1.0, "mu_market": 0.5, "theta_cancel": 0.5, "unit_size": 1.0},
        "horizon": 10.0,
        "reinit": {"variant": "iid", "up": {"kind": "fixed", "bid": 5.0, "ask": 5.0},
                   "down": {"kind": "fixed", "bid": 5.0, "ask": 5.0}}
    }"#;

    #[test]
    fn defaults_are_filled() {
        let c: SimulateConfig = parse(SIM).unwrap();
        assert_eq!(c.initial, InitialBook::default());
        assert_eq!(c.rate_tolerance, 0.05);
        assert!(c.reinit.build().is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let typo = SIM.replace("\"horizon\"", "\"horizont\"");
        assert!(parse::<SimulateConfig>(&typo).is_err());
        let nested = SIM.replace("\"unit_size\"", "\"unit_sizes\"");
        let e = parse::<SimulateConfig>(&nested).unwrap_err().to_string();
        assert!(e.contains("schema error"), "{e}");
        let sampler = SIM.replacen("\"bid\": 5.0", "\"bidd\": 5.0", 1);
        assert!(parse::<SimulateConfig>(&sampler).is_err());
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        assert!(parse::<SimulateConfig>(&format!("{SIM} x")).is_err());
    }

    #[test]
    fn shipped_examples_parse() {
        parse::<SimulateConfig>(example("simulate-lob").unwrap()).unwrap();
        parse::<FcltCommandConfig>(example("validate-fclt").unwrap()).unwrap();
        parse::<FcltCommandConfig>(include_str!("../../../configs/validate_fclt_agent.json")).unwrap();
        parse::<PupConfig>(example("pup").unwrap()).unwrap();
        parse::<DurationConfig>(example("duration").unwrap()).unwrap();
        parse::<EstimateConfig>(example("estimate").unwrap()).unwrap();
        assert!(example("nope").is_none());
    }

    #[test]
    fn pegged_beta_is_checked() {
        let c = ReinitConfig::Pegged {
            beta_bid: 1.0,
            beta_ask: 0.2,
            up: DepthSampler::Fixed { bid: 1.0, ask: 1.0 },
            down: DepthSampler::Fixed { bid: 1.0, ask: 1.0 },
        };
        assert!(c.build().is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c: PupConfig = parse(
            r#"{"params": {"lambda_bid": 1, "lambda_ask": 1, "vbar_bid": 0, "vbar_ask": 0,
                           "v2_bid": 1, "v2_ask": 1, "rho": 0}}"#,
        )
        .unwrap();
        let back: PupConfig = parse(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.x.len(), 5);
    }
}
