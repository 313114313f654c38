//! Estimation of the limit parameters from order-event data.

mod hill;
mod moments;
mod rho;

pub use hill::{default_hill_k, hill_estimator, HillEstimate};
pub use moments::{
    default_lag_cut, estimate_rates, estimate_size_moments, long_run_variance, variance_ratio_table, SizeMoments,
    VarianceRatioTable, MAX_LAG_CUT,
};
pub use rho::{estimate_rho, RhoAlignment, RhoEstimate};

use crate::diffusion::{DiffusionParams, ScaledParams};
use crate::error::{ensure, param, Error, Result};
use crate::lob::{OrderEvent, Side};
use serde::{Deserialize, Serialize};

/// Time-ordered events of one session, split by side.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub bid_events: Vec<OrderEvent>,
    pub ask_events: Vec<OrderEvent>,
}

impl FlowSample {
    pub fn new(bid_events: Vec<OrderEvent>, ask_events: Vec<OrderEvent>) -> Result<Self> {
        for (evs, side) in [(&bid_events, Side::Bid), (&ask_events, Side::Ask)] {
            for (i, e) in evs.iter().enumerate() {
                e.validate()?;
                if e.side != side {
                    return Err(Error::InvalidEvent { time: e.time, reason: format!("expected side {side:?}") });
                }
                if i > 0 && e.time < evs[i - 1].time {
                    return Err(Error::InvalidEvent { time: e.time, reason: "events out of time order".into() });
                }
            }
        }
        Ok(FlowSample { bid_events, ask_events })
    }

    pub fn from_events(events: &[OrderEvent]) -> Result<Self> {
        let (b, a) = crate::flow::split_sides(events);
        Self::new(b, a)
    }

    pub fn sizes(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.bid_events.iter().map(|e| e.delta).collect(),
            self.ask_events.iter().map(|e| e.delta).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.bid_events.len() + self.ask_events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// γ₀ = (E[T^a] + E[T^b]) / 2 from mean inter-event durations.
    pub fn gamma0(&self) -> Result<f64> {
        let [b, a] = estimate_rates(self)?;
        Ok(0.5 * (1.0 / b.value + 1.0 / a.value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_used: usize,
}

/// Time change to the period γ₁: N = γ₁/γ₀, μ = √N λ V̄, Λ = N · covariance.
pub fn scaled_params(est: &DiffusionParams, gamma0: f64, gamma1: f64) -> Result<ScaledParams> {
    ensure(gamma0 > 0.0 && gamma0.is_finite(), "gamma0", "must be positive")?;
    ensure(gamma1 >= gamma0 && gamma1.is_finite(), "gamma1", "must be at least gamma0")?;
    let n = gamma1 / gamma0;
    let c = est.covariance();
    let d = est.drift();
    Ok(ScaledParams {
        mu_bid: n.sqrt() * d[0],
        mu_ask: n.sqrt() * d[1],
        lambda: [[n * c[0][0], n * c[0][1]], [n * c[1][0], n * c[1][1]]],
        n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateOptions {
    /// Largest autocovariance lag; `None` selects it from the data.
    #[serde(default)]
    pub lag_cut: Option<usize>,
    /// Hill order-statistics count; `None` uses ⌊n^0.6⌋.
    #[serde(default)]
    pub hill_k: Option<usize>,
    #[serde(default)]
    pub alignment: RhoAlignment,
    /// Period of the time-changed approximation, seconds.
    #[serde(default = "default_gamma1")]
    pub gamma1: f64,
    #[serde(default = "default_ladder")]
    pub variance_ladder: Vec<usize>,
}

fn default_gamma1() -> f64 {
    30.0
}

fn default_ladder() -> Vec<usize> {
    vec![1, 2, 5, 10, 20, 50, 100]
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            lag_cut: None,
            hill_k: None,
            alignment: RhoAlignment::default(),
            gamma1: default_gamma1(),
            variance_ladder: default_ladder(),
        }
    }
}

/// One row shaped like the published parameter table: queue standard
/// deviations, drifts and correlation per period γ₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub std_bid: f64,
    pub std_ask: f64,
    pub mu_bid: f64,
    pub mu_ask: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub events_bid: usize,
    pub events_ask: usize,
    pub lag_cut: [usize; 2],
    pub rho_lag_cut: usize,
    pub rho_alignment: RhoAlignment,
    pub rho_raw: f64,
    pub rho_clamped: bool,
    pub variance_ratio_bid: Option<VarianceRatioTable>,
    pub variance_ratio_ask: Option<VarianceRatioTable>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterReport {
    pub lambda_b: ParamEstimate,
    pub lambda_a: ParamEstimate,
    pub vbar_b: ParamEstimate,
    pub vbar_a: ParamEstimate,
    pub v2_b: ParamEstimate,
    pub v2_a: ParamEstimate,
    pub rho: ParamEstimate,
    pub hill_b: Option<HillEstimate>,
    pub hill_a: Option<HillEstimate>,
    pub gamma0: f64,
    pub gamma1: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub mu: [f64; 2],
    #[serde(rename = "Lambda")]
    pub lambda: [[f64; 2]; 2],
    pub table_row: TableRow,
    pub diagnostics: Diagnostics,
}

impl ParameterReport {
    pub fn diffusion_params(&self) -> DiffusionParams {
        DiffusionParams {
            lambda_bid: self.lambda_b.value,
            lambda_ask: self.lambda_a.value,
            vbar_bid: self.vbar_b.value,
            vbar_ask: self.vbar_a.value,
            v2_bid: self.v2_b.value,
            v2_ask: self.v2_a.value,
            rho: self.rho.value,
        }
    }
}

/// The whole pipeline: rates, size moments, ρ, Hill tails, variance ratios
/// and the time-changed parameters.
pub fn estimate_all(sample: &FlowSample, opts: &EstimateOptions) -> Result<ParameterReport> {
    let [lb, la] = estimate_rates(sample)?;
    let sm = estimate_size_moments(sample, opts.lag_cut)?;
    let rho = estimate_rho(sample, opts.lag_cut, opts.alignment)?;
    let (xb, xa) = sample.sizes();
    let mut warnings = vec![];
    let mut hill = |xs: &[f64], name: &str| match hill_estimator(xs, opts.hill_k) {
        Ok(h) => Some(h),
        Err(e) => {
            warnings.push(format!("hill {name}: {e}"));
            None
        }
    };
    let hill_b = hill(&xb, "bid");
    let hill_a = hill(&xa, "ask");
    let mut vr = |xs: &[f64], name: &str| match variance_ratio_table(xs, &opts.variance_ladder) {
        Ok(t) => Some(t),
        Err(e) => {
            warnings.push(format!("variance ratio {name}: {e}"));
            None
        }
    };
    let variance_ratio_bid = vr(&xb, "bid");
    let variance_ratio_ask = vr(&xa, "ask");
    if rho.clamped {
        warnings.push(format!("rho clamped from {}", rho.raw));
    }
    let base = DiffusionParams {
        lambda_bid: lb.value,
        lambda_ask: la.value,
        vbar_bid: sm.vbar[0].value,
        vbar_ask: sm.vbar[1].value,
        v2_bid: sm.v2[0].value,
        v2_ask: sm.v2[1].value,
        rho: rho.estimate.value,
    };
    base.validate().map_err(|e| param("estimate", format!("estimated parameters are degenerate: {e}")))?;
    let gamma0 = 0.5 * (1.0 / lb.value + 1.0 / la.value);
    let sp = scaled_params(&base, gamma0, opts.gamma1.max(gamma0))?;
    if opts.gamma1 < gamma0 {
        warnings.push(format!("gamma1 {} below gamma0 {gamma0}; using gamma0", opts.gamma1));
    }
    Ok(ParameterReport {
        lambda_b: lb,
        lambda_a: la,
        vbar_b: sm.vbar[0],
        vbar_a: sm.vbar[1],
        v2_b: sm.v2[0],
        v2_a: sm.v2[1],
        rho: rho.estimate,
        hill_b,
        hill_a,
        gamma0,
        gamma1: opts.gamma1.max(gamma0),
        n: sp.n,
        mu: [sp.mu_bid, sp.mu_ask],
        lambda: sp.lambda,
        table_row: TableRow {
            std_bid: sp.lambda[0][0].sqrt(),
            std_ask: sp.lambda[1][1].sqrt(),
            mu_bid: sp.mu_bid,
            mu_ask: sp.mu_ask,
            rho: rho.estimate.value,
        },
        diagnostics: Diagnostics {
            events_bid: sample.bid_events.len(),
            events_ask: sample.ask_events.len(),
            lag_cut: sm.lag_cut,
            rho_lag_cut: rho.lag_cut,
            rho_alignment: rho.alignment,
            rho_raw: rho.raw,
            rho_clamped: rho.clamped,
            variance_ratio_bid,
            variance_ratio_ask,
            warnings,
        },
    })
}
