use super::{merge, FlowMoments};
use crate::error::{ensure, Result};
use crate::lob::{OrderEvent, Side};
use crate::rng;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

/// Limit orders (+), market orders and cancels (−) of a fixed size, arriving
/// as independent Poisson streams on each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonFlowSpec {
    pub lambda_limit: f64,
    pub mu_market: f64,
    pub theta_cancel: f64,
    pub unit_size: f64,
}

impl PoissonFlowSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.lambda_limit > 0.0, "lambda_limit", "must be positive")?;
        ensure(self.mu_market > 0.0, "mu_market", "must be positive")?;
        ensure(self.theta_cancel > 0.0, "theta_cancel", "must be positive")?;
        ensure(self.unit_size > 0.0, "unit_size", "must be positive")
    }

    pub fn total_rate(&self) -> f64 {
        self.lambda_limit + self.mu_market + self.theta_cancel
    }

    /// Probability that an event is a limit order.
    pub fn p_limit(&self) -> f64 {
        self.lambda_limit / self.total_rate()
    }

    pub fn moments(&self) -> FlowMoments {
        let r = self.total_rate();
        let m = self.unit_size * (2.0 * self.p_limit() - 1.0);
        // compound Poisson: variance rate is r E[V^2]
        let c = r * self.unit_size * self.unit_size;
        FlowMoments {
            rate: [r, r],
            drift: [r * m, r * m],
            cov: [[c, 0.0], [0.0, c]],
        }
    }
}

pub fn gen_poisson_flow(spec: &PoissonFlowSpec, horizon: f64, seed: u64) -> Result<Vec<OrderEvent>> {
    spec.validate()?;
    ensure(horizon >= 0.0, "horizon", "must be non-negative")?;
    let mut r = rng::from_seed(seed);
    let bid = side_stream(spec, Side::Bid, horizon, &mut r);
    let ask = side_stream(spec, Side::Ask, horizon, &mut r);
    Ok(merge(bid, ask))
}

fn side_stream<R: Rng>(spec: &PoissonFlowSpec, side: Side, horizon: f64, r: &mut R) -> Vec<OrderEvent> {
    let exp = Exp::new(spec.total_rate()).unwrap();
    let p = spec.p_limit();
    let mut t = 0.0;
    let mut out = Vec::with_capacity((horizon * spec.total_rate() * 1.1) as usize + 8);
    loop {
        t += exp.sample(r);
        if t > horizon {
            return out;
        }
        let delta = if r.random::<f64>() < p {
            spec.unit_size
        } else {
            -spec.unit_size
        };
        out.push(OrderEvent { time: t, side, delta });
    }
}
