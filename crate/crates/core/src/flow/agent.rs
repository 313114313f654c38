use super::{merge, Dist, FlowMoments};
use crate::error::{ensure, Result};
use crate::lob::{OrderEvent, Side};
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Mixture of impatient (m), patient (l) and mixed traders; mixed traders
/// split an order into a limit part γV and a market part (1-γ)V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentMixSpec {
    pub m: f64,
    pub l: f64,
    pub gamma: f64,
    pub duration_dist: Dist,
    pub size_dist: Dist,
    /// Negate the impatient and patient rows of the sign table.
    #[serde(default)]
    pub flip_market_sign: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TraderKind {
    ImpatientBid,
    ImpatientAsk,
    PatientBid,
    PatientAsk,
    MixedBid,
    MixedAsk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentArrival {
    pub time: f64,
    pub kind: TraderKind,
    /// (bid change, ask change); zero means the side is untouched.
    pub delta: [f64; 2],
}

impl AgentMixSpec {
    pub fn mixed(&self) -> f64 {
        1.0 - self.l - self.m
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.m >= 0.0 && self.l >= 0.0, "m/l", "must be non-negative")?;
        ensure(self.m + self.l <= 1.0 + 1e-12, "m/l", "m + l must not exceed 1")?;
        ensure(self.gamma > 0.0 && self.gamma < 1.0, "gamma", "must lie in (0, 1)")?;
        self.duration_dist.validate()?;
        self.size_dist.validate()
    }

    fn sign(&self) -> f64 {
        if self.flip_market_sign {
            -1.0
        } else {
            1.0
        }
    }

    pub fn kind_probabilities(&self) -> [(TraderKind, f64); 6] {
        let s = self.mixed().max(0.0);
        [
            (TraderKind::ImpatientBid, self.m / 2.0),
            (TraderKind::ImpatientAsk, self.m / 2.0),
            (TraderKind::PatientBid, self.l / 2.0),
            (TraderKind::PatientAsk, self.l / 2.0),
            (TraderKind::MixedBid, s / 2.0),
            (TraderKind::MixedAsk, s / 2.0),
        ]
    }

    fn deltas(&self, kind: TraderKind, v: f64) -> [f64; 2] {
        let sg = self.sign();
        let g = self.gamma;
        match kind {
            TraderKind::ImpatientBid => [sg * v, 0.0],
            TraderKind::ImpatientAsk => [0.0, sg * v],
            TraderKind::PatientBid => [-sg * v, 0.0],
            TraderKind::PatientAsk => [0.0, -sg * v],
            TraderKind::MixedBid => [g * v, -(1.0 - g) * v],
            TraderKind::MixedAsk => [-(1.0 - g) * v, g * v],
        }
    }

    /// Mean and second-moment matrix of one trader's (bid, ask) change.
    pub fn trader_moments(&self) -> ([f64; 2], [[f64; 2]; 2]) {
        let ev = self.size_dist.mean();
        let ev2 = self.size_dist.second_moment();
        let s = self.mixed();
        let g = self.gamma;
        let mean = ev * (self.sign() * (self.m - self.l) + s * (2.0 * g - 1.0)) / 2.0;
        let sq = ev2 * (self.m + self.l + s * (g * g + (1.0 - g) * (1.0 - g))) / 2.0;
        let cross = -s * g * (1.0 - g) * ev2;
        ([mean, mean], [[sq, cross], [cross, sq]])
    }

    /// Renewal-reward long-run moments; requires finite second moments.
    pub fn moments(&self) -> Option<FlowMoments> {
        let et = self.duration_dist.mean();
        let vt = self.duration_dist.variance();
        if !self.size_dist.second_moment().is_finite() || !vt.is_finite() {
            return None;
        }
        let r = 1.0 / et;
        let (mu, m2) = self.trader_moments();
        let mut cov = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] = r * (m2[i][j] - mu[i] * mu[j] + mu[i] * mu[j] * vt / (et * et));
            }
        }
        let touch = 1.0 - (self.m + self.l) / 2.0;
        Some(FlowMoments {
            rate: [r * touch, r * touch],
            drift: [r * mu[0], r * mu[1]],
            cov,
        })
    }

    fn draw<R: Rng>(&self, r: &mut R, t: f64) -> AgentArrival {
        let u: f64 = r.random();
        let probs = self.kind_probabilities();
        let mut acc = 0.0;
        let mut kind = probs[5].0;
        for (k, p) in probs {
            acc += p;
            if u < acc {
                kind = k;
                break;
            }
        }
        let v = self.size_dist.sample(r);
        AgentArrival {
            time: t,
            kind,
            delta: self.deltas(kind, v),
        }
    }
}

/// The first `count` trader arrivals.
pub fn gen_agent_arrivals(spec: &AgentMixSpec, count: usize, seed: u64) -> Result<Vec<AgentArrival>> {
    spec.validate()?;
    let mut r = rng::from_seed(seed);
    let mut t = 0.0;
    Ok((0..count)
        .map(|_| {
            t += spec.duration_dist.sample(&mut r);
            spec.draw(&mut r, t)
        })
        .collect())
}

pub fn gen_agent_flow(spec: &AgentMixSpec, horizon: f64, seed: u64) -> Result<Vec<OrderEvent>> {
    spec.validate()?;
    ensure(horizon >= 0.0, "horizon", "must be non-negative")?;
    let mut r = rng::from_seed(seed);
    let mut t = 0.0;
    let (mut bid, mut ask) = (Vec::new(), Vec::new());
    loop {
        t += spec.duration_dist.sample(&mut r);
        if t > horizon {
            break;
        }
        let a = spec.draw(&mut r, t);
        if a.delta[0] != 0.0 {
            bid.push(OrderEvent { time: t, side: Side::Bid, delta: a.delta[0] });
        }
        if a.delta[1] != 0.0 {
            ask.push(OrderEvent { time: t, side: Side::Ask, delta: a.delta[1] });
        }
    }
    Ok(merge(bid, ask))
}
