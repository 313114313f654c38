//! Order-flow generators. Each one is a pure function of its spec, the
//! horizon (or count) and a seed.

mod acd;
mod agent;
mod arch;
mod dist;
mod hawkes;
mod poisson;

pub use acd::{gen_acd_durations, AcdSpec};
pub use agent::{gen_agent_arrivals, gen_agent_flow, AgentArrival, AgentMixSpec, TraderKind};
pub use arch::{gen_arch_flow, gen_arch_volumes, ArchFlowSpec, ArchVolumeSpec};
pub use dist::Dist;
pub use hawkes::{gen_hawkes_flow, gen_hawkes_times, EventType, HawkesFlowSpec};
pub use poisson::{gen_poisson_flow, PoissonFlowSpec};

use crate::diffusion::DiffusionParams;
use crate::error::Result;
use crate::lob::{OrderEvent, Side};
use serde::{Deserialize, Serialize};

/// Long-run first and second moments of the net flow per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowMoments {
    /// Events per unit time on each side.
    pub rate: [f64; 2],
    pub drift: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl FlowMoments {
    /// Parameters reproducing these moments. Here v² is the covariance rate
    /// over the event rate, so it includes the arrival-count variability and
    /// exceeds the per-event size variance when V̄ ≠ 0.
    pub fn diffusion_params(&self) -> DiffusionParams {
        DiffusionParams {
            lambda_bid: self.rate[0],
            lambda_ask: self.rate[1],
            vbar_bid: self.drift[0] / self.rate[0],
            vbar_ask: self.drift[1] / self.rate[1],
            v2_bid: self.cov[0][0] / self.rate[0],
            v2_ask: self.cov[1][1] / self.rate[1],
            rho: self.cov[0][1] / (self.cov[0][0] * self.cov[1][1]).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FlowSpec {
    Poisson(PoissonFlowSpec),
    Hawkes(HawkesFlowSpec),
    Agent(AgentMixSpec),
    Arch(ArchFlowSpec),
}

impl FlowSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FlowSpec::Poisson(s) => s.validate(),
            FlowSpec::Hawkes(s) => s.validate(),
            FlowSpec::Agent(s) => s.validate(),
            FlowSpec::Arch(s) => s.validate(),
        }
    }

    pub fn generate(&self, horizon: f64, seed: u64) -> Result<Vec<OrderEvent>> {
        match self {
            FlowSpec::Poisson(s) => gen_poisson_flow(s, horizon, seed),
            FlowSpec::Hawkes(s) => gen_hawkes_flow(s, horizon, seed),
            FlowSpec::Agent(s) => gen_agent_flow(s, horizon, seed),
            FlowSpec::Arch(s) => gen_arch_flow(s, horizon, seed),
        }
    }

    /// Exact long-run moments where they are available in closed form.
    pub fn moments(&self) -> Option<FlowMoments> {
        match self {
            FlowSpec::Poisson(s) => Some(s.moments()),
            FlowSpec::Hawkes(s) => s.moments().ok(),
            FlowSpec::Agent(s) => s.moments(),
            FlowSpec::Arch(s) => s.moments(),
        }
    }
}

/// Stable merge of two time-sorted streams; bid events go first on ties.
pub(crate) fn merge(bid: Vec<OrderEvent>, ask: Vec<OrderEvent>) -> Vec<OrderEvent> {
    let mut out = Vec::with_capacity(bid.len() + ask.len());
    let (mut i, mut j) = (0, 0);
    while i < bid.len() || j < ask.len() {
        let take_bid = j >= ask.len() || (i < bid.len() && bid[i].time <= ask[j].time);
        if take_bid {
            out.push(bid[i]);
            i += 1;
        } else {
            out.push(ask[j]);
            j += 1;
        }
    }
    out
}

/// Split a merged stream by side.
pub fn split_sides(events: &[OrderEvent]) -> (Vec<OrderEvent>, Vec<OrderEvent>) {
    events.iter().partition(|e| e.side == Side::Bid)
}
