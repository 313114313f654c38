//! The heavy-traffic limit: planar Brownian motion with drift inside the
//! positive orthant, redrawn through a `ReinitRule` whenever it hits an axis.

mod engine;
mod fclt;
mod generator;
mod params;

pub use engine::{
    exit_side_mc, exit_times_mc, first_hit, propagate, rescale_discrete, simulate_q, ExitSideEstimate, Hit,
    HitConfig, StepRule,
};
pub use fclt::{net_flow_fclt_check, queue_marginal_check, FcltConfig, FcltLevel, FcltReport, QueueCheck};
pub use generator::{
    generator_apply, weak_generator_estimate, BumpProduct, GeneratorForm, PolyTrig, TestFunction, WeakEstimate,
};
pub use params::{DiffusionParams, QuadrantDynamics, ScaledParams};
