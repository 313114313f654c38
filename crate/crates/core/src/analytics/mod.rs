//! Price analytics of the limit process: exit-side probability, duration to
//! the next price move, its tail index, and the agent-model parameter map.

mod agent;
mod duration;
mod geometry;
mod pup;

pub use agent::{agent_model_params, AgentModelParams};
pub use duration::{
    duration_survival, duration_survival_drifted, duration_survival_drifted_with, duration_survival_with,
    duration_tail_index, DriftedDurationParams, DriftedSurvival, InnerSine, SeriesVariant,
};
pub use geometry::{cone_alpha, cone_geometry, cone_geometry_display, ConeGeometry};
pub use pup::{prob_up, prob_up_arcsin, prob_up_closed, prob_up_with, ProbUp, ProbUpMethod};
