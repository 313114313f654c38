use crate::error::{ensure, Result};
use serde::Serialize;

/// Limit parameters of the agent-mix flow when traders arrive as a Poisson
/// process. `mu` and `v2` are per unit time and equal on both sides; the
/// `_display` fields evaluate the printed formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentModelParams {
    pub mu: f64,
    pub v2: f64,
    pub rho: f64,
    pub v2_display: f64,
    pub rho_display: f64,
}

/// `m`, `l`: impatient and patient trader fractions; `gamma`: limit share of
/// a mixed trader; `e_v2` = E[V²], `vbar` = E[V].
pub fn agent_model_params(m: f64, l: f64, gamma: f64, mean_duration: f64, e_v2: f64, vbar: f64) -> Result<AgentModelParams> {
    ensure(m >= 0.0 && l >= 0.0 && m + l <= 1.0, "m, l", "need m, l >= 0 and m + l <= 1")?;
    ensure((0.0..=1.0).contains(&gamma), "gamma", "must lie in [0, 1]")?;
    ensure(mean_duration > 0.0 && mean_duration.is_finite(), "mean_duration", "must be positive")?;
    ensure(e_v2 > 0.0 && vbar.is_finite() && vbar * vbar <= e_v2, "sizes", "need E[V]^2 <= E[V^2], both finite")?;
    let s = 1.0 - l - m;
    let g = gamma;
    let mean = vbar * (m - l + s * (2.0 * g - 1.0)) / 2.0;
    let sq = e_v2 * (m + l + s * (g * g + (1.0 - g) * (1.0 - g))) / 2.0;
    let cross = -s * g * (1.0 - g) * e_v2;
    // compound Poisson: long-run covariance is the rate times the raw second moment
    Ok(AgentModelParams {
        mu: mean / mean_duration,
        v2: sq / mean_duration,
        rho: cross / sq,
        v2_display: mean_duration * e_v2 / 4.0 * (m + l + (g * g + (1.0 - g) * (1.0 - g)) / 2.0 * s),
        rho_display: -s * s * g * (1.0 - g) / (1.0 + s * (g * g - g - 0.5)),
    })
}
