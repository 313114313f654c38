use super::{FlowSample, ParamEstimate};
use crate::error::{Error, Result};
use crate::lob::OrderEvent;
use crate::stats::{autocov, mean};
use serde::Serialize;

pub const MAX_LAG_CUT: usize = 50;

fn side_rate(evs: &[OrderEvent], name: &str) -> Result<ParamEstimate> {
    if evs.len() < 2 {
        return Err(Error::InsufficientData(format!("{name} side has {} events, need 2", evs.len())));
    }
    let span = evs[evs.len() - 1].time - evs[0].time;
    if span <= 0.0 {
        return Err(Error::InsufficientData(format!("{name} events span zero time")));
    }
    let n = evs.len() - 1;
    let lambda = n as f64 / span;
    let d_mean = span / n as f64;
    let d_var = evs
        .windows(2)
        .map(|w| (w[1].time - w[0].time - d_mean).powi(2))
        .sum::<f64>()
        / (n.max(2) - 1) as f64;
    // delta method on 1 / mean duration
    let se = (d_var / n as f64).sqrt() / (d_mean * d_mean);
    Ok(ParamEstimate { value: lambda, std_error: se, n_used: n })
}

/// Arrival rates (bid, ask): (count − 1) / span of event times.
pub fn estimate_rates(sample: &FlowSample) -> Result<[ParamEstimate; 2]> {
    Ok([side_rate(&sample.bid_events, "bid")?, side_rate(&sample.ask_events, "ask")?])
}

/// Largest lag kept in a long-run variance sum: one less than the first lag
/// whose sample autocorrelation lies inside ±2/√n, capped at 50.
pub fn default_lag_cut(xs: &[f64]) -> usize {
    let n = xs.len();
    if n < 3 {
        return 0;
    }
    let m = mean(xs);
    let g0 = autocov(xs, m, 0);
    if g0 <= 0.0 {
        return 0;
    }
    let band = 2.0 / (n as f64).sqrt();
    for k in 1..=MAX_LAG_CUT.min(n - 1) {
        if (autocov(xs, m, k) / g0).abs() < band {
            return k - 1;
        }
    }
    MAX_LAG_CUT
}

/// γ₀ + 2 Σ_{k=1}^{L} γ_k.
pub fn long_run_variance(xs: &[f64], lag_cut: usize) -> f64 {
    let m = mean(xs);
    autocov(xs, m, 0) + 2.0 * (1..=lag_cut).map(|k| autocov(xs, m, k)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizeMoments {
    pub vbar: [ParamEstimate; 2],
    pub v2: [ParamEstimate; 2],
    pub lag_cut: [usize; 2],
}

fn side_moments(xs: &[f64], lag_cut: Option<usize>, name: &str) -> Result<(ParamEstimate, ParamEstimate, usize)> {
    let l = lag_cut.unwrap_or_else(|| default_lag_cut(xs));
    let need = (10 * l).max(2);
    if xs.len() < need {
        return Err(Error::InsufficientData(format!("{name} side has {} sizes, need {need}", xs.len())));
    }
    let n = xs.len() as f64;
    let v2 = long_run_variance(xs, l);
    let vbar = mean(xs);
    Ok((
        ParamEstimate { value: vbar, std_error: (v2.max(0.0) / n).sqrt(), n_used: xs.len() },
        ParamEstimate { value: v2, std_error: v2.abs() * (2.0 * (2 * l + 1) as f64 / n).sqrt(), n_used: xs.len() },
        l,
    ))
}

/// Mean size and long-run size variance per side. `lag_cut` is the largest
/// autocovariance lag kept; `None` picks it per side with [`default_lag_cut`].
pub fn estimate_size_moments(sample: &FlowSample, lag_cut: Option<usize>) -> Result<SizeMoments> {
    let (b, a) = sample.sizes();
    let (vb, v2b, lb) = side_moments(&b, lag_cut, "bid")?;
    let (va, v2a, la) = side_moments(&a, lag_cut, "ask")?;
    Ok(SizeMoments { vbar: [vb, va], v2: [v2b, v2a], lag_cut: [lb, la] })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRatioTable {
    /// (batch length n, variance of non-overlapping n-sums / n)
    pub rows: Vec<(usize, f64)>,
    /// max / min of the ratio column.
    pub linearity: f64,
}

pub fn variance_ratio_table(sizes: &[f64], ladder: &[usize]) -> Result<VarianceRatioTable> {
    if ladder.is_empty() || ladder.contains(&0) {
        return Err(crate::error::param("ladder", "batch lengths must be positive"));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let batches = sizes.len() / n;
        if batches < 10 {
            return Err(Error::InsufficientData(format!(
                "{} sizes give {batches} batches of {n}, need 10",
                sizes.len()
            )));
        }
        let sums: Vec<f64> = sizes.chunks_exact(n).map(|c| c.iter().sum()).collect();
        rows.push((n, crate::stats::variance(&sums) / n as f64));
    }
    let hi = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok(VarianceRatioTable { rows, linearity: hi / lo })
}
