use super::moments::{default_lag_cut, estimate_rates, long_run_variance};
use super::{FlowSample, ParamEstimate};
use crate::error::{Error, Result};
use crate::stats::{autocov, cross_cov, mean};
use serde::{Deserialize, Serialize};

const CLAMP: f64 = 1.0 - 1e-9;
/// Average events per side in one bucket of the time-aligned estimator.
const EVENTS_PER_BUCKET: f64 = 20.0;
const MIN_BUCKETS: usize = 20;

/// How bid and ask sizes are paired. `TimeBucket` correlates the net flow
/// of both sides over common time buckets; `Index` pairs the i-th bid event
/// with the i-th ask event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoAlignment {
    #[default]
    TimeBucket,
    Index,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoEstimate {
    pub estimate: ParamEstimate,
    /// Before clamping to ±(1 − 1e-9).
    pub raw: f64,
    pub clamped: bool,
    pub alignment: RhoAlignment,
    pub lag_cut: usize,
    pub bucket_width: Option<f64>,
}

fn long_run_cross(x: &[f64], y: &[f64], lag: usize) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    cross_cov(x, mx, y, my, 0)
        + (1..=lag)
            .map(|k| cross_cov(x, mx, y, my, k) + cross_cov(y, my, x, mx, k))
            .sum::<f64>()
}

fn finish(raw: f64, se: f64, n: usize, alignment: RhoAlignment, lag_cut: usize, width: Option<f64>) -> Result<RhoEstimate> {
    if !raw.is_finite() {
        return Err(Error::InsufficientData("correlation undefined (a side has zero variance)".into()));
    }
    let v = raw.clamp(-CLAMP, CLAMP);
    Ok(RhoEstimate {
        estimate: ParamEstimate { value: v, std_error: se, n_used: n },
        raw,
        clamped: v != raw,
        alignment,
        lag_cut,
        bucket_width: width,
    })
}

/// Bid/ask correlation of the net order flow.
pub fn estimate_rho(sample: &FlowSample, lag_cut: Option<usize>, alignment: RhoAlignment) -> Result<RhoEstimate> {
    match alignment {
        RhoAlignment::TimeBucket => by_buckets(sample, lag_cut),
        RhoAlignment::Index => by_index(sample, lag_cut),
    }
}

fn by_buckets(sample: &FlowSample, lag_cut: Option<usize>) -> Result<RhoEstimate> {
    let (b, a) = (&sample.bid_events, &sample.ask_events);
    if b.is_empty() || a.is_empty() {
        return Err(Error::InsufficientData("both sides must have events".into()));
    }
    let start = b[0].time.min(a[0].time);
    let end = b[b.len() - 1].time.max(a[a.len() - 1].time);
    let lo = b[0].time.max(a[0].time);
    let hi = b[b.len() - 1].time.min(a[a.len() - 1].time);
    if hi <= lo {
        return Err(Error::InsufficientData("bid and ask streams do not overlap in time".into()));
    }
    let span = end - start;
    let n_min = b.len().min(a.len()) as f64;
    let k = (n_min / EVENTS_PER_BUCKET).floor() as usize;
    if k < MIN_BUCKETS {
        return Err(Error::InsufficientData(format!("{k} time buckets, need {MIN_BUCKETS}")));
    }
    let width = span / k as f64;
    let bucket = |evs: &[crate::lob::OrderEvent]| {
        let mut s = vec![0.0; k];
        for e in evs {
            let i = (((e.time - start) / width) as usize).min(k - 1);
            s[i] += e.delta;
        }
        s
    };
    let (sb, sa) = (bucket(b), bucket(a));
    let l = lag_cut.unwrap_or_else(|| default_lag_cut(&sb).max(default_lag_cut(&sa))).min(k / 10);
    let c = long_run_cross(&sb, &sa, l);
    let vb = long_run_variance(&sb, l);
    let va = long_run_variance(&sa, l);
    let raw = c / (vb * va).sqrt();
    let r = raw.clamp(-1.0, 1.0);
    let se = (1.0 - r * r) * ((2 * l + 1) as f64 / k as f64).sqrt();
    finish(raw, se, k, RhoAlignment::TimeBucket, l, Some(width))
}

fn by_index(sample: &FlowSample, lag_cut: Option<usize>) -> Result<RhoEstimate> {
    let (xb, xa) = sample.sizes();
    let n = xb.len().min(xa.len());
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} index-aligned pairs, need 2")));
    }
    let [lb, la] = estimate_rates(sample)?;
    let (lb, la) = (lb.value, la.value);
    let (xb, xa) = (&xb[..n], &xa[..n]);
    let l = lag_cut.unwrap_or_else(|| default_lag_cut(xb).max(default_lag_cut(xa))).min(n / 10);
    let (mb, ma) = (mean(xb), mean(xa));
    let mut num = lb.max(la) * cross_cov(xa, ma, xb, mb, 0);
    for k in 1..=l {
        // cov(V^a_1, V^b_{1+k}) and cov(V^b_1, V^a_{1+k})
        num += la * cross_cov(xa, ma, xb, mb, k) + lb * cross_cov(xb, mb, xa, ma, k);
    }
    let vb = autocov(xb, mb, 0) + 2.0 * (1..=l).map(|k| autocov(xb, mb, k)).sum::<f64>();
    let va = autocov(xa, ma, 0) + 2.0 * (1..=l).map(|k| autocov(xa, ma, k)).sum::<f64>();
    let raw = num / ((la * lb).sqrt() * (va * vb).sqrt());
    let r = raw.clamp(-1.0, 1.0);
    let se = (1.0 - r * r) * ((2 * l + 1) as f64 / n as f64).sqrt();
    finish(raw, se, n, RhoAlignment::Index, l, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{gen_poisson_flow, split_sides, AgentMixSpec, Dist, PoissonFlowSpec};
    use crate::lob::{OrderEvent, Side};

    fn poisson(seed: u64, horizon: f64) -> FlowSample {
        let s = PoissonFlowSpec { lambda_limit: 0.5, mu_market: 0.3, theta_cancel: 0.2, unit_size: 1.0 };
        FlowSample::from_events(&gen_poisson_flow(&s, horizon, seed).unwrap()).unwrap()
    }

    #[test]
    fn independent_sides_center_on_zero() {
        let mut vals = vec![];
        let mut ses = vec![];
        for seed in 0..100 {
            let r = estimate_rho(&poisson(seed, 4000.0), None, RhoAlignment::TimeBucket).unwrap();
            vals.push(r.estimate.value);
            ses.push(r.estimate.std_error);
        }
        let m = mean(&vals);
        let se_mean = (crate::stats::variance(&vals) / 100.0).sqrt();
        assert!(m.abs() < 2.0 * se_mean, "{m} {se_mean}");
        for seed in 0..3 {
            let r = estimate_rho(&poisson(seed, 20_000.0), None, RhoAlignment::Index).unwrap();
            assert!(r.estimate.value.abs() < 3.0 * r.estimate.std_error, "{r:?}");
        }
    }

    #[test]
    fn mirrored_flows_clamp() {
        let evs: Vec<OrderEvent> = (0..10_000)
            .flat_map(|i| {
                let d = if (i * 7919) % 3 == 0 { 2.0 } else { -1.0 };
                let t = i as f64 * 0.1;
                [OrderEvent { time: t, side: Side::Bid, delta: d }, OrderEvent { time: t, side: Side::Ask, delta: -d }]
            })
            .collect();
        let s = FlowSample::from_events(&evs).unwrap();
        for al in [RhoAlignment::TimeBucket, RhoAlignment::Index] {
            let r = estimate_rho(&s, Some(0), al).unwrap();
            assert!(r.clamped, "{r:?}");
            assert!((r.estimate.value + 1.0).abs() < 1e-8);
            assert!(r.raw <= -1.0 + 1e-9);
        }
    }

    #[test]
    fn agent_flow_matches_analytic_correlation() {
        let spec = AgentMixSpec {
            m: 0.2,
            l: 0.3,
            gamma: 0.5,
            duration_dist: Dist::Exponential { mean: 1.0 },
            size_dist: Dist::Constant { value: 1.0 },
            flip_market_sign: false,
        };
        let evs = crate::flow::gen_agent_flow(&spec, 300_000.0, 3).unwrap();
        let s = FlowSample::from_events(&evs).unwrap();
        let want = crate::analytics::agent_model_params(0.2, 0.3, 0.5, 1.0, 1.0, 1.0).unwrap().rho;
        let r = estimate_rho(&s, None, RhoAlignment::TimeBucket).unwrap();
        assert!((r.estimate.value / want - 1.0).abs() < 0.1, "{r:?} {want}");
        // index pairing loses the simultaneity of the two legs
        let ri = estimate_rho(&s, None, RhoAlignment::Index).unwrap();
        assert!(ri.estimate.value.abs() < 0.05, "{ri:?}");
    }

    #[test]
    fn no_overlap() {
        let b = vec![OrderEvent { time: 0.0, side: Side::Bid, delta: 1.0 }, OrderEvent { time: 1.0, side: Side::Bid, delta: 1.0 }];
        let a = vec![OrderEvent { time: 2.0, side: Side::Ask, delta: 1.0 }, OrderEvent { time: 3.0, side: Side::Ask, delta: 1.0 }];
        assert!(estimate_rho(&FlowSample::new(b, a).unwrap(), None, RhoAlignment::TimeBucket).is_err());
        let (b, a) = split_sides(&[]);
        assert!(FlowSample::new(b, a).is_ok());
    }
}
