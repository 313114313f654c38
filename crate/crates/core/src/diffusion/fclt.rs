//! Empirical check of the functional CLT for the net order flow, and of the
//! rescaled replayed queues against the limit process.

use super::engine::{propagate, HitConfig};
use super::params::QuadrantDynamics;
use crate::error::{ensure, Error, Result};
use crate::flow::FlowMoments;
use crate::lob::{replay, BookState, OrderEvent, ReinitRule, Side};
use crate::rng;
use crate::stats::{ks_critical_5pct, ks_pvalue, ks_statistic, ks_two_sample, norm_cdf};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct FcltConfig {
    pub ladder: Vec<u64>,
    pub replications: usize,
    /// Number of unit intervals of rescaled time per replication.
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FcltLevel {
    pub n: u64,
    pub mean_events: f64,
    /// KS distance of the t = 1 marginal, per coordinate.
    pub ks_distance: [f64; 2],
    /// Mean KS distance over coordinates and t = 1..horizon.
    pub ks_mean: f64,
    pub ks_critical: f64,
    pub ks_pass_fraction: f64,
    /// Covariance of unit-time increments of X^n.
    pub cov_est: [[f64; 2]; 2],
    pub cov_rel_error: Option<f64>,
    /// Long-run variance negligible against the raw size variance.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FcltReport {
    pub reference: Option<FlowMoments>,
    pub replications: usize,
    pub seed: u64,
    pub levels: Vec<FcltLevel>,
}

/// Runs the ladder for a flow generator `gen(horizon, seed)`. With a
/// `reference`, increments are centered at √n·drift and compared against
/// the Gaussian with the reference covariance.
pub fn net_flow_fclt_check<G>(gen: G, reference: Option<FlowMoments>, cfg: &FcltConfig) -> Result<FcltReport>
where
    G: Fn(f64, u64) -> Result<Vec<OrderEvent>> + Sync,
{
    ensure(cfg.replications >= 2, "replications", "need at least two")?;
    ensure(cfg.horizon >= 1, "horizon", "need at least one unit interval")?;
    ensure(!cfg.ladder.is_empty() && cfg.ladder.iter().all(|&n| n >= 1), "ladder", "levels must be >= 1")?;
    let mut levels = Vec::new();
    for &n in &cfg.ladder {
        levels.push(level(&gen, reference.as_ref(), cfg, n)?);
    }
    Ok(FcltReport {
        reference,
        replications: cfg.replications,
        seed: cfg.seed,
        levels,
    })
}

struct Rep {
    inc: Vec<[f64; 2]>,
    events: usize,
    sq: [f64; 2],
}

fn level<G>(gen: &G, reference: Option<&FlowMoments>, cfg: &FcltConfig, n: u64) -> Result<FcltLevel>
where
    G: Fn(f64, u64) -> Result<Vec<OrderEvent>> + Sync,
{
    let nf = n as f64;
    let sn = nf.sqrt();
    let hz = cfg.horizon;
    let drift = reference.map_or([0.0, 0.0], |r| r.drift);
    let reps: Vec<Result<Rep>> = (0..cfg.replications)
        .into_par_iter()
        .map(|k| {
            let seed = rng::derive(cfg.seed, &format!("fclt/{n}/{k}"));
            let evs = gen(nf * hz as f64, seed)?;
            let mut sums = vec![[0.0f64; 2]; hz];
            let mut sq = [0.0; 2];
            for ev in &evs {
                let b = ((ev.time / nf) as usize).min(hz - 1);
                let i = if ev.side == Side::Bid { 0 } else { 1 };
                sums[b][i] += ev.delta;
                sq[i] += ev.delta * ev.delta;
            }
            let inc = sums
                .iter()
                .map(|s| [s[0] / sn - sn * drift[0], s[1] / sn - sn * drift[1]])
                .collect();
            Ok(Rep { inc, events: evs.len(), sq })
        })
        .collect();
    let reps: Vec<Rep> = reps.into_iter().collect::<Result<_>>()?;
    let total_events: usize = reps.iter().map(|r| r.events).sum();
    if total_events == 0 {
        return Err(Error::InsufficientData(format!("no events generated at n = {n}")));
    }
    let m = reps.len();
    // pooled increment covariance
    let all: Vec<[f64; 2]> = reps.iter().flat_map(|r| r.inc.iter().copied()).collect();
    let cnt = all.len() as f64;
    let mean = all.iter().fold([0.0; 2], |a, x| [a[0] + x[0] / cnt, a[1] + x[1] / cnt]);
    let mut cov = [[0.0; 2]; 2];
    for x in &all {
        let d = [x[0] - mean[0], x[1] - mean[1]];
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] += d[i] * d[j] / (cnt - 1.0);
            }
        }
    }
    // raw variance scale: sum of squared rescaled sizes per unit time
    let time = (m * hz) as f64;
    let raw = [
        reps.iter().map(|r| r.sq[0]).sum::<f64>() / (nf * time),
        reps.iter().map(|r| r.sq[1]).sum::<f64>() / (nf * time),
    ];
    let degenerate = (0..2).any(|i| raw[i] > 0.0 && cov[i][i] < 1e-2 * raw[i]);
    let crit = ks_critical_5pct(m);
    let (mut ks1, mut ks_sum, mut pass, mut tests) = ([f64::NAN; 2], 0.0, 0usize, 0usize);
    let mut cov_rel_error = None;
    if let Some(r) = reference {
        let c = r.cov;
        let num: f64 = (0..4).map(|k| (cov[k / 2][k % 2] - c[k / 2][k % 2]).powi(2)).sum();
        let den: f64 = (0..4).map(|k| c[k / 2][k % 2].powi(2)).sum();
        cov_rel_error = Some((num / den).sqrt());
        if !degenerate {
            for i in 0..2 {
                let mut x = vec![0.0; m];
                for t in 0..hz {
                    for (xk, rep) in x.iter_mut().zip(&reps) {
                        *xk += rep.inc[t][i];
                    }
                    let sd = (c[i][i] * (t + 1) as f64).sqrt();
                    let d = ks_statistic(&x, |v| norm_cdf(v / sd));
                    if t == 0 {
                        ks1[i] = d;
                    }
                    ks_sum += d;
                    tests += 1;
                    if d < crit {
                        pass += 1;
                    }
                }
            }
        }
    }
    Ok(FcltLevel {
        n,
        mean_events: total_events as f64 / m as f64,
        ks_distance: ks1,
        ks_mean: if tests > 0 { ks_sum / tests as f64 } else { f64::NAN },
        ks_critical: crit,
        ks_pass_fraction: if tests > 0 { pass as f64 / tests as f64 } else { f64::NAN },
        cov_est: cov,
        cov_rel_error,
        degenerate,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QueueCheck {
    pub n: u64,
    pub replications: usize,
    /// Two-sample KS distance of the t = 1 queue marginals, per coordinate.
    pub ks_distance: [f64; 2],
    pub p_value: [f64; 2],
    pub replay_jumps: f64,
    pub limit_jumps: f64,
}

/// Compare rescaled replayed queues at t = 1 with the limit process started
/// from the same point under the same (rescaled) reinitialization rule.
pub fn queue_marginal_check<G>(
    gen: G,
    reference: &FlowMoments,
    rule: &ReinitRule,
    x0: [f64; 2],
    n: u64,
    replications: usize,
    seed: u64,
) -> Result<QueueCheck>
where
    G: Fn(f64, u64) -> Result<Vec<OrderEvent>> + Sync,
{
    let nf = n as f64;
    let sn = nf.sqrt();
    let scaled = rule.clone().with_scale(sn * rule.scale);
    let book = BookState::new(0, 1.0, sn * x0[0], sn * x0[1])?;
    let disc: Vec<Result<([f64; 2], usize)>> = (0..replications)
        .into_par_iter()
        .map(|k| {
            let evs = gen(nf, rng::derive(seed, &format!("queue/flow/{k}")))?;
            let mut r = rng::from_seed(rng::derive(seed, &format!("queue/reinit/{k}")));
            let (path, _) = replay(&evs, &book, &scaled, &mut r)?;
            let q = path.samples.last().unwrap().q();
            Ok(([q[0] / sn, q[1] / sn], path.jumps.len()))
        })
        .collect();
    let disc: Vec<([f64; 2], usize)> = disc.into_iter().collect::<Result<_>>()?;
    let d = QuadrantDynamics::from_cov([sn * reference.drift[0], sn * reference.drift[1]], reference.cov)?;
    let cfg = HitConfig::default();
    let lim: Vec<Result<([f64; 2], usize)>> = (0..replications)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(rng::derive(seed, "queue/limit"), k as u64);
            let (x, js) = propagate(&d, rule, x0, 1.0, &cfg, &mut r)?;
            Ok((x, js.len()))
        })
        .collect();
    let lim: Vec<([f64; 2], usize)> = lim.into_iter().collect::<Result<_>>()?;
    let mut ks = [0.0; 2];
    let mut pv = [0.0; 2];
    for i in 0..2 {
        let a: Vec<f64> = disc.iter().map(|x| x.0[i]).collect();
        let b: Vec<f64> = lim.iter().map(|x| x.0[i]).collect();
        ks[i] = ks_two_sample(&a, &b);
        pv[i] = ks_pvalue(ks[i], replications as f64 / 2.0);
    }
    let mean_jumps = |v: &[([f64; 2], usize)]| v.iter().map(|x| x.1 as f64).sum::<f64>() / v.len() as f64;
    Ok(QueueCheck {
        n,
        replications,
        ks_distance: ks,
        p_value: pv,
        replay_jumps: mean_jumps(&disc),
        limit_jumps: mean_jumps(&lim),
    })
}
