use super::start;
use crate::config::FcltCommandConfig;
use crate::report::{write_table, Timer, Validation};
use crate::{Outcome, RunOptions};
use anyhow::{bail, Result};
use htlob::diffusion::{net_flow_fclt_check, queue_marginal_check, FcltConfig};
use htlob::rng;
use serde::Serialize;
use serde_json::json;

pub const COMMAND: &str = "validate-fclt";

/// Events generated across the whole ladder above which the run is refused.
const EVENT_BUDGET: f64 = 5e9;

/// Standard deviation of √m·D for the one-sample KS statistic under the null.
const KS_SD: f64 = 0.2603;

/// Two-sample KS critical coefficient at the 1% level.
const KS2_1PCT: f64 = 1.6276;

#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub n: u64,
    pub mean_events: f64,
    pub ks_bid: f64,
    pub ks_ask: f64,
    pub ks_mean: f64,
    pub ks_critical: f64,
    pub ks_pass_fraction: f64,
    pub cov_bid_bid: f64,
    pub cov_bid_ask: f64,
    pub cov_ask_ask: f64,
    pub cov_rel_error: Option<f64>,
    pub degenerate: bool,
}

/// Allowed rise of the mean KS distance between consecutive ladder levels:
/// two standard deviations of the difference of two null KS statistics.
pub fn ks_noise_slack(replications: usize) -> f64 {
    2.0 * KS_SD * 2f64.sqrt() / (replications as f64).sqrt()
}

pub fn check_ladder(cfg: &FcltCommandConfig, rate: Option<f64>) -> Result<()> {
    if cfg.ladder.is_empty() {
        bail!("infeasible ladder: no levels");
    }
    if cfg.ladder[0] == 0 || cfg.ladder.windows(2).any(|w| w[1] <= w[0]) {
        bail!("infeasible ladder {:?}: levels must be positive and strictly increasing", cfg.ladder);
    }
    if cfg.replications < 2 {
        bail!("infeasible ladder: need at least two replications");
    }
    if cfg.horizon == 0 {
        bail!("infeasible ladder: horizon must be at least one unit interval");
    }
    if let Some(r) = rate {
        let total: f64 = cfg.ladder.iter().map(|&n| n as f64).sum::<f64>()
            * cfg.horizon as f64
            * cfg.replications as f64
            * r;
        if total > EVENT_BUDGET {
            bail!("infeasible ladder: about {total:.3e} events requested, budget is {EVENT_BUDGET:.0e}");
        }
    }
    Ok(())
}

pub fn run(cfg: &FcltCommandConfig, opts: &RunOptions) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    if let Some(p) = opts.paths {
        cfg.replications = p as usize;
    }
    cfg.flow.validate()?;
    let reference = cfg.flow.moments();
    check_ladder(&cfg, reference.map(|m| m.rate[0] + m.rate[1]))?;
    let mut report = start(COMMAND, &cfg, opts)?;
    let timer = Timer::start(opts.timing);

    let flow = &cfg.flow;
    let gen = |h: f64, s: u64| flow.generate(h, s);
    let fc = FcltConfig {
        ladder: cfg.ladder.clone(),
        replications: cfg.replications,
        horizon: cfg.horizon,
        seed: rng::derive(opts.seed, "validate-fclt/ladder"),
    };
    let rep = net_flow_fclt_check(gen, reference, &fc)?;
    if reference.is_none() {
        report.warn("flow has no closed-form moments; only degeneracy is reported");
    }

    let rows: Vec<LevelRow> = rep
        .levels
        .iter()
        .map(|l| LevelRow {
            n: l.n,
            mean_events: l.mean_events,
            ks_bid: l.ks_distance[0],
            ks_ask: l.ks_distance[1],
            ks_mean: l.ks_mean,
            ks_critical: l.ks_critical,
            ks_pass_fraction: l.ks_pass_fraction,
            cov_bid_bid: l.cov_est[0][0],
            cov_bid_ask: l.cov_est[0][1],
            cov_ask_ask: l.cov_est[1][1],
            cov_rel_error: l.cov_rel_error,
            degenerate: l.degenerate,
        })
        .collect();
    for l in rep.levels.iter().filter(|l| l.degenerate) {
        report.warn(format!("n={}: long-run variance is degenerate; KS checks skipped", l.n));
    }

    if let Some(m) = reference {
        let live: Vec<_> = rep.levels.iter().filter(|l| !l.degenerate).collect();
        let slack = ks_noise_slack(cfg.replications);
        for w in live.windows(2) {
            let mut v = Validation::new(
                format!("ks_rise n={}->{}", w[0].n, w[1].n),
                (w[1].ks_mean - w[0].ks_mean).max(0.0),
                0.0,
                slack,
            );
            timer.stamp(&mut v);
            report.push(v);
        }
        let top = rep.levels.last().expect("ladder is non-empty");
        if !top.degenerate {
            let mut v = Validation::new(format!("ks_mean n={}", top.n), top.ks_mean, 0.0, top.ks_critical);
            timer.stamp(&mut v);
            report.push(v);
        }
        let mut v = Validation::new(
            format!("cov_rel_error n={}", top.n),
            top.cov_rel_error.unwrap_or(f64::NAN),
            0.0,
            cfg.cov_tolerance,
        );
        timer.stamp(&mut v);
        report.push(v);
        let rho_ref = m.cov[0][1] / (m.cov[0][0] * m.cov[1][1]).sqrt();
        if rho_ref.abs() > 1e-3 {
            let c = top.cov_est;
            let rho = c[0][1] / (c[0][0] * c[1][1]).sqrt();
            // within |ρ| of ρ means the signs agree
            let mut v = Validation::new(format!("cross_correlation_sign n={}", top.n), rho, rho_ref, rho_ref.abs());
            timer.stamp(&mut v);
            report.push(v);
        }
    }

    let mut queue = None;
    if let Some(q) = &cfg.queue_check {
        match reference {
            None => report.warn("queue check needs closed-form flow moments; skipped"),
            Some(m) => {
                let rule = q.reinit.build()?;
                let qc = queue_marginal_check(
                    gen,
                    &m,
                    &rule,
                    q.x0,
                    q.n,
                    q.replications,
                    rng::derive(opts.seed, "validate-fclt/queue"),
                )?;
                let crit = KS2_1PCT * (2.0 / q.replications as f64).sqrt();
                for (i, side) in ["bid", "ask"].iter().enumerate() {
                    let mut v = Validation::new(format!("queue_ks_{side} n={}", q.n), qc.ks_distance[i], 0.0, crit);
                    timer.stamp(&mut v);
                    report.push(v);
                }
                queue = Some(qc);
            }
        }
    }

    let table = opts.file("fclt_levels");
    write_table(&table, &rows, opts.format)?;
    report.results = json!({ "reference": rep.reference, "levels": rows, "queue_check": queue });
    let path = opts.out.join("fclt_report.json");
    report.write(&path)?;
    Ok(Outcome { report, files: vec![table, path] })
}
