use super::start;
use crate::config::{DurationConfig, TailConfig};
use crate::report::{write_table, Timer, Validation};
use crate::{Outcome, RunOptions};
use anyhow::{ensure, Result};
use htlob::analytics::{cone_alpha, duration_survival, duration_survival_drifted, duration_tail_index, ConeGeometry};
use htlob::diffusion::{exit_times_mc, DiffusionParams, HitConfig, QuadrantDynamics};
use htlob::{rng, stats};
use serde::Serialize;
use serde_json::json;

pub const COMMAND: &str = "duration";

const TAIL_POINTS: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct SurvivalRow {
    pub rho: f64,
    pub t: f64,
    pub analytic: f64,
    pub mc: f64,
    pub se: f64,
    pub in_band: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub survivors_at_t_hi: u64,
}

/// Empirical survival P(τ > t) from ascending exit times.
pub fn empirical_survival(sorted: &[f64], t: f64) -> f64 {
    let n = sorted.len() as f64;
    (n - sorted.partition_point(|&s| s <= t) as f64) / n
}

pub fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
}

/// Least-squares slope of log-survival against log-time on a log-spaced
/// window from `t_lo` up to where `min_survivors` paths remain (at most
/// `t_max`). `None` when the window spans less than a factor of four.
pub fn tail_slope(sorted: &[f64], t_lo: f64, t_max: f64, min_survivors: u64) -> Option<TailFit> {
    let n = sorted.len() as u64;
    if n <= min_survivors {
        return None;
    }
    let t_hi = sorted[(n - min_survivors - 1) as usize].min(t_max);
    if !(t_hi >= 4.0 * t_lo) {
        return None;
    }
    let ts = log_grid(t_lo, t_hi, TAIL_POINTS);
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| empirical_survival(sorted, t).ln()).collect();
    let (slope, intercept) = stats::ols(&xs, &ys);
    let survivors = n - sorted.partition_point(|&s| s <= t_hi) as u64;
    Some(TailFit { slope, intercept, t_lo, t_hi, survivors_at_t_hi: survivors })
}

fn analytic(t: f64, x: f64, y: f64, d: &QuadrantDynamics) -> Result<f64> {
    Ok(if d.is_driftless() {
        duration_survival(t, x, y, *d)?
    } else {
        duration_survival_drifted(t, x, y, *d)?.value
    })
}

fn sorted_exit_times(d: &QuadrantDynamics, x0: [f64; 2], paths: u64, t_max: f64, seed: u64) -> Result<Vec<f64>> {
    let mut times = exit_times_mc(d, x0, paths, t_max, &HitConfig::default(), seed)?;
    times.sort_unstable_by(f64::total_cmp);
    Ok(times)
}

pub fn run(cfg: &DurationConfig, opts: &RunOptions) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    if let Some(p) = opts.paths {
        cfg.paths = p;
    }
    ensure!(cfg.paths > 0, "paths must be positive");
    ensure!(cfg.x > 0.0 && cfg.y > 0.0, "start point must be interior");
    ensure!(cfg.band[0] < cfg.band[1], "band must be an increasing pair");
    if let Some(g) = &cfg.t_grid {
        ensure!(!g.is_empty() && g.iter().all(|t| *t > 0.0 && t.is_finite()), "t_grid must hold positive times");
    }
    let rhos = cfg.rho.clone().unwrap_or_else(|| vec![cfg.params.rho]);
    for &rho in &rhos {
        DiffusionParams { rho, ..cfg.params }.validate()?;
    }
    let mut report = start(COMMAND, &cfg, opts)?;
    let (x, y) = (cfg.x, cfg.y);

    let mut rows = Vec::new();
    let mut tails = Vec::new();
    for &rho in &rhos {
        let timer = Timer::start(opts.timing);
        let d = DiffusionParams { rho, ..cfg.params }.dynamics();
        let g = ConeGeometry::new(x, y, &d)?;
        let grid = cfg.t_grid.clone().unwrap_or_else(|| log_grid(0.01 * g.u, 100.0 * g.u, 40));
        let t_end = grid.iter().cloned().fold(0.0, f64::max);
        let seed = rng::derive(opts.seed, &format!("duration/rho={rho}/curve"));
        let times = sorted_exit_times(&d, [x, y], cfg.paths, t_end, seed)?;
        let n = cfg.paths as f64;
        let (mut sup, mut sup_se, mut used) = (0.0f64, 0.0f64, 0);
        for &t in &grid {
            let a = analytic(t, x, y, &d)?;
            let mc = empirical_survival(&times, t);
            let se = (mc * (1.0 - mc) / n).sqrt();
            let in_band = a >= cfg.band[0] && a <= cfg.band[1];
            if in_band {
                used += 1;
                if (a - mc).abs() > sup {
                    sup = (a - mc).abs();
                    sup_se = se;
                }
            }
            rows.push(SurvivalRow { rho, t, analytic: a, mc, se, in_band });
        }
        if used == 0 {
            report.warn(format!("rho={rho}: no grid time has survival inside the band"));
        } else {
            let mut v =
                Validation::new(format!("survival_sup_gap rho={rho}"), sup, 0.0, cfg.sup_tolerance).with_se(sup_se);
            timer.stamp(&mut v);
            report.push(v);
        }
        if cfg.paths < 10_000 {
            report.warn(format!("rho={rho}: {} paths give standard errors near 0.005", cfg.paths));
        }

        if let Some(tc) = &cfg.tail {
            tails.push(tail_check(&mut report, tc, rho, &d, &g, [x, y], opts)?);
        }
    }

    let table = opts.file("duration_curve");
    write_table(&table, &rows, opts.format)?;
    report.results = json!({
        "series_variant": "standardized",
        "paths": cfg.paths,
        "curve": rows,
        "tail": tails,
    });
    let path = opts.out.join("duration_report.json");
    report.write(&path)?;
    Ok(Outcome { report, files: vec![table, path] })
}

fn tail_check(
    report: &mut crate::report::Report,
    tc: &TailConfig,
    rho: f64,
    d: &QuadrantDynamics,
    g: &ConeGeometry,
    x0: [f64; 2],
    opts: &RunOptions,
) -> Result<serde_json::Value> {
    let timer = Timer::start(opts.timing);
    let index = duration_tail_index(*d);
    if !d.is_driftless() {
        report.warn(format!("rho={rho}: drift present; the power-law tail check does not apply"));
        return Ok(json!({ "rho": rho, "alpha": cone_alpha(rho), "tail_index": index }));
    }
    let seed = rng::derive(opts.seed, &format!("duration/rho={rho}/tail"));
    let times = sorted_exit_times(d, x0, tc.paths, tc.t_max, seed)?;
    let fit = tail_slope(&times, tc.window_start * g.u, tc.t_max, tc.min_survivors);
    if fit.is_none() {
        report.warn(format!("rho={rho}: tail window too short for {} paths; increase paths or t_max", tc.paths));
    }
    let mut v = Validation::new(
        format!("tail_slope rho={rho}"),
        fit.as_ref().map_or(f64::NAN, |f| f.slope),
        -index,
        tc.rel_tolerance * index,
    );
    timer.stamp(&mut v);
    report.push(v);
    Ok(json!({ "rho": rho, "alpha": cone_alpha(rho), "tail_index": index, "fit": fit }))
}
