use super::start;
use crate::config::PupConfig;
use crate::report::{write_table, Timer, Validation};
use crate::{Outcome, RunOptions};
use anyhow::{ensure, Result};
use htlob::analytics::{prob_up_arcsin, prob_up_closed};
use htlob::diffusion::{exit_side_mc, HitConfig};
use htlob::rng;
use serde::Serialize;
use serde_json::json;

pub const COMMAND: &str = "pup";

/// Below this many paths the binomial standard error is replaced by its
/// worst case 0.5/√paths.
const MIN_PATHS: u64 = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct PupRow {
    pub rho: f64,
    pub x: f64,
    pub y: f64,
    pub analytic: Option<f64>,
    pub arcsin: Option<f64>,
    pub mc: f64,
    pub se: f64,
}

pub fn run(cfg: &PupConfig, opts: &RunOptions) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    if let Some(p) = opts.paths {
        cfg.paths = p;
    }
    ensure!(cfg.paths > 0, "paths must be positive");
    ensure!(cfg.z > 0.0, "z must be positive");
    let rhos = cfg.rho.clone().unwrap_or_else(|| vec![cfg.params.rho]);
    for &rho in &rhos {
        htlob::diffusion::DiffusionParams { rho, ..cfg.params }.validate()?;
    }
    let mut points: Vec<[f64; 2]> = cfg.x.iter().flat_map(|&x| cfg.y.iter().map(move |&y| [x, y])).collect();
    points.extend_from_slice(&cfg.points);
    for p in &points {
        ensure!(p[0] > 0.0 && p[1] > 0.0 && p[0].is_finite() && p[1].is_finite(), "grid point {p:?} is not interior");
    }
    let mut report = start(COMMAND, &cfg, opts)?;
    if cfg.paths < MIN_PATHS {
        report.warn(format!(
            "only {} paths per cell; tolerance widened to the worst-case standard error",
            cfg.paths
        ));
    }

    let mut rows = Vec::new();
    for &rho in &rhos {
        let d = htlob::diffusion::DiffusionParams { rho, ..cfg.params }.dynamics();
        let driftless = d.is_driftless();
        if !driftless {
            report.warn(format!("rho={rho}: drift present, no closed form; Monte Carlo only"));
        }
        let mut form_gap: f64 = 0.0;
        for (i, &[x, y]) in points.iter().enumerate() {
            let timer = Timer::start(opts.timing);
            let seed = rng::derive(opts.seed, &format!("pup/rho={rho}/cell={i}"));
            let est = exit_side_mc(&d, [x, y], cfg.paths, &HitConfig::default(), seed)?;
            let (analytic, arcsin) = if driftless {
                (Some(prob_up_closed(x, y, &d)?), Some(prob_up_arcsin(x, y, &d)?))
            } else {
                (None, None)
            };
            if let Some(a) = analytic {
                let se = if cfg.paths < MIN_PATHS {
                    est.std_error.max(0.5 / (cfg.paths as f64).sqrt())
                } else {
                    est.std_error
                };
                let mut v = Validation::new(format!("p_up rho={rho} x={x} y={y}"), est.p_up, a, cfg.z * se)
                    .with_se(est.std_error);
                timer.stamp(&mut v);
                report.push(v);
                form_gap = form_gap.max((arcsin.unwrap() - a).abs());
            }
            rows.push(PupRow { rho, x, y, analytic, arcsin, mc: est.p_up, se: est.std_error });
        }
        if driftless {
            report.push(Validation::new(format!("arcsin_vs_arctan_max_gap rho={rho}"), form_gap, 0.0, 1e-10));
        }
    }

    let table = opts.file("pup_grid");
    write_table(&table, &rows, opts.format)?;
    report.results = json!({ "paths_per_cell": cfg.paths, "cells": rows });
    let path = opts.out.join("pup_report.json");
    report.write(&path)?;
    Ok(Outcome { report, files: vec![table, path] })
}
