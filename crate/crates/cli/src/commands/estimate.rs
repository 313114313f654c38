use super::start;
use crate::config::EstimateConfig;
use crate::report::{sha256_hex, write_table, Timer, Validation};
use crate::{Outcome, RunOptions};
use anyhow::{Context, Result};
use htlob::estimation::{estimate_all, FlowSample};
use htlob::io;
use std::path::Path;

pub const COMMAND: &str = "estimate";

const RHO_FLOOR: f64 = 0.3;

/// Run the estimation pipeline on an order-event CSV. With `truth` in the
/// config each parameter is checked against it: rates and variances
/// relatively, mean sizes relative to |V̄| (to v when V̄ = 0), and ρ relative to
/// max(|ρ|, RHO_FLOOR).
pub fn run(cfg: &EstimateConfig, input: &Path, opts: &RunOptions) -> Result<Outcome> {
    let bytes = std::fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let events = io::read_events(bytes.as_slice()).with_context(|| format!("parsing {}", input.display()))?;
    if let Some(t) = &cfg.truth {
        t.validate()?;
    }
    let mut report = start(COMMAND, cfg, opts)?;
    report.provenance.input_sha256 = Some(sha256_hex(&bytes));
    let timer = Timer::start(opts.timing);

    let sample = FlowSample::from_events(&events)?;
    let est = estimate_all(&sample, &cfg.options)?;
    for w in &est.diagnostics.warnings {
        report.warn(w.clone());
    }
    if let Some(t) = &cfg.truth {
        let e = est.diffusion_params();
        let r = cfg.rel_tolerance;
        let checks = [
            ("lambda_b", e.lambda_bid, t.lambda_bid, r * t.lambda_bid),
            ("lambda_a", e.lambda_ask, t.lambda_ask, r * t.lambda_ask),
            ("vbar_b", e.vbar_bid, t.vbar_bid, r * scale(t.vbar_bid, t.v2_bid)),
            ("vbar_a", e.vbar_ask, t.vbar_ask, r * scale(t.vbar_ask, t.v2_ask)),
            ("v2_b", e.v2_bid, t.v2_bid, r * t.v2_bid),
            ("v2_a", e.v2_ask, t.v2_ask, r * t.v2_ask),
            ("rho", e.rho, t.rho, cfg.rho_tolerance * t.rho.abs().max(RHO_FLOOR)),
        ];
        let ses = [
            est.lambda_b.std_error,
            est.lambda_a.std_error,
            est.vbar_b.std_error,
            est.vbar_a.std_error,
            est.v2_b.std_error,
            est.v2_a.std_error,
            est.rho.std_error,
        ];
        for ((name, obs, truth, tol), se) in checks.into_iter().zip(ses) {
            let mut v = Validation::new(name, obs, truth, tol);
            if se.is_finite() {
                v = v.with_se(se);
            }
            timer.stamp(&mut v);
            report.push(v);
        }
    }

    let table = opts.file("estimate_table");
    write_table(&table, &[est.table_row], opts.format)?;
    report.results = serde_json::to_value(&est)?;
    let path = opts.out.join("estimate_report.json");
    report.write(&path)?;
    Ok(Outcome { report, files: vec![table, path] })
}

fn scale(vbar: f64, v2: f64) -> f64 {
    if vbar != 0.0 {
        vbar.abs()
    } else {
        v2.sqrt()
    }
}
