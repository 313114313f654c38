use super::start;
use crate::config::SimulateConfig;
use crate::report::{write_table, Timer, Validation};
use crate::{Format, Outcome, RunOptions};
use anyhow::{ensure, Context, Result};
use htlob::lob::{replay, JumpSide, PriceChange, Side};
use htlob::{io, rng};
use serde_json::json;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

pub const COMMAND: &str = "simulate-lob";

/// Generate the configured flow, replay it through the book and write the
/// event stream, queue path and price path.
pub fn run(cfg: &SimulateConfig, opts: &RunOptions) -> Result<Outcome> {
    cfg.flow.validate()?;
    ensure!(cfg.horizon >= 0.0 && cfg.horizon.is_finite(), "horizon must be finite and non-negative");
    let book = cfg.initial.build()?;
    let rule = cfg.reinit.build()?;
    let mut report = start(COMMAND, cfg, opts)?;
    let timer = Timer::start(opts.timing);

    let events = cfg.flow.generate(cfg.horizon, rng::derive(opts.seed, "simulate-lob/flow"))?;
    let mut r = rng::from_seed(rng::derive(opts.seed, "simulate-lob/reinit"));
    let (path, prices) = replay(&events, &book, &rule, &mut r)?;

    let ev_file = opts.file("events");
    let path_file = opts.file("queue_path");
    let price_file = opts.file("prices");
    match opts.format {
        Format::Csv => {
            io::write_events(writer(&ev_file)?, &events)?;
            io::write_path(writer(&path_file)?, &path.samples)?;
            io::write_prices(writer(&price_file)?, &prices)?;
        }
        Format::Json => {
            write_table(&ev_file, &events, opts.format)?;
            write_table(&path_file, &path.samples, opts.format)?;
            let steps: Vec<PriceChange> =
                prices.steps().into_iter().map(|(time, price_ticks)| PriceChange { time, price_ticks }).collect();
            write_table(&price_file, &steps, opts.format)?;
        }
    }

    let n_bid = events.iter().filter(|e| e.side == Side::Bid).count();
    let ups = path.jumps.iter().filter(|j| j.side == JumpSide::AskDepleted).count();
    let observed_rate = if cfg.horizon > 0.0 { events.len() as f64 / cfg.horizon } else { 0.0 };
    let configured_rate = cfg.flow.moments().map(|m| m.rate[0] + m.rate[1]);

    let mut v = Validation::new(
        "jumps_minus_price_changes",
        path.jumps.len() as f64 - prices.changes.len() as f64,
        0.0,
        0.0,
    );
    timer.stamp(&mut v);
    report.push(v);
    match configured_rate {
        Some(rate) if rate * cfg.horizon >= cfg.rate_check_min_events => {
            let mut v = Validation::new("event_rate", observed_rate, rate, cfg.rate_tolerance * rate);
            timer.stamp(&mut v);
            report.push(v);
        }
        Some(_) => report.warn("too few expected events for the event-rate check; skipped"),
        None => report.warn("flow has no closed-form event rate; event-rate check skipped"),
    }

    report.results = json!({
        "events": events.len(),
        "events_bid": n_bid,
        "events_ask": events.len() - n_bid,
        "price_changes": prices.changes.len(),
        "up_moves": ups,
        "down_moves": path.jumps.len() - ups,
        "final_bid_price_ticks": prices.changes.last().map_or(book.bid_price_ticks, |c| c.price_ticks),
        "observed_event_rate": observed_rate,
        "configured_event_rate": configured_rate,
    });
    let summary = opts.out.join("simulate_summary.json");
    report.write(&summary)?;
    Ok(Outcome { report, files: vec![ev_file, path_file, price_file, summary] })
}

fn writer(p: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
}
