pub mod duration;
pub mod estimate;
pub mod fclt;
pub mod pup;
pub mod simulate;

use crate::report::{Provenance, Report};
use crate::RunOptions;
use anyhow::{Context, Result};
use serde::Serialize;

fn start<C: Serialize>(command: &str, cfg: &C, opts: &RunOptions) -> Result<Report> {
    std::fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let resolved = serde_json::to_value(cfg)?;
    Ok(Report::new(Provenance::new(command, opts.seed, &resolved), resolved))
}
