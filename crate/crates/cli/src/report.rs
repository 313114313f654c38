use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
}

impl Provenance {
    pub fn new(command: &str, seed: u64, config: &Value) -> Self {
        Provenance {
            tool: "htlob",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config_sha256: sha256_hex(&serde_json::to_vec(config).expect("config serializes")),
            input_sha256: None,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One checked metric. `pass` holds exactly when
/// |observed − reference| ≤ tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Validation {
    pub metric: String,
    pub observed: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
}

impl Validation {
    pub fn new(metric: impl Into<String>, observed: f64, reference: f64, tolerance: f64) -> Self {
        Validation {
            metric: metric.into(),
            observed,
            reference,
            tolerance,
            pass: (observed - reference).abs() <= tolerance,
            mc_std_error: None,
            runtime_s: None,
        }
    }

    pub fn with_se(mut self, se: f64) -> Self {
        self.mc_std_error = Some(se);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub config: Value,
    pub validations: Vec<Validation>,
    pub all_pass: bool,
    pub warnings: Vec<String>,
    pub results: Value,
}

impl Report {
    pub fn new(provenance: Provenance, config: Value) -> Self {
        Report {
            provenance,
            config,
            validations: Vec::new(),
            all_pass: true,
            warnings: Vec::new(),
            results: Value::Null,
        }
    }

    pub fn push(&mut self, v: Validation) {
        self.all_pass &= v.pass;
        self.validations.push(v);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        fs::write(path, s).with_context(|| format!("writing {}", path.display()))
    }

    /// Plain-text table of the validations, derived from the JSON form.
    pub fn render(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut out = format!(
            "{} {} (seed {}, config {})\n",
            v["provenance"]["tool"].as_str().unwrap_or_default(),
            v["provenance"]["command"].as_str().unwrap_or_default(),
            v["provenance"]["seed"],
            &v["provenance"]["config_sha256"].as_str().unwrap_or_default()[..12],
        );
        for e in v["validations"].as_array().into_iter().flatten() {
            out.push_str(&format!(
                "  {:4}  {:<44} observed {:<12} reference {:<12} tol {}\n",
                if e["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                e["metric"].as_str().unwrap_or_default(),
                fmt_num(&e["observed"]),
                fmt_num(&e["reference"]),
                fmt_num(&e["tolerance"]),
            ));
        }
        for w in v["warnings"].as_array().into_iter().flatten() {
            out.push_str(&format!("  warning: {}\n", w.as_str().unwrap_or_default()));
        }
        out
    }
}

fn fmt_num(v: &Value) -> String {
    match v.as_f64() {
        Some(x) if x != 0.0 && x.abs() < 1e-3 => format!("{x:.3e}"),
        Some(x) => format!("{x:.6}"),
        None => "-".to_string(),
    }
}

/// Wall-clock stopwatch that only reports when timing is enabled.
pub struct Timer {
    start: Option<Instant>,
}

impl Timer {
    pub fn start(enabled: bool) -> Self {
        Timer { start: enabled.then(Instant::now) }
    }

    pub fn stamp(&self, v: &mut Validation) {
        v.runtime_s = self.start.map(|s| s.elapsed().as_secs_f64());
    }
}

/// Rows as CSV (header from the first row's keys) or as a JSON array.
pub fn write_table<T: Serialize>(path: &Path, rows: &[T], format: crate::Format) -> Result<()> {
    let body = match format {
        crate::Format::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            s
        }
        crate::Format::Csv => {
            let mut s = String::new();
            for (i, r) in rows.iter().enumerate() {
                let Value::Object(m) = serde_json::to_value(r)? else {
                    anyhow::bail!("table rows must be objects");
                };
                if i == 0 {
                    s.push_str(&m.keys().cloned().collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                let cells: Vec<String> = m
                    .values()
                    .map(|v| match v {
                        Value::String(x) => x.clone(),
                        Value::Null => String::new(),
                        other => other.to_string(),
                    })
                    .collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
    };
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_matches_tolerance() {
        assert!(Validation::new("a", 1.0, 1.25, 0.25).pass);
        assert!(!Validation::new("a", 1.0, 1.26, 0.25).pass);
        assert!(!Validation::new("a", f64::NAN, 1.0, 0.05).pass);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn one_failure_fails_the_report() {
        let cfg = serde_json::json!({"k": 1});
        let mut r = Report::new(Provenance::new("x", 0, &cfg), cfg);
        r.push(Validation::new("ok", 0.0, 0.0, 0.0));
        assert!(r.all_pass);
        r.push(Validation::new("bad", 1.0, 0.0, 0.5));
        assert!(!r.all_pass);
        assert!(r.render().contains("FAIL  bad"));
    }
}
