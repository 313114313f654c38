use super::Dist;
use crate::error::{ensure, Error, Result};
use crate::rng;
use serde::{Deserialize, Serialize};

/// Autoregressive conditional durations: T_i = ψ_i ε_i with
/// ψ_i = a0 + Σ_k a_k ψ_{i-k} + Σ_k b_k T_{i-k}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcdSpec {
    pub a0: f64,
    pub a_coeffs: Vec<f64>,
    pub b_coeffs: Vec<f64>,
    pub innovation: Dist,
}

impl AcdSpec {
    pub fn persistence(&self) -> f64 {
        self.a_coeffs.iter().sum::<f64>() + self.b_coeffs.iter().sum::<f64>()
    }

    pub fn unconditional_mean(&self) -> f64 {
        self.a0 / (1.0 - self.persistence())
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.a0 > 0.0, "a0", "must be positive")?;
        ensure(
            self.a_coeffs.iter().chain(&self.b_coeffs).all(|&c| c >= 0.0),
            "acd_coeffs",
            "must be non-negative",
        )?;
        self.innovation.validate()?;
        ensure(
            (self.innovation.mean() - 1.0).abs() < 1e-9,
            "innovation",
            "must have unit mean",
        )?;
        let p = self.persistence();
        if p >= 1.0 {
            return Err(Error::Unstable(format!("sum of ACD coefficients {p} >= 1")));
        }
        Ok(())
    }
}

pub fn gen_acd_durations(spec: &AcdSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut r = rng::from_seed(seed);
    let (p, q) = (spec.a_coeffs.len(), spec.b_coeffs.len());
    let warm = 10 * (p + q);
    let m = spec.unconditional_mean();
    // newest first
    let mut psi_hist = vec![m; p];
    let mut t_hist = vec![m; q];
    let mut out = Vec::with_capacity(count);
    for i in 0..warm + count {
        let psi = spec.a0
            + spec.a_coeffs.iter().zip(&psi_hist).map(|(a, s)| a * s).sum::<f64>()
            + spec.b_coeffs.iter().zip(&t_hist).map(|(b, t)| b * t).sum::<f64>();
        let t = psi * spec.innovation.sample(&mut r);
        if p > 0 {
            psi_hist.rotate_right(1);
            psi_hist[0] = psi;
        }
        if q > 0 {
            t_hist.rotate_right(1);
            t_hist[0] = t;
        }
        if i >= warm {
            out.push(t);
        }
    }
    Ok(out)
}
