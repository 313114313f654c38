use crate::error::{ensure, Result};
use serde::{Deserialize, Serialize};

/// Event-level description of the limit: rates, mean sizes, long-run size
/// variances and the bid/ask correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionParams {
    pub lambda_bid: f64,
    pub lambda_ask: f64,
    pub vbar_bid: f64,
    pub vbar_ask: f64,
    pub v2_bid: f64,
    pub v2_ask: f64,
    pub rho: f64,
}

impl DiffusionParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.lambda_bid > 0.0 && self.lambda_ask > 0.0, "lambda", "rates must be positive")?;
        ensure(self.v2_bid > 0.0 && self.v2_ask > 0.0, "v2", "variances must be positive")?;
        ensure(
            self.vbar_bid.is_finite() && self.vbar_ask.is_finite(),
            "vbar",
            "mean sizes must be finite",
        )?;
        ensure(self.rho > -1.0 && self.rho < 1.0, "rho", "must lie in (-1, 1)")
    }

    pub fn drift(&self) -> [f64; 2] {
        [self.lambda_bid * self.vbar_bid, self.lambda_ask * self.vbar_ask]
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        self.dynamics().cov()
    }

    pub fn dynamics(&self) -> QuadrantDynamics {
        QuadrantDynamics {
            drift: self.drift(),
            sd: [
                (self.lambda_bid * self.v2_bid).sqrt(),
                (self.lambda_ask * self.v2_ask).sqrt(),
            ],
            rho: self.rho,
        }
    }
}

/// Drift and covariance per period after the time change by N = γ₁/γ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub mu_bid: f64,
    pub mu_ask: f64,
    #[serde(rename = "Lambda")]
    pub lambda: [[f64; 2]; 2],
    #[serde(rename = "N")]
    pub n: f64,
}

impl ScaledParams {
    pub fn dynamics(&self) -> QuadrantDynamics {
        let sb = self.lambda[0][0].sqrt();
        let sa = self.lambda[1][1].sqrt();
        QuadrantDynamics {
            drift: [self.mu_bid, self.mu_ask],
            sd: [sb, sa],
            rho: self.lambda[0][1] / (sb * sa),
        }
    }
}

/// Drift, per-coordinate standard deviation (per unit time) and correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantDynamics {
    pub drift: [f64; 2],
    pub sd: [f64; 2],
    pub rho: f64,
}

impl QuadrantDynamics {
    pub fn new(drift: [f64; 2], sd: [f64; 2], rho: f64) -> Result<Self> {
        let d = QuadrantDynamics { drift, sd, rho };
        d.validate()?;
        Ok(d)
    }

    pub fn driftless(sd: [f64; 2], rho: f64) -> Result<Self> {
        Self::new([0.0, 0.0], sd, rho)
    }

    pub fn from_cov(drift: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        ensure(cov[0][0] > 0.0 && cov[1][1] > 0.0, "covariance", "diagonal must be positive")?;
        ensure((cov[0][1] - cov[1][0]).abs() <= 1e-12 * (cov[0][0] * cov[1][1]).sqrt(), "covariance", "must be symmetric")?;
        let sd = [cov[0][0].sqrt(), cov[1][1].sqrt()];
        Self::new(drift, sd, cov[0][1] / (sd[0] * sd[1]))
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.sd[0] > 0.0 && self.sd[1] > 0.0 && self.sd.iter().all(|s| s.is_finite()),
            "sd",
            "covariance is degenerate",
        )?;
        ensure(self.rho > -1.0 && self.rho < 1.0, "rho", "covariance is degenerate (|rho| >= 1)")?;
        ensure(self.drift.iter().all(|d| d.is_finite()), "drift", "must be finite")
    }

    pub fn cov(&self) -> [[f64; 2]; 2] {
        let c = self.rho * self.sd[0] * self.sd[1];
        [[self.sd[0] * self.sd[0], c], [c, self.sd[1] * self.sd[1]]]
    }

    pub fn is_driftless(&self) -> bool {
        self.drift == [0.0, 0.0]
    }

    /// Lower Cholesky factor as (l11, l21, l22).
    pub fn cholesky(&self) -> (f64, f64, f64) {
        (
            self.sd[0],
            self.rho * self.sd[1],
            self.sd[1] * (1.0 - self.rho * self.rho).sqrt(),
        )
    }
}

impl From<&DiffusionParams> for QuadrantDynamics {
    fn from(p: &DiffusionParams) -> Self {
        p.dynamics()
    }
}

impl From<DiffusionParams> for QuadrantDynamics {
    fn from(p: DiffusionParams) -> Self {
        p.dynamics()
    }
}

impl From<&ScaledParams> for QuadrantDynamics {
    fn from(p: &ScaledParams) -> Self {
        p.dynamics()
    }
}

impl From<&QuadrantDynamics> for QuadrantDynamics {
    fn from(p: &QuadrantDynamics) -> Self {
        *p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_to_dynamics() {
        let p = DiffusionParams {
            lambda_bid: 4.0,
            lambda_ask: 1.0,
            vbar_bid: -0.5,
            vbar_ask: 2.0,
            v2_bid: 1.0,
            v2_ask: 9.0,
            rho: -0.25,
        };
        let d = p.dynamics();
        assert_eq!(d.drift, [-2.0, 2.0]);
        assert_eq!(d.sd, [2.0, 3.0]);
        assert_eq!(d.cov()[0][1], -1.5);
        let (a, b, c) = d.cholesky();
        assert!((a * a - 4.0).abs() < 1e-14 && (a * b - -1.5).abs() < 1e-14 && (b * b + c * c - 9.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_rejected() {
        assert!(QuadrantDynamics::driftless([1.0, 1.0], 1.0).is_err());
        assert!(QuadrantDynamics::driftless([0.0, 1.0], 0.0).is_err());
        assert!(QuadrantDynamics::from_cov([0.0; 2], [[1.0, 1.0], [1.0, 1.0]]).is_err());
    }
}
