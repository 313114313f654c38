use crate::error::{ensure, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, LogNormal, Pareto, Weibull};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

/// Positive scalar distributions used for durations and order sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dist {
    Constant { value: f64 },
    Exponential { mean: f64 },
    Uniform { low: f64, high: f64 },
    Gamma { shape: f64, scale: f64 },
    LogNormal { mu: f64, sigma: f64 },
    /// P(X > x) = (scale/x)^shape for x ≥ scale.
    Pareto { scale: f64, shape: f64 },
    Weibull { shape: f64, scale: f64 },
}

impl Dist {
    /// Weibull rescaled to unit mean, for ACD innovations.
    pub fn unit_weibull(shape: f64) -> Dist {
        Dist::Weibull {
            shape,
            scale: 1.0 / gamma(1.0 + 1.0 / shape),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Dist::Constant { value } => value > 0.0,
            Dist::Exponential { mean } => mean > 0.0,
            Dist::Uniform { low, high } => low > 0.0 && high >= low,
            Dist::Gamma { shape, scale } => shape > 0.0 && scale > 0.0,
            Dist::LogNormal { sigma, mu } => sigma > 0.0 && mu.is_finite(),
            Dist::Pareto { scale, shape } => scale > 0.0 && shape > 0.0,
            Dist::Weibull { shape, scale } => shape > 0.0 && scale > 0.0,
        };
        ensure(ok, "dist", "parameters must describe a positive distribution")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Constant { value } => value,
            Dist::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            Dist::Uniform { low, high } => {
                if low == high {
                    low
                } else {
                    rng.random_range(low..high)
                }
            }
            Dist::Gamma { shape, scale } => Gamma::new(shape, scale).unwrap().sample(rng),
            Dist::LogNormal { mu, sigma } => LogNormal::new(mu, sigma).unwrap().sample(rng),
            Dist::Pareto { scale, shape } => Pareto::new(scale, shape).unwrap().sample(rng),
            Dist::Weibull { shape, scale } => Weibull::new(scale, shape).unwrap().sample(rng),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn second_moment(&self) -> f64 {
        self.moment(2)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    fn moment(&self, k: i32) -> f64 {
        let kf = k as f64;
        match *self {
            Dist::Constant { value } => value.powi(k),
            Dist::Exponential { mean } => mean.powi(k) * gamma(1.0 + kf),
            Dist::Uniform { low, high } => {
                if low == high {
                    low.powi(k)
                } else {
                    (high.powi(k + 1) - low.powi(k + 1)) / ((kf + 1.0) * (high - low))
                }
            }
            Dist::Gamma { shape, scale } => scale.powi(k) * gamma(shape + kf) / gamma(shape),
            Dist::LogNormal { mu, sigma } => (kf * mu + 0.5 * kf * kf * sigma * sigma).exp(),
            Dist::Pareto { scale, shape } => {
                if shape > kf {
                    shape * scale.powi(k) / (shape - kf)
                } else {
                    f64::INFINITY
                }
            }
            Dist::Weibull { shape, scale } => scale.powi(k) * gamma(1.0 + kf / shape),
        }
    }
}
