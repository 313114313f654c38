use super::{merge, FlowMoments};
use crate::error::{ensure, Result};
use crate::lob::{OrderEvent, Side};
use crate::rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

/// Bivariate ARCH(1) signed volumes V = σ z, σ_i² = α0 + α1 V_{i-1}²,
/// with Gaussian innovations correlated across sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchVolumeSpec {
    pub alpha0_bid: f64,
    pub alpha1_bid: f64,
    pub alpha0_ask: f64,
    pub alpha1_ask: f64,
    pub rho_z: f64,
}

const WARM_UP: usize = 100;

impl ArchVolumeSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.alpha0_bid > 0.0 && self.alpha0_ask > 0.0, "alpha0", "must be positive")?;
        ensure(
            (0.0..1.0).contains(&self.alpha1_bid) && (0.0..1.0).contains(&self.alpha1_ask),
            "alpha1",
            "must lie in [0, 1)",
        )?;
        ensure(self.rho_z > -1.0 && self.rho_z < 1.0, "rho_z", "must lie in (-1, 1)")
    }

    pub fn stationary_variance(&self) -> [f64; 2] {
        [
            self.alpha0_bid / (1.0 - self.alpha1_bid),
            self.alpha0_ask / (1.0 - self.alpha1_ask),
        ]
    }
}

pub fn gen_arch_volumes(spec: &ArchVolumeSpec, count: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
    spec.validate()?;
    let mut r = rng::from_seed(seed);
    let mut prev2 = spec.stationary_variance();
    let c = (1.0 - spec.rho_z * spec.rho_z).sqrt();
    let mut out = Vec::with_capacity(count);
    for i in 0..WARM_UP + count {
        let z1: f64 = StandardNormal.sample(&mut r);
        let z2: f64 = StandardNormal.sample(&mut r);
        let zb = z1;
        let za = spec.rho_z * z1 + c * z2;
        let sb = (spec.alpha0_bid + spec.alpha1_bid * prev2[0]).sqrt();
        let sa = (spec.alpha0_ask + spec.alpha1_ask * prev2[1]).sqrt();
        let v = [sb * zb, sa * za];
        prev2 = [v[0] * v[0], v[1] * v[1]];
        if i >= WARM_UP {
            out.push(v);
        }
    }
    Ok(out)
}

/// Poisson arrival times, each arrival touching both sides at once with
/// ARCH volumes (bid leg first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchFlowSpec {
    pub rate: f64,
    pub volumes: ArchVolumeSpec,
}

impl ArchFlowSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.rate > 0.0, "rate", "must be positive")?;
        self.volumes.validate()
    }

    /// Closed form only without volatility clustering.
    pub fn moments(&self) -> Option<FlowMoments> {
        let v = &self.volumes;
        if v.alpha1_bid != 0.0 || v.alpha1_ask != 0.0 {
            return None;
        }
        let r = self.rate;
        let c = r * v.rho_z * (v.alpha0_bid * v.alpha0_ask).sqrt();
        Some(FlowMoments {
            rate: [r, r],
            drift: [0.0, 0.0],
            cov: [[r * v.alpha0_bid, c], [c, r * v.alpha0_ask]],
        })
    }
}

pub fn gen_arch_flow(spec: &ArchFlowSpec, horizon: f64, seed: u64) -> Result<Vec<OrderEvent>> {
    spec.validate()?;
    ensure(horizon >= 0.0, "horizon", "must be non-negative")?;
    let mut r = rng::from_seed(rng::derive(seed, "times"));
    let exp = Exp::new(spec.rate).unwrap();
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(&mut r);
        if t > horizon {
            break;
        }
        times.push(t);
    }
    let vols = gen_arch_volumes(&spec.volumes, times.len(), seed)?;
    let mut bid = Vec::with_capacity(times.len());
    let mut ask = Vec::with_capacity(times.len());
    for (t, v) in times.iter().zip(vols) {
        if v[0] != 0.0 {
            bid.push(OrderEvent { time: *t, side: Side::Bid, delta: v[0] });
        }
        if v[1] != 0.0 {
            ask.push(OrderEvent { time: *t, side: Side::Ask, delta: v[1] });
        }
    }
    Ok(merge(bid, ask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    fn spec(a1: f64, rho: f64) -> ArchVolumeSpec {
        ArchVolumeSpec { alpha0_bid: 2.0, alpha1_bid: a1, alpha0_ask: 1.0, alpha1_ask: a1, rho_z: rho }
    }

    #[test]
    fn no_clustering_is_iid_gaussian() {
        let v = gen_arch_volumes(&spec(0.0, 0.0), 200_000, 1).unwrap();
        let b: Vec<f64> = v.iter().map(|x| x[0]).collect();
        let var = stats::variance(&b);
        assert!((var - 2.0).abs() < 3.0 * 2.0 * (2.0 / b.len() as f64).sqrt());
        let ks = stats::ks_statistic(&b, |x| stats::norm_cdf(x / 2f64.sqrt()));
        assert!(ks < stats::ks_critical_5pct(b.len()) * 1.3);
    }

    #[test]
    fn clustering_in_squares_not_levels() {
        let v = gen_arch_volumes(&spec(0.4, 0.0), 1_000_000, 2).unwrap();
        let b: Vec<f64> = v.iter().map(|x| x[0]).collect();
        let b2: Vec<f64> = b.iter().map(|x| x * x).collect();
        let n = b.len() as f64;
        let ac = |xs: &[f64]| {
            let m = stats::mean(xs);
            stats::autocov(xs, m, 1) / stats::autocov(xs, m, 0)
        };
        assert!(ac(&b).abs() < 4.0 / n.sqrt());
        assert!(ac(&b2) > 0.2, "{}", ac(&b2));
    }

    #[test]
    fn uncorrelated_innovations_give_uncorrelated_sides() {
        let v = gen_arch_volumes(&spec(0.3, 0.0), 200_000, 3).unwrap();
        let b: Vec<f64> = v.iter().map(|x| x[0]).collect();
        let a: Vec<f64> = v.iter().map(|x| x[1]).collect();
        let c = stats::covariance(&b, &a) / (stats::variance(&b) * stats::variance(&a)).sqrt();
        assert!(c.abs() < 4.0 / (b.len() as f64).sqrt(), "{c}");
    }

    #[test]
    fn rejects_explosive() {
        assert!(gen_arch_volumes(&spec(1.0, 0.0), 10, 0).is_err());
        assert!(gen_arch_volumes(&spec(0.5, 1.0), 10, 0).is_err());
    }
}
