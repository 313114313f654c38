use super::{Dist, FlowMoments};
use crate::error::{ensure, param, Error, Result};
use crate::lob::{OrderEvent, Side};
use crate::rng;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

/// Side and sign of the queue change produced by one Hawkes event type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventType {
    pub side: Side,
    pub sign: f64,
}

/// Multivariate Hawkes flow with intensities
/// λ_i(t) = θ_i + Σ_j δ_ij Σ_{s<t, type j} e^{-κ_i (t-s)}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HawkesFlowSpec {
    pub base_rates: Vec<f64>,
    pub excitation: Vec<Vec<f64>>,
    pub decay: Vec<f64>,
    pub types: Vec<EventType>,
    pub size_dist: Dist,
}

impl HawkesFlowSpec {
    pub fn dim(&self) -> usize {
        self.base_rates.len()
    }

    /// K_ij = δ_ij / κ_i, the expected number of type-i children of a type-j event.
    pub fn branching(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.excitation[i][j] / self.decay[i])
    }

    pub fn spectral_radius(&self) -> f64 {
        self.branching()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        ensure(n > 0, "base_rates", "need at least one event type")?;
        ensure(
            self.excitation.len() == n && self.excitation.iter().all(|r| r.len() == n),
            "excitation",
            "must be a square matrix matching base_rates",
        )?;
        ensure(self.decay.len() == n && self.types.len() == n, "decay/types", "length mismatch")?;
        ensure(self.base_rates.iter().all(|&t| t > 0.0), "base_rates", "must be positive")?;
        ensure(self.decay.iter().all(|&k| k > 0.0), "decay", "must be positive")?;
        ensure(
            self.excitation.iter().flatten().all(|&d| d >= 0.0 && d.is_finite()),
            "excitation",
            "must be non-negative",
        )?;
        ensure(
            self.types.iter().all(|t| t.sign == 1.0 || t.sign == -1.0),
            "types",
            "sign must be +1 or -1",
        )?;
        self.size_dist.validate()?;
        let r = self.spectral_radius();
        if r >= 1.0 {
            return Err(Error::Unstable(format!("branching spectral radius {r:.4} >= 1")));
        }
        Ok(())
    }

    /// Stationary intensities (I - K)^{-1} θ.
    pub fn mean_rates(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let a = DMatrix::<f64>::identity(n, n) - self.branching();
        let th = DVector::from_vec(self.base_rates.clone());
        let lam = a
            .lu()
            .solve(&th)
            .ok_or_else(|| param("excitation", "I - K is singular"))?;
        Ok(lam.iter().copied().collect())
    }

    pub fn moments(&self) -> Result<FlowMoments> {
        self.validate()?;
        let n = self.dim();
        let lam = self.mean_rates()?;
        let inv = (DMatrix::<f64>::identity(n, n) - self.branching())
            .try_inverse()
            .ok_or_else(|| param("excitation", "I - K is singular"))?;
        // long-run covariance of the counting vector
        let cc = &inv * DMatrix::from_diagonal(&DVector::from_vec(lam.clone())) * inv.transpose();
        let ev = self.size_dist.mean();
        let vv = self.size_dist.variance();
        let idx = |s: Side| if s == Side::Bid { 0 } else { 1 };
        let mut rate = [0.0; 2];
        let mut drift = [0.0; 2];
        let mut cov = [[0.0; 2]; 2];
        for i in 0..n {
            let p = idx(self.types[i].side);
            rate[p] += lam[i];
            drift[p] += self.types[i].sign * lam[i] * ev;
            cov[p][p] += vv * lam[i];
            for j in 0..n {
                let q = idx(self.types[j].side);
                cov[p][q] += ev * ev * self.types[i].sign * self.types[j].sign * cc[(i, j)];
            }
        }
        Ok(FlowMoments { rate, drift, cov })
    }
}

/// Event times and types by Ogata thinning. Between events every intensity
/// decays, so the current total intensity bounds the future one.
pub fn gen_hawkes_times<R: Rng>(spec: &HawkesFlowSpec, horizon: f64, r: &mut R) -> Result<Vec<(f64, usize)>> {
    spec.validate()?;
    let n = spec.dim();
    let mut excite = vec![0.0; n];
    let mut lam = vec![0.0; n];
    let mut t = 0.0;
    let mut out = Vec::new();
    loop {
        let bound: f64 = spec.base_rates.iter().zip(&excite).map(|(a, b)| a + b).sum();
        let w: f64 = Exp1.sample(r);
        let dt = w / bound;
        t += dt;
        if t > horizon {
            return Ok(out);
        }
        let mut total = 0.0;
        for i in 0..n {
            excite[i] *= (-spec.decay[i] * dt).exp();
            lam[i] = spec.base_rates[i] + excite[i];
            total += lam[i];
        }
        let u = r.random::<f64>() * bound;
        if u >= total {
            continue;
        }
        let mut acc = 0.0;
        let mut k = n - 1;
        for (i, l) in lam.iter().enumerate() {
            acc += l;
            if u < acc {
                k = i;
                break;
            }
        }
        out.push((t, k));
        for (i, e) in excite.iter_mut().enumerate() {
            *e += spec.excitation[i][k];
        }
    }
}

pub fn gen_hawkes_flow(spec: &HawkesFlowSpec, horizon: f64, seed: u64) -> Result<Vec<OrderEvent>> {
    ensure(horizon >= 0.0, "horizon", "must be non-negative")?;
    let mut r = rng::from_seed(seed);
    let times = gen_hawkes_times(spec, horizon, &mut r)?;
    Ok(times
        .into_iter()
        .map(|(t, k)| {
            let ty = spec.types[k];
            OrderEvent {
                time: t,
                side: ty.side,
                delta: ty.sign * spec.size_dist.sample(&mut r),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_type(theta: f64, delta: f64, kappa: f64) -> HawkesFlowSpec {
        HawkesFlowSpec {
            base_rates: vec![theta],
            excitation: vec![vec![delta]],
            decay: vec![kappa],
            types: vec![EventType { side: Side::Bid, sign: 1.0 }],
            size_dist: Dist::Constant { value: 1.0 },
        }
    }

    #[test]
    fn no_excitation_is_poisson() {
        let s = one_type(3.0, 0.0, 1.0);
        let ts = gen_hawkes_times(&s, 20_000.0, &mut rng::from_seed(1)).unwrap();
        let rate = ts.len() as f64 / 20_000.0;
        assert!((rate - 3.0).abs() < 3.0 * (3.0 / 20_000.0f64).sqrt(), "{rate}");
    }

    #[test]
    fn mean_rate_identity() {
        let s = one_type(1.0, 0.5, 1.0);
        assert!((s.mean_rates().unwrap()[0] - 2.0).abs() < 1e-12);
        let ts = gen_hawkes_times(&s, 200_000.0, &mut rng::from_seed(2)).unwrap();
        let rate = ts.len() as f64 / 200_000.0;
        assert!((rate - 2.0).abs() < 0.1, "{rate}");
    }

    #[test]
    fn adjacent_window_counts_correlate() {
        let s = one_type(1.0, 0.7, 1.0);
        let ts = gen_hawkes_times(&s, 100_000.0, &mut rng::from_seed(3)).unwrap();
        let mut counts = vec![0.0; 100_000];
        for (t, _) in ts {
            counts[(t as usize).min(99_999)] += 1.0;
        }
        let m = crate::stats::mean(&counts);
        let ac = crate::stats::autocov(&counts, m, 1) / crate::stats::autocov(&counts, m, 0);
        // under independence the lag-1 autocorrelation has sd about 1/sqrt(n)
        assert!(ac > 5.0 / (counts.len() as f64).sqrt(), "{ac}");
    }

    #[test]
    fn unstable_rejected() {
        let s = one_type(1.0, 1.5, 1.0);
        assert!(matches!(s.validate(), Err(Error::Unstable(_))));
        assert!(gen_hawkes_flow(&s, 1.0, 0).is_err());
    }

    #[test]
    fn count_variance_matches_long_run_formula() {
        // single type: Var N(t)/t -> Λ/(1-K)^2
        let s = one_type(1.0, 0.5, 2.0);
        let m = s.moments().unwrap();
        let k: f64 = 0.25;
        let lam = 1.0 / (1.0 - k);
        assert!((m.cov[0][0] - lam / ((1.0 - k) * (1.0 - k))).abs() < 1e-12);
        let ts = gen_hawkes_times(&s, 400_000.0, &mut rng::from_seed(9)).unwrap();
        let w = 50.0;
        let mut counts = vec![0.0; (400_000.0 / w) as usize];
        for (t, _) in ts {
            let i = ((t / w) as usize).min(counts.len() - 1);
            counts[i] += 1.0;
        }
        let v = crate::stats::variance(&counts) / w;
        assert!((v / m.cov[0][0] - 1.0).abs() < 0.1, "{v} vs {}", m.cov[0][0]);
    }
}
