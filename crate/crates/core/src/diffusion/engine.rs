//! Exact-in-law hitting of the axes. Gaussian increments come from the
//! Cholesky factor; given the endpoints of a step each coordinate is a
//! Brownian bridge whose crossing probability and crossing time are known
//! in closed form. When both coordinates have a non-negligible chance of
//! crossing in the same step, the step is bisected through the 2-D bridge
//! midpoint, so the only approximation left is treating near-impossible
//! double crossings as conditionally independent.

use super::params::QuadrantDynamics;
use crate::error::{ensure, Error, Result};
use crate::lob::{Jump, JumpSide, PathSample, RegulatedPath, ReinitRule};
use crate::rng;
use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// h = kappa · (largest standardized distance to an axis)², capped.
    Adaptive { kappa: f64, max_step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitConfig {
    pub step: StepRule,
    /// Off: plain sign check at step ends (biased, kept for comparison).
    pub bridge: bool,
    pub joint_eps: f64,
    pub max_depth: u32,
    /// Paths still inside at this time are censored.
    pub max_time: f64,
}

impl Default for HitConfig {
    fn default() -> Self {
        HitConfig {
            step: StepRule::Adaptive {
                kappa: 0.25,
                max_step: f64::INFINITY,
            },
            bridge: true,
            joint_eps: 1e-6,
            max_depth: 40,
            max_time: f64::INFINITY,
        }
    }
}

impl HitConfig {
    pub fn fixed(step: f64) -> Self {
        HitConfig {
            step: StepRule::Fixed(step),
            ..Default::default()
        }
    }

    pub fn with_max_time(mut self, t: f64) -> Self {
        self.max_time = t;
        self
    }

    fn validate(&self) -> Result<()> {
        match self.step {
            StepRule::Fixed(h) => ensure(h > 0.0 && h.is_finite(), "step", "must be positive")?,
            StepRule::Adaptive { kappa, max_step } => {
                ensure(kappa > 0.0 && max_step > 0.0, "step", "kappa and max_step must be positive")?
            }
        }
        ensure(self.max_time > 0.0, "max_time", "must be positive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub side: JumpSide,
    pub time: f64,
}

enum Outcome {
    Stay([f64; 2]),
    Hit { side: JumpSide, dt: f64, pre: [f64; 2] },
}

struct Stepper<'a> {
    d: QuadrantDynamics,
    l: (f64, f64, f64),
    var: [f64; 2],
    cfg: &'a HitConfig,
    /// Skip crossing times and left limits when only the exit side matters.
    side_only: bool,
}

fn check_interior(x: [f64; 2]) -> Result<()> {
    if x[0] > 0.0 && x[1] > 0.0 && x[0].is_finite() && x[1].is_finite() {
        Ok(())
    } else {
        Err(Error::NotInterior(x[0], x[1]))
    }
}

/// P(bridge from a > 0 to b over variance `vh` touches zero).
fn cross_prob(a: f64, b: f64, vh: f64) -> f64 {
    if b <= 0.0 {
        return 1.0;
    }
    let e = -2.0 * a * b / vh;
    if e < -45.0 {
        0.0
    } else {
        e.exp()
    }
}

/// First-passage time to zero of a bridge from `a` to `b` over `[0, h]`,
/// given that it crosses. With r = s/(h − s) the conditional density is
/// inverse Gaussian with mean a/|b| and shape a²/(var·h).
fn crossing_time<R: Rng + ?Sized>(a: f64, b: f64, var: f64, h: f64, rng: &mut R) -> f64 {
    let shape = a * a / (var * h);
    let mean = a / b.abs();
    let r = if mean.is_finite() && mean < 1e12 {
        InverseGaussian::new(mean, shape).map_or(mean, |d| d.sample(rng))
    } else {
        // b = 0: the Lévy limit, shape / Z²
        let z: f64 = StandardNormal.sample(rng);
        shape / (z * z)
    };
    if r.is_infinite() {
        h
    } else {
        h * r / (1.0 + r)
    }
}

impl<'a> Stepper<'a> {
    fn new(d: QuadrantDynamics, cfg: &'a HitConfig) -> Result<Self> {
        d.validate()?;
        cfg.validate()?;
        Ok(Stepper {
            d,
            l: d.cholesky(),
            var: [d.sd[0] * d.sd[0], d.sd[1] * d.sd[1]],
            cfg,
            side_only: false,
        })
    }

    fn base_step(&self, x: [f64; 2], remaining: f64) -> f64 {
        let h = match self.cfg.step {
            StepRule::Fixed(h) => h,
            StepRule::Adaptive { kappa, max_step } => {
                let u = x[0] / self.d.sd[0];
                let w = x[1] / self.d.sd[1];
                (kappa * u.max(w).powi(2)).min(max_step)
            }
        };
        h.min(remaining)
    }

    fn gaussian<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        (self.l.0 * z1, self.l.1 * z1 + self.l.2 * z2)
    }

    fn step<R: Rng + ?Sized>(&self, x: [f64; 2], h: f64, rng: &mut R) -> Outcome {
        let (g0, g1) = self.gaussian(rng);
        let s = h.sqrt();
        let y = [
            x[0] + self.d.drift[0] * h + s * g0,
            x[1] + self.d.drift[1] * h + s * g1,
        ];
        if !self.cfg.bridge {
            return if y[1] <= 0.0 {
                Outcome::Hit { side: JumpSide::AskDepleted, dt: h, pre: [y[0].max(0.0), 0.0] }
            } else if y[0] <= 0.0 {
                Outcome::Hit { side: JumpSide::BidDepleted, dt: h, pre: [0.0, y[1]] }
            } else {
                Outcome::Stay(y)
            };
        }
        self.resolve(x, y, h, 0, rng)
    }

    fn resolve<R: Rng + ?Sized>(&self, x: [f64; 2], y: [f64; 2], h: f64, depth: u32, rng: &mut R) -> Outcome {
        let pb = cross_prob(x[0], y[0], self.var[0] * h);
        let pa = cross_prob(x[1], y[1], self.var[1] * h);
        if pb == 0.0 && pa == 0.0 {
            return Outcome::Stay(y);
        }
        if pb > self.cfg.joint_eps && pa > self.cfg.joint_eps && depth < self.cfg.max_depth {
            // midpoint of the planar bridge: mean (x+y)/2, covariance Σh/4
            let (g0, g1) = self.gaussian(rng);
            let s = (0.25 * h).sqrt();
            let mid = [0.5 * (x[0] + y[0]) + s * g0, 0.5 * (x[1] + y[1]) + s * g1];
            let half = 0.5 * h;
            if mid[0] > 0.0 && mid[1] > 0.0 {
                if let o @ Outcome::Hit { .. } = self.resolve(x, mid, half, depth + 1, rng) {
                    return o;
                }
                return match self.resolve(mid, y, half, depth + 1, rng) {
                    Outcome::Hit { side, dt, pre } => Outcome::Hit { side, dt: dt + half, pre },
                    stay => stay,
                };
            }
            // the midpoint is already outside: the first crossing is in the left half
            return self.resolve(x, mid, half, depth + 1, rng);
        }
        let hit_b = pb >= 1.0 || (pb > 0.0 && rng.random::<f64>() < pb);
        let hit_a = pa >= 1.0 || (pa > 0.0 && rng.random::<f64>() < pa);
        if !hit_a && !hit_b {
            return Outcome::Stay(y);
        }
        if self.side_only && hit_a != hit_b {
            let side = if hit_a { JumpSide::AskDepleted } else { JumpSide::BidDepleted };
            return Outcome::Hit { side, dt: h, pre: [0.0, 0.0] };
        }
        let tb = if hit_b {
            crossing_time(x[0], y[0], self.var[0], h, rng)
        } else {
            f64::INFINITY
        };
        let ta = if hit_a {
            crossing_time(x[1], y[1], self.var[1], h, rng)
        } else {
            f64::INFINITY
        };
        let (side, dt) = if ta <= tb {
            (JumpSide::AskDepleted, ta)
        } else {
            (JumpSide::BidDepleted, tb)
        };
        let pre = self.left_limit(x, y, h, dt, side, rng);
        Outcome::Hit { side, dt, pre }
    }

    /// Surviving coordinate at the hit: planar bridge value at `dt`,
    /// conditioned on the hit coordinate being zero.
    fn left_limit<R: Rng + ?Sized>(&self, x: [f64; 2], y: [f64; 2], h: f64, dt: f64, side: JumpSide, rng: &mut R) -> [f64; 2] {
        let f = dt / h;
        let c = dt * (h - dt) / h;
        let m = [x[0] + f * (y[0] - x[0]), x[1] + f * (y[1] - x[1])];
        let z: f64 = StandardNormal.sample(rng);
        let r = self.d.rho;
        let s1 = (1.0 - r * r).sqrt();
        match side {
            JumpSide::AskDepleted => {
                let v = m[0] - r * self.d.sd[0] / self.d.sd[1] * m[1] + self.d.sd[0] * s1 * c.sqrt() * z;
                [v.max(0.0), 0.0]
            }
            JumpSide::BidDepleted => {
                let v = m[1] - r * self.d.sd[1] / self.d.sd[0] * m[0] + self.d.sd[1] * s1 * c.sqrt() * z;
                [0.0, v.max(0.0)]
            }
        }
    }

    /// Advance by `duration` from time `t0`, redrawing through `rule` at hits.
    fn advance<R: Rng + ?Sized>(
        &self,
        mut x: [f64; 2],
        t0: f64,
        duration: f64,
        rule: &ReinitRule,
        rng: &mut R,
        jumps: &mut Vec<Jump>,
    ) -> Result<[f64; 2]> {
        let mut elapsed = 0.0;
        while elapsed < duration {
            let h = self.base_step(x, duration - elapsed);
            if h <= 0.0 {
                break;
            }
            match self.step(x, h, rng) {
                Outcome::Stay(y) => {
                    x = y;
                    elapsed += h;
                }
                Outcome::Hit { side, dt, pre } => {
                    elapsed += dt;
                    let post = rule.draw(side, pre, rng)?;
                    jumps.push(Jump { time: t0 + elapsed, side, pre, post });
                    x = post;
                }
            }
        }
        Ok(x)
    }

    fn first_hit<R: Rng + ?Sized>(&self, mut x: [f64; 2], rng: &mut R) -> Option<Hit> {
        let mut t = 0.0;
        while t < self.cfg.max_time {
            let h = self.base_step(x, self.cfg.max_time - t);
            if h <= 0.0 {
                return None;
            }
            match self.step(x, h, rng) {
                Outcome::Stay(y) => {
                    x = y;
                    t += h;
                }
                Outcome::Hit { side, dt, .. } => return Some(Hit { side, time: t + dt }),
            }
        }
        None
    }
}

/// Sample path of the limit queue on a regular grid of `step` (default
/// horizon/2¹⁶), with every axis hit and redraw recorded.
pub fn simulate_q(
    dynamics: impl Into<QuadrantDynamics>,
    rule: &ReinitRule,
    initial: [f64; 2],
    horizon: f64,
    step: Option<f64>,
    seed: u64,
) -> Result<RegulatedPath> {
    check_interior(initial)?;
    ensure(horizon >= 0.0, "horizon", "must be non-negative")?;
    let h = step.unwrap_or(horizon / 65536.0);
    let cfg = HitConfig::fixed(if h > 0.0 { h } else { 1.0 });
    let st = Stepper::new(dynamics.into(), &cfg)?;
    let mut r = rng::from_seed(seed);
    let mut out = RegulatedPath::default();
    out.samples.push(PathSample::new(0.0, initial));
    if horizon == 0.0 {
        return Ok(out);
    }
    ensure(h > 0.0, "step", "must be positive")?;
    let steps = (horizon / h).round().max(1.0) as u64;
    let mut x = initial;
    for k in 0..steps {
        let t0 = k as f64 * h;
        let t1 = if k + 1 == steps { horizon } else { (k + 1) as f64 * h };
        x = st.advance(x, t0, t1 - t0, rule, &mut r, &mut out.jumps)?;
        out.samples.push(PathSample::new(t1, x));
    }
    Ok(out)
}

/// State after time `t`, with redraws at hits.
pub fn propagate<R: Rng + ?Sized>(
    dynamics: &QuadrantDynamics,
    rule: &ReinitRule,
    initial: [f64; 2],
    t: f64,
    cfg: &HitConfig,
    rng: &mut R,
) -> Result<([f64; 2], Vec<Jump>)> {
    check_interior(initial)?;
    let st = Stepper::new(*dynamics, cfg)?;
    let mut jumps = Vec::new();
    let x = st.advance(initial, 0.0, t, rule, rng, &mut jumps)?;
    Ok((x, jumps))
}

/// First axis hit, or `None` if the path is still inside at `cfg.max_time`.
pub fn first_hit<R: Rng + ?Sized>(
    dynamics: &QuadrantDynamics,
    initial: [f64; 2],
    cfg: &HitConfig,
    rng: &mut R,
) -> Result<Option<Hit>> {
    check_interior(initial)?;
    let st = Stepper::new(*dynamics, cfg)?;
    Ok(st.first_hit(initial, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExitSideEstimate {
    pub paths: u64,
    pub ask_first: u64,
    pub censored: u64,
    /// Fraction of uncensored paths that hit the ask axis first.
    pub p_up: f64,
    pub std_error: f64,
}

const CHUNK: u64 = 4096;

fn par_chunks<T: Send, F>(paths: u64, f: F) -> Vec<T>
where
    F: Fn(u64, u64) -> T + Sync + Send,
{
    let chunks = paths.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK, ((c + 1) * CHUNK).min(paths)))
        .collect()
}

/// Monte Carlo exit-side frequencies; path `i` uses stream `i` of `seed`.
pub fn exit_side_mc(
    dynamics: &QuadrantDynamics,
    initial: [f64; 2],
    paths: u64,
    cfg: &HitConfig,
    seed: u64,
) -> Result<ExitSideEstimate> {
    check_interior(initial)?;
    ensure(paths > 0, "paths", "must be positive")?;
    let mut st = Stepper::new(*dynamics, cfg)?;
    st.side_only = true;
    let counts = par_chunks(paths, |lo, hi| {
        let (mut up, mut cens) = (0u64, 0u64);
        for i in lo..hi {
            let mut r = rng::stream(seed, i);
            match st.first_hit(initial, &mut r) {
                Some(Hit { side: JumpSide::AskDepleted, .. }) => up += 1,
                Some(_) => {}
                None => cens += 1,
            }
        }
        (up, cens)
    });
    let (up, cens) = counts.iter().fold((0, 0), |a, c| (a.0 + c.0, a.1 + c.1));
    let n = (paths - cens) as f64;
    let p = if n > 0.0 { up as f64 / n } else { f64::NAN };
    Ok(ExitSideEstimate {
        paths,
        ask_first: up,
        censored: cens,
        p_up: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
    })
}

/// First-exit times of `paths` paths; `f64::INFINITY` marks paths still
/// inside at `t_max`.
pub fn exit_times_mc(
    dynamics: &QuadrantDynamics,
    initial: [f64; 2],
    paths: u64,
    t_max: f64,
    cfg: &HitConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    check_interior(initial)?;
    let cfg = cfg.with_max_time(t_max);
    let st = Stepper::new(*dynamics, &cfg)?;
    let parts = par_chunks(paths, |lo, hi| {
        (lo..hi)
            .map(|i| {
                let mut r = rng::stream(seed, i);
                st.first_hit(initial, &mut r).map_or(f64::INFINITY, |h| h.time)
            })
            .collect::<Vec<f64>>()
    });
    Ok(parts.concat())
}

/// Heavy-traffic rescaling: time / n, sizes / √n.
pub fn rescale_discrete(path: &RegulatedPath, n: u64) -> Result<RegulatedPath> {
    ensure(n >= 1, "n", "must be at least 1")?;
    let nf = n as f64;
    let s = nf.sqrt();
    Ok(RegulatedPath {
        samples: path
            .samples
            .iter()
            .map(|p| PathSample { time: p.time / nf, q_bid: p.q_bid / s, q_ask: p.q_ask / s })
            .collect(),
        jumps: path
            .jumps
            .iter()
            .map(|j| Jump {
                time: j.time / nf,
                side: j.side,
                pre: [j.pre[0] / s, j.pre[1] / s],
                post: [j.post[0] / s, j.post[1] / s],
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lob::DepthSampler;
    use crate::stats::{self, norm_cdf};

    fn unit(rho: f64) -> QuadrantDynamics {
        QuadrantDynamics::driftless([1.0, 1.0], rho).unwrap()
    }

    fn rule() -> ReinitRule {
        ReinitRule::iid(
            DepthSampler::Fixed { bid: 1.0, ask: 1.0 },
            DepthSampler::Fixed { bid: 1.0, ask: 1.0 },
        )
        .unwrap()
    }

fn ln_norm_cdf(x: f64) -> f64 {
        if x > -20.0 {
            norm_cdf(x).ln()
        } else {
            let x2 = x * x;
            -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
                + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)).ln()
        }
    }

    /// P(T ≤ s | X_h = b) / P(T ≤ h | X_h = b) from the reflection formula.
    fn crossing_cdf(a: f64, b: f64, var: f64, h: f64, s: f64) -> f64 {
        let e = -2.0 * a * b / (var * h);
        let p = if b <= 0.0 { 1.0 } else { e.exp() };
        let m = a + (s / h) * (b - a);
        let m2 = -a + (s / h) * (b + a);
        let sd = (var * s * (h - s) / h).sqrt();
        (norm_cdf(-m / sd) + (e + ln_norm_cdf(m2 / sd)).exp()) / p
    }

    #[test]
    fn crossing_time_follows_reflection_law() {
        for &(a, b, var, h) in &[(1.0, 0.5, 1.0, 1.0), (0.3, -0.2, 2.0, 0.5), (2.0, 0.0, 1.0, 3.0), (0.1, 1.5, 0.5, 0.2)] {
            let mut r = rng::from_seed(4);
            let xs: Vec<f64> = (0..20_000).map(|_| crossing_time(a, b, var, h, &mut r)).collect();
            assert!(xs.iter().all(|&t| t > 0.0 && t <= h));
            let d = stats::ks_statistic(&xs, |s| crossing_cdf(a, b, var, h, s));
            assert!(d < stats::ks_critical_5pct(xs.len()) * 1.3, "{a} {b}: {d}");
        }
    }

    #[test]
    fn crossing_time_cdf_matches_simulation() {
        // a=1, b=0.5, σ²=1, h=1: compare the sampled law with fine-grid brute force
        let (a, b, h): (f64, f64, f64) = (1.0, 0.5, 1.0);
        let p = (-2.0 * a * b / h).exp();
        let mut r = rng::from_seed(1);
        let samples: Vec<f64> = (0..20_000).map(|_| crossing_time(a, b, 1.0, h, &mut r)).collect();
        let med_sampled = {
            let mut s = samples.clone();
            s.sort_by(f64::total_cmp);
            s[s.len() / 2]
        };
        // brute force: bridges on a 2000-step grid conditioned on crossing
        let n = 2000;
        let dt = h / n as f64;
        let mut times = vec![];
        let mut r = rng::from_seed(2);
        while times.len() < 4000 {
            let mut w = vec![0.0; n + 1];
            for k in 1..=n {
                let z: f64 = StandardNormal.sample(&mut r);
                w[k] = w[k - 1] + dt.sqrt() * z;
            }
            let path = |k: usize| a + w[k] - (k as f64 / n as f64) * (w[n] - (b - a));
            if let Some(k) = (0..=n).find(|&k| path(k) <= 0.0) {
                times.push(k as f64 * dt);
            }
        }
        times.sort_by(f64::total_cmp);
        let med_brute = times[times.len() / 2];
        assert!((med_sampled - med_brute).abs() < 0.03, "{med_sampled} vs {med_brute} (p={p})");
    }

    #[test]
    fn far_start_has_no_jumps_and_gaussian_increments() {
        let d = unit(0.0);
        let path = simulate_q(&d, &rule(), [1e6, 1e6], 1.0, Some(1e-5), 3).unwrap();
        assert!(path.jumps.is_empty());
        let inc: Vec<[f64; 2]> = path.samples.windows(2).map(|w| [w[1].q_bid - w[0].q_bid, w[1].q_ask - w[0].q_ask]).collect();
        let b: Vec<f64> = inc.iter().map(|x| x[0] / 1e-5f64.sqrt()).collect();
        let a: Vec<f64> = inc.iter().map(|x| x[1] / 1e-5f64.sqrt()).collect();
        assert!((stats::variance(&b) - 1.0).abs() < 0.05);
        assert!((stats::variance(&a) - 1.0).abs() < 0.05);
        assert!(stats::covariance(&a, &b).abs() < 0.05);
    }

    #[test]
    fn increment_covariance_scales_with_interval() {
        let d = QuadrantDynamics::driftless([1.0, 2.0], -0.4).unwrap();
        let h = 1e-3;
        let path = simulate_q(&d, &rule(), [1e5, 1e5], 200.0, Some(h), 4).unwrap();
        let q: Vec<[f64; 2]> = path.samples.iter().map(|s| s.q()).collect();
        let mut covs = vec![];
        for lag in [1usize, 10, 100] {
            let inc: Vec<[f64; 2]> = q.windows(lag + 1).step_by(lag).map(|w| [w[lag][0] - w[0][0], w[lag][1] - w[0][1]]).collect();
            let b: Vec<f64> = inc.iter().map(|x| x[0]).collect();
            let a: Vec<f64> = inc.iter().map(|x| x[1]).collect();
            let dt = lag as f64 * h;
            covs.push([stats::variance(&b) / dt, stats::variance(&a) / dt, stats::covariance(&b, &a) / dt]);
            // successive increments are uncorrelated
            let c1 = stats::covariance(&b[..b.len() - 1], &b[1..]) / stats::variance(&b);
            assert!(c1.abs() < 5.0 / (b.len() as f64).sqrt(), "lag {lag}: {c1}");
        }
        for c in &covs {
            assert!((c[0] - 1.0).abs() < 0.05 && (c[1] - 4.0).abs() < 0.2 && (c[2] + 0.8).abs() < 0.06, "{c:?}");
        }
    }

    #[test]
    fn symmetric_start_gives_even_sides() {
        let est = exit_side_mc(&unit(0.0), [0.7, 0.7], 100_000, &HitConfig::default(), 5).unwrap();
        assert!((est.p_up - 0.5).abs() < 3.0 * est.std_error, "{est:?}");
        assert_eq!(est.censored, 0);
    }

    #[test]
    fn quarter_plane_arctan_law() {
        // ρ = 0: P(ask first) = (2/π) atan(x/y) with x the bid queue
        let est = exit_side_mc(&unit(0.0), [3f64.sqrt(), 1.0], 200_000, &HitConfig::default(), 6).unwrap();
        assert!((est.p_up - 2.0 / 3.0).abs() < 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn strong_ask_drift_forces_ask_hits() {
        let mut last = 0.0;
        for mu in [0.0, -2.0, -8.0] {
            let d = QuadrantDynamics::new([0.0, mu], [1.0, 1.0], 0.0).unwrap();
            let est = exit_side_mc(&d, [1.0, 1.0], 20_000, &HitConfig::default(), 7).unwrap();
            assert!(est.p_up >= last - 0.01);
            last = est.p_up;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn rejects_axis_start() {
        let mut r = rng::from_seed(0);
        assert!(first_hit(&unit(0.0), [0.0, 1.0], &HitConfig::default(), &mut r).is_err());
        assert!(simulate_q(&unit(0.0), &rule(), [1.0, 0.0], 1.0, None, 0).is_err());
    }

    #[test]
    fn fixed_and_adaptive_steps_agree() {
        // negative correlation keeps exit times integrable for the fixed grid
        let d = unit(-0.5);
        let fine = exit_side_mc(&d, [1.0, 2.0], 100_000, &HitConfig::fixed(0.01), 8).unwrap();
        let adap = exit_side_mc(&d, [1.0, 2.0], 100_000, &HitConfig::default(), 9).unwrap();
        let se = (fine.std_error.powi(2) + adap.std_error.powi(2)).sqrt();
        assert!((fine.p_up - adap.p_up).abs() < 3.0 * se, "{fine:?} {adap:?}");
    }

    #[test]
    fn step_halving_is_stable_with_bridge() {
        let d = unit(-0.3);
        let a = exit_side_mc(&d, [1.0, 1.5], 100_000, &HitConfig::fixed(0.2), 10).unwrap();
        let b = exit_side_mc(&d, [1.0, 1.5], 100_000, &HitConfig::fixed(0.1), 11).unwrap();
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.p_up - b.p_up).abs() < 3.0 * se, "{a:?} {b:?}");
    }

    #[test]
    fn exit_times_survival_matches_product_of_erfs() {
        // ρ = 0, unit scales: P(τ > t) = erf(x/√(2t)) erf(y/√(2t))
        let times = exit_times_mc(&unit(0.0), [1.0, 1.0], 200_000, 10.0, &HitConfig::default(), 12).unwrap();
        for t in [0.2, 1.0, 4.0] {
            let s = times.iter().filter(|&&x| x > t).count() as f64 / times.len() as f64;
            let e = statrs::function::erf::erf(1.0 / (2.0 * t as f64).sqrt());
            let want = e * e;
            let se = (want * (1.0 - want) / times.len() as f64).sqrt();
            assert!((s - want).abs() < 4.0 * se, "t={t}: {s} vs {want}");
        }
    }

    #[test]
    fn mc_is_deterministic() {
        let a = exit_side_mc(&unit(0.2), [1.0, 1.0], 10_000, &HitConfig::default(), 13).unwrap();
        let b = exit_side_mc(&unit(0.2), [1.0, 1.0], 10_000, &HitConfig::default(), 13).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rescale() {
        let p = RegulatedPath {
            samples: vec![PathSample::new(0.0, [4.0, 8.0]), PathSample::new(100.0, [10.0, 20.0])],
            jumps: vec![],
        };
        assert_eq!(rescale_discrete(&p, 1).unwrap(), p);
        let r = rescale_discrete(&p, 100).unwrap();
        assert_eq!(r.samples[1], PathSample::new(1.0, [1.0, 2.0]));
        assert!(rescale_discrete(&p, 0).is_err());
    }
}
