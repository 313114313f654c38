use super::geometry::{cone_alpha, cone_geometry_display, ConeGeometry};
use crate::diffusion::{DiffusionParams, QuadrantDynamics};
use crate::error::{param, Error, Result};
use crate::special::{bessel_i_scaled, gauss_kronrod};
use serde::Serialize;
use std::f64::consts::PI;

const TERM_TOL: f64 = 1e-10;
const MAX_TERMS: usize = 200_000;

/// Which geometry feeds the Bessel series. `Standardized` uses the
/// Mahalanobis radius and wedge angle of the start point; `Display` uses the
/// printed U and θ₀ formulas literally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVariant {
    #[default]
    Standardized,
    Display,
}

fn check_t(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(param("t", format!("must be non-negative, got {t}")));
    }
    Ok(())
}

/// √(2U/(πt)) Σ_n sin((2n+1)πθ₀/α)/(2n+1) · e^{−z}[I_{(ν−1)/2}(z) + I_{(ν+1)/2}(z)],
/// z = U/(4t), ν = (2n+1)π/α.
fn series(t: f64, g: &ConeGeometry) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let z = g.u / (4.0 * t);
    let pref = (2.0 * g.u / (PI * t)).sqrt();
    let mut sum = 0.0;
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let k = (2 * n + 1) as f64;
        let nu = g.nu(n);
        let term = (k * PI * g.theta0 / g.alpha).sin() / k
            * (bessel_i_scaled((nu - 1.0) / 2.0, z) + bessel_i_scaled((nu + 1.0) / 2.0, z));
        sum += term;
        let past_peak = ((nu - 1.0) / 2.0).powi(2) > z;
        if past_peak && (pref * term).abs() < TERM_TOL {
            small += 1;
            if small == 3 {
                return Ok((pref * sum).clamp(0.0, 1.0));
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Unstable(format!("survival series did not settle after {MAX_TERMS} terms at t={t}")))
}

/// P[τ > t] for the driftless limit started at (x, y).
pub fn duration_survival(t: f64, x: f64, y: f64, d: impl Into<QuadrantDynamics>) -> Result<f64> {
    let d = d.into();
    check_t(t)?;
    if !d.is_driftless() {
        return Err(param("drift", "series needs zero drift; use duration_survival_drifted"));
    }
    series(t, &ConeGeometry::new(x, y, &d)?)
}

pub fn duration_survival_with(t: f64, x: f64, y: f64, p: &DiffusionParams, variant: SeriesVariant) -> Result<f64> {
    check_t(t)?;
    if p.vbar_bid != 0.0 || p.vbar_ask != 0.0 {
        return Err(param("drift", "series needs zero drift; use duration_survival_drifted"));
    }
    let g = match variant {
        SeriesVariant::Standardized => ConeGeometry::new(x, y, &p.dynamics())?,
        SeriesVariant::Display => cone_geometry_display(x, y, p)?,
    };
    series(t, &g)
}

/// Tail index π/(2α) of the driftless duration.
pub fn duration_tail_index(d: impl Into<QuadrantDynamics>) -> f64 {
    PI / (2.0 * cone_alpha(d.into().rho))
}

/// Coefficients of the change of measure removing the drift:
/// P[τ > t] = e^{a·x + a_t t} E[e^{d·(Z_t − z₀)}; τ > t] under the driftless law,
/// with `a = −Σ⁻¹μ`, `a_t = −μᵀΣ⁻¹μ/2` and `d` the drift in wedge coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftedDurationParams {
    pub a1: f64,
    pub a2: f64,
    pub a_t: f64,
    pub d1: f64,
    pub d2: f64,
}

impl DriftedDurationParams {
    pub fn new(d: &QuadrantDynamics) -> Result<Self> {
        d.validate()?;
        let [mb, ma] = d.drift;
        let [sb, sa] = d.sd;
        let rho = d.rho;
        let c = (1.0 - rho * rho).sqrt();
        let (ub, ua) = (mb / sb, ma / sa);
        let d1 = (ub - rho * ua) / c;
        let d2 = ua;
        // Σ⁻¹μ in original units
        let w1 = (ub - rho * ua) / (c * c * sb);
        let w2 = (ua - rho * ub) / (c * c * sa);
        Ok(DriftedDurationParams { a1: -w1, a2: -w2, a_t: -0.5 * (d1 * d1 + d2 * d2), d1, d2 })
    }

    pub fn is_zero(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0
    }
}

/// Angular weight in the drifted expansion. `Angle` integrates sin(nπθ/α);
/// `Literal` uses the constant sin(nπ/α) as printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSine {
    #[default]
    Angle,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftedSurvival {
    pub value: f64,
    /// Before clamping to [0, 1].
    pub raw: f64,
    pub clamped: bool,
    pub error_bound: f64,
    pub terms: usize,
    pub coefficients: DriftedDurationParams,
}

pub fn duration_survival_drifted(t: f64, x: f64, y: f64, d: impl Into<QuadrantDynamics>) -> Result<DriftedSurvival> {
    duration_survival_drifted_with(t, x, y, d, InnerSine::Angle)
}

/// Survival of the drifted limit via the wedge heat kernel:
/// (2/(αt)) Σ_{n≥1} sin(nπθ₀/α) ∫∫ r e^{−(r²+r₀²)/(2t)} I_{nπ/α}(r r₀/t)
/// sin(nπθ/α) e^{d·(r e_θ − z₀) − |d|²t/2} dθ dr.
pub fn duration_survival_drifted_with(
    t: f64,
    x: f64,
    y: f64,
    d: impl Into<QuadrantDynamics>,
    inner: InnerSine,
) -> Result<DriftedSurvival> {
    let d = d.into();
    check_t(t)?;
    let g = ConeGeometry::new(x, y, &d)?;
    let co = DriftedDurationParams::new(&d)?;
    let done = |v: f64, terms| DriftedSurvival { value: v, raw: v, clamped: false, error_bound: 0.0, terms, coefficients: co };
    if t == 0.0 {
        return Ok(done(1.0, 0));
    }
    if t.is_infinite() {
        return Ok(done(0.0, 0));
    }
    let (alpha, r0, th0) = (g.alpha, g.r0, g.theta0);
    let m = [co.d1, co.d2];
    let mn = m[0].hypot(m[1]);
    let [z1, z2] = g.cartesian();
    let shift = -(m[0] * z1 + m[1] * z2) - 0.5 * mn * mn * t;
    let st = t.sqrt();
    let lo = (r0 - mn * t - 12.0 * st).max(0.0);
    let hi = r0 + mn * t + 12.0 * st;
    let arg_max = hi * r0 / t;

    // ∫₀^α w_n(θ) e^{r (d·e_θ − |d|)} dθ
    let angular = |n: f64, r: f64| -> (f64, bool) {
        if mn == 0.0 {
            return match inner {
                InnerSine::Angle => (alpha / (n * PI) * (1.0 - (n * PI).cos()), true),
                InnerSine::Literal => ((n * PI / alpha).sin() * alpha, true),
            };
        }
        let e = |th: f64| (r * (m[0] * th.cos() + m[1] * th.sin() - mn)).exp();
        let q = match inner {
            InnerSine::Angle => gauss_kronrod(|th| (n * PI * th / alpha).sin() * e(th), 0.0, alpha, 1e-13, 1e-11, 400),
            InnerSine::Literal => {
                let q = gauss_kronrod(e, 0.0, alpha, 1e-13, 1e-11, 400);
                crate::special::Quadrature { value: q.value * (n * PI / alpha).sin(), ..q }
            }
        };
        (q.value, q.converged)
    };

    let mut sum = 0.0;
    let mut bound = 0.0;
    let mut small = 0;
    for k in 1..MAX_TERMS {
        let n = k as f64;
        let nu = n * PI / alpha;
        let outer = (n * PI * th0 / alpha).sin();
        let mut inner_ok = true;
        let q = gauss_kronrod(
            |r| {
                if r <= 0.0 {
                    return 0.0;
                }
                let (h, ok) = angular(n, r);
                inner_ok &= ok;
                let ex = -(r - r0).powi(2) / (2.0 * t) + r * mn + shift;
                r * ex.exp() * bessel_i_scaled(nu, r * r0 / t) * h
            },
            lo,
            hi,
            1e-13,
            1e-10,
            2000,
        );
        let c = 2.0 / (alpha * t);
        let term = c * outer * q.value;
        if !q.converged || !inner_ok {
            return Err(Error::Quadrature { value: c * (sum + outer * q.value), bound: c * (bound + q.error) });
        }
        sum += outer * q.value;
        bound += (outer * q.error).abs();
        if nu * nu > arg_max && term.abs() < TERM_TOL {
            small += 1;
            if small == 3 {
                let raw = c * sum;
                let value = raw.clamp(0.0, 1.0);
                return Ok(DriftedSurvival {
                    value,
                    raw,
                    clamped: value != raw,
                    error_bound: c * bound,
                    terms: k,
                    coefficients: co,
                });
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Unstable(format!("drifted expansion did not settle at t={t}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{exit_times_mc, HitConfig};
    use statrs::function::erf::erf;

    fn unit(rho: f64) -> QuadrantDynamics {
        QuadrantDynamics::driftless([1.0, 1.0], rho).unwrap()
    }

    #[test]
    fn independent_queues_factorize() {
        // each coordinate survives independently: erf(x/√(2t)) erf(y/√(2t))
        for &(x, y) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 0.2)] {
            for &t in &[0.01, 0.1, 1.0, 10.0, 1000.0] {
                let s = duration_survival(t, x, y, unit(0.0)).unwrap();
                let e = erf(x / (2.0 * t).sqrt()) * erf(y / (2.0 * t).sqrt());
                assert!((s - e).abs() < 1e-9, "t={t} {s} {e}");
            }
        }
    }

    #[test]
    fn scales_enter_through_standardized_sizes() {
        let d = QuadrantDynamics::driftless([2.0, 0.5], 0.0).unwrap();
        let s = duration_survival(0.7, 1.0, 1.0, d).unwrap();
        let e = erf(0.5 / 1.4f64.sqrt()) * erf(2.0 / 1.4f64.sqrt());
        assert!((s - e).abs() < 1e-9);
    }

    #[test]
    fn limits_and_monotonicity() {
        for rho in [-0.7, 0.0, 0.5] {
            let d = unit(rho);
            assert_eq!(duration_survival(0.0, 1.0, 1.0, d).unwrap(), 1.0);
            assert!(duration_survival(1e-4, 1.0, 1.0, d).unwrap() > 1.0 - 1e-8);
            let mut prev = 1.0;
            for k in -3..8 {
                let s = duration_survival(10f64.powi(k), 1.0, 2.0, d).unwrap();
                assert!(s <= prev + 1e-9 && s >= 0.0, "{s} {prev}");
                prev = s;
            }
            assert!(prev < 0.05);
        }
    }

    #[test]
    fn long_time_slope_is_the_tail_index() {
        for rho in [-0.7, 0.0, 0.5] {
            let d = unit(rho);
            let (t1, t2) = (1e5, 1e7);
            let s1 = duration_survival(t1, 1.0, 1.0, d).unwrap();
            let s2 = duration_survival(t2, 1.0, 1.0, d).unwrap();
            let slope = (s2.ln() - s1.ln()) / (t2.ln() - t1.ln());
            let want = -duration_tail_index(d);
            assert!((slope - want).abs() < 1e-3 * want.abs(), "{rho}: {slope} {want}");
        }
    }

    #[test]
    fn tail_index_values() {
        assert!((duration_tail_index(unit(0.0)) - 1.0).abs() < 1e-15);
        let v = duration_tail_index(unit(-0.7));
        assert!((v - 2.0).abs() < 0.1, "{v}");
        assert!(duration_tail_index(unit(-0.2)) > 1.0);
        assert!(duration_tail_index(unit(0.2)) < 1.0);
        let mut prev = f64::INFINITY;
        for k in -99..100 {
            let v = duration_tail_index(unit(k as f64 / 100.0));
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn drift_rejected_by_series() {
        let d = QuadrantDynamics::new([-0.1, 0.0], [1.0, 1.0], 0.0).unwrap();
        assert!(duration_survival(1.0, 1.0, 1.0, d).is_err());
        assert!(duration_survival(-1.0, 1.0, 1.0, unit(0.0)).is_err());
    }

    #[test]
    fn display_variant_differs_from_standardized() {
        let p = DiffusionParams { lambda_bid: 2.0, lambda_ask: 1.0, vbar_bid: 0.0, vbar_ask: 0.0, v2_bid: 1.0, v2_ask: 3.0, rho: -0.5 };
        let a = duration_survival_with(1.0, 1.0, 1.0, &p, SeriesVariant::Standardized).unwrap();
        let b = duration_survival_with(1.0, 1.0, 1.0, &p, SeriesVariant::Display).unwrap();
        assert!((a - duration_survival(1.0, 1.0, 1.0, &p).unwrap()).abs() < 1e-15);
        assert!((a - b).abs() > 0.05, "{a} {b}");
    }

    #[test]
    fn drifted_reduces_to_series_without_drift() {
        for rho in [-0.5, 0.0, 0.5] {
            for &(x, y) in &[(1.0, 1.0), (0.5, 1.5), (2.0, 1.0)] {
                for &t in &[0.1, 1.0, 5.0] {
                    let a = duration_survival(t, x, y, unit(rho)).unwrap();
                    let b = duration_survival_drifted(t, x, y, unit(rho)).unwrap();
                    assert!((a - b.value).abs() < 1e-6, "{rho} {x} {y} {t}: {a} {}", b.value);
                }
            }
        }
    }

    #[test]
    fn girsanov_coefficients() {
        let d = QuadrantDynamics::new([-0.4, 0.3], [1.5, 0.7], -0.3).unwrap();
        let c = DriftedDurationParams::new(&d).unwrap();
        let s = d.cov();
        let det = s[0][0] * s[1][1] - s[0][1] * s[0][1];
        let inv = [[s[1][1] / det, -s[0][1] / det], [-s[0][1] / det, s[0][0] / det]];
        let w = [inv[0][0] * -0.4 + inv[0][1] * 0.3, inv[1][0] * -0.4 + inv[1][1] * 0.3];
        assert!((c.a1 + w[0]).abs() < 1e-14 && (c.a2 + w[1]).abs() < 1e-14);
        assert!((c.a_t + 0.5 * (w[0] * -0.4 + w[1] * 0.3)).abs() < 1e-14);
        assert!(DriftedDurationParams::new(&unit(0.2)).unwrap().is_zero());
    }

    #[test]
    fn drifted_one_dimensional_check() {
        // ρ = 0: the coordinates decouple and each is a drifted Brownian
        // survival, 𝛷((x+μt)/√t) − e^{−2μx} 𝛷((−x+μt)/√t)
        use crate::stats::norm_cdf;
        let surv1 = |x: f64, mu: f64, t: f64| {
            let s = t.sqrt();
            norm_cdf((x + mu * t) / s) - (-2.0 * mu * x).exp() * norm_cdf((-x + mu * t) / s)
        };
        let d = QuadrantDynamics::new([-0.5, 0.3], [1.0, 1.0], 0.0).unwrap();
        for &t in &[0.2, 1.0, 3.0] {
            let got = duration_survival_drifted(t, 1.0, 1.5, d).unwrap();
            let want = surv1(1.0, -0.5, t) * surv1(1.5, 0.3, t);
            assert!((got.value - want).abs() < 1e-7, "t={t}: {} {want}", got.value);
        }
    }

    #[test]
    fn negative_drift_shortens_durations() {
        let base = duration_survival(1.0, 1.0, 1.0, unit(-0.3)).unwrap();
        let d = QuadrantDynamics::new([-0.8, -0.8], [1.0, 1.0], -0.3).unwrap();
        let s = duration_survival_drifted(1.0, 1.0, 1.0, d).unwrap();
        assert!(s.value < base - 0.05);
    }

    #[test]
    fn drifted_matches_monte_carlo() {
        let d = QuadrantDynamics::new([-0.3, -0.6], [1.0, 0.8], 0.4).unwrap();
        let paths = 40_000;
        let times = exit_times_mc(&d, [1.0, 0.9], paths, 2.0, &HitConfig::default(), 11).unwrap();
        for t in [0.3, 1.0, 2.0] {
            let p = times.iter().filter(|&&s| s > t).count() as f64 / paths as f64;
            let se = (p * (1.0 - p) / paths as f64).sqrt();
            let a = duration_survival_drifted(t, 1.0, 0.9, d).unwrap().value;
            assert!((a - p).abs() < 4.0 * se, "t={t}: {a} {p} ± {se}");
        }
    }

    #[test]
    fn literal_inner_sine_is_off() {
        let d = QuadrantDynamics::new([-0.3, -0.6], [1.0, 1.0], 0.0).unwrap();
        let a = duration_survival_drifted(1.0, 1.0, 1.0, d).unwrap();
        let b = duration_survival_drifted_with(1.0, 1.0, 1.0, d, InnerSine::Literal).unwrap();
        assert!((a.raw - b.raw).abs() > 0.01, "{a:?} {b:?}");
    }
}
