use crate::diffusion::{exit_side_mc, HitConfig, QuadrantDynamics};
use crate::error::{param, Result};
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbUpMethod {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbUp {
    pub value: f64,
    /// Zero for the closed form.
    pub std_error: f64,
    pub method: ProbUpMethod,
    pub paths: u64,
}

fn check(x: f64, y: f64) -> Result<Option<f64>> {
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(param("queue", format!("sizes must be finite and non-negative, got ({x}, {y})")));
    }
    Ok(match (x > 0.0, y > 0.0) {
        (true, true) => None,
        (true, false) => Some(1.0),
        (false, true) => Some(0.0),
        (false, false) => return Err(param("queue", "both queues empty")),
    })
}

/// Driftless probability that the ask queue empties first:
/// 1/2 − arctan(k (w − u)/(w + u)) / (2 arctan k), k = √((1+ρ)/(1−ρ)),
/// with u, w the queues in units of their own standard deviation.
pub fn prob_up_closed(x: f64, y: f64, d: &QuadrantDynamics) -> Result<f64> {
    d.validate()?;
    if !d.is_driftless() {
        return Err(param("drift", "closed form needs zero drift"));
    }
    if let Some(v) = check(x, y)? {
        return Ok(v);
    }
    let (u, w) = (x / d.sd[0], y / d.sd[1]);
    let k = ((1.0 + d.rho) / (1.0 - d.rho)).sqrt();
    Ok((0.5 - (k * (w - u) / (w + u)).atan() / (2.0 * k.atan())).clamp(0.0, 1.0))
}

/// Same quantity through the rotation angle β = arcsin(ρ)/2.
pub fn prob_up_arcsin(x: f64, y: f64, d: &QuadrantDynamics) -> Result<f64> {
    d.validate()?;
    if !d.is_driftless() {
        return Err(param("drift", "closed form needs zero drift"));
    }
    if let Some(v) = check(x, y)? {
        return Ok(v);
    }
    let (u, w) = (x / d.sd[0], y / d.sd[1]);
    let asr = d.rho.asin();
    let beta = asr / 2.0;
    let th = (w / u).atan();
    let phi = (th - beta).sin().atan2((beta + th).cos());
    Ok(((FRAC_PI_2 + asr / 2.0 - phi) / (FRAC_PI_2 + asr)).clamp(0.0, 1.0))
}

/// Closed form when driftless; otherwise first-hit Monte Carlo with
/// `paths` bridge-corrected paths.
pub fn prob_up_with(x: f64, y: f64, d: impl Into<QuadrantDynamics>, paths: u64, seed: u64) -> Result<ProbUp> {
    let d = d.into();
    d.validate()?;
    if d.is_driftless() {
        return Ok(ProbUp { value: prob_up_closed(x, y, &d)?, std_error: 0.0, method: ProbUpMethod::ClosedForm, paths: 0 });
    }
    if let Some(v) = check(x, y)? {
        return Ok(ProbUp { value: v, std_error: 0.0, method: ProbUpMethod::ClosedForm, paths: 0 });
    }
    let est = exit_side_mc(&d, [x, y], paths, &HitConfig::default(), seed)?;
    Ok(ProbUp { value: est.p_up, std_error: est.std_error, method: ProbUpMethod::MonteCarlo, paths })
}

pub fn prob_up(x: f64, y: f64, d: impl Into<QuadrantDynamics>) -> Result<ProbUp> {
    prob_up_with(x, y, d, 100_000, 0)
}

/// 1 − θ₀/α, the harmonic measure of the ask axis seen from the start point.
#[cfg(test)]
fn prob_up_wedge(x: f64, y: f64, d: &QuadrantDynamics) -> f64 {
    let g = super::geometry::ConeGeometry::new(x, y, d).unwrap();
    1.0 - g.theta0 / g.alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dd(sd: [f64; 2], rho: f64) -> QuadrantDynamics {
        QuadrantDynamics::driftless(sd, rho).unwrap()
    }

    #[test]
    fn independent_queues() {
        let d = dd([1.0, 1.0], 0.0);
        assert!((prob_up_closed(1.0, 1.0, &d).unwrap() - 0.5).abs() < 1e-15);
        // the smaller queue is the likelier to empty first
        assert!((prob_up_closed(3f64.sqrt(), 1.0, &d).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((prob_up_closed(1.0, 3f64.sqrt(), &d).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        for (x, y) in [(0.3, 2.0), (5.0, 1.0)] {
            let v = prob_up_closed(x, y, &d).unwrap();
            assert!((v - 2.0 / std::f64::consts::PI * (x / y).atan()).abs() < 1e-14);
        }
    }

    #[test]
    fn frozen_negative_correlation_value() {
        let d = dd([1.0, 1.0], -0.7);
        assert!((prob_up_closed(1.0, 2.0, &d).unwrap() - 0.32508974606463786).abs() < 1e-14);
    }

    #[test]
    fn boundary_values() {
        let d = dd([1.0, 2.0], 0.3);
        assert_eq!(prob_up_closed(1.0, 0.0, &d).unwrap(), 1.0);
        assert_eq!(prob_up_closed(0.0, 1.0, &d).unwrap(), 0.0);
        assert!(prob_up_closed(-1.0, 1.0, &d).is_err());
        assert!(prob_up_closed(0.0, 0.0, &d).is_err());
        assert!(prob_up_closed(1e-12, 1.0, &d).unwrap() < 1e-6);
        assert!(prob_up_closed(1.0, 1e-12, &d).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn drift_falls_back_to_monte_carlo() {
        let d = QuadrantDynamics::new([0.0, -0.5], [1.0, 1.0], 0.0).unwrap();
        assert!(prob_up_closed(1.0, 1.0, &d).is_err());
        let p = prob_up_with(1.0, 1.0, d, 20_000, 3).unwrap();
        assert_eq!(p.method, ProbUpMethod::MonteCarlo);
        // the ask drains toward zero, so it empties first more often
        assert!(p.value > 0.5 + 3.0 * p.std_error, "{p:?}");
    }

    proptest! {
        #[test]
        fn three_forms_agree(x in 0.01f64..50.0, y in 0.01f64..50.0, rho in -0.99f64..0.99,
                             sb in 0.1f64..5.0, sa in 0.1f64..5.0) {
            let d = dd([sb, sa], rho);
            let a = prob_up_closed(x, y, &d).unwrap();
            let b = prob_up_arcsin(x, y, &d).unwrap();
            let c = prob_up_wedge(x, y, &d);
            prop_assert!((a - b).abs() < 1e-10, "{} {}", a, b);
            prop_assert!((a - c).abs() < 1e-10, "{} {}", a, c);
        }

        #[test]
        fn monotone_and_scale_free(x in 0.05f64..20.0, y in 0.05f64..20.0, rho in -0.95f64..0.95,
                                   c in 0.01f64..100.0) {
            let d = dd([1.3, 0.6], rho);
            let p = prob_up_closed(x, y, &d).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(prob_up_closed(x, y * 1.1, &d).unwrap() < p);
            prop_assert!(prob_up_closed(x * 1.1, y, &d).unwrap() > p);
            prop_assert!((prob_up_closed(c * x, c * y, &d).unwrap() - p).abs() < 1e-12);
        }

        #[test]
        fn balanced_start_is_even(x in 0.01f64..100.0, rho in -0.99f64..0.99) {
            let d = dd([1.0, 1.0], rho);
            prop_assert!((prob_up_closed(x, x, &d).unwrap() - 0.5).abs() < 1e-14);
        }
    }
}
