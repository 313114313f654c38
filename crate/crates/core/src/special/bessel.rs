//! Modified Bessel function of the first kind for real order ν ≥ 0,
//! returned exponentially scaled: `e^{-x} I_ν(x)`.
//!
//! Three regimes: ascending series (small x or ν² large against x),
//! Hankel expansion (x large, ν² ≤ 2x), Debye expansion (ν ≥ 30).

use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

const HANKEL_MIN_X: f64 = 30.0;
const DEBYE_MIN_NU: f64 = 30.0;

pub fn bessel_i_scaled(nu: f64, x: f64) -> f64 {
    debug_assert!(nu >= 0.0 && x >= 0.0);
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x >= HANKEL_MIN_X && nu * nu <= 2.0 * x {
        hankel(nu, x)
    } else if nu >= DEBYE_MIN_NU && x >= 1.0 {
        debye(nu, x)
    } else {
        series(nu, x)
    }
}

pub fn bessel_i(nu: f64, x: f64) -> f64 {
    bessel_i_scaled(nu, x) * x.exp()
}

fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let log0 = nu * half.ln() - ln_gamma(nu + 1.0) - x;
    if log0 < -745.0 && nu > x {
        // leading term dominates and already underflows
        return 0.0;
    }
    // accumulate relative to the leading term, rescale at the end
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term < 1e-17 * sum && k > half {
            break;
        }
        if k > 1e6 {
            break;
        }
    }
    (log0 + sum.ln()).exp()
}

fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (kf * 8.0 * x);
        let a = term.abs();
        if a > prev {
            // asymptotic series started to diverge
            break;
        }
        sum += term;
        prev = a;
        if a < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

fn debye(nu: f64, x: f64) -> f64 {
    let z = x / nu;
    let s = (1.0 + z * z).sqrt();
    let p = 1.0 / s;
    let eta = s + (z / (1.0 + s)).ln();
    let p2 = p * p;
    let u1 = p * (3.0 - 5.0 * p2) / 24.0;
    let u2 = p2 * (81.0 - 462.0 * p2 + 385.0 * p2 * p2) / 1152.0;
    let u3 = p * p2
        * (30375.0 - 369603.0 * p2 + 765765.0 * p2 * p2 - 425425.0 * p2 * p2 * p2)
        / 414720.0;
    let u4 = p2
        * p2
        * (4465125.0 - 94121676.0 * p2 + 349922430.0 * p2.powi(2) - 446185740.0 * p2.powi(3)
            + 185910725.0 * p2.powi(4))
        / 39813120.0;
    let u5 = p
        * p2.powi(2)
        * (1519035525.0 - 49286948607.0 * p2 + 284499769554.0 * p2.powi(2)
            - 614135872350.0 * p2.powi(3)
            + 566098157625.0 * p2.powi(4)
            - 188699385875.0 * p2.powi(5))
        / 6688604160.0;
    let inv = 1.0 / nu;
    let corr = 1.0 + inv * (u1 + inv * (u2 + inv * (u3 + inv * (u4 + inv * u5))));
    (nu * eta - x).exp() * corr / ((2.0 * PI * nu).sqrt() * s.sqrt())
}
