use crate::diffusion::{DiffusionParams, QuadrantDynamics};
use crate::error::{ensure, Error, Result};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Start point of the limit process seen in the coordinates where it is a
/// standard planar Brownian motion in a wedge of opening `alpha`. The ask
/// axis sits at angle 0, the bid axis at angle `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeGeometry {
    pub alpha: f64,
    pub theta0: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub r0: f64,
}

impl ConeGeometry {
    /// Geometry of `(x, y)` under the given dynamics (drift ignored).
    pub fn new(x: f64, y: f64, d: &QuadrantDynamics) -> Result<Self> {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::NotInterior(x, y));
        }
        d.validate()?;
        let (u, w) = (x / d.sd[0], y / d.sd[1]);
        let rho = d.rho;
        let c = 1.0 - rho * rho;
        let uu = (u * u + w * w - 2.0 * rho * u * w) / c;
        Ok(ConeGeometry {
            alpha: cone_alpha(rho),
            theta0: (w * c.sqrt()).atan2(u - rho * w),
            u: uu,
            r0: uu.sqrt(),
        })
    }

    /// Order of the n-th Bessel term in the survival series, (2n+1)π/α.
    pub fn nu(&self, n: usize) -> f64 {
        (2 * n + 1) as f64 * PI / self.alpha
    }

    /// Start point in the wedge's Cartesian coordinates.
    pub fn cartesian(&self) -> [f64; 2] {
        [self.r0 * self.theta0.cos(), self.r0 * self.theta0.sin()]
    }
}

/// Opening angle arccos(−ρ).
pub fn cone_alpha(rho: f64) -> f64 {
    (-rho).acos()
}

pub fn cone_geometry(x: f64, y: f64, params: &DiffusionParams) -> Result<ConeGeometry> {
    ConeGeometry::new(x, y, &params.dynamics())
}

/// The printed three-branch formulas and squared-radius display, evaluated
/// literally on raw queue sizes. Kept for comparison only: θ₀ comes out
/// negative whenever x > ρy, and U mixes the bid size with ask parameters.
pub fn cone_geometry_display(x: f64, y: f64, p: &DiffusionParams) -> Result<ConeGeometry> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::NotInterior(x, y));
    }
    p.validate()?;
    let rho = p.rho;
    let sq = (1.0 - rho * rho).sqrt();
    let alpha = if rho > 0.0 {
        PI + (-sq / rho).atan()
    } else if rho == 0.0 {
        FRAC_PI_2
    } else {
        (-sq / rho).atan()
    };
    let theta0 = if x < rho * y {
        PI + (-y * sq / (x - rho * y)).atan()
    } else if x == rho * y {
        FRAC_PI_2
    } else {
        (-y * sq / (x - rho * y)).atan()
    };
    let ka = p.lambda_ask * p.v2_ask;
    let kb = p.lambda_bid * p.v2_bid;
    let u = ((x / ka).powi(2) + (y / kb).powi(2) - 2.0 * rho * x * y / (ka * kb)) / (1.0 - rho);
    ensure(u >= 0.0, "U", "printed quadratic form is negative here")?;
    Ok(ConeGeometry { alpha, theta0, u, r0: u.sqrt() })
}
