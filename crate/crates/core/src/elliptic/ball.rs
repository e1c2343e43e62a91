use serde::Serialize;

use super::bessel::{i0e, i1e, k0e, k1e};
use crate::{Error, Result};

/// Closed-form transmission solution for `Ω` a ball of radius `R`.
///
/// With `s± = √σ±`:
/// - N = 2: `v⁺ = 1 + A·I₀(r/s+)`, `v⁻ = B·K₀(r/s−)`;
/// - N = 3: `v⁺ = 1 + A·sinh(r/s+)/r`, `v⁻ = B·e^{−r/s−}/r`.
///
/// Internally the radial profiles are normalized to 1 at `r = R`
/// (`v⁺ = 1 + α φ(r)`, `v⁻ = β ψ(r)`), which keeps large arguments finite;
/// then `a* = β`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialBallSolution {
    pub radius: f64,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub dimension: u32,
    /// Coefficient of the unnormalized interior profile.
    pub a: f64,
    /// Coefficient of the unnormalized exterior profile.
    pub b: f64,
    pub a_star_exact: f64,
    #[serde(skip)]
    alpha: f64,
    #[serde(skip)]
    beta: f64,
}

/// Exact radial solution of the transmission problem for a ball.
pub fn exact_ball_v(radius: f64, sigma_plus: f64, sigma_minus: f64, dimension: u32) -> Result<RadialBallSolution> {
    if !(radius > 0.0 && sigma_plus > 0.0 && sigma_minus > 0.0) || !(dimension == 2 || dimension == 3) {
        return Err(Error::InvalidScenario(format!(
            "exact ball solution needs R, σ± > 0 and N ∈ {{2, 3}} (R={radius}, σ+={sigma_plus}, σ−={sigma_minus}, N={dimension})"
        )));
    }
    let (sp, sm) = (sigma_plus.sqrt(), sigma_minus.sqrt());
    let (a_arg, b_arg) = (radius / sp, radius / sm);
    // φ'(R), ψ'(R) of the normalized profiles
    let (dphi, dpsi) = match dimension {
        2 => (i1e(a_arg) / (sp * i0e(a_arg)), -k1e(b_arg) / (sm * k0e(b_arg))),
        _ => (1.0 / (sp * a_arg.tanh()) - 1.0 / radius, -1.0 / sm - 1.0 / radius),
    };
    // 1 + α = β and σ+ α φ' = σ− β ψ'
    let det = sigma_plus * dphi - sigma_minus * dpsi;
    if !(det.is_finite() && det.abs() > 1e-300) {
        return Err(Error::SingularMatching(det));
    }
    let beta = sigma_plus * dphi / det;
    let alpha = beta - 1.0;
    let (a, b) = match dimension {
        2 => (alpha / (i0e(a_arg) * a_arg.exp()), beta / (k0e(b_arg) * (-b_arg).exp())),
        _ => (alpha * radius / a_arg.sinh(), beta * radius * b_arg.exp()),
    };
    Ok(RadialBallSolution { radius, sigma_plus, sigma_minus, dimension, a, b, a_star_exact: beta, alpha, beta })
}

impl RadialBallSolution {
    /// Interior profile `φ(r)` with `φ(R) = 1`.
    fn phi(&self, r: f64) -> (f64, f64) {
        let sp = self.sigma_plus.sqrt();
        let (x, xr) = (r / sp, self.radius / sp);
        match self.dimension {
            2 => {
                let scale = (x - xr).exp() / i0e(xr);
                (i0e(x) * scale, i1e(x) * scale / sp)
            }
            _ => {
                if r < 1e-8 * self.radius {
                    let v = self.radius / (sp * xr.sinh());
                    return (v, 0.0);
                }
                let norm = self.radius / xr.sinh();
                let f = x.sinh() / r;
                let df = x.cosh() / (sp * r) - x.sinh() / (r * r);
                (f * norm, df * norm)
            }
        }
    }

    /// Exterior profile `ψ(r)` with `ψ(R) = 1`.
    fn psi(&self, r: f64) -> (f64, f64) {
        let sm = self.sigma_minus.sqrt();
        let (x, xr) = (r / sm, self.radius / sm);
        let decay = (xr - x).exp();
        match self.dimension {
            2 => {
                let scale = decay / k0e(xr);
                (k0e(x) * scale, -k1e(x) * scale / sm)
            }
            _ => {
                let f = decay * self.radius / r;
                (f, -f * (1.0 / sm + 1.0 / r))
            }
        }
    }

    /// `v(r)`, using the interior branch for `r < R`.
    pub fn value(&self, r: f64) -> f64 {
        if r < self.radius {
            self.inside(r)
        } else {
            self.outside(r)
        }
    }

    pub fn inside(&self, r: f64) -> f64 {
        1.0 + self.alpha * self.phi(r).0
    }

    pub fn outside(&self, r: f64) -> f64 {
        self.beta * self.psi(r).0
    }

    /// `dv⁺/dr`.
    pub fn inside_slope(&self, r: f64) -> f64 {
        self.alpha * self.phi(r).1
    }

    /// `dv⁻/dr`.
    pub fn outside_slope(&self, r: f64) -> f64 {
        self.beta * self.psi(r).1
    }

    /// Second radial derivative on either side, from the ODE
    /// `σ(v'' + (N−1)v'/r) = v − f`.
    pub fn curvature(&self, r: f64, inside: bool) -> f64 {
        let n1 = (self.dimension - 1) as f64;
        if inside {
            (self.inside(r) - 1.0) / self.sigma_plus - n1 * self.inside_slope(r) / r
        } else {
            self.outside(r) / self.sigma_minus - n1 * self.outside_slope(r) / r
        }
    }

    /// `(v⁺(R) − v⁻(R), σ+v⁺'(R) − σ−v⁻'(R))`.
    pub fn interface_residuals(&self) -> (f64, f64) {
        let r = self.radius;
        (
            self.inside(r) - self.outside(r),
            self.sigma_plus * self.inside_slope(r) - self.sigma_minus * self.outside_slope(r),
        )
    }
}
