use serde::{Deserialize, Serialize};

use crate::discretization::{FaceRule, Grid, IndicatorRule, TraceRule};
use crate::geometry::Shape;
use crate::{Error, Result};

/// Time integrator for the Cauchy problem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    /// Unconditionally monotone; first order in time.
    #[default]
    BackwardEuler,
    /// Two backward-Euler half steps, then Crank–Nicolson.
    CnRannacher,
}

/// A complete problem instance: shape, conductivities, grid and time data.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub shape: Shape,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub grid: Grid,
    pub horizon: f64,
    /// Nominal time step; the run uses `T / ceil(T/dt)`.
    pub dt: f64,
    pub scheme: TimeScheme,
    pub face_rule: FaceRule,
    pub indicator: IndicatorRule,
    pub trace_rule: TraceRule,
    pub samples_per_component: usize,
    pub linear_tol: f64,
    /// Keep every time level (needed for the time transform) or only the last.
    pub store_fields: bool,
}

impl Scenario {
    /// Validated scenario with default numerics (`dt = h` if `dt` is `None`).
    pub fn new(
        shape: Shape,
        sigma_plus: f64,
        sigma_minus: f64,
        grid: Grid,
        horizon: f64,
        dt: Option<f64>,
    ) -> Result<Self> {
        let dt = dt.unwrap_or(grid.h());
        let sc = Self {
            shape,
            sigma_plus,
            sigma_minus,
            grid,
            horizon,
            dt,
            scheme: TimeScheme::default(),
            face_rule: FaceRule::default(),
            indicator: IndicatorRule::default(),
            trace_rule: TraceRule::default(),
            samples_per_component: 256,
            linear_tol: 1e-12,
            store_fields: true,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidScenario(format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.sigma_plus, "sigma_plus")?;
        positive(self.sigma_minus, "sigma_minus")?;
        positive(self.horizon, "time horizon")?;
        positive(self.dt, "time step")?;
        positive(self.linear_tol, "linear tolerance")?;
        if !self.grid.contains_ball(self.shape.bounding_radius()) {
            return Err(Error::InvalidScenario(format!(
                "box half-width {} does not contain the shape's bounding radius {}",
                self.grid.half_width(),
                self.shape.bounding_radius()
            )));
        }
        if self.samples_per_component < 8 {
            return Err(Error::InvalidScenario("at least 8 interface samples per component are required".into()));
        }
        Ok(())
    }

    pub fn with_scheme(mut self, scheme: TimeScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_face_rule(mut self, rule: FaceRule) -> Self {
        self.face_rule = rule;
        self
    }

    pub fn with_indicator(mut self, rule: IndicatorRule) -> Self {
        self.indicator = rule;
        self
    }

    pub fn with_trace_rule(mut self, rule: TraceRule) -> Self {
        self.trace_rule = rule;
        self
    }

    pub fn with_samples(mut self, per_component: usize) -> Self {
        self.samples_per_component = per_component;
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// One-phase degeneracy (`σ+ = σ−`): allowed, but worth a warning.
    pub fn is_one_phase(&self) -> bool {
        self.sigma_plus == self.sigma_minus
    }

    /// Number of steps and the step actually used.
    pub fn steps(&self) -> (usize, f64) {
        let k = ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (k, self.horizon / k as f64)
    }

    /// Gaussian-bound surrogate for the box adequacy at target `epsilon`.
    pub fn truncation_check(&self, epsilon: f64) -> TruncationCheck {
        let lambda_hat = default_lambda_hat(self.sigma_plus, self.sigma_minus);
        let required = truncation_box(&self.shape, self.horizon, lambda_hat, epsilon);
        TruncationCheck {
            lambda_hat,
            epsilon,
            required_half_width: required,
            half_width: self.grid.half_width(),
            adequate: self.grid.half_width() >= required,
        }
    }
}

/// Outcome of comparing the box with [`truncation_box`].
#[derive(Clone, Debug, Serialize)]
pub struct TruncationCheck {
    pub lambda_hat: f64,
    pub epsilon: f64,
    pub required_half_width: f64,
    pub half_width: f64,
    pub adequate: bool,
}

/// Surrogate Gaussian-bound constant `Λ̂ = 4·max(σ±)`.
pub fn default_lambda_hat(sigma_plus: f64, sigma_minus: f64) -> f64 {
    4.0 * sigma_plus.max(sigma_minus)
}

/// Smallest half-width `L` with `|Ω|·Λ̂·T^{−N/2}·exp(−d²/(Λ̂T)) ≤ ε`, `d = L − R_Ω`.
///
/// `N = 2` here. When the prefactor is already below `ε`, `d = 0`.
pub fn truncation_box(shape: &Shape, horizon: f64, lambda_hat: f64, epsilon: f64) -> f64 {
    shape.bounding_radius() + truncation_distance(shape.area(), horizon, lambda_hat, epsilon)
}

/// The distance `d` of [`truncation_box`].
pub fn truncation_distance(area: f64, horizon: f64, lambda_hat: f64, epsilon: f64) -> f64 {
    assert!(lambda_hat > 0.0 && epsilon > 0.0 && horizon > 0.0);
    let ratio = area * lambda_hat / horizon / epsilon;
    if ratio <= 1.0 {
        0.0
    } else {
        (lambda_hat * horizon * ratio.ln()).sqrt()
    }
}

/// Gaussian-bound heat estimate at distance `d` (the left side of the inequality).
pub fn truncation_bound(area: f64, horizon: f64, lambda_hat: f64, d: f64) -> f64 {
    area * lambda_hat / horizon * (-d * d / (lambda_hat * horizon)).exp()
}
