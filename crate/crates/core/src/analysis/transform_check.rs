use serde::Serialize;

use crate::discretization::Grid;
use crate::elliptic::{laplace_of_trajectory, solve_transmission};
use crate::parabolic::{solve_cauchy, Scenario, TimeScheme};
use crate::{Error, Result};

/// Agreement of the transformed parabolic trajectory with the elliptic solve.
#[derive(Clone, Debug, Serialize)]
pub struct TransformCheck {
    pub horizon: f64,
    pub resolution: usize,
    pub dt: f64,
    /// `‖v̂ − v_h‖∞` with `v̂` extrapolated in `dt` from the runs at `dt` and `dt/2`.
    pub error: f64,
    /// `‖v̂_{dt} − v_h‖∞` without extrapolation (for reference).
    pub error_unextrapolated: f64,
    /// Time-quadrature term `‖v̂_{dt} − v̂_{dt/2}‖∞`.
    pub eps_quad: f64,
    /// Tail term `e^{−T}` (the tail integral lies in `[0, e^{−T}]`).
    pub eps_tail: f64,
    /// Spatial term `‖R v_h(n) − v_h(n/2)‖∞` with `R` the 2×2 average.
    pub eps_h: f64,
    /// `eps_quad + eps_tail + 2·eps_h`.
    pub budget: f64,
    pub passed: bool,
}

/// Checks `v = ∫₀^∞ e^{−t} u dt` on the discrete level.
///
/// Two backward-Euler runs (steps `dt` and `dt/2`, the scenario's scheme is
/// ignored) are transformed with the trapezoid rule and combined by
/// Richardson extrapolation; the result is compared with the transmission
/// solve on the same grid. The resolution must be even.
pub fn transform_check(scenario: &Scenario) -> Result<TransformCheck> {
    let grid = scenario.grid;
    if !grid.n().is_multiple_of(2) {
        return Err(Error::InvalidScenario("the transform check needs an even resolution".into()));
    }
    let base = Scenario { store_fields: true, ..scenario.clone() }.with_scheme(TimeScheme::BackwardEuler);
    let (_, dt) = base.steps();
    let coarse_dt = laplace_of_trajectory(&solve_cauchy(&base.clone().with_dt(dt))?)?;
    let fine_dt = laplace_of_trajectory(&solve_cauchy(&base.clone().with_dt(0.5 * dt))?)?;
    let elliptic = solve_transmission(scenario)?;
    let coarse_grid = Grid::new(grid.n() / 2, grid.half_width())?;
    let elliptic_coarse = solve_transmission(&scenario.clone().with_grid(coarse_grid))?;

    let v = &elliptic.field.values;
    let mut error = 0.0f64;
    let mut error_unextrapolated = 0.0f64;
    let mut eps_quad = 0.0f64;
    for k in 0..v.len() {
        let (a, b) = (coarse_dt.field.values[k], fine_dt.field.values[k]);
        error = error.max((2.0 * b - a - v[k]).abs());
        error_unextrapolated = error_unextrapolated.max((a - v[k]).abs());
        eps_quad = eps_quad.max((a - b).abs());
    }
    let eps_h = elliptic.field.restrict()?.max_abs_diff(&elliptic_coarse.field);
    let eps_tail = coarse_dt.tail.upper;
    let budget = eps_quad + eps_tail + 2.0 * eps_h;
    Ok(TransformCheck {
        horizon: coarse_dt.horizon,
        resolution: grid.n(),
        dt,
        error,
        error_unextrapolated,
        eps_quad,
        eps_tail,
        eps_h,
        budget,
        passed: error <= budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pt, Shape};

    #[test]
    fn small_ball_passes_and_reports_each_term() {
        let s = Shape::ball(pt(0.0, 0.0), 1.0).unwrap();
        let sc = Scenario::new(s, 2.0, 1.0, Grid::new(48, 6.0).unwrap(), 6.0, None).unwrap().with_samples(32);
        let r = transform_check(&sc).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.eps_tail - (-6.0f64).exp()).abs() < 1e-15);
        assert!(r.eps_quad > 0.0 && r.eps_h > 0.0);
        assert!(r.error < r.error_unextrapolated);
    }

    #[test]
    fn odd_resolution_is_rejected() {
        let s = Shape::ball(pt(0.0, 0.0), 1.0).unwrap();
        let sc = Scenario::new(s, 2.0, 1.0, Grid::new(33, 3.0).unwrap(), 1.0, None).unwrap();
        assert!(transform_check(&sc).is_err());
    }
}
