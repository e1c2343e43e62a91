use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::discretization::{
    assemble_operator, solve_linear, ConductivityField, Grid, GridField, OuterBoundary, DEFAULT_REL_TOL,
};
use crate::elliptic::{exact_ball_v, max_residuals, solve_transmission, transmission_residuals};
use crate::geometry::{pt, sample_interface, Shape};
use crate::parabolic::Scenario;
use crate::{Error, Result};

/// Errors at a sequence of mesh sizes and the observed orders.
#[derive(Clone, Debug, Serialize)]
pub struct RateTable {
    pub label: String,
    pub resolutions: Vec<usize>,
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log(e_k/e_{k+1}) / log(h_k/h_{k+1})` for consecutive pairs.
    pub pairwise_orders: Vec<f64>,
    /// Least-squares slope of `log e` against `log h`.
    pub fitted_order: f64,
}

impl RateTable {
    pub fn new(label: impl Into<String>, resolutions: &[usize], h: &[f64], errors: &[f64]) -> Self {
        let pairwise_orders =
            h.windows(2).zip(errors.windows(2)).map(|(hh, ee)| (ee[0] / ee[1]).ln() / (hh[0] / hh[1]).ln()).collect();
        Self {
            label: label.into(),
            resolutions: resolutions.to_vec(),
            h: h.to_vec(),
            errors: errors.to_vec(),
            pairwise_orders,
            fitted_order: fitted_order(h, errors),
        }
    }

    /// Whether every error is strictly smaller than the previous one.
    pub fn decreasing(&self) -> bool {
        self.errors.windows(2).all(|e| e[1] < e[0])
    }
}

/// Least-squares slope of `log e` against `log h` (NaN for fewer than two points).
pub fn fitted_order(h: &[f64], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h.iter().zip(errors).map(|(h, e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// The problem families of [`convergence_study`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// `−Δu + u = f` on the box with `u = cos(πx/2L)cos(πy/2L)`.
    Manufactured,
    /// Transmission solve for the unit ball against the exact solution,
    /// on cells at least 3h from `∂Ω`.
    BallInterior,
    /// Standard deviation of the ball's interface values `a*` (exactly 0 in the limit).
    BallDeviation,
    /// `jump_value`, `jump_flux` of the exact ball solution sampled on the grid.
    OracleResiduals,
}

impl StudyKind {
    pub const ALL: [StudyKind; 4] =
        [StudyKind::Manufactured, StudyKind::BallInterior, StudyKind::BallDeviation, StudyKind::OracleResiduals];
}

/// Parameters shared by the studies.
#[derive(Clone, Copy, Debug)]
pub struct StudyParams {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    /// Box half-width `L`.
    pub half_width: f64,
    /// Interface samples for the ball studies.
    pub samples: usize,
}

impl Default for StudyParams {
    fn default() -> Self {
        Self { sigma_plus: 2.0, sigma_minus: 1.0, half_width: 8.0, samples: 256 }
    }
}

/// Observed orders for one problem family over `resolutions` (at least 3).
///
/// The ball interior study also reports the `a*` error; the residual study
/// reports value and flux jumps separately.
pub fn convergence_study(kind: StudyKind, resolutions: &[usize], params: &StudyParams) -> Result<Vec<RateTable>> {
    if resolutions.len() < 3 {
        return Err(Error::InvalidScenario("a convergence study needs at least 3 resolutions".into()));
    }
    let grids = resolutions.iter().map(|&n| Grid::new(n, params.half_width)).collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = grids.iter().map(Grid::h).collect();
    let ball = Shape::ball(pt(0.0, 0.0), 1.0)?;
    let exact = exact_ball_v(1.0, params.sigma_plus, params.sigma_minus, 2)?;
    let scenario = |g: Grid| {
        Scenario::new(ball.clone(), params.sigma_plus, params.sigma_minus, g, 1.0, None)
            .map(|s| s.with_samples(params.samples))
    };
    let tables = match kind {
        StudyKind::Manufactured => {
            let errors = grids.iter().map(|g| manufactured_error(*g)).collect::<Result<Vec<_>>>()?;
            vec![RateTable::new("manufactured_max_error", resolutions, &h, &errors)]
        }
        StudyKind::BallInterior => {
            let mut interior = Vec::new();
            let mut a_star = Vec::new();
            for g in &grids {
                let sol = solve_transmission(&scenario(*g)?)?;
                interior.push(interior_error(&sol.field, &ball, |r| exact.value(r)));
                a_star.push((sol.a_star - exact.a_star_exact).abs());
            }
            vec![
                RateTable::new("ball_interior_max_error", resolutions, &h, &interior),
                RateTable::new("ball_a_star_error", resolutions, &h, &a_star),
            ]
        }
        StudyKind::BallDeviation => {
            let errors = grids
                .iter()
                .map(|g| solve_transmission(&scenario(*g)?).map(|s| s.a_star_std))
                .collect::<Result<Vec<_>>>()?;
            vec![RateTable::new("ball_a_star_std", resolutions, &h, &errors)]
        }
        StudyKind::OracleResiduals => {
            let samples = sample_interface(&ball, params.samples)?;
            let mut value = Vec::new();
            let mut flux = Vec::new();
            for g in &grids {
                let field = GridField::from_fn(*g, |x| exact.value(x.norm()));
                let res = transmission_residuals(&field, &ball, &samples, params.sigma_plus, params.sigma_minus)?;
                let (jv, jf) = max_residuals(&res);
                value.push(jv);
                flux.push(jf);
            }
            vec![
                RateTable::new("oracle_jump_value", resolutions, &h, &value),
                RateTable::new("oracle_jump_flux", resolutions, &h, &flux),
            ]
        }
    };
    Ok(tables)
}

/// Largest `|v_h − v|` over cells at least `3h` from `∂Ω`, with `v` radial.
pub fn interior_error(field: &GridField, shape: &Shape, exact: impl Fn(f64) -> f64) -> f64 {
    let grid = field.grid;
    let sd = grid.signed_distances(shape, 4.0 * grid.h());
    (0..grid.cell_count())
        .filter(|&k| sd[k].abs() >= 3.0 * grid.h())
        .map(|k| (field.values[k] - exact(grid.center_of(k).norm())).abs())
        .fold(0.0, f64::max)
}

/// Max-norm error of the five-point solve of `−Δu + u = f` with the smooth
/// solution `u = cos(πx/2L)cos(πy/2L)` (zero on the box boundary).
fn manufactured_error(grid: Grid) -> Result<f64> {
    let k = PI / (2.0 * grid.half_width());
    let exact = |x: crate::geometry::Point| (k * x.x).cos() * (k * x.y).cos();
    let op = assemble_operator(&grid, &ConductivityField::uniform(&grid, 1.0), 1.0, OuterBoundary::DirichletZero);
    let h2 = grid.cell_volume();
    let rhs: Vec<f64> = (0..grid.cell_count()).map(|c| h2 * (1.0 + 2.0 * k * k) * exact(grid.center_of(c))).collect();
    let u = solve_linear(&op, &rhs, DEFAULT_REL_TOL * 1e-2)?.into_result()?;
    Ok((0..grid.cell_count()).map(|c| (u[c] - exact(grid.center_of(c))).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_order_of_exact_power_laws() {
        let h = [0.1, 0.05, 0.025, 0.0125];
        let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h).collect();
        assert!((fitted_order(&h, &e) - 2.0).abs() < 1e-12);
        let t = RateTable::new("x", &[1, 2, 4, 8], &h, &e);
        assert!(t.pairwise_orders.iter().all(|p| (p - 2.0).abs() < 1e-12));
        assert!(t.decreasing());
        assert!(fitted_order(&[0.1], &[1.0]).is_nan());
    }

    #[test]
    fn manufactured_problem_is_second_order() {
        let p = StudyParams { half_width: 2.0, ..StudyParams::default() };
        let t = &convergence_study(StudyKind::Manufactured, &[16, 32, 64], &p).unwrap()[0];
        assert!((t.fitted_order - 2.0).abs() < 0.05, "{t:?}");
    }

    #[test]
    fn too_few_resolutions_is_rejected() {
        let err = convergence_study(StudyKind::Manufactured, &[16, 32], &StudyParams::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidScenario(_)));
    }

    #[test]
    fn oracle_residuals_shrink() {
        let p = StudyParams { half_width: 4.0, samples: 64, ..StudyParams::default() };
        let t = convergence_study(StudyKind::OracleResiduals, &[64, 128, 256], &p).unwrap();
        for table in &t {
            assert!(table.decreasing() && table.fitted_order >= 0.8, "{table:?}");
        }
    }
}
