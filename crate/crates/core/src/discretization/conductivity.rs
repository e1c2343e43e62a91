use rayon::prelude::*;

use super::Grid;
use crate::geometry::{pt, Point, Shape};

/// How a face between cells of different phase gets its conductivity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceRule {
    /// Harmonic mean of the two cell values, `2σaσb/(σa+σb)`.
    CellHarmonic,
    /// Series resistance with the interface located on the segment between the
    /// two centers by linear interpolation of the signed distance:
    /// `1/σ_f = θ/σa + (1−θ)/σb` with `θ = da/(da − db)`.
    #[default]
    InterfaceWeighted,
}

/// Phase assignment for the indicator `χ_Ω` (initial datum and elliptic source).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorRule {
    /// 1 where the cell center is inside, else 0.
    CellCenter,
    /// Area fraction of the cell inside `Ω`, with the interface linearized in the cell.
    #[default]
    VolumeFraction,
}

/// Piecewise-constant conductivity with its face values.
///
/// Faces normal to x between cells `(i, j)` and `(i+1, j)` are stored at
/// `j·(n−1) + i`; faces normal to y between `(i, j)` and `(i, j+1)` at `j·n + i`.
#[derive(Clone, Debug)]
pub struct ConductivityField {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub rule: FaceRule,
    pub cell_sigma: Vec<f64>,
    pub face_x: Vec<f64>,
    pub face_y: Vec<f64>,
    /// Signed distance at cell centers (exact within a few cells of `∂Ω`).
    pub cell_distance: Vec<f64>,
}

impl ConductivityField {
    /// Uniform conductivity everywhere (one phase).
    pub fn uniform(grid: &Grid, sigma: f64) -> Self {
        let n = grid.n();
        Self {
            sigma_plus: sigma,
            sigma_minus: sigma,
            rule: FaceRule::CellHarmonic,
            cell_sigma: vec![sigma; n * n],
            face_x: vec![sigma; (n - 1) * n],
            face_y: vec![sigma; n * (n - 1)],
            cell_distance: vec![f64::INFINITY; n * n],
        }
    }

    /// All face values, both orientations.
    pub fn faces(&self) -> impl Iterator<Item = f64> + '_ {
        self.face_x.iter().chain(&self.face_y).copied()
    }

    /// Whether the field has degenerated to a single phase.
    pub fn is_one_phase(&self) -> bool {
        self.sigma_plus == self.sigma_minus
    }
}

/// Face conductivities with the default [`FaceRule::InterfaceWeighted`] rule.
pub fn face_conductivities(grid: &Grid, shape: &Shape, sigma_plus: f64, sigma_minus: f64) -> ConductivityField {
    face_conductivities_with(grid, shape, sigma_plus, sigma_minus, FaceRule::default())
}

pub fn face_conductivities_with(
    grid: &Grid,
    shape: &Shape,
    sigma_plus: f64,
    sigma_minus: f64,
    rule: FaceRule,
) -> ConductivityField {
    let n = grid.n();
    let sd = grid.signed_distances(shape, 4.0 * grid.h());
    let sigma_of = |d: f64| if d < 0.0 { sigma_plus } else { sigma_minus };
    let cell_sigma: Vec<f64> = sd.iter().map(|&d| sigma_of(d)).collect();
    let face = |a: usize, b: usize| -> f64 {
        let (sa, sb) = (cell_sigma[a], cell_sigma[b]);
        if sa == sb {
            return sa;
        }
        match rule {
            FaceRule::CellHarmonic => 2.0 * sa * sb / (sa + sb),
            FaceRule::InterfaceWeighted => {
                let theta = (sd[a] / (sd[a] - sd[b])).clamp(0.0, 1.0);
                1.0 / (theta / sa + (1.0 - theta) / sb)
            }
        }
    };
    let face_x = (0..(n - 1) * n)
        .into_par_iter()
        .map(|f| {
            let (i, j) = (f % (n - 1), f / (n - 1));
            face(grid.index(i, j), grid.index(i + 1, j))
        })
        .collect();
    let face_y = (0..n * (n - 1))
        .into_par_iter()
        .map(|f| {
            let (i, j) = (f % n, f / n);
            face(grid.index(i, j), grid.index(i, j + 1))
        })
        .collect();
    ConductivityField { sigma_plus, sigma_minus, rule, cell_sigma, face_x, face_y, cell_distance: sd }
}

/// Discrete indicator of `Ω` on the cells.
pub fn indicator(grid: &Grid, shape: &Shape, rule: IndicatorRule) -> Vec<f64> {
    let h = grid.h();
    let sd = grid.signed_distances(shape, h);
    match rule {
        IndicatorRule::CellCenter => sd.iter().map(|&d| if d < 0.0 { 1.0 } else { 0.0 }).collect(),
        IndicatorRule::VolumeFraction => (0..grid.cell_count())
            .into_par_iter()
            .map(|k| {
                let d = sd[k];
                if d.abs() >= std::f64::consts::FRAC_1_SQRT_2 * h {
                    return if d < 0.0 { 1.0 } else { 0.0 };
                }
                let c = grid.center_of(k);
                let normal = shape.normal_near(&c);
                half_plane_fraction(&normal, d, h)
            })
            .collect(),
    }
}

/// Area fraction of the square `[−h/2, h/2]²` where `d + ν·y ≤ 0`.
pub fn half_plane_fraction(normal: &Point, d: f64, h: f64) -> f64 {
    let half = 0.5 * h;
    let square = [pt(-half, -half), pt(half, -half), pt(half, half), pt(-half, half)];
    let phi = |y: &Point| d + normal.dot(y);
    let mut clipped: Vec<Point> = Vec::with_capacity(8);
    for k in 0..4 {
        let a = square[k];
        let b = square[(k + 1) % 4];
        let (fa, fb) = (phi(&a), phi(&b));
        if fa <= 0.0 {
            clipped.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            clipped.push(a + (b - a) * (fa / (fa - fb)));
        }
    }
    let m = clipped.len();
    let area: f64 = (0..m)
        .map(|k| {
            let (p, q) = (clipped[k], clipped[(k + 1) % m]);
            p.x * q.y - q.x * p.y
        })
        .sum::<f64>()
        * 0.5;
    (area / (h * h)).clamp(0.0, 1.0)
}
