use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Grid, GridField};
use crate::geometry::{InterfaceSample, Point, Shape};
use crate::Result;

/// Distances (in cells) of the one-sided stencil points from the interface.
pub const STENCIL_OFFSETS: [f64; 3] = [1.5, 2.5, 3.5];
/// Quadratic extrapolation weights to distance 0 for [`STENCIL_OFFSETS`].
const VALUE_WEIGHTS: [f64; 3] = [4.375, -5.25, 1.875];
/// Weights of `h·f'(0)` for the quadratic through [`STENCIL_OFFSETS`].
const SLOPE_WEIGHTS: [f64; 3] = [-3.0, 5.0, -2.0];

/// How interface values are read off a grid field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceRule {
    /// Bilinear interpolation at the interface point itself.
    Bilinear,
    /// Mean of the quadratic extrapolations from each side along the normal.
    #[default]
    OneSided,
}

/// Interface values and normal derivatives of a field at one sample.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct OneSidedTrace {
    /// Limit from inside `Ω`.
    pub inside: f64,
    /// Limit from outside `Ω`.
    pub outside: f64,
    /// `∂v⁺/∂ν`, from the inside stencil.
    pub d_inside: f64,
    /// `∂v⁻/∂ν`, from the outside stencil.
    pub d_outside: f64,
    /// Bilinear interpolation at the sample point.
    pub bilinear: f64,
}

impl OneSidedTrace {
    pub fn value(&self, rule: TraceRule) -> f64 {
        match rule {
            TraceRule::Bilinear => self.bilinear,
            TraceRule::OneSided => 0.5 * (self.inside + self.outside),
        }
    }

    /// Flux mismatch `σ+∂v⁺/∂ν − σ−∂v⁻/∂ν`.
    pub fn flux_jump(&self, sigma_plus: f64, sigma_minus: f64) -> f64 {
        sigma_plus * self.d_inside - sigma_minus * self.d_outside
    }
}

type Bilinear = [(usize, f64); 4];

/// Precomputed one-sided stencils at a set of interface points.
///
/// Stencil points sit at `x ∓ s·h·ν` for `s` in [`STENCIL_OFFSETS`]; their
/// values come from bilinear interpolation. A stencil whose points are not at
/// the expected signed distance (another part of `∂Ω` is closer) is flagged
/// as a collision.
#[derive(Clone, Debug)]
pub struct TraceStencil {
    grid: Grid,
    center: Vec<Bilinear>,
    inside: Vec<[Bilinear; 3]>,
    outside: Vec<[Bilinear; 3]>,
    collision: Vec<bool>,
}

impl TraceStencil {
    pub fn new(grid: &Grid, shape: &Shape, samples: &[InterfaceSample]) -> Result<Self> {
        let points: Vec<(Point, Point)> = samples.iter().map(|s| (s.point, s.normal)).collect();
        Self::at_points(grid, shape, &points)
    }

    /// Stencils at arbitrary `(point, outward normal)` pairs on `∂Ω`.
    pub fn at_points(grid: &Grid, shape: &Shape, points: &[(Point, Point)]) -> Result<Self> {
        let h = grid.h();
        let built: Vec<_> = points
            .par_iter()
            .map(|(x, nu)| -> Result<_> {
                let center = grid.bilinear_stencil(x)?;
                let mut inside = [[(0, 0.0); 4]; 3];
                let mut outside = [[(0, 0.0); 4]; 3];
                let mut collision = false;
                for (k, s) in STENCIL_OFFSETS.iter().enumerate() {
                    let d = s * h;
                    let pin = x - nu * d;
                    let pout = x + nu * d;
                    inside[k] = grid.bilinear_stencil(&pin)?;
                    outside[k] = grid.bilinear_stencil(&pout)?;
                    let tol = 0.5 * h;
                    collision |= (shape.signed_distance(&pin) + d).abs() > tol;
                    collision |= (shape.signed_distance(&pout) - d).abs() > tol;
                }
                Ok((center, inside, outside, collision))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self {
            grid: *grid,
            center: Vec::with_capacity(built.len()),
            inside: Vec::with_capacity(built.len()),
            outside: Vec::with_capacity(built.len()),
            collision: Vec::with_capacity(built.len()),
        };
        for (c, i, o, col) in built {
            out.center.push(c);
            out.inside.push(i);
            out.outside.push(o);
            out.collision.push(col);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.center.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center.is_empty()
    }

    /// Per-point collision flags.
    pub fn collisions(&self) -> &[bool] {
        &self.collision
    }

    pub fn apply(&self, values: &[f64]) -> Vec<OneSidedTrace> {
        let h = self.grid.h();
        let eval = |st: &Bilinear| st.iter().map(|&(k, w)| w * values[k]).sum::<f64>();
        (0..self.len())
            .map(|m| {
                let fin: Vec<f64> = self.inside[m].iter().map(eval).collect();
                let fout: Vec<f64> = self.outside[m].iter().map(eval).collect();
                let extrap = |f: &[f64]| VALUE_WEIGHTS.iter().zip(f).map(|(w, v)| w * v).sum::<f64>();
                let slope = |f: &[f64]| SLOPE_WEIGHTS.iter().zip(f).map(|(w, v)| w * v).sum::<f64>() / h;
                OneSidedTrace {
                    inside: extrap(&fin),
                    outside: extrap(&fout),
                    // the inside stencil runs along −ν
                    d_inside: -slope(&fin),
                    d_outside: slope(&fout),
                    bilinear: eval(&self.center[m]),
                }
            })
            .collect()
    }

    pub fn apply_field(&self, field: &GridField) -> Vec<OneSidedTrace> {
        assert_eq!(field.grid, self.grid, "field and stencil grids differ");
        self.apply(&field.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pt, sample_interface};

    #[test]
    fn weights_are_exact_for_quadratics() {
        for (a, b, c) in [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.3, -2.0, 1.5)] {
            let f: Vec<f64> = STENCIL_OFFSETS.iter().map(|s| a + b * s + c * s * s).collect();
            let v: f64 = VALUE_WEIGHTS.iter().zip(&f).map(|(w, x)| w * x).sum();
            let d: f64 = SLOPE_WEIGHTS.iter().zip(&f).map(|(w, x)| w * x).sum();
            assert!((v - a).abs() < 1e-13 && (d - b).abs() < 1e-13);
        }
    }

    #[test]
    fn smooth_radial_field_has_matching_one_sided_limits() {
        let s = Shape::ball(pt(0.0, 0.0), 1.0).unwrap();
        let g = Grid::new(128, 2.0).unwrap();
        let f = GridField::from_fn(g, |p| (-p.norm_squared()).exp());
        let samples = sample_interface(&s, 32).unwrap();
        let st = TraceStencil::new(&g, &s, &samples).unwrap();
        assert!(st.collisions().iter().all(|c| !c));
        let exact = (-1.0f64).exp();
        for t in st.apply_field(&f) {
            assert!((t.inside - exact).abs() < 2e-3 && (t.outside - exact).abs() < 2e-3);
            assert!((t.d_inside + 2.0 * exact).abs() < 2e-2 && (t.d_outside + 2.0 * exact).abs() < 2e-2);
            assert!((t.value(TraceRule::OneSided) - exact).abs() < 2e-3);
        }
    }

    #[test]
    fn narrow_gap_is_flagged() {
        let s = Shape::union(&[Shape::ball(pt(-1.05, 0.0), 1.0).unwrap(), Shape::ball(pt(1.05, 0.0), 1.0).unwrap()])
            .unwrap();
        let g = Grid::new(64, 3.0).unwrap();
        let samples = sample_interface(&s, 16).unwrap();
        let st = TraceStencil::new(&g, &s, &samples).unwrap();
        // the samples facing the gap (t = 0 on the left ball, t = π on the right)
        assert!(st.collisions()[0]);
        assert!(st.collisions()[16 + 8]);
        assert!(!st.collisions()[8]);
    }
}
