use rayon::prelude::*;

use crate::geometry::{pt, Point, Shape};
use crate::{Error, Result};

/// Uniform cell-centered grid on the box `[−L, L]²` with `n` cells per axis.
///
/// Cell `(i, j)` has flat index `k = j·n + i` (x varies fastest) and center
/// `((i + ½ − n/2)·h, (j + ½ − n/2)·h)`. The centered form makes the grid
/// exactly symmetric under `x ↦ −x` and `y ↦ −y` in floating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    half_width: f64,
    h: f64,
}

impl Grid {
    pub const MIN_CELLS: usize = 16;

    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < Self::MIN_CELLS {
            return Err(Error::InvalidScenario(format!(
                "grid needs at least {} cells per axis, got {n}",
                Self::MIN_CELLS
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidScenario(format!("box half-width must be positive, got {half_width}")));
        }
        Ok(Self { n, half_width, h: 2.0 * half_width / n as f64 })
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Box half-width `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Cell width `h = 2L/n`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_count(&self) -> usize {
        self.n * self.n
    }

    /// Cell area `h²`.
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.n, k / self.n)
    }

    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - 0.5 * self.n as f64) * self.h
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Point {
        pt(self.coordinate(i), self.coordinate(j))
    }

    #[inline]
    pub fn center_of(&self, k: usize) -> Point {
        let (i, j) = self.coords(k);
        self.center(i, j)
    }

    /// Whether the box strictly contains the closed ball of radius `r` about 0.
    pub fn contains_ball(&self, r: f64) -> bool {
        r < self.half_width
    }

    /// Whether `p` lies within the hull of the cell centers (bilinear range).
    pub fn in_interpolation_range(&self, p: &Point) -> bool {
        let lim = self.half_width - 0.5 * self.h;
        p.x.abs() <= lim * (1.0 + 1e-12) && p.y.abs() <= lim * (1.0 + 1e-12)
    }

    /// Fractional cell index of a coordinate (cell centers sit at integers).
    #[inline]
    fn fractional(&self, x: f64) -> f64 {
        x / self.h + 0.5 * self.n as f64 - 0.5
    }

    /// Bilinear stencil at `p`: four flat indices and weights.
    pub fn bilinear_stencil(&self, p: &Point) -> Result<[(usize, f64); 4]> {
        if !self.in_interpolation_range(p) {
            return Err(Error::SampleOutsideGrid(p.x, p.y));
        }
        let last = (self.n - 2) as f64;
        let fx = self.fractional(p.x).clamp(0.0, self.n as f64 - 1.0);
        let fy = self.fractional(p.y).clamp(0.0, self.n as f64 - 1.0);
        let i0 = fx.floor().min(last) as usize;
        let j0 = fy.floor().min(last) as usize;
        let sx = fx - i0 as f64;
        let sy = fy - j0 as f64;
        Ok([
            (self.index(i0, j0), (1.0 - sx) * (1.0 - sy)),
            (self.index(i0 + 1, j0), sx * (1.0 - sy)),
            (self.index(i0, j0 + 1), (1.0 - sx) * sy),
            (self.index(i0 + 1, j0 + 1), sx * sy),
        ])
    }

    /// Signed distance at every cell center, exact within `band` of `∂Ω`.
    ///
    /// Far from the interface the shape is queried on a coarse subgrid only;
    /// the 1-Lipschitz property of the distance certifies that such cells lie
    /// more than `band` away, and they receive the (correctly signed) coarse
    /// estimate instead of the exact distance.
    pub fn signed_distances(&self, shape: &Shape, band: f64) -> Vec<f64> {
        let stride = 8usize;
        let nc = self.n.div_ceil(stride);
        let coarse: Vec<f64> = (0..nc * nc)
            .into_par_iter()
            .map(|k| {
                let (ci, cj) = (k % nc, k / nc);
                let i = (ci * stride + stride / 2).min(self.n - 1);
                let j = (cj * stride + stride / 2).min(self.n - 1);
                shape.signed_distance(&self.center(i, j))
            })
            .collect();
        let reach = std::f64::consts::SQRT_2 * stride as f64 * self.h;
        (0..self.cell_count())
            .into_par_iter()
            .map(|k| {
                let (i, j) = self.coords(k);
                let c = coarse[(j / stride) * nc + i / stride];
                if c.abs() > band + reach {
                    c
                } else {
                    shape.signed_distance(&self.center(i, j))
                }
            })
            .collect()
    }
}

/// Scalar values on the cells of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.cell_count(), "field size does not match grid");
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.cell_count()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64 + Sync) -> Self {
        let values = (0..grid.cell_count()).into_par_iter().map(|k| f(grid.center_of(k))).collect();
        Self { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Bilinear interpolation between the four surrounding cell centers.
    pub fn interpolate(&self, p: &Point) -> Result<f64> {
        Ok(self.grid.bilinear_stencil(p)?.iter().map(|&(k, w)| w * self.values[k]).sum())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Discrete integral `Σ u·h²`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Largest absolute difference to another field on the same grid.
    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Average over 2×2 blocks onto the grid with `n/2` cells per axis.
    pub fn restrict(&self) -> Result<GridField> {
        let n = self.grid.n();
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidScenario(format!("cannot restrict odd grid n={n}")));
        }
        let coarse = Grid::new(n / 2, self.grid.half_width())?;
        let values = (0..coarse.cell_count())
            .map(|k| {
                let (i, j) = coarse.coords(k);
                0.25 * (self.at(2 * i, 2 * j)
                    + self.at(2 * i + 1, 2 * j)
                    + self.at(2 * i, 2 * j + 1)
                    + self.at(2 * i + 1, 2 * j + 1))
            })
            .collect();
        Ok(GridField::new(coarse, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_are_mirror_symmetric() {
        let g = Grid::new(32, 3.7).unwrap();
        for i in 0..32 {
            assert_eq!(g.coordinate(i), -g.coordinate(31 - i));
        }
        assert!((g.coordinate(0) - (-3.7 + 0.5 * g.h())).abs() < 1e-14);
    }

    #[test]
    fn bilinear_reproduces_linear_functions() {
        let g = Grid::new(20, 2.0).unwrap();
        let f = GridField::from_fn(g, |p| 1.0 + 2.0 * p.x - 0.5 * p.y + 0.25 * p.x * p.y);
        for p in [pt(0.013, -0.7), pt(1.89, 1.89), pt(-1.9, 0.3), pt(0.0, 0.0)] {
            let exact = 1.0 + 2.0 * p.x - 0.5 * p.y + 0.25 * p.x * p.y;
            assert!((f.interpolate(&p).unwrap() - exact).abs() < 1e-12);
        }
        assert!(matches!(f.interpolate(&pt(1.99, 0.0)), Err(Error::SampleOutsideGrid(..))));
    }

    #[test]
    fn banded_distances_are_exact_near_interface() {
        let g = Grid::new(64, 3.0).unwrap();
        let s = Shape::ellipse(pt(0.1, 0.0), 2.0, 1.0).unwrap();
        let band = 4.0 * g.h();
        let sd = g.signed_distances(&s, band);
        for k in 0..g.cell_count() {
            let exact = s.signed_distance(&g.center_of(k));
            if exact.abs() <= band {
                assert_eq!(sd[k], exact);
            } else {
                assert!(sd[k].abs() > band && sd[k].signum() == exact.signum());
            }
        }
    }

    #[test]
    fn restriction_averages_blocks() {
        let g = Grid::new(32, 1.0).unwrap();
        let f = GridField::from_fn(g, |p| p.x + 2.0 * p.y);
        let r = f.restrict().unwrap();
        let exact = GridField::from_fn(r.grid, |p| p.x + 2.0 * p.y);
        assert!(r.max_abs_diff(&exact) < 1e-14);
    }
}
