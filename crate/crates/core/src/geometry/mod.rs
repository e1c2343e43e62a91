//! Shapes, interface sampling, reflections and the moving-plane scan.

mod moving_plane;
mod sampling;
mod shape;

pub use moving_plane::{
    critical_plane_scan, critical_plane_scan_with, symmetry_report, AmbiguousEvent, MovingPlaneResult, PlaneEvent,
    ScanOptions, SymmetryReport,
};
pub use sampling::{perimeter, sample_interface, InterfaceSample};
pub use shape::{Component, Shape};

use nalgebra::Vector2;

/// A point (or vector) in the plane.
pub type Point = Vector2<f64>;

/// Shorthand constructor for [`Point`].
#[inline]
pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// The hyperplane `x·γ = λ` with unit normal direction `γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperplane {
    gamma: Point,
    lambda: f64,
}

impl Hyperplane {
    /// Builds a plane from any nonzero direction; the direction is normalized.
    pub fn new(direction: Point, lambda: f64) -> Self {
        let norm = direction.norm();
        assert!(norm > 0.0 && norm.is_finite(), "plane direction must be nonzero");
        Self { gamma: direction / norm, lambda }
    }

    /// Plane with normal at angle `theta` (radians) from the x axis.
    pub fn from_angle(theta: f64, lambda: f64) -> Self {
        Self { gamma: pt(theta.cos(), theta.sin()), lambda }
    }

    pub fn gamma(&self) -> Point {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { gamma: self.gamma, lambda }
    }

    /// Signed height `x·γ − λ`; positive on the cap side.
    #[inline]
    pub fn height(&self, x: &Point) -> f64 {
        x.dot(&self.gamma) - self.lambda
    }
}

impl serde::Serialize for Hyperplane {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Hyperplane", 2)?;
        st.serialize_field("gamma", &[self.gamma.x, self.gamma.y])?;
        st.serialize_field("lambda", &self.lambda)?;
        st.end()
    }
}

/// Reflection `x + 2[λ − x·γ]γ` through the plane.
#[inline]
pub fn reflect_point(x: &Point, plane: &Hyperplane) -> Point {
    let g = plane.gamma;
    x + g * (2.0 * (plane.lambda - x.dot(&g)))
}
