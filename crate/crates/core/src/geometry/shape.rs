use std::f64::consts::{PI, TAU};

use super::{pt, Point};
use crate::{Error, Result};

/// Number of coarse parameter samples used to seed closest-point projection.
const PROJECTION_SEEDS: usize = 128;
/// Parameter samples used for area, extent and error-bound estimates.
const DENSE_SAMPLES: usize = 4096;

/// One connected component of a shape: a closed, counterclockwise C² curve.
///
/// Every component carries a parametrization `c(t)`, `t ∈ [0, 2π)`, and a
/// cheap implicit function that is negative exactly inside the curve. The
/// ball has an exact distance; the others use closest-point projection.
#[derive(Clone, Debug, PartialEq)]
pub enum Component {
    Ball {
        center: Point,
        radius: f64,
    },
    Ellipse {
        center: Point,
        a: f64,
        b: f64,
    },
    /// `|x/a|^p + |y/b|^p = 1`, parametrized in polar angle; `p ≥ 2`.
    Superellipse {
        center: Point,
        a: f64,
        b: f64,
        exponent: f64,
    },
    /// `x = a cos t`, `y = b sin t (1 + amplitude·cos(frequency·t))`.
    ///
    /// For odd `frequency` the perturbation is odd in `x`, which breaks the
    /// left/right symmetry of the ellipse.
    Egg {
        center: Point,
        a: f64,
        b: f64,
        amplitude: f64,
        frequency: u32,
    },
}

impl Component {
    fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidShape(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            Component::Ball { radius, .. } => positive(radius, "radius"),
            Component::Ellipse { a, b, .. } => {
                positive(a, "semi-axis a")?;
                positive(b, "semi-axis b")
            }
            Component::Superellipse { a, b, exponent, .. } => {
                positive(a, "semi-axis a")?;
                positive(b, "semi-axis b")?;
                if !(exponent >= 2.0 && exponent.is_finite()) {
                    return Err(Error::InvalidShape(format!("superellipse exponent must be >= 2, got {exponent}")));
                }
                Ok(())
            }
            Component::Egg { a, b, amplitude, frequency, .. } => {
                positive(a, "semi-axis a")?;
                positive(b, "semi-axis b")?;
                if !(amplitude.abs() < 1.0) {
                    return Err(Error::InvalidShape(format!(
                        "egg amplitude must satisfy |amplitude| < 1, got {amplitude}"
                    )));
                }
                if frequency == 0 {
                    return Err(Error::InvalidShape("egg frequency must be >= 1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn center(&self) -> Point {
        match *self {
            Component::Ball { center, .. }
            | Component::Ellipse { center, .. }
            | Component::Superellipse { center, .. }
            | Component::Egg { center, .. } => center,
        }
    }

    /// Boundary point at parameter `t`.
    pub fn point(&self, t: f64) -> Point {
        let c = self.center();
        match *self {
            Component::Ball { radius, .. } => c + pt(t.cos(), t.sin()) * radius,
            Component::Ellipse { a, b, .. } => c + pt(a * t.cos(), b * t.sin()),
            Component::Superellipse { a, b, exponent, .. } => {
                c + pt(t.cos(), t.sin()) * superellipse_radius(t, a, b, exponent)
            }
            Component::Egg { a, b, amplitude, frequency, .. } => {
                let k = frequency as f64;
                c + pt(a * t.cos(), b * t.sin() * (1.0 + amplitude * (k * t).cos()))
            }
        }
    }

    /// First derivative `c'(t)`.
    pub fn derivative(&self, t: f64) -> Point {
        match *self {
            Component::Ball { radius, .. } => pt(-t.sin(), t.cos()) * radius,
            Component::Ellipse { a, b, .. } => pt(-a * t.sin(), b * t.cos()),
            Component::Superellipse { a, b, exponent, .. } => {
                let (s, c) = t.sin_cos();
                let r = superellipse_radius(t, a, b, exponent);
                let dr = superellipse_radius_derivative(t, a, b, exponent);
                pt(dr * c - r * s, dr * s + r * c)
            }
            Component::Egg { a, b, amplitude, frequency, .. } => {
                let k = frequency as f64;
                let (s, c) = t.sin_cos();
                let (sk, ck) = (k * t).sin_cos();
                pt(-a * s, b * (c * (1.0 + amplitude * ck) - amplitude * k * s * sk))
            }
        }
    }

    /// Second derivative `c''(t)`.
    pub fn second_derivative(&self, t: f64) -> Point {
        match *self {
            Component::Ball { radius, .. } => pt(-t.cos(), -t.sin()) * radius,
            Component::Ellipse { a, b, .. } => pt(-a * t.cos(), -b * t.sin()),
            Component::Superellipse { .. } => {
                // central difference of the analytic first derivative
                let dt = 1e-6;
                (self.derivative(t + dt) - self.derivative(t - dt)) / (2.0 * dt)
            }
            Component::Egg { a, b, amplitude, frequency, .. } => {
                let k = frequency as f64;
                let (s, c) = t.sin_cos();
                let (sk, ck) = (k * t).sin_cos();
                pt(
                    -a * c,
                    b * (-s * (1.0 + amplitude * ck) - 2.0 * amplitude * k * c * sk - amplitude * k * k * s * ck),
                )
            }
        }
    }

    /// Outward unit normal at parameter `t`.
    pub fn normal(&self, t: f64) -> Point {
        let d = self.derivative(t);
        pt(d.y, -d.x) / d.norm()
    }

    /// Cheap implicit function: negative inside, positive outside, zero on the curve.
    ///
    /// Only its sign is meaningful for the non-ball components.
    pub fn implicit(&self, p: &Point) -> f64 {
        let q = p - self.center();
        match *self {
            Component::Ball { radius, .. } => q.norm() - radius,
            Component::Ellipse { a, b, .. } => (q.x / a).powi(2) + (q.y / b).powi(2) - 1.0,
            Component::Superellipse { a, b, exponent, .. } => {
                (q.x / a).abs().powf(exponent) + (q.y / b).abs().powf(exponent) - 1.0
            }
            Component::Egg { a, b, amplitude, frequency, .. } => {
                let u = q.x / a;
                if u.abs() >= 1.0 {
                    return u.abs() - 1.0 + q.y.abs() / b;
                }
                let cheb = (frequency as f64 * u.acos()).cos();
                let half_width = b * (1.0 - u * u).sqrt() * (1.0 + amplitude * cheb);
                (q.y.abs() - half_width) / b
            }
        }
    }

    /// Closest boundary point and its parameter.
    pub fn closest_point(&self, p: &Point) -> (Point, f64) {
        if let Component::Ball { center, .. } = *self {
            let q = p - center;
            let t = if q.norm() > 0.0 { q.y.atan2(q.x) } else { 0.0 };
            return (self.point(t), t.rem_euclid(TAU));
        }
        // coarse seeds, then damped Newton from the best few local minima
        let m = PROJECTION_SEEDS;
        let dist2: Vec<f64> = (0..m).map(|i| (self.point(TAU * i as f64 / m as f64) - p).norm_squared()).collect();
        let mut minima: Vec<usize> = (0..m)
            .filter(|&i| {
                let prev = dist2[(i + m - 1) % m];
                let next = dist2[(i + 1) % m];
                dist2[i] <= prev && dist2[i] <= next
            })
            .collect();
        minima.sort_by(|&i, &j| dist2[i].total_cmp(&dist2[j]));
        minima.truncate(3);
        let mut best = (f64::INFINITY, 0.0);
        for i in minima {
            let t = self.refine_projection(p, TAU * i as f64 / m as f64, TAU / m as f64);
            let d2 = (self.point(t) - p).norm_squared();
            if d2 < best.0 {
                best = (d2, t);
            }
        }
        let t = best.1.rem_euclid(TAU);
        (self.point(t), t)
    }

    fn refine_projection(&self, p: &Point, mut t: f64, max_step: f64) -> f64 {
        for _ in 0..60 {
            let r = self.point(t) - p;
            let d1 = self.derivative(t);
            let g = r.dot(&d1);
            let h = d1.norm_squared() + r.dot(&self.second_derivative(t));
            let mut step = if h > 0.0 { -g / h } else { -g.signum() * max_step };
            step = step.clamp(-max_step, max_step);
            // backtrack so the squared distance does not increase
            let f0 = r.norm_squared();
            let mut accepted = false;
            for _ in 0..30 {
                if (self.point(t + step) - p).norm_squared() <= f0 {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            t += step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t
    }

    /// Signed distance to this component's boundary.
    pub fn signed_distance(&self, p: &Point) -> f64 {
        if let Component::Ball { center, radius } = *self {
            return (p - center).norm() - radius;
        }
        let (q, _) = self.closest_point(p);
        let d = (q - p).norm();
        if self.implicit(p) < 0.0 {
            -d
        } else {
            d
        }
    }

    fn area(&self) -> f64 {
        match *self {
            Component::Ball { radius, .. } => PI * radius * radius,
            Component::Ellipse { a, b, .. } => PI * a * b,
            _ => {
                // ½∮(x y' − y x') dt, trapezoid on the periodic parametrization
                let m = DENSE_SAMPLES;
                let dt = TAU / m as f64;
                let c = self.center();
                (0..m)
                    .map(|i| {
                        let t = i as f64 * dt;
                        let q = self.point(t) - c;
                        let d = self.derivative(t);
                        0.5 * (q.x * d.y - q.y * d.x) * dt
                    })
                    .sum()
            }
        }
    }

    fn max_radius(&self) -> f64 {
        match *self {
            Component::Ball { center, radius } => center.norm() + radius,
            _ => {
                (0..DENSE_SAMPLES).map(|i| self.point(TAU * i as f64 / DENSE_SAMPLES as f64).norm()).fold(0.0, f64::max)
            }
        }
    }

    /// Empirical bound on the distance error: probes on and near the curve.
    fn estimate_distance_error(&self) -> f64 {
        if matches!(self, Component::Ball { .. }) {
            return 0.0;
        }
        let scale = self.max_radius().max(1.0);
        let delta = 1e-3 * scale;
        let m = 64;
        (0..m)
            .map(|i| {
                let t = TAU * (i as f64 + 0.37) / m as f64;
                let x = self.point(t);
                let n = self.normal(t);
                let on = self.signed_distance(&x).abs();
                let outside = (self.signed_distance(&(x + n * delta)) - delta).abs();
                let inside = (self.signed_distance(&(x - n * delta)) + delta).abs();
                on.max(outside).max(inside)
            })
            .fold(0.0, f64::max)
    }
}

fn superellipse_radius(t: f64, a: f64, b: f64, p: f64) -> f64 {
    let s = (t.cos() / a).abs().powf(p) + (t.sin() / b).abs().powf(p);
    s.powf(-1.0 / p)
}

fn superellipse_radius_derivative(t: f64, a: f64, b: f64, p: f64) -> f64 {
    let (sn, cs) = t.sin_cos();
    let u = cs / a;
    let v = sn / b;
    let s = u.abs().powf(p) + v.abs().powf(p);
    let ds = p * u.abs().powf(p - 1.0) * u.signum() * (-sn / a) + p * v.abs().powf(p - 1.0) * v.signum() * (cs / b);
    -(1.0 / p) * s.powf(-1.0 / p - 1.0) * ds
}

/// A bounded open set `Ω ⊂ R²`: a disjoint union of C² components.
///
/// The signed distance is negative in `Ω`, zero on `∂Ω` and positive outside.
#[derive(Clone, Debug)]
pub struct Shape {
    components: Vec<Component>,
    bounding_radius: f64,
    area: f64,
    distance_error_bound: f64,
}

impl Shape {
    /// Validates parameters and pairwise disjointness of the closures.
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidShape("a shape needs at least one component".into()));
        }
        for c in &components {
            c.validate()?;
        }
        for (i, ci) in components.iter().enumerate() {
            for (j, cj) in components.iter().enumerate() {
                if i == j {
                    continue;
                }
                let touches = (0..256).any(|k| {
                    let x = ci.point(TAU * k as f64 / 256.0);
                    cj.implicit(&x) <= 0.0 || cj.signed_distance(&x) <= 1e-9
                });
                if touches {
                    return Err(Error::InvalidShape(format!("components {i} and {j} intersect or touch")));
                }
            }
        }
        let bounding_radius = components.iter().map(Component::max_radius).fold(0.0, f64::max);
        let area = components.iter().map(Component::area).sum();
        let distance_error_bound = components.iter().map(Component::estimate_distance_error).fold(0.0, f64::max);
        Ok(Self { components, bounding_radius, area, distance_error_bound })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        Self::new(vec![Component::Ball { center, radius }])
    }

    pub fn ellipse(center: Point, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![Component::Ellipse { center, a, b }])
    }

    pub fn superellipse(center: Point, a: f64, b: f64, exponent: f64) -> Result<Self> {
        Self::new(vec![Component::Superellipse { center, a, b, exponent }])
    }

    pub fn egg(center: Point, a: f64, b: f64, amplitude: f64, frequency: u32) -> Result<Self> {
        Self::new(vec![Component::Egg { center, a, b, amplitude, frequency }])
    }

    /// Disjoint union of existing shapes.
    pub fn union(shapes: &[Shape]) -> Result<Self> {
        Self::new(shapes.iter().flat_map(|s| s.components.iter().cloned()).collect())
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Radius of a ball about the origin containing `Ω̄`.
    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    /// Lebesgue measure `|Ω|`.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Empirical bound on the error of [`Shape::signed_distance`] near `∂Ω`.
    pub fn distance_error_bound(&self) -> f64 {
        self.distance_error_bound
    }

    pub fn signed_distance(&self, p: &Point) -> f64 {
        self.components.iter().map(|c| c.signed_distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// Closed-set membership via the implicit functions (no projection).
    pub fn contains(&self, p: &Point) -> bool {
        self.components.iter().any(|c| c.implicit(p) <= 0.0)
    }

    /// Index of the component nearest to `p`.
    pub fn nearest_component(&self, p: &Point) -> usize {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.signed_distance(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Closest point of `∂Ω`, with component index and curve parameter.
    pub fn closest_point(&self, p: &Point) -> (Point, usize, f64) {
        let mut best = (*p, 0, 0.0, f64::INFINITY);
        for (i, c) in self.components.iter().enumerate() {
            let (q, t) = c.closest_point(p);
            let d = (q - p).norm();
            if d < best.3 {
                best = (q, i, t, d);
            }
        }
        (best.0, best.1, best.2)
    }

    /// Outward unit normal at the boundary point closest to `p`.
    pub fn normal_near(&self, p: &Point) -> Point {
        let (_, i, t) = self.closest_point(p);
        self.components[i].normal(t)
    }

    /// Gradient of the signed distance by central differences.
    pub fn gradient(&self, p: &Point, step: f64) -> Point {
        let ex = pt(step, 0.0);
        let ey = pt(0.0, step);
        pt(
            self.signed_distance(&(p + ex)) - self.signed_distance(&(p - ex)),
            self.signed_distance(&(p + ey)) - self.signed_distance(&(p - ey)),
        ) / (2.0 * step)
    }

    /// Largest observed `|sd(x) − sd(y)| / |x − y|` over the probe pairs.
    pub fn lipschitz_estimate(&self, probes: &[(Point, Point)]) -> f64 {
        probes
            .iter()
            .filter(|(x, y)| (x - y).norm() > 0.0)
            .map(|(x, y)| (self.signed_distance(x) - self.signed_distance(y)).abs() / (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Whether the shape is a single exact ball (enables closed-form oracles).
    pub fn as_ball(&self) -> Option<(Point, f64)> {
        match self.components.as_slice() {
            [Component::Ball { center, radius }] => Some((*center, *radius)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test_shapes() -> Vec<Shape> {
        vec![
            Shape::ball(pt(0.0, 0.0), 1.0).unwrap(),
            Shape::ellipse(pt(0.2, -0.1), 2.0, 1.0).unwrap(),
            Shape::egg(pt(0.0, 0.0), 1.5, 1.0, 0.3, 1).unwrap(),
            Shape::superellipse(pt(0.0, 0.0), 1.2, 0.8, 4.0).unwrap(),
            Shape::union(&[Shape::ball(pt(-1.5, 0.0), 1.0).unwrap(), Shape::ball(pt(1.5, 0.0), 1.0).unwrap()]).unwrap(),
        ]
    }

    #[test]
    fn ellipse_projection_matches_dense_polyline() {
        let s = Shape::ellipse(pt(0.0, 0.0), 2.0, 1.0).unwrap();
        let c = &s.components()[0];
        let dense: Vec<Point> = (0..200_000).map(|i| c.point(TAU * i as f64 / 200_000.0)).collect();
        for p in [pt(0.3, 0.2), pt(3.0, 1.0), pt(-1.9, 0.05), pt(0.0, 2.5), pt(1.0, -0.4)] {
            let brute = dense.iter().map(|q| (q - p).norm()).fold(f64::INFINITY, f64::min);
            let sd = s.signed_distance(&p);
            assert!((sd.abs() - brute).abs() < 1e-7, "{p:?}: {sd} vs {brute}");
        }
    }

    #[test]
    fn sign_convention_and_boundedness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s in test_shapes() {
            let r = s.bounding_radius();
            for _ in 0..400 {
                let ang: f64 = rng.random_range(0.0..TAU);
                let rad: f64 = rng.random_range(r * 1.01..4.0 * r);
                let p = pt(rad * ang.cos(), rad * ang.sin());
                assert!(s.signed_distance(&p) > 0.0);
            }
            for c in s.components() {
                assert!(s.signed_distance(&c.center()) < 0.0);
            }
        }
    }

    #[test]
    fn lipschitz_on_random_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in test_shapes() {
            let r = s.bounding_radius() * 1.5;
            let probes: Vec<(Point, Point)> = (0..600)
                .map(|_| {
                    let x = pt(rng.random_range(-r..r), rng.random_range(-r..r));
                    let d = pt(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
                    (x, x + d)
                })
                .collect();
            let lip = s.lipschitz_estimate(&probes);
            assert!(lip <= 1.0 + 1e-6, "lipschitz {lip}");
        }
    }

    #[test]
    fn error_bounds_are_small() {
        for s in test_shapes() {
            assert!(s.distance_error_bound() < 1e-9, "{}", s.distance_error_bound());
        }
    }

    #[test]
    fn areas() {
        let s = Shape::ellipse(pt(0.0, 0.0), 2.0, 1.0).unwrap();
        assert!((s.area() - 2.0 * PI).abs() < 1e-12);
        // egg area: the odd bump integrates to zero against sin²
        let e = Shape::egg(pt(0.0, 0.0), 2.0, 1.0, 0.4, 1).unwrap();
        assert!((e.area() - 2.0 * PI).abs() < 1e-10, "{}", e.area());
        // superellipse area 4ab Γ(1+1/p)² / Γ(1+2/p); p = 4
        let g = |x: f64| statrs::function::gamma::gamma(x);
        let exact = 4.0 * 1.2 * 0.8 * g(1.25).powi(2) / g(1.5);
        let se = Shape::superellipse(pt(0.0, 0.0), 1.2, 0.8, 4.0).unwrap();
        assert!((se.area() - exact).abs() < 1e-6, "{} vs {exact}", se.area());
    }

    #[test]
    fn overlapping_components_rejected() {
        let a = Shape::ball(pt(0.0, 0.0), 1.0).unwrap();
        let b = Shape::ball(pt(1.5, 0.0), 1.0).unwrap();
        assert!(matches!(Shape::union(&[a, b]), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Shape::ball(pt(0.0, 0.0), -1.0).is_err());
        assert!(Shape::egg(pt(0.0, 0.0), 1.0, 1.0, 1.2, 1).is_err());
        assert!(Shape::superellipse(pt(0.0, 0.0), 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn egg_curve_lies_on_its_implicit_zero_set() {
        let c = Component::Egg { center: pt(0.1, 0.2), a: 1.5, b: 1.0, amplitude: 0.3, frequency: 3 };
        for i in 0..97 {
            let t = TAU * i as f64 / 97.0;
            assert!(c.implicit(&c.point(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let comps = [
            Component::Egg { center: pt(0.0, 0.0), a: 1.5, b: 1.0, amplitude: 0.3, frequency: 3 },
            Component::Ellipse { center: pt(0.0, 0.0), a: 2.0, b: 1.0 },
            Component::Superellipse { center: pt(0.0, 0.0), a: 1.0, b: 0.7, exponent: 3.0 },
        ];
        for c in comps {
            for i in 0..13 {
                let t = 0.1 + i as f64 * 0.45;
                let h = 1e-5;
                let fd1 = (c.point(t + h) - c.point(t - h)) / (2.0 * h);
                let fd2 = (c.derivative(t + h) - c.derivative(t - h)) / (2.0 * h);
                assert!((fd1 - c.derivative(t)).norm() < 1e-8);
                assert!((fd2 - c.second_derivative(t)).norm() < 1e-5);
            }
        }
    }
}
