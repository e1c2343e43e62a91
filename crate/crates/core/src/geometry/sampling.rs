use std::f64::consts::TAU;

use serde::Serialize;

use super::{Point, Shape};
use crate::{Error, Result};

/// A point of `∂Ω` with its outward normal and quadrature weight.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InterfaceSample {
    /// Index of the component the sample belongs to.
    pub component: usize,
    /// Curve parameter of the sample within its component.
    pub parameter: f64,
    #[serde(serialize_with = "serialize_point")]
    pub point: Point,
    #[serde(serialize_with = "serialize_point")]
    pub normal: Point,
    /// Arclength element for the periodic trapezoid rule.
    pub weight: f64,
}

fn serialize_point<S: serde::Serializer>(p: &Point, s: S) -> std::result::Result<S::Ok, S::Error> {
    [p.x, p.y].serialize(s)
}

/// Samples every component of `∂Ω` at `n` equispaced curve parameters.
///
/// Samples are ordered counterclockwise per component, components in order.
/// The weights form the periodic trapezoid rule for `∫_{∂Ω} f ds`, which
/// converges spectrally for the smooth built-in curves.
pub fn sample_interface(shape: &Shape, n: usize) -> Result<Vec<InterfaceSample>> {
    if n < 4 {
        return Err(Error::SamplingFailure {
            component: 0,
            reason: format!("at least 4 samples per component are required, got {n}"),
        });
    }
    let dt = TAU / n as f64;
    let probe = 1e-6 * shape.bounding_radius().max(1.0);
    let tolerance = 1e-8 * shape.bounding_radius().max(1.0) + shape.distance_error_bound();
    let mut samples = Vec::with_capacity(n * shape.component_count());
    for (ci, comp) in shape.components().iter().enumerate() {
        for k in 0..n {
            let t = k as f64 * dt;
            let point = comp.point(t);
            let normal = comp.normal(t);
            let weight = comp.derivative(t).norm() * dt;
            if !(point.x.is_finite() && point.y.is_finite() && weight.is_finite()) {
                return Err(Error::SamplingFailure {
                    component: ci,
                    reason: format!("non-finite curve data at parameter {t}"),
                });
            }
            let sd = shape.signed_distance(&point);
            if sd.abs() > tolerance {
                return Err(Error::SamplingFailure {
                    component: ci,
                    reason: format!("sample at parameter {t} is {sd:.3e} off the zero level set"),
                });
            }
            if shape.signed_distance(&(point + normal * probe)) <= 0.0 {
                return Err(Error::SamplingFailure {
                    component: ci,
                    reason: format!("normal at parameter {t} does not point outward"),
                });
            }
            samples.push(InterfaceSample { component: ci, parameter: t, point, normal, weight });
        }
    }
    Ok(samples)
}

/// Length of `∂Ω` by the periodic trapezoid rule with 4096 nodes per component.
pub fn perimeter(shape: &Shape) -> f64 {
    let m = 4096;
    shape
        .components()
        .iter()
        .map(|c| (0..m).map(|k| c.derivative(TAU * k as f64 / m as f64).norm()).sum::<f64>())
        .sum::<f64>()
        * TAU
        / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    #[test]
    fn unit_circle_four_samples() {
        let s = Shape::ball(pt(0.0, 0.0), 1.0).unwrap();
        let samples = sample_interface(&s, 4).unwrap();
        let expected = [pt(1.0, 0.0), pt(0.0, 1.0), pt(-1.0, 0.0), pt(0.0, -1.0)];
        for (smp, e) in samples.iter().zip(expected) {
            assert!((smp.point - e).norm() < 1e-15);
            assert!((smp.normal - e).norm() < 1e-15);
        }
    }

    #[test]
    fn ellipse_perimeter_from_weights() {
        // 30-digit value of 4·a·E(1 − b²/a²) for a = 2, b = 1
        let exact = 9.688_448_220_547_676;
        let s = Shape::ellipse(pt(0.0, 0.0), 2.0, 1.0).unwrap();
        let total: f64 = sample_interface(&s, 64).unwrap().iter().map(|x| x.weight).sum();
        assert!((total - exact).abs() / exact < 1e-6, "{total}");
        assert!((perimeter(&s) - exact).abs() < 1e-12);
    }

    #[test]
    fn two_balls_give_two_components() {
        let s =
            Shape::union(&[Shape::ball(pt(-2.0, 0.0), 1.0).unwrap(), Shape::ball(pt(2.0, 0.0), 1.0).unwrap()]).unwrap();
        let samples = sample_interface(&s, 16).unwrap();
        assert_eq!(samples.iter().filter(|x| x.component == 0).count(), 16);
        assert_eq!(samples.iter().filter(|x| x.component == 1).count(), 16);
        assert!(samples[..16].iter().all(|x| x.point.x < 0.0));
    }

    #[test]
    fn normals_are_unit_and_outward() {
        let s = Shape::egg(pt(0.0, 0.0), 1.5, 1.0, 0.3, 1).unwrap();
        for smp in sample_interface(&s, 64).unwrap() {
            assert!((smp.normal.norm() - 1.0).abs() < 1e-12);
            assert!(s.signed_distance(&(smp.point + smp.normal * 1e-4)) > 0.0);
            assert!(s.signed_distance(&(smp.point - smp.normal * 1e-4)) < 0.0);
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let s = Shape::ball(pt(0.0, 0.0), 1.0).unwrap();
        assert!(matches!(sample_interface(&s, 3), Err(Error::SamplingFailure { .. })));
    }
}
