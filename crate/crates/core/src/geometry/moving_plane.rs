use rayon::prelude::*;
use serde::Serialize;

use super::{pt, reflect_point, sample_interface, Hyperplane, InterfaceSample, Point, Shape};
use crate::{Error, Result};

/// Reflected points this close to `∂Ω` (from outside) still count as contained.
const CONTAINMENT_SLACK: f64 = 1e-9;
/// Tolerance on `ν·γ ≥ −ε` at the plane crossings.
const ORTHOGONALITY_SLACK: f64 = 1e-9;

/// Which of the two stopping events ends the plane sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PlaneEvent {
    /// The reflected cap touches `∂Ω` at a point off the plane.
    InternalTangency,
    /// The plane meets `∂Ω` orthogonally (`ν·γ = 0` at a crossing).
    Orthogonality,
}

/// Both events occurred within the bisection tolerance, or the
/// non-tangency side condition of the orthogonal event failed.
#[derive(Clone, Debug, Serialize)]
pub struct AmbiguousEvent {
    pub tangency_contact: Option<[f64; 2]>,
    pub orthogonal_contact: Option<[f64; 2]>,
    pub reason: String,
}

/// Outcome of sweeping the plane `x·γ = λ` downward from the top of `Ω`.
#[derive(Clone, Debug)]
pub struct MovingPlaneResult {
    pub plane: Hyperplane,
    pub lambda_star: f64,
    /// The reported event; internal tangency is preferred when ambiguous.
    pub event: PlaneEvent,
    /// `p` for internal tangency, `q` for orthogonality; on `∂Ω`.
    pub contact_point: Point,
    /// Largest `|sd(x^λ*)|` over the interface samples.
    pub hausdorff: f64,
    pub symmetric: bool,
    /// Whether γ is nowhere tangential to `∂Ω` strictly above the plane.
    pub side_condition: bool,
    pub ambiguity: Option<AmbiguousEvent>,
}

/// Settings for [`critical_plane_scan_with`].
#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Final bracket width of the bisection on `λ`.
    pub tol: f64,
    pub samples_per_component: usize,
    pub coarse_steps: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { tol: 1e-4, samples_per_component: 2048, coarse_steps: 64 }
    }
}

impl ScanOptions {
    /// Hausdorff threshold for the symmetry verdict.
    pub fn symmetry_tolerance(&self) -> f64 {
        (10.0 * self.tol).max(1e-6)
    }
}

/// Per-direction results and the overall ball-likeness verdict.
#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub results: Vec<MovingPlaneResult>,
    /// Least-squares common point of the critical planes.
    pub center: Point,
    /// Largest distance from `center` to a critical plane.
    pub center_residual: f64,
    pub ball_like: bool,
}

/// Critical plane for direction `gamma` with the default sampling density.
pub fn critical_plane_scan(shape: &Shape, gamma: Point, tol: f64) -> Result<MovingPlaneResult> {
    critical_plane_scan_with(shape, gamma, &ScanOptions { tol, ..ScanOptions::default() })
}

pub fn critical_plane_scan_with(shape: &Shape, gamma: Point, options: &ScanOptions) -> Result<MovingPlaneResult> {
    let samples = sample_interface(shape, options.samples_per_component)?;
    scan_samples(shape, &samples, gamma, options)
}

/// Scans `directions` equispaced directions `γ_k = (cos 2πk/m, sin 2πk/m)`.
///
/// The verdict is ball-like iff every direction is symmetric and all critical
/// planes pass within `center_tol` of one common point.
pub fn symmetry_report(
    shape: &Shape,
    directions: usize,
    options: &ScanOptions,
    center_tol: f64,
) -> Result<SymmetryReport> {
    if directions < 2 {
        return Err(Error::InvalidScenario("symmetry_report needs at least 2 directions".into()));
    }
    let samples = sample_interface(shape, options.samples_per_component)?;
    let results = (0..directions)
        .into_par_iter()
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / directions as f64;
            scan_samples(shape, &samples, pt(theta.cos(), theta.sin()), options)
        })
        .collect::<Result<Vec<_>>>()?;
    let (center, center_residual) = common_point(&results);
    let ball_like = results.iter().all(|r| r.symmetric) && center_residual <= center_tol;
    Ok(SymmetryReport { results, center, center_residual, ball_like })
}

fn common_point(results: &[MovingPlaneResult]) -> (Point, f64) {
    let mut m = nalgebra::Matrix2::<f64>::zeros();
    let mut b = Point::zeros();
    for r in results {
        let g = r.plane.gamma();
        m += g * g.transpose();
        b += g * r.lambda_star;
    }
    let center = m.try_inverse().map(|inv| inv * b).unwrap_or_else(Point::zeros);
    let residual = results.iter().map(|r| (center.dot(&r.plane.gamma()) - r.lambda_star).abs()).fold(0.0, f64::max);
    (center, residual)
}

/// Largest containment violation `max sd(x^λ)` over cap samples, with its sample.
fn worst_violation(shape: &Shape, samples: &[InterfaceSample], plane: &Hyperplane) -> Option<(usize, f64)> {
    samples
        .par_iter()
        .enumerate()
        .filter(|(_, s)| plane.height(&s.point) > 0.0)
        .filter_map(|(i, s)| {
            let r = reflect_point(&s.point, plane);
            if shape.contains(&r) {
                return None;
            }
            let sd = shape.signed_distance(&r);
            (sd > CONTAINMENT_SLACK).then_some((i, sd))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
}

/// Crossing points of `∂Ω` with the plane and the value `ν·γ` there.
fn crossings(shape: &Shape, samples: &[InterfaceSample], plane: &Hyperplane) -> Vec<(Point, f64)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < samples.len() {
        let comp = samples[start].component;
        let end = samples[start..].iter().position(|s| s.component != comp).map_or(samples.len(), |p| start + p);
        let block = &samples[start..end];
        let curve = &shape.components()[comp];
        let tau = std::f64::consts::TAU;
        for k in 0..block.len() {
            let a = &block[k];
            let b = &block[(k + 1) % block.len()];
            let ha = plane.height(&a.point);
            let hb = plane.height(&b.point);
            if (ha > 0.0) == (hb > 0.0) {
                continue;
            }
            let (mut t0, mut t1) = (a.parameter, if k + 1 == block.len() { tau } else { b.parameter });
            let up = ha > 0.0;
            for _ in 0..60 {
                let tm = 0.5 * (t0 + t1);
                if (plane.height(&curve.point(tm)) > 0.0) == up {
                    t0 = tm;
                } else {
                    t1 = tm;
                }
            }
            let t = 0.5 * (t0 + t1);
            out.push((curve.point(t), curve.normal(t).dot(&plane.gamma())));
        }
        start = end;
    }
    out
}

fn is_valid(shape: &Shape, samples: &[InterfaceSample], plane: &Hyperplane) -> bool {
    crossings(shape, samples, plane).iter().all(|(_, ng)| *ng >= -ORTHOGONALITY_SLACK)
        && worst_violation(shape, samples, plane).is_none()
}

fn scan_samples(
    shape: &Shape,
    samples: &[InterfaceSample],
    gamma: Point,
    options: &ScanOptions,
) -> Result<MovingPlaneResult> {
    let norm = gamma.norm();
    if !(norm.is_finite() && norm > 0.0) || samples.is_empty() {
        return Err(Error::DegenerateDirection(gamma.x, gamma.y));
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidScenario(format!("scan tolerance must be positive, got {}", options.tol)));
    }
    let gamma = gamma / norm;
    let heights: Vec<f64> = samples.iter().map(|s| s.point.dot(&gamma)).collect();
    let top = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bottom = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let plane_at = |lambda: f64| Hyperplane::new(gamma, lambda);

    // coarse sweep downward until the first invalid offset
    let step = (top - bottom) / options.coarse_steps.max(1) as f64;
    let mut valid = top;
    let mut invalid = None;
    for k in 1..=options.coarse_steps.max(1) {
        let lambda = top - k as f64 * step;
        if is_valid(shape, samples, &plane_at(lambda)) {
            valid = lambda;
        } else {
            invalid = Some(lambda);
            break;
        }
    }
    let mut invalid = invalid.ok_or(Error::DegenerateDirection(gamma.x, gamma.y))?;
    while valid - invalid > options.tol {
        let mid = 0.5 * (valid + invalid);
        if is_valid(shape, samples, &plane_at(mid)) {
            valid = mid;
        } else {
            invalid = mid;
        }
    }
    let lambda_star = 0.5 * (valid + invalid);
    let plane = plane_at(lambda_star);

    // classify at the invalid end of the bracket
    let probe = plane_at(invalid);
    let far = 10.0 * options.tol;
    let tangency = worst_violation(shape, samples, &probe).and_then(|(i, _)| {
        let reflected = reflect_point(&samples[i].point, &probe);
        let (p, _, _) = shape.closest_point(&reflected);
        (plane.height(&p).abs() > far).then_some(p)
    });
    let orthogonal = {
        let mut cs = crossings(shape, samples, &probe);
        cs.sort_by(|a, b| a.1.total_cmp(&b.1));
        let failed = cs.first().is_some_and(|c| c.1 < -ORTHOGONALITY_SLACK);
        // a near-plane containment failure is also an orthogonal contact
        (failed || tangency.is_none()).then(|| {
            cs.first()
                .map(|c| c.0)
                .map(|q| shape.closest_point(&(q + gamma * (lambda_star - q.dot(&gamma)))).0)
                .unwrap_or_else(|| samples[0].point)
        })
    };

    let side_condition =
        samples.iter().filter(|s| plane.height(&s.point) > far).all(|s| s.normal.dot(&gamma).abs() >= 1e-9);

    let (event, contact_point) = match tangency {
        Some(p) => (PlaneEvent::InternalTangency, p),
        None => (PlaneEvent::Orthogonality, orthogonal.unwrap_or(samples[0].point)),
    };
    let ambiguity = match (tangency, orthogonal) {
        (Some(p), Some(q)) => Some(AmbiguousEvent {
            tangency_contact: Some([p.x, p.y]),
            orthogonal_contact: Some([q.x, q.y]),
            reason: "internal tangency and orthogonality occur within the bisection tolerance".into(),
        }),
        (None, Some(q)) if !side_condition => Some(AmbiguousEvent {
            tangency_contact: None,
            orthogonal_contact: Some([q.x, q.y]),
            reason: "gamma is tangential to the boundary above the critical plane".into(),
        }),
        _ => None,
    };

    let hausdorff = samples
        .par_iter()
        .map(|s| shape.signed_distance(&reflect_point(&s.point, &plane)).abs())
        .reduce(|| 0.0, f64::max);
    let symmetric = hausdorff <= options.symmetry_tolerance();

    Ok(MovingPlaneResult { plane, lambda_star, event, contact_point, hausdorff, symmetric, side_condition, ambiguity })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> ScanOptions {
        ScanOptions { tol: 1e-4, samples_per_component: 512, coarse_steps: 64 }
    }

    #[test]
    fn ball_critical_plane_through_center() {
        let s = Shape::ball(pt(0.3, -0.2), 1.0).unwrap();
        for theta in [0.0, 0.4, 2.0, 4.0] {
            let g = pt(f64::cos(theta), f64::sin(theta));
            let r = critical_plane_scan_with(&s, g, &opts()).unwrap();
            assert!((r.lambda_star - pt(0.3, -0.2).dot(&g)).abs() <= 1e-4);
            assert!(r.symmetric);
            assert!(s.signed_distance(&r.contact_point).abs() < 1e-9);
        }
    }

    #[test]
    fn ellipse_axis_direction_is_symmetric() {
        let s = Shape::ellipse(pt(0.0, 0.0), 2.0, 1.0).unwrap();
        let r = critical_plane_scan_with(&s, pt(1.0, 0.0), &opts()).unwrap();
        assert!(r.lambda_star.abs() <= 1e-4);
        assert!(r.symmetric);
    }

    #[test]
    fn egg_stops_early_and_is_not_symmetric() {
        let s = Shape::egg(pt(0.0, 0.0), 1.5, 1.0, 0.3, 1).unwrap();
        let r = critical_plane_scan_with(&s, pt(1.0, 0.0), &opts()).unwrap();
        assert!(r.lambda_star > 1e-3, "{}", r.lambda_star);
        assert!(!r.symmetric);
    }

    #[test]
    fn containment_holds_above_critical_plane() {
        let s = Shape::egg(pt(0.0, 0.0), 1.5, 1.0, 0.3, 1).unwrap();
        let samples = sample_interface(&s, 512).unwrap();
        for theta in [0.0, 1.0, 2.5] {
            let g = pt(f64::cos(theta), f64::sin(theta));
            let r = scan_samples(&s, &samples, g, &opts()).unwrap();
            for k in 1..20 {
                let plane = Hyperplane::new(g, r.lambda_star + 1e-4 + 0.05 * k as f64);
                assert!(worst_violation(&s, &samples, &plane).is_none());
            }
        }
    }

    #[test]
    fn report_separates_ball_and_ellipse() {
        let ball = Shape::ball(pt(0.0, 0.0), 1.0).unwrap();
        let rep = symmetry_report(&ball, 8, &opts(), 1e-3).unwrap();
        assert!(rep.ball_like);
        assert!(rep.center.norm() < 1e-4);
        let ell = Shape::ellipse(pt(0.0, 0.0), 2.0, 1.0).unwrap();
        let rep = symmetry_report(&ell, 8, &opts(), 1e-3).unwrap();
        assert!(!rep.ball_like);
        let sym: Vec<bool> = rep.results.iter().map(|r| r.symmetric).collect();
        assert_eq!(sym, vec![true, false, true, false, true, false, true, false]);
    }

    #[test]
    fn zero_direction_is_degenerate() {
        let s = Shape::ball(pt(0.0, 0.0), 1.0).unwrap();
        assert!(matches!(critical_plane_scan(&s, pt(0.0, 0.0), 1e-3), Err(Error::DegenerateDirection(..))));
    }
}
