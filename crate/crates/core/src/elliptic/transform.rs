use serde::Serialize;

use crate::discretization::GridField;
use crate::parabolic::Trajectory;
use crate::{Error, Result};

/// `v̂ = ∫₀^T e^{−t} u_h dt` by the trapezoid rule, plus the tail estimate.
#[derive(Clone, Debug)]
pub struct LaplaceTransform {
    /// Trapezoid sum plus the tail midpoint.
    pub field: GridField,
    pub horizon: f64,
    /// The tail `∫_T^∞ e^{−t} u dt` lies in `[0, e^{−T}]` because `0 ≤ u ≤ 1`.
    pub tail: TailInterval,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailInterval {
    pub lower: f64,
    pub upper: f64,
    pub midpoint: f64,
}

/// Time transform of a stored trajectory (all time levels are needed).
pub fn laplace_of_trajectory(traj: &Trajectory) -> Result<LaplaceTransform> {
    if traj.fields.len() != traj.times.len() {
        return Err(Error::InvalidScenario("the time transform needs every time level; run with store_fields".into()));
    }
    let horizon = *traj.times.last().expect("nonempty trajectory");
    let mut acc = vec![0.0; traj.grid.cell_count()];
    for k in 1..traj.times.len() {
        let (t0, t1) = (traj.times[k - 1], traj.times[k]);
        let (w0, w1) = (0.5 * (t1 - t0) * (-t0).exp(), 0.5 * (t1 - t0) * (-t1).exp());
        let (u0, u1) = (&traj.fields[k - 1].values, &traj.fields[k].values);
        for ((a, x), y) in acc.iter_mut().zip(u0).zip(u1) {
            *a += w0 * x + w1 * y;
        }
    }
    let upper = (-horizon).exp();
    let tail = TailInterval { lower: 0.0, upper, midpoint: 0.5 * upper };
    acc.iter_mut().for_each(|a| *a += tail.midpoint);
    Ok(LaplaceTransform { field: GridField::new(traj.grid, acc), horizon, tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{Grid, TraceRule};
    use crate::parabolic::RunStats;

    fn constant_trajectory(value: f64, horizon: f64, steps: usize) -> Trajectory {
        let grid = Grid::new(16, 1.0).unwrap();
        let times: Vec<f64> = (0..=steps).map(|k| horizon * k as f64 / steps as f64).collect();
        Trajectory {
            grid,
            fields: times.iter().map(|_| GridField::new(grid, vec![value; 256])).collect(),
            times,
            samples: Vec::new(),
            traces: Vec::new(),
            trace_rule: TraceRule::OneSided,
            stats: RunStats::default(),
        }
    }

    #[test]
    fn constant_one_integrates_to_one() {
        let t = 10.0;
        let steps = 4000;
        let tr = laplace_of_trajectory(&constant_trajectory(1.0, t, steps)).unwrap();
        let dt = t / steps as f64;
        let expected = 1.0 - (-t).exp() + 0.5 * (-t).exp();
        // trapezoid error of ∫e^{−t}: (dt²/12)(1 − e^{−T})
        for v in &tr.field.values {
            assert!((v - expected).abs() < dt * dt / 12.0 * 1.01);
            assert!((v - 1.0).abs() < (-t).exp());
        }
    }

    #[test]
    fn tail_correction_is_bounded() {
        for t in [1.0, 5.0, 10.0] {
            let tr = laplace_of_trajectory(&constant_trajectory(0.3, t, 100)).unwrap();
            assert!(tr.tail.midpoint <= (-t).exp() && tr.tail.upper == (-t).exp());
        }
    }

    #[test]
    fn missing_levels_rejected() {
        let mut traj = constant_trajectory(1.0, 1.0, 10);
        traj.fields.truncate(1);
        assert!(laplace_of_trajectory(&traj).is_err());
    }
}
