use serde::Serialize;

use super::{Scenario, TimeScheme};
use crate::discretization::{
    assemble_operator, face_conductivities_with, indicator, solve_linear_from, Grid, GridField, Operator,
    OuterBoundary, TraceRule, TraceStencil,
};
use crate::geometry::{sample_interface, InterfaceSample};
use crate::Result;

/// Discrete-in-time solution `u_h(·, t_k)` with interface traces.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: Grid,
    pub times: Vec<f64>,
    /// Every time level when the scenario stores fields, else only the last.
    pub fields: Vec<GridField>,
    pub samples: Vec<InterfaceSample>,
    /// `traces[k][m]`: value at sample `m` and time `times[k]`.
    pub traces: Vec<Vec<f64>>,
    pub trace_rule: TraceRule,
    pub stats: RunStats,
}

/// Bookkeeping of a parabolic run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub dt: f64,
    pub solver_iterations: usize,
    pub max_solver_residual: f64,
    /// `Σ u·h²` at `t = 0`.
    pub initial_heat: f64,
    /// Largest relative change of `Σ u·h²` over the run.
    pub heat_drift: f64,
    /// `Σ χ·h² − |Ω|`: mass error of the discrete initial datum.
    pub initial_mass_error: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// Largest amount removed by clamping to `[0, 1]` (solver round-off).
    pub max_clamp: f64,
    pub samples_with_stencil_collision: usize,
}

impl Trajectory {
    pub fn final_field(&self) -> &GridField {
        self.fields.last().expect("trajectory has at least one field")
    }

    /// Index of the stored time level closest to `t`.
    pub fn time_index(&self, t: f64) -> usize {
        self.times.iter().enumerate().min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs())).map_or(0, |(k, _)| k)
    }

    /// Weights of the trace samples (arclength elements).
    pub fn sample_weights(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.weight).collect()
    }
}

fn clamp_unit(values: &mut [f64]) -> f64 {
    let mut worst = 0.0f64;
    for v in values.iter_mut() {
        let c = v.clamp(0.0, 1.0);
        worst = worst.max((c - *v).abs());
        *v = c;
    }
    worst
}

/// Solves `u_t = div(σ∇u)`, `u(·,0) = χ_Ω` on the Neumann box.
///
/// Backward Euler clamps each level to `[0, 1]`; the clamp only removes
/// linear-solver round-off and its size is reported in [`RunStats::max_clamp`].
/// Crank–Nicolson levels are left unclamped.
pub fn solve_cauchy(scenario: &Scenario) -> Result<Trajectory> {
    scenario.validate()?;
    let grid = scenario.grid;
    let h2 = grid.cell_volume();
    let field =
        face_conductivities_with(&grid, &scenario.shape, scenario.sigma_plus, scenario.sigma_minus, scenario.face_rule);
    let samples = sample_interface(&scenario.shape, scenario.samples_per_component)?;
    let stencil = TraceStencil::new(&grid, &scenario.shape, &samples)?;
    let rule = scenario.trace_rule;
    let traces_of = |u: &[f64]| stencil.apply(u).iter().map(|t| t.value(rule)).collect::<Vec<f64>>();

    let (steps, dt) = scenario.steps();
    let mut u = indicator(&grid, &scenario.shape, scenario.indicator);
    let heat = |u: &[f64]| u.iter().sum::<f64>() * h2;
    let initial_heat = heat(&u);
    let mut stats = RunStats {
        steps,
        dt,
        initial_heat,
        initial_mass_error: initial_heat - scenario.shape.area(),
        min_value: u.iter().copied().fold(f64::INFINITY, f64::min),
        max_value: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        samples_with_stencil_collision: stencil.collisions().iter().filter(|&&c| c).count(),
        ..RunStats::default()
    };
    let mut times = vec![0.0];
    let mut traces = vec![traces_of(&u)];
    let mut fields = vec![GridField::new(grid, u.clone())];

    let tol = scenario.linear_tol;
    let cap = 20 * grid.cell_count();
    let solve = |op: &Operator, rhs: &[f64], guess: &[f64], stats: &mut RunStats| -> Result<Vec<f64>> {
        let sol = solve_linear_from(op, rhs, Some(guess), tol, cap)?;
        stats.solver_iterations += sol.iterations;
        stats.max_solver_residual = stats.max_solver_residual.max(sol.residual);
        sol.into_result()
    };

    let be = assemble_operator(&grid, &field, 1.0 / dt, OuterBoundary::Neumann);
    // a backward-Euler half step and the Crank–Nicolson step share the
    // left-hand side (2h²/dt)·I + K
    let (cn, stiffness) = match scenario.scheme {
        TimeScheme::BackwardEuler => (None, None),
        TimeScheme::CnRannacher => (
            Some(assemble_operator(&grid, &field, 2.0 / dt, OuterBoundary::Neumann)),
            Some(assemble_operator(&grid, &field, 0.0, OuterBoundary::Neumann)),
        ),
    };
    for k in 1..=steps {
        u = match scenario.scheme {
            TimeScheme::BackwardEuler => {
                let rhs: Vec<f64> = u.iter().map(|v| v * h2 / dt).collect();
                let mut next = solve(&be, &rhs, &u, &mut stats)?;
                stats.max_clamp = stats.max_clamp.max(clamp_unit(&mut next));
                next
            }
            TimeScheme::CnRannacher if k == 1 => {
                // two backward-Euler half steps damp the datum's discontinuity
                let op = cn.as_ref().expect("half-step operator");
                let mut w = u.clone();
                for _ in 0..2 {
                    let rhs: Vec<f64> = w.iter().map(|v| v * 2.0 * h2 / dt).collect();
                    w = solve(op, &rhs, &w, &mut stats)?;
                }
                w
            }
            TimeScheme::CnRannacher => {
                let ku = stiffness.as_ref().expect("stiffness").mul(&u);
                let rhs: Vec<f64> = u.iter().zip(&ku).map(|(v, a)| v * 2.0 * h2 / dt - a).collect();
                solve(cn.as_ref().expect("CN operator"), &rhs, &u, &mut stats)?
            }
        };
        stats.min_value = stats.min_value.min(u.iter().copied().fold(f64::INFINITY, f64::min));
        stats.max_value = stats.max_value.max(u.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        stats.heat_drift = stats.heat_drift.max(((heat(&u) - initial_heat) / initial_heat).abs());
        times.push(k as f64 * dt);
        traces.push(traces_of(&u));
        if scenario.store_fields || k == steps {
            if !scenario.store_fields {
                fields.clear();
            }
            fields.push(GridField::new(grid, u.clone()));
        }
    }
    if scenario.store_fields {
        debug_assert_eq!(fields.len(), times.len());
    }
    Ok(Trajectory { grid, times, fields, samples, traces, trace_rule: rule, stats })
}

/// Values at arbitrary interface points for every stored time level.
///
/// Uses the trajectory's trace rule; needs the fields of every level, so the
/// scenario must have been run with `store_fields`.
pub fn interface_trace(
    traj: &Trajectory,
    shape: &crate::geometry::Shape,
    samples: &[InterfaceSample],
) -> Result<Vec<Vec<f64>>> {
    let stencil = TraceStencil::new(&traj.grid, shape, samples)?;
    Ok(traj.fields.iter().map(|f| stencil.apply_field(f).iter().map(|t| t.value(traj.trace_rule)).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pt, Shape};

    fn ball_scenario(n: usize, t: f64) -> Scenario {
        let s = Shape::ball(pt(0.0, 0.0), 1.0).unwrap();
        Scenario::new(s, 2.0, 1.0, Grid::new(n, 3.0).unwrap(), t, None).unwrap().with_samples(32)
    }

    #[test]
    fn backward_euler_is_bounded_and_conservative() {
        let sc = ball_scenario(48, 1.0);
        let traj = solve_cauchy(&sc).unwrap();
        assert!(traj.stats.min_value >= 0.0 && traj.stats.max_value <= 1.0);
        assert!(traj.stats.heat_drift <= 1e-10, "{}", traj.stats.heat_drift);
        assert!(traj.stats.max_clamp <= 1e-9, "{}", traj.stats.max_clamp);
        assert_eq!(traj.times.len(), traj.stats.steps + 1);
        assert_eq!(traj.fields.len(), traj.times.len());
    }

    #[test]
    fn initial_trace_sits_at_one_half() {
        let traj = solve_cauchy(&ball_scenario(64, 0.1)).unwrap();
        for v in &traj.traces[0] {
            assert!((v - 0.5).abs() < 0.05, "{v}");
        }
    }

    #[test]
    fn crank_nicolson_overshoot_is_small() {
        let sc = ball_scenario(48, 0.5).with_scheme(TimeScheme::CnRannacher);
        let traj = solve_cauchy(&sc).unwrap();
        assert!(traj.stats.min_value >= -1e-3 && traj.stats.max_value <= 1.0 + 1e-3);
        assert!(traj.stats.heat_drift <= 1e-10);
    }

    #[test]
    fn long_time_equilibrates_to_mean() {
        let s = Shape::ball(pt(0.0, 0.0), 0.5).unwrap();
        let mut sc = Scenario::new(s, 2.0, 1.0, Grid::new(16, 1.0).unwrap(), 40.0, Some(0.5)).unwrap();
        sc.store_fields = false;
        let traj = solve_cauchy(&sc).unwrap();
        let u = traj.final_field();
        let mean = traj.stats.initial_heat / 4.0;
        assert!((u.max() - mean).abs() < 1e-6 && (u.min() - mean).abs() < 1e-6);
        assert_eq!(traj.fields.len(), 1);
    }

    #[test]
    fn mirror_symmetric_setup_gives_symmetric_fields() {
        let s = Shape::ellipse(pt(0.0, 0.0), 1.5, 0.8).unwrap();
        let sc = Scenario::new(s, 2.0, 1.0, Grid::new(32, 2.5).unwrap(), 0.5, None).unwrap().with_samples(16);
        let traj = solve_cauchy(&sc).unwrap();
        let g = traj.grid;
        for f in &traj.fields {
            for j in 0..g.n() {
                for i in 0..g.n() {
                    assert!((f.at(i, j) - f.at(g.n() - 1 - i, j)).abs() <= 1e-10);
                    assert!((f.at(i, j) - f.at(i, g.n() - 1 - j)).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn traces_can_be_recomputed_at_other_points() {
        let sc = ball_scenario(48, 0.3);
        let traj = solve_cauchy(&sc).unwrap();
        let again = interface_trace(&traj, &sc.shape, &traj.samples).unwrap();
        assert_eq!(again, traj.traces);
        assert!(again.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }
}
