use serde::Serialize;

use crate::{Error, Result};

/// Interface trace `a(t) = u(R, t)` of the radially symmetric Cauchy problem.
#[derive(Clone, Debug, Serialize)]
pub struct RadialTrajectory {
    pub radius: f64,
    pub dimension: u32,
    pub dr: f64,
    pub r_max: f64,
    pub times: Vec<f64>,
    pub trace: Vec<f64>,
}

/// Thomas algorithm for a symmetric tridiagonal system (`off[i]` couples `i`, `i+1`).
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    c[0] = if n > 1 { off[0] / d } else { 0.0 };
    rhs[0] /= d;
    for i in 1..n {
        d = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / d;
        }
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Solves `u_t = r^{1−N}(r^{N−1} σ u_r)_r`, `u(·,0) = χ_{r<R}`, in one dimension.
///
/// Finite volumes in `r` with the interface on a cell face (`dr = R/m`) and the
/// harmonic mean on that face; homogeneous Neumann at `r_max = R + 8√(σ_max T)`.
/// Time stepping: backward-Euler steps on a geometrically graded start, then
/// Crank–Nicolson, with every requested output time hit exactly. `nr` is the
/// number of cells across `[0, r_max]`. The trace is the flux-continuous face
/// value `(σ+u_{m−1} + σ−u_m)/(σ+ + σ−)`.
pub fn solve_radial_ball(
    radius: f64,
    sigma_plus: f64,
    sigma_minus: f64,
    dimension: u32,
    output_times: &[f64],
    nr: usize,
) -> Result<RadialTrajectory> {
    if !(radius > 0.0 && sigma_plus > 0.0 && sigma_minus > 0.0) || !(dimension == 2 || dimension == 3) {
        return Err(Error::InvalidScenario("radial oracle needs R, σ± > 0 and N ∈ {2, 3}".into()));
    }
    if output_times.is_empty()
        || output_times.iter().any(|t| !(*t > 0.0))
        || output_times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidScenario("output times must be positive and increasing".into()));
    }
    let horizon = *output_times.last().expect("nonempty");
    let r_max = radius + 8.0 * (sigma_plus.max(sigma_minus) * horizon).sqrt();
    let m = ((nr as f64 * radius / r_max).round() as usize).max(4);
    let dr = radius / m as f64;
    let cells = (r_max / dr).ceil() as usize;
    let dim = dimension as i32;
    let face = |i: usize| i as f64 * dr;
    let vol: Vec<f64> = (0..cells).map(|i| (face(i + 1).powi(dim) - face(i).powi(dim)) / dim as f64).collect();
    let sigma = |i: usize| if i < m { sigma_plus } else { sigma_minus };
    // conductance of the face between cells i and i+1
    let cond: Vec<f64> = (0..cells - 1)
        .map(|i| {
            let s = 2.0 * sigma(i) * sigma(i + 1) / (sigma(i) + sigma(i + 1));
            s * face(i + 1).powi(dim - 1) / dr
        })
        .collect();
    let apply_k = |u: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..cells - 1 {
            let flux = cond[i] * (u[i] - u[i + 1]);
            out[i] += flux;
            out[i + 1] -= flux;
        }
    };
    // (θ-weighted) step: (V/dt + θK) u⁺ = (V/dt − (1−θ)K) u
    let step = |u: &mut Vec<f64>, dt: f64, theta: f64, work: &mut Vec<f64>| {
        let mut diag: Vec<f64> = vol.iter().map(|v| v / dt).collect();
        let off: Vec<f64> = cond.iter().map(|c| -theta * c).collect();
        for i in 0..cells - 1 {
            diag[i] += theta * cond[i];
            diag[i + 1] += theta * cond[i];
        }
        apply_k(u, work);
        let mut rhs: Vec<f64> = (0..cells).map(|i| vol[i] / dt * u[i] - (1.0 - theta) * work[i]).collect();
        solve_tridiagonal(&diag, &off, &mut rhs);
        *u = rhs;
    };

    let mut u: Vec<f64> = (0..cells).map(|i| if i < m { 1.0 } else { 0.0 }).collect();
    let mut work = vec![0.0; cells];
    let trace = |u: &[f64]| (sigma_plus * u[m - 1] + sigma_minus * u[m]) / (sigma_plus + sigma_minus);
    let dt_max = (0.5 * dr).clamp(1e-6, 2e-3);
    let dt_min = (1e-3 * dr * dr / sigma_plus.max(sigma_minus)).min(dt_max);
    let mut t = 0.0;
    let mut dt = dt_min;
    let mut be_steps = 0;
    let mut traces = Vec::with_capacity(output_times.len());
    for &target in output_times {
        while t < target - 1e-14 {
            let h = dt.min(target - t);
            // backward Euler during the graded start damps the jump of the datum
            let theta = if be_steps < 16 { 1.0 } else { 0.5 };
            step(&mut u, h, theta, &mut work);
            be_steps += 1;
            t += h;
            dt = (dt * 1.1).min(dt_max);
        }
        t = target;
        traces.push(trace(&u));
    }
    Ok(RadialTrajectory { radius, dimension, dr, r_max, times: output_times.to_vec(), trace: traces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::bessel::i0e;

    #[test]
    fn tridiagonal_solver() {
        let diag = [4.0, 5.0, 6.0, 7.0];
        let off = [-1.0, -2.0, -0.5];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = [0.0; 4];
        for i in 0..4 {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += off[i - 1] * x[i - 1];
            }
            if i < 3 {
                b[i] += off[i] * x[i + 1];
            }
        }
        solve_tridiagonal(&diag, &off, &mut b);
        for i in 0..4 {
            assert!((b[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn trace_stays_strictly_between_zero_and_one() {
        let times: Vec<f64> = (1..=50).map(|k| 0.02 * k as f64).collect();
        for dim in [2, 3] {
            for (sp, sm) in [(2.0, 1.0), (1.0, 2.0), (5.0, 1.0)] {
                let r = solve_radial_ball(1.0, sp, sm, dim, &times, 2000).unwrap();
                assert!(r.trace.iter().all(|&a| a > 0.0 && a < 1.0));
            }
        }
    }

    /// `u(R, t)` for `σ+ = σ− = σ` by composite Simpson quadrature of the heat
    /// kernel over the ball, reduced to one radial integral.
    fn one_phase_trace(radius: f64, sigma: f64, dim: u32, t: f64) -> f64 {
        let s = 4.0 * sigma * t;
        let f = |rho: f64| match dim {
            2 => rho / (0.5 * s) * (-(radius - rho).powi(2) / s).exp() * i0e(2.0 * radius * rho / s),
            _ => {
                rho * ((-(radius - rho).powi(2) / s).exp() - (-(radius + rho).powi(2) / s).exp())
                    / ((std::f64::consts::PI * s).sqrt() * radius)
            }
        };
        let n = 20_000;
        let h = radius / n as f64;
        let mut sum = f(0.0) + f(radius);
        for k in 1..n {
            sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        sum * h / 3.0
    }

    fn output_times() -> Vec<f64> {
        let mut t = vec![0.01, 0.02, 0.05];
        t.extend((1..=20).map(|k| 0.1 * k as f64));
        t
    }

    #[test]
    fn one_phase_matches_heat_kernel_quadrature() {
        let times = output_times();
        for dim in [2, 3] {
            for sigma in [1.0, 2.0] {
                let r = solve_radial_ball(1.0, sigma, sigma, dim, &times, 2000).unwrap();
                for (t, a) in times.iter().zip(&r.trace) {
                    let exact = one_phase_trace(1.0, sigma, dim, *t);
                    assert!((a - exact).abs() < 5e-5, "N={dim} σ={sigma} t={t}: {a} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn refinement_changes_trace_below_1e4() {
        let times = output_times();
        for dim in [2, 3] {
            for (sp, sm) in [(2.0, 1.0), (1.0, 2.0), (5.0, 1.0)] {
                let coarse = solve_radial_ball(1.0, sp, sm, dim, &times, 2000).unwrap();
                let fine = solve_radial_ball(1.0, sp, sm, dim, &times, 4000).unwrap();
                let diff = coarse.trace.iter().zip(&fine.trace).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(diff < 1e-4, "N={dim} σ=({sp},{sm}): {diff}");
            }
        }
    }

    #[test]
    fn rejects_bad_times() {
        assert!(solve_radial_ball(1.0, 1.0, 1.0, 2, &[0.5, 0.2], 2000).is_err());
        assert!(solve_radial_ball(1.0, 1.0, 1.0, 2, &[], 2000).is_err());
    }
}
