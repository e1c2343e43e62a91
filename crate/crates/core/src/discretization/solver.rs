use rayon::prelude::*;

use super::{Operator, OuterBoundary};
use crate::{Error, Result};

/// Default relative residual target.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Partial sums are formed over fixed chunks and added in order, so results
/// do not depend on the thread count.
const CHUNK: usize = 4096;

/// Conjugate-gradient passes (restarts from the true residual) per solve.
const RESTARTS: usize = 4;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect::<Vec<f64>>()
        .into_iter()
        .sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Result of a preconditioned conjugate-gradient solve.
#[derive(Clone, Debug)]
pub struct LinearSolve {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖A·x − b‖ / ‖b‖`, recomputed from scratch after the iteration.
    pub residual: f64,
    pub converged: bool,
}

impl LinearSolve {
    /// Turns a non-converged solve into [`Error::NoConvergence`].
    pub fn into_result(self) -> Result<Vec<f64>> {
        if self.converged {
            Ok(self.x)
        } else {
            Err(Error::NoConvergence { iterations: self.iterations, residual: self.residual })
        }
    }
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn solve_linear(op: &Operator, rhs: &[f64], rel_tol: f64) -> Result<LinearSolve> {
    solve_linear_from(op, rhs, None, rel_tol, 20 * op.rows().max(100))
}

/// Conjugate gradients from an optional initial guess with an iteration cap.
///
/// Returns the final iterate with `converged = false` when the cap is reached.
pub fn solve_linear_from(
    op: &Operator,
    rhs: &[f64],
    guess: Option<&[f64]>,
    rel_tol: f64,
    max_iterations: usize,
) -> Result<LinearSolve> {
    let n = op.rows();
    assert_eq!(rhs.len(), n, "right-hand side has the wrong length");
    if op.reaction == 0.0 && op.boundary == OuterBoundary::Neumann {
        let total: f64 = rhs.iter().sum();
        let scale: f64 = rhs.iter().map(|v| v.abs()).sum();
        if total.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularOperator { mean: total / n as f64 });
        }
    }
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return Ok(LinearSolve { x: vec![0.0; n], iterations: 0, residual: 0.0, converged: true });
    }
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = guess.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    // the recursive residual may drift below the true one by rounding; a
    // restart from the true residual recovers the last digits
    for _ in 0..RESTARTS {
        iterations += pcg_pass(op, rhs, &inv_diag, &mut x, rel_tol * b_norm, max_iterations - iterations);
        let mut res = op.mul(&x);
        res.iter_mut().zip(rhs).for_each(|(ri, bi)| *ri -= bi);
        residual = norm(&res) / b_norm;
        converged = residual <= rel_tol.max(1e3 * f64::EPSILON);
        if converged || iterations >= max_iterations {
            break;
        }
    }
    Ok(LinearSolve { x, iterations, residual, converged })
}

/// One conjugate-gradient run from `x`, stopping on the recursive residual.
fn pcg_pass(op: &Operator, rhs: &[f64], inv_diag: &[f64], x: &mut [f64], target: f64, max_iterations: usize) -> usize {
    let n = op.rows();
    let mut r = op.mul(x);
    r.par_iter_mut().zip(rhs).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    while norm(&r) > target && iterations < max_iterations {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        z.par_iter_mut().zip(&r).zip(inv_diag).for_each(|((zi, ri), di)| *zi = ri * di);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        iterations += 1;
    }
    iterations
}
