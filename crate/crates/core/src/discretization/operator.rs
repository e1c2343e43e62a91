use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConductivityField, Grid};

/// Treatment of the box boundary `∂[−L, L]²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterBoundary {
    /// Zero flux; conserves the discrete heat.
    Neumann,
    /// `u = 0` imposed half a cell outside the boundary centers.
    DirichletZero,
}

/// Sparse symmetric matrix of `c·h²·I + Σ_faces σ_f (u_k − u_nb)` in CSR form.
///
/// This is `h²·(c − div σ∇)` for the five-point flux stencil, i.e. the
/// finite-volume balance integrated over a cell.
#[derive(Clone, Debug)]
pub struct Operator {
    pub reaction: f64,
    pub boundary: OuterBoundary,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl Operator {
    /// `scale·I` of size `rows`.
    pub fn identity(rows: usize, scale: f64) -> Self {
        Self {
            reaction: scale,
            boundary: OuterBoundary::DirichletZero,
            row_ptr: (0..=rows).collect(),
            cols: (0..rows).collect(),
            vals: vec![scale; rows],
            diag: vec![scale; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Column indices and values of one row.
    pub fn row(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[k]..self.row_ptr[k + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// Entry `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// `y = A·x`, parallel over rows.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().with_min_len(1024).for_each(|(k, yk)| {
            let mut acc = 0.0;
            for p in self.row_ptr[k]..self.row_ptr[k + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *yk = acc;
        });
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows()];
        self.apply(x, &mut y);
        y
    }

    /// Largest `|A_ij − A_ji|` over stored entries.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.rows())
            .into_par_iter()
            .map(|i| self.row(i).map(|(j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    /// Nonpositive off-diagonals and weak diagonal dominance in every row.
    pub fn is_m_matrix(&self) -> bool {
        (0..self.rows()).into_par_iter().all(|i| {
            let mut off = 0.0;
            for (j, v) in self.row(i) {
                if j != i {
                    if v > 0.0 {
                        return false;
                    }
                    off -= v;
                }
            }
            self.diag[i] >= off * (1.0 - 1e-14)
        })
    }

    pub fn row_sum(&self, k: usize) -> f64 {
        self.row(k).map(|(_, v)| v).sum()
    }
}

/// Assembles the five-point finite-volume operator.
pub fn assemble_operator(grid: &Grid, field: &ConductivityField, reaction: f64, boundary: OuterBoundary) -> Operator {
    assert!(reaction >= 0.0, "reaction coefficient must be nonnegative");
    let n = grid.n();
    let mass = reaction * grid.cell_volume();
    let rows: Vec<Vec<(usize, f64)>> = (0..grid.cell_count())
        .into_par_iter()
        .map(|k| {
            let (i, j) = grid.coords(k);
            let mut entries = Vec::with_capacity(5);
            let mut diag = mass;
            let mut boundary_faces = 0;
            // neighbors in increasing column order: south, west, east, north
            if j > 0 {
                let s = field.face_y[(j - 1) * n + i];
                entries.push((k - n, -s));
                diag += s;
            } else {
                boundary_faces += 1;
            }
            if i > 0 {
                let s = field.face_x[j * (n - 1) + i - 1];
                entries.push((k - 1, -s));
                diag += s;
            } else {
                boundary_faces += 1;
            }
            let center = entries.len();
            if i + 1 < n {
                let s = field.face_x[j * (n - 1) + i];
                entries.push((k + 1, -s));
                diag += s;
            } else {
                boundary_faces += 1;
            }
            if j + 1 < n {
                let s = field.face_y[j * n + i];
                entries.push((k + n, -s));
                diag += s;
            } else {
                boundary_faces += 1;
            }
            if boundary == OuterBoundary::DirichletZero {
                diag += 2.0 * field.cell_sigma[k] * boundary_faces as f64;
            }
            entries.insert(center, (k, diag));
            entries
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    let mut cols = Vec::with_capacity(rows.len() * 5);
    let mut vals = Vec::with_capacity(rows.len() * 5);
    let mut diag = Vec::with_capacity(rows.len());
    row_ptr.push(0);
    for (k, row) in rows.into_iter().enumerate() {
        for (c, v) in row {
            if c == k {
                diag.push(v);
            }
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Operator { reaction, boundary, row_ptr, cols, vals, diag }
}
