//! Cartesian finite-volume infrastructure: grids, face conductivities,
//! operator assembly, conjugate-gradient solves and field files.

mod conductivity;
mod grid;
pub mod io;
mod operator;
mod solver;
mod trace;

pub use conductivity::{
    face_conductivities, face_conductivities_with, half_plane_fraction, indicator, ConductivityField, FaceRule,
    IndicatorRule,
};
pub use grid::{Grid, GridField};
pub use operator::{assemble_operator, Operator, OuterBoundary};
pub use solver::{solve_linear, solve_linear_from, LinearSolve, DEFAULT_REL_TOL};
pub use trace::{OneSidedTrace, TraceRule, TraceStencil, STENCIL_OFFSETS};
