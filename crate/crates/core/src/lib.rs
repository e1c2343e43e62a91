//! Simulation and verification toolkit for two-phase heat conductors.
//!
//! A bounded inclusion `Ω` with conductivity `σ+` sits in an unbounded medium
//! with conductivity `σ-`. Starting from the indicator of `Ω`, the temperature
//! diffuses according to `u_t = div(σ ∇u)`. The crate solves this Cauchy
//! problem on a truncated box, solves the associated transmission problem for
//! the time transform `v(x) = ∫ e^{-t} u(x,t) dt`, and turns the moving-plane
//! argument into computable checks: critical planes, reflected differences,
//! Hopf-type boundary derivatives and corner second derivatives.
//!
//! Module map:
//! - [`geometry`]: implicit shapes, interface samples, reflections, plane scans.
//! - [`discretization`]: Cartesian grids, face conductivities, operators, PCG.
//! - [`parabolic`]: the time-dependent solve, the radial oracle, interface traces.
//! - [`elliptic`]: the transmission solve, exact ball solutions, the time transform.
//! - [`analysis`]: deviation functionals, reflected fields, derivative checks, rates.
//! - [`cli`]: configuration parsing and the `twophase` subcommands.

pub mod analysis;
pub mod cli;
pub mod discretization;
pub mod elliptic;
mod error;
pub mod geometry;
pub mod parabolic;

pub use error::{Error, Result};

/// Version string written into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
