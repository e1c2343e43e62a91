//! The Cauchy problem `u_t = div(σ∇u)`, `u(·,0) = χ_Ω` on a truncated box,
//! its radial oracle for balls, and box-size estimates.

mod cauchy;
mod radial;
mod scenario;

pub use cauchy::{interface_trace, solve_cauchy, RunStats, Trajectory};
pub use radial::{solve_radial_ball, RadialTrajectory};
pub use scenario::{
    default_lambda_hat, truncation_bound, truncation_box, truncation_distance, Scenario, TimeScheme, TruncationCheck,
};
