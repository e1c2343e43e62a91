//! The transmission problem for the time transform `v = ∫₀^∞ e^{−t} u dt`:
//! `−σ±Δv± + v± = χ_Ω` with continuity of `v` and of `σ∂v/∂ν` across `∂Ω`.

mod ball;
pub mod bessel;
mod transform;
mod transmission;

pub use ball::{exact_ball_v, RadialBallSolution};
pub use transform::{laplace_of_trajectory, LaplaceTransform, TailInterval};
pub use transmission::{
    max_residuals, solve_transmission, transmission_residuals, TransmissionResidual, TransmissionSolution,
};
