//! Value computation, strategies and simulation for a fixed-duration
//! simple-motion pursuit game with many pursuers and one evader in `R^d`.
//!
//! Pursuers are bound either by an integral constraint `∫‖u‖² ≤ ρ²` or a
//! geometric constraint `‖u(t)‖ ≤ ρ`; the evader by `∫‖v‖² ≤ σ²`. The payoff
//! is the terminal distance to the closest pursuer.

// NaN-rejecting validation reads best as `!(x > 0.0)`; the control laws take
// the full game state as separate arguments.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod model;
pub mod presets;
pub mod sim;
pub mod strategies;
pub mod value;

pub use error::{Error, Result};
