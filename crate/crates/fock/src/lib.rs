//! Truncated number-basis simulator for a handful of bosonic modes.
//!
//! This crate is deliberately independent of the analytic models in
//! `sqcc-core`: every quantity it produces is obtained by brute force in the
//! Fock basis (explicit beamsplitter unitaries, on/off projectors, partial
//! traces), so it can serve as ground truth for the closed-form expressions.
//!
//! Quadrature convention: `x = a + a†`, `p = -i(a - a†)`, vacuum variance 1.

mod error;
mod moments;
mod ops;
mod state;
mod symplectic;

pub use error::FockError;
pub use moments::GaussianMoments;
pub use ops::{
    beamsplitter_amplitude, build_tmsv, coherent_amplitudes, displace, displacement_matrix,
    ideal_nla_apply, scissor_apply, thermal_loss, thermal_state, ScissorOutcome, ThermalLoss,
};
pub use state::{FockTensor, ModeOp};
pub use symplectic::symplectic_spectrum;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

/// Absolute tolerance on trace/norm preservation.
pub const NORM_TOL: f64 = 1e-10;
