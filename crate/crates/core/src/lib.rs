//! Simulation and verification harness for the stochastic heat equation
//!
//! ```text
//! ∂u/∂t = ½ ∂²u/∂x² + b(u) + σ(u) Ẇ   on the unit torus 𝕋 = [0, 1)
//! ```
//!
//! driven by space-time white noise, where the Lipschitz constants of the
//! drift `b` and diffusion `σ` may blow up as `u → 0⁺` (for example
//! `b(z) = −z (log 1/z)^{A₁}`, `σ(z) = z (log 1/z)^{A₂}`).
//!
//! The crate is organised bottom-up:
//!
//! - [`kernel`]: the wrapped-Gaussian heat kernel on the torus and the
//!   identities and bounds it satisfies.
//! - [`coefficients`]: drift/diffusion pairs and the three regularisations
//!   (ε-linearisation near zero, α-interpolation of a critical drift,
//!   M-truncation of a superlinear tail) with their growth constants.
//! - [`solver`]: a semi-implicit Euler–Maruyama scheme with spectral implicit
//!   solves and counter-based noise, producing reproducible trajectories.
//! - [`localization`]: stopping times, the `T_k` recursion, rescaled blocks,
//!   pathwise gluing across ε-levels and the `τ_M` ladder.
//! - [`verification`]: closed-form bound evaluators and Monte Carlo
//!   estimators that produce [`verification::VerificationReport`]s.
//! - [`cli`]: configuration, replica fan-out, suites and report emission.

// `!(a < b)` is used on purpose so that NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod localization;
pub mod numerics;
pub mod solver;
pub mod spectral;
pub mod verification;

pub use error::{Error, Result};
pub use grid::TorusGrid;
