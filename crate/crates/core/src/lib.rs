//! Stationary Ermakov-Pinney amplitudes and Bohmian guiding fields for
//! separable quantum problems.
//!
//! Each separated coordinate sector is reduced to Liouville normal form
//! `ψ'' + Ω²(q) ψ = 0`. A fundamental pair of that linear equation gives the
//! nonlinear amplitude `ρ² = A y₁² + B y₂² + 2D y₁y₂` with `AB - D² = k/W²`,
//! which solves `ρ'' + Ω² ρ = k/ρ³`. The Ermakov-Lewis invariant certifies the
//! construction, and the continuity integral `p = C/R²` turns the amplitude
//! into a guiding field.

pub mod bohm;
pub mod catalog;
pub mod ermakov;
pub mod error;
pub mod interp;
pub mod linear;
pub mod ode;
pub mod pipeline;
pub mod problems;
pub mod runner;
pub mod special;

pub use error::{Error, Result};
