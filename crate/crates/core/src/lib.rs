//! Heralded synthesis of zero-to-three photon superpositions.
//!
//! A two-mode squeezed vacuum has its idler split three ways, each arm is
//! displaced and watched by an on/off detector, and a triple coincidence
//! heralds the signal mode. The crate covers:
//!
//! * [`fock`]: truncated Fock-space states, operators, channels and fidelity.
//! * [`herald`]: the exact conditional simulation plus the low-gain
//!   perturbative output.
//! * [`synth`]: inversion of the perturbative map (target state to
//!   displacement amplitudes) and preset recipes.
//! * [`wigner`]: Wigner functions, negativity regions and volumes.
//! * [`tomo`]: homodyne sampling and maximum-likelihood reconstruction.
//! * [`cli`]: the `photonsynth` command-line front end.
//!
//! Quadratures use `x = (a + a†)/√2`, `p = (a − a†)/(i√2)` throughout, so the
//! vacuum has variance 1/2 in every direction.

pub mod cli;
pub mod error;
pub mod fock;
pub mod herald;
pub mod io;
pub mod synth;
pub mod tomo;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
