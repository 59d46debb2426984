//! Enhanced-binding numerics for a charged spin-1/2 particle coupled to the
//! quantized radiation field (Pauli-Fierz model), truncated to the 0- and
//! 1-photon sectors.
//!
//! The library computes the critical coupling lambda0 of -Delta + lambda W,
//! the potential functionals feeding the constant C_W, the truncated
//! self-energy, the one-photon dressing vectors and the constant eta^2, and
//! evaluates a dressed trial state's quadratic form to certify binding below
//! lambda0.

pub mod error;
pub mod field;
pub mod numerics;
pub mod potential;
pub mod schrodinger;
pub mod selfenergy;
pub mod threshold;

pub use error::{PfError, Result};

pub use num_complex;
