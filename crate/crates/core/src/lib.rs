//! Numerical laboratory for backward uniqueness of parabolic operators whose
//! coefficients are only continuous in time.
//!
//! * [`modulus`]: moduli of continuity, Osgood classification, empirical
//!   moduli and concave envelopes.
//! * [`weight`]: the Carleman weight `Φ` solving `Φ'' = μ(1/Φ') (Φ')²`.
//! * [`symbol`]: reduced symbols of `x`-independent operators, ellipticity
//!   constants and time mollification.
//! * [`carleman`]: single-mode evolution and the energy identity behind the
//!   Carleman estimate.
//! * [`counterexample`]: the non-uniqueness construction for non-Osgood
//!   moduli, evaluated in a per-band exponential gauge.

pub mod carleman;
pub mod cli;
pub mod counterexample;
pub mod error;
pub mod jet;
pub mod modulus;
pub mod quad;
pub mod symbol;
pub mod weight;

pub use error::{Error, Result};
