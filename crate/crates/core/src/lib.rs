//! Work statistics of counterdiabatically controlled quantum evolutions.
//!
//! The crate builds driven two-level and many-body spin Hamiltonians, adds a
//! counterdiabatic control field (either the full transitionless term or a
//! term restricted to a single eigenstate), and evaluates the two-point
//! measurement work distribution of the controlled state together with its
//! Shannon entropy. On top of that sit the sweep experiments: entropy traces,
//! adiabatic-impulse crossover detection, Kibble-Zurek scaling fits, and
//! full-versus-restricted control comparisons.
//!
//! Units follow ħ = 1 throughout; energies and times are dimensionless.

pub mod analysis;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod models;
pub mod spectral;
pub mod tolerances;
pub mod workstats;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
