//! Local GKLS master equations for networks of weakly interacting
//! subsystems, each coupled to its own thermal bath.
//!
//! Jump operators are built from the eigenstates of the individual
//! subsystems, while the intersubsystem interaction is reduced to the part
//! that commutes with the bare Hamiltonian `H_s = Σ_i H_i`. The resulting
//! generator is of GKLS form, has the product Gibbs state as the fixed
//! point of its dissipative part, and obeys both the first law and the
//! Spohn entropy-production bound with heat currents measured against
//! `H_s`.
//!
//! Units: ħ = k_B = 1 throughout. Temperatures are accepted as `T` and
//! stored as inverse temperatures.
//!
//! ```
//! use lindloc::models::{two_qubit_model, TwoQubitParams};
//! use lindloc::liouvillian::build_modified_local;
//! use lindloc::dynamics::steady_state;
//! use lindloc::thermo::heat_current;
//!
//! let spec = two_qubit_model(&TwoQubitParams { t1: 2.0, t2: 1.0, ..Default::default() }).unwrap();
//! let gen = build_modified_local(&spec).unwrap();
//! let ss = steady_state(&gen).unwrap();
//! let q1 = heat_current(&gen, &ss.rho_ss, 0).unwrap();
//! assert!(q1 > 0.0);
//! ```

pub mod baths;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod liouvillian;
pub mod models;
pub mod spectral;
pub mod thermo;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianEigenSystem, C64};
