//! Two-dimensional Scarf II model in second-order SUSY quantum mechanics:
//! construction of the partner Hamiltonians, supercharges and symmetry
//! operators, the analytic wave functions of both solvable branches, and a
//! numerical verification suite for every operator identity, spectrum
//! formula and degeneracy condition of the model. All derivatives are exact,
//! carried by truncated-Taylor jets.

pub mod cli;
pub mod error;
pub mod jets;
pub mod operators2d;
pub mod scarf1d;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use jets::{Jet, Taylor1};
pub use operators2d::{DiffOp, WaveFunction};
pub use scarf1d::ModelParams;
