//! Information geometry of parametrized pure states: Fubini-Study tensors,
//! metric and alpha-connections, biorthogonal non-Hermitian tensors and
//! natural-gradient optimisation.

pub mod alpha_fs;
pub mod biortho;
pub mod checks;
pub mod classical_ig;
pub mod error;
pub mod fs_core;
pub mod linalg;
pub mod models;
pub mod pairing;
pub mod qng;
pub mod state_model;
pub mod tensor;
pub mod tol;

pub use error::{GeomError, Result};
