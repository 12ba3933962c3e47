//! Built-in state families, densities and Hamiltonians.

mod basic;
mod exp_family;
mod generators;
mod nonhermitian;

use std::sync::Arc;

pub use basic::*;
pub use exp_family::*;
pub use generators::*;
pub use nonhermitian::*;

use crate::error::{GeomError, Result};

/// A model as selected by name.
#[derive(Clone)]
pub enum Model {
    /// A pure-state family.
    State(SharedFamily),
    /// A parameter-dependent Hamiltonian whose eigenvectors form the families.
    NonHermitian(NonHermitianModelSpec),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::State(f) => f.dim(),
            Model::NonHermitian(s) => s.n_params,
        }
    }
}

pub struct ModelEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub default_point: &'static [f64],
    pub build: fn() -> Model,
}

fn state(f: impl crate::state_model::StateFamily + 'static) -> Model {
    Model::State(Arc::new(f))
}

pub static REGISTRY: &[ModelEntry] = &[
    ModelEntry {
        name: "qubit",
        description: "Bloch-sphere qubit, theta = (t, p)",
        default_point: &[1.1, 0.4],
        build: || state(Qubit),
    },
    ModelEntry {
        name: "gaussian",
        description: "real Gaussian wavefunction on [-8, 8], theta = (mu, sigma)",
        default_point: &[0.3, 1.2],
        build: || state(GaussianFamily::default()),
    },
    ModelEntry {
        name: "gaussian_wave",
        description: "Gaussian packet with linear phase on [-10, 10], theta = (mu, k)",
        default_point: &[0.2, 0.7],
        build: || state(GaussianWave::default()),
    },
    ModelEntry {
        name: "exp_family",
        description: "two-parameter exponential-family wavefunction with phase",
        default_point: &[0.3, -0.6],
        build: || state(ExpFamilyWave::new(ExponentialFamilySpec::default_two_param())),
    },
    ModelEntry {
        name: "exp_family_real",
        description: "two-parameter exponential-family wavefunction, trivial phase",
        default_point: &[0.3, -0.6],
        build: || state(ExpFamilyWave::new(ExponentialFamilySpec::default_real())),
    },
    ModelEntry {
        name: "unitary_product",
        description: "random 3-level unitary orbit with two Hermitian generators (seed 7)",
        default_point: &[0.4, -0.3],
        build: || state(UnitaryProductFamily::random(3, 2, 7)),
    },
    ModelEntry {
        name: "pt_two_level",
        description: "[[i gamma, g], [g, -i gamma]], theta = (gamma, g)",
        default_point: &[0.6, 1.0],
        build: || Model::NonHermitian(NonHermitianModelSpec::pt_two_level()),
    },
    ModelEntry {
        name: "spin_field",
        description: "Hermitian n(t, p) . sigma, theta = (t, p)",
        default_point: &[1.1, 0.4],
        build: || Model::NonHermitian(NonHermitianModelSpec::spin_field()),
    },
];

pub fn lookup(name: &str) -> Result<&'static ModelEntry> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        GeomError::Domain(format!("unknown model '{name}' (known: {})", names.join(", ")))
    })
}

pub fn build(name: &str) -> Result<Model> {
    Ok((lookup(name)?.build)())
}
