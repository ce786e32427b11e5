//! Induced Markov chains, Poisson equations and the Green-Kubo invariants.
//!
//! The crate works with finite row-stochastic kernels `P` and their stationary
//! measures `π`. Correlations follow the chain convention
//! `E[f(X_0) g(X_n)] = ⟨f, Pⁿ g⟩_π`.

pub mod app;
pub mod error;
pub mod excursion;
pub mod invariants;
pub mod lattice;
pub mod linalg;
pub mod markov;
pub mod poisson;
pub mod random;
pub mod trajectory;

pub use error::{Error, Result};
pub use markov::{
    classify, dual_kernel, induced_kernel, return_time_distribution, stationary_measure,
    validate_kernel, ChainClassification, InducedSystem, Measure, Observable, ReturnTimeTable,
    StochasticKernel, SubsetMask,
};
