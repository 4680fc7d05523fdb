//! Truncated Fock-space simulation of Gazeau-Klauder coherent state
//! generation through intensity-dependent degenerate Raman interaction.
//!
//! - [`deformation`]: solvable spectra `e_n`, `f(n)`, deformed factorials.
//! - [`fockspace`]: field and atom-field amplitude vectors, truncation.
//! - [`states`]: nonlinear coherent states and GKCSs.
//! - [`hamiltonian`]: interaction-picture, effective and Stark Hamiltonians.
//! - [`evolution`]: closed-form propagators and their numerical oracle.
//! - [`protocol`]: atom injection, postselection and superposition analysis.
//! - [`report`]: CSV and report formatting.
//! - [`verify`]: self-check suites behind `gkcs verify`.
//! - [`cli`]: the `gkcs` command-line front end.

pub mod cli;
pub mod deformation;
pub mod error;
pub mod evolution;
pub mod fockspace;
pub mod hamiltonian;
pub mod protocol;
pub mod report;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
