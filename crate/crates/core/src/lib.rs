//! Spectral theory of the fourth-order Euler–Bernoulli Hamiltonian
//! ℋ = d⁴/dx⁴ + q(x) on periodic hexagonal beam lattices.
//!
//! The library follows the classical split: analysis on a single edge
//! (fundamental solutions, monodromy, Lyapunov branches) and spectral
//! assembly on the lattice (dispersion relation, band structure, Dirac
//! points, Fermi surfaces). Vertex conditions encode the joint geometry,
//! so the equal-angle lattice (graphene, ε = 0) and its angle-perturbed
//! neighbors are treated by separate modules sharing the edge machinery.
//!
//! Modules
//! - [`potential`]: even, zero-mean cosine potentials on the unit edge
//! - [`edge_solver`]: fundamental solutions, monodromy, Σ^D, φ-basis
//! - [`lyapunov`]: T₁/T₂, branches Δ_{1,2}, bands, resonances
//! - [`graphene`]: dispersion, spectral classes, Dirac points, Fermi surfaces
//! - [`perturbation`]: exact 𝕄_ε assembly and first-order theory
//! - [`validation`]: self-check suite backing the CLI `validate` command

pub mod edge_solver;
pub mod error;
pub mod graphene;
pub mod lyapunov;
pub mod ode;
pub mod perturbation;
pub mod potential;
pub mod rootscan;
pub mod validation;

pub use edge_solver::{FundamentalBasis, PhiBasis, StateVector};
pub use error::{Result, SpectralError};
pub use graphene::{
    ConeType, DiracPoint, FermiClass, G0Matrix, Quasimomentum, SpectrumClassification,
};
pub use lyapunov::{BandStructure, EdgeKind, LyapunovValues, ResonanceGap, SpectralBand};
pub use perturbation::{G1Matrix, PersistenceReport, PerturbationConfig, PerturbedLyapunov};
pub use potential::PeriodicPotential;
