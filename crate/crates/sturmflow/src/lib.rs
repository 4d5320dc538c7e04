//! Oscillation indices for indefinite higher-order linear ODE systems with
//! Dirichlet boundary conditions.
//!
//! The library computes two independent integer invariants of a
//! derivative-dependent Hermitian form and cross-verifies that they coincide:
//!
//! * the Edwards-Maslov intersection index of the solution-space
//!   superlagrangian path, built from ODE shooting, and
//! * the regularized Morse index (spectral flow) of the rescaled family of
//!   quadratic forms, computed by Galerkin discretization.

pub mod axioms;
pub mod config;
pub mod em;
pub mod error;
pub mod hermitian;
pub mod matpoly;
pub mod morse;
pub mod ode;
pub mod oracle;
pub mod problems;
pub mod quad;
pub mod scan;
pub mod sturm;
pub mod superlag;
pub mod verify;

#[cfg(test)]
pub(crate) mod testutil;
