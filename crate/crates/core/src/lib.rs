//! Spectral toolkit for two- and three-particle lattice Schrödinger operators
//! in the momentum representation on the 3-torus.
//!
//! The crate provides:
//! - exact canonical arithmetic on torus momenta and dual grids ([`torus`]),
//! - model data with validation: dispersions, pair potentials, masses
//!   ([`model`]), and the channel coordinate changes ([`coords`]),
//! - discrete two-body fiber operators with three independent spectral
//!   routes: dense diagonalization, Birman–Schwinger counting, and Fredholm
//!   determinants ([`twobody`]),
//! - two-body channels fibered over the total quasi-momentum and interval
//!   closures of their spectra ([`channel`]),
//! - the discrete three-body operator, its band function, and oracle
//!   comparisons against channel predictions ([`threebody`]),
//! - a factorized Faddeev-style resolvent probe for locating isolated
//!   three-body levels outside the two-body closure ([`faddeev`]),
//! - a plain-text model configuration format ([`config`]).

pub mod channel;
pub mod config;
pub mod coords;
pub mod error;
pub mod faddeev;
pub mod gridpot;
pub mod linalg;
pub mod model;
pub mod threebody;
pub mod torus;
pub mod twobody;

pub use error::{Result, SpectralError};
pub use model::{LatticeCoefficients, MassRatios, Model, ValidationClause, ValidationReport};
pub use torus::{TorusGrid, TorusPoint, Vec3};
