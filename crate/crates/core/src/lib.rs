//! Weyl-chamber diffusion laboratory.
//!
//! The crate simulates Brownian motion on concrete Riemannian G-manifolds
//! (flat Hermitian matrix space under conjugation, punctured 3-space under
//! rotations, the orthonormal frames of the 2-sphere), projects the motion
//! to the orbit space -- an open Weyl chamber -- and verifies the reduced
//! generators, stochastic Hamilton-Jacobi identities and rational
//! Calogero-Moser potentials against independent numerical oracles.
//!
//! Module map:
//! * [`rootsys`] -- root-system data and closed-form radial quantities,
//! * [`geom`] -- the concrete geometries, inertia tensors and momentum maps,
//! * [`sde`] -- reproducible stochastic integration and the model diffusions,
//! * [`reduce`] -- statistical law comparison and generator estimation,
//! * [`hjb`] -- Feynman-Kac estimators, grid operators and coupling
//!   adjudication.

pub use num_complex;

pub mod error;
pub mod geom;
pub mod hjb;
pub mod linalg;
pub mod reduce;
pub mod rootsys;
pub mod sde;

pub use error::{Error, Result};
