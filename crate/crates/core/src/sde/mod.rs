//! Reproducible stochastic integration: deterministic per-path noise
//! streams, Ito and Stratonovich steppers with wall handling, and the model
//! diffusions (radial SDEs, matrix Brownian motion, the flat and reduced
//! Hamiltonian diffusions, frame-bundle Brownian motion on the sphere).

pub mod ensemble;
pub mod integrate;
pub mod models;
pub mod problem;
pub mod rng;

pub use ensemble::{PathEnsemble, RejectedPath};
pub use integrate::{simulate_ensemble, simulate_ensemble_strided};
pub use models::{
    flat_hamiltonian_diffusion, frame_bundle_bm_sphere, matrix_bm, radial_sde,
    reduced_hamiltonian_diffusion, Direction,
};
pub use problem::{Diffusion, Interpretation, SdeProblem, WallPolicy};
pub use rng::RngStream;
