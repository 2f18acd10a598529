//! Stochastic Hamilton-Jacobi / Feynman-Kac layer: forward and reversed
//! path estimators for the wave functions, finite-difference grid operators
//! with a Crank-Nicolson reference solver, the radial eigensolver oracle,
//! stationary-solution checks and the Calogero-Moser coupling adjudication.

pub mod adjudicate;
pub mod eigen;
pub mod estimators;
pub mod grid;

pub use adjudicate::{
    cm_adjudicate_coupling, cm_ground_state_check, fd_half_delta_potential, random_chamber_points,
    AdjudicationReport, AdjudicationRow, ChamberChart,
};
pub use eigen::{delta0_residual, radial_eigenpairs, Eigenpair};
pub use estimators::{
    psi_plus_estimate, psi_plus_surface, psi_tilde_estimate, psi_tilde_surface, stationary_check,
    McParams, McSurface, PsiTildeEstimate, StationaryCheck, StationaryRow,
};
pub use grid::{
    build_grid_operator, crank_nicolson, interior_grid, pde_residual, GridFunction, OperatorSpec,
    SurfaceResidual,
};
