//! Radial eigensolver oracle: eigenpairs of the drifted radial operator
//! through the ground-state transform.
//!
//! An eigenfunction f of `D0 = d^2 + (log delta)' d` with eigenvalue gamma
//! corresponds to the Hamiltonian eigenproblem `H psi = -(gamma/2) psi`
//! with `H = -1/2 d^2 + V`, `V` the reduced potential, via `psi = sqrt(delta) f`.

use crate::error::{Error, Result};
use crate::hjb::grid::{build_grid_operator, uniform_spacing, GridFunction};
use crate::rootsys::RootSystem;

/// Eigensolver tolerances fixed by the module contract.
pub const EIGEN_TOL: f64 = 1e-10;
pub const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    /// Eigenvalue gamma of the drifted operator D0.
    pub gamma: f64,
    /// Eigenfunction f on the grid, normalized in the delta-weighted
    /// discrete inner product.
    pub function: GridFunction,
}

/// The `count` lowest modes of D0 on a uniform chamber-interior grid of a
/// rank-one system (Dirichlet conditions for the transformed problem).
pub fn radial_eigenpairs(rs: &RootSystem, nodes: &[f64], count: usize) -> Result<Vec<Eigenpair>> {
    if rs.ambient_dim() != 1 {
        return Err(Error::Grid(
            "the radial eigensolver handles rank-one systems on R".into(),
        ));
    }
    if count > 10 {
        return Err(Error::Grid("at most 10 eigenpairs are supported".into()));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let h = uniform_spacing(nodes)?;
    for &r in nodes {
        if !rs.chamber_contains(&[r], crate::rootsys::WALL_EPS)? {
            return Err(Error::Grid(format!("grid node {r} touches a chamber wall")));
        }
    }
    let t = build_grid_operator(nodes, |r| rs.potential_from_delta(&[r]).unwrap(), 0.5)?;
    let energies = t.smallest_eigenvalues(count, EIGEN_TOL, EIGEN_MAX_ITER)?;
    let mut out = Vec::with_capacity(count);
    for e0 in energies {
        let (e, psi) = t.eigenvector(e0, EIGEN_TOL, EIGEN_MAX_ITER)?;
        let mut f: Vec<f64> = psi
            .iter()
            .zip(nodes)
            .map(|(p, &r)| p / rs.delta(&[r]).unwrap().sqrt())
            .collect();
        // normalize sum f^2 delta h = 1
        let norm_sq: f64 = f
            .iter()
            .zip(nodes)
            .map(|(fi, &r)| fi * fi * rs.delta(&[r]).unwrap() * h)
            .sum();
        let scale = norm_sq.sqrt();
        for v in f.iter_mut() {
            *v /= scale;
        }
        out.push(Eigenpair {
            gamma: -2.0 * e,
            function: GridFunction::new(vec![nodes.to_vec()], f)?,
        });
    }
    Ok(out)
}

/// Residual of `D0 f = gamma f` in the discretization that defines the
/// eigensolver (conjugation of the Dirichlet Hamiltonian by sqrt(delta)),
/// normalized by the grid norm of f.
pub fn delta0_residual(rs: &RootSystem, nodes: &[f64], f: &[f64], gamma: f64) -> Result<f64> {
    if rs.ambient_dim() != 1 {
        return Err(Error::Grid("rank-one systems only".into()));
    }
    let t = build_grid_operator(nodes, |r| rs.potential_from_delta(&[r]).unwrap(), 0.5)?;
    let sqrt_delta: Vec<f64> = nodes
        .iter()
        .map(|&r| rs.delta(&[r]).unwrap().sqrt())
        .collect();
    let psi: Vec<f64> = f.iter().zip(&sqrt_delta).map(|(fi, s)| fi * s).collect();
    let mut h_psi = vec![0.0; psi.len()];
    t.apply(&psi, &mut h_psi);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..f.len() {
        let lhs = -2.0 * h_psi[i] / sqrt_delta[i];
        let r = lhs - gamma * f[i];
        num += r * r;
        den += f[i] * f[i];
    }
    Ok((num / den).sqrt())
}

/// delta-weighted discrete inner product of two grid functions.
pub fn delta_inner_product(rs: &RootSystem, nodes: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
    let h = uniform_spacing(nodes)?;
    Ok(a.iter()
        .zip(b)
        .zip(nodes)
        .map(|((x, y), &r)| x * y * rs.delta(&[r]).unwrap() * h)
        .sum())
}
