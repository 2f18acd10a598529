//! The model diffusions: radial SDEs on the Weyl chamber, Brownian motion
//! in the traceless Hermitian space, the flat and reduced Hamiltonian
//! diffusions, and frame-bundle Brownian motion on the 2-sphere.

use crate::error::{Error, Result};
use crate::geom::hermitian::{HermitianGeometry, HermitianPoint};
use crate::geom::sphere::{sphere_horizontal_step, FrameState};
use crate::linalg;
use crate::rootsys::{RootSystem, SpinLevel};
use crate::sde::ensemble::PathEnsemble;
use crate::sde::integrate::stored_times;
use crate::sde::problem::{Diffusion, Interpretation, SdeProblem, WallPolicy};
use crate::sde::rng::RngStream;
use rayon::prelude::*;
use std::sync::Arc;

/// Guard distance to the chamber walls used by the simulators; larger than
/// the membership tolerance so that near-wall states substep before the
/// closed-form drifts degenerate.
pub const SIM_WALL_EPS: f64 = 1e-8;

/// Time direction of the radial process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// drift +1/2 grad log delta
    Forward,
    /// drift -1/2 grad log delta (the time-reversed process)
    Reversed,
}

/// The radial SDE on the open chamber of `rs`:
/// `dX = ±(1/2) grad log delta(X) dt + dW`, with the drift and the state
/// projected onto the span of the roots when that span is proper.
pub fn radial_sde(rs: &RootSystem, direction: Direction) -> SdeProblem {
    radial_sde_guarded(rs, direction, SIM_WALL_EPS)
}

/// As [`radial_sde`] with an explicit guard distance.
pub fn radial_sde_guarded(rs: &RootSystem, direction: Direction, wall_eps: f64) -> SdeProblem {
    let dim = rs.ambient_dim();
    let sign = match direction {
        Direction::Forward => 0.5,
        Direction::Reversed => -0.5,
    };
    let needs_projection = rs.needs_span_projection();
    let span_basis: Arc<Vec<Vec<f64>>> = Arc::new(rs.span_basis());

    let rs_drift = rs.clone();
    let basis_for_drift = Arc::clone(&span_basis);
    let drift = move |x: &[f64], out: &mut [f64]| {
        let g = rs_drift.grad_log_delta_unchecked(x);
        if needs_projection {
            out.fill(0.0);
            for b in basis_for_drift.iter() {
                linalg::axpy(sign * linalg::dot(&g, b), b, out);
            }
        } else {
            for (o, gi) in out.iter_mut().zip(&g) {
                *o = sign * gi;
            }
        }
    };

    let rs_guard = rs.clone();
    let guard = move |x: &[f64]| rs_guard.min_root_value(x) > wall_eps;

    let projector: Option<crate::sde::problem::Projector> = if needs_projection {
        let basis = Arc::clone(&span_basis);
        Some(Arc::new(move |x: &mut [f64]| {
            let mut proj = vec![0.0; x.len()];
            for b in basis.iter() {
                linalg::axpy(linalg::dot(x, b), b, &mut proj);
            }
            x.copy_from_slice(&proj);
        }))
    } else {
        None
    };

    let tag = match direction {
        Direction::Forward => "forward",
        Direction::Reversed => "reversed",
    };
    SdeProblem {
        dim,
        drift: Arc::new(drift),
        diffusion: Diffusion::UnitColumns,
        interpretation: Interpretation::Ito,
        domain_guard: Arc::new(guard),
        wall_policy: WallPolicy::Substep,
        constraint_projector: projector,
        label: format!("radial({},{tag})", rs.name()),
    }
}

/// Brownian motion in the traceless Hermitian n x n space from `q0`:
/// independent N(0, dt) increments on an orthonormal basis. States are
/// stored as interleaved re/im matrices (dimension 2 n^2).
pub fn matrix_bm(
    n: usize,
    q0: &HermitianPoint,
    t_final: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
    store_stride: usize,
) -> Result<PathEnsemble> {
    if q0.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q0.n(),
        });
    }
    let geometry = HermitianGeometry::new(n);
    let c0 = geometry.coords(q0);
    let flat = simulate_flat_coords(&c0, t_final, dt, n_paths, master_seed, store_stride)?;
    let out_dim = 2 * n * n;
    let mut ens = flat.map_states(out_dim, format!("matrix_bm(n={n})"), |_, _, coords| {
        let m = geometry.matrix_from_coords(coords);
        let mut out = Vec::with_capacity(out_dim);
        for v in &m.data {
            out.push(v.re);
            out.push(v.im);
        }
        Ok(out)
    })?;
    ens.dt = dt;
    Ok(ens)
}

/// Exact Gaussian stepping of flat coordinates (used by the matrix models).
fn simulate_flat_coords(
    c0: &[f64],
    t_final: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
    store_stride: usize,
) -> Result<PathEnsemble> {
    let dim = c0.len();
    let n_steps = (t_final / dt).round() as usize;
    if n_steps == 0 {
        return Err(Error::Grid("t_final shorter than one step".into()));
    }
    let stride = store_stride.max(1);
    let sqrt_dt = dt.sqrt();
    let paths: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|path| {
            let mut stream = RngStream::derive(master_seed, path as u64);
            let mut x = c0.to_vec();
            let mut stored = Vec::with_capacity((n_steps / stride + 2) * dim);
            stored.extend_from_slice(&x);
            for step in 1..=n_steps {
                for xi in x.iter_mut() {
                    *xi += sqrt_dt * stream.next_gaussian();
                }
                if step % stride == 0 || step == n_steps {
                    stored.extend_from_slice(&x);
                }
            }
            stored
        })
        .collect();
    let times = stored_times(n_steps, dt, stride);
    let mut values = Vec::with_capacity(n_paths * times.len() * dim);
    for p in paths {
        values.extend_from_slice(&p);
    }
    PathEnsemble::new(dim, times, dt, master_seed, "flat_bm".into(), values)
}

/// The Hamiltonian diffusion of the flat matrix space in a constant frame:
/// the footpoint is matrix Brownian motion and the momentum is constant in
/// time (the frame is parallel, so the momentum dynamics vanish).
///
/// States are `[q interleaved | p interleaved]` of dimension 4 n^2; the
/// stored momentum block is bit-identical to `p0` at every time.
#[allow(clippy::too_many_arguments)]
pub fn flat_hamiltonian_diffusion(
    n: usize,
    q0: &HermitianPoint,
    p0: &HermitianPoint,
    t_final: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
    store_stride: usize,
) -> Result<PathEnsemble> {
    if p0.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p0.n(),
        });
    }
    let q_ens = matrix_bm(n, q0, t_final, dt, n_paths, master_seed, store_stride)?;
    let p_flat = p0.to_interleaved();
    let out_dim = 4 * n * n;
    q_ens.map_states(out_dim, format!("flat_hamiltonian(n={n})"), |_, _, q| {
        let mut out = Vec::with_capacity(out_dim);
        out.extend_from_slice(q);
        out.extend_from_slice(&p_flat);
        Ok(out)
    })
}

/// Split a flat Hamiltonian state into (q, p) Hermitian points.
pub fn split_flat_hamiltonian_state(n: usize, state: &[f64]) -> Result<(HermitianPoint, HermitianPoint)> {
    if state.len() != 4 * n * n {
        return Err(Error::DimensionMismatch {
            expected: 4 * n * n,
            got: state.len(),
        });
    }
    let q = HermitianPoint::from_interleaved(n, &state[0..2 * n * n])?;
    let p = HermitianPoint::from_interleaved(n, &state[2 * n * n..])?;
    Ok((q, p))
}

/// The reduced Hamiltonian diffusion on T*B for spin level `s`:
///
/// `dx = 1/2 grad log delta(x) dt + dW`,
/// `du = 1/2 sum_b m_b <b,u> b / b(x)^2 dt + sum_a sqrt(c_a) a / a(x)^2 dW^a`,
///
/// with one independent noise per positive root realizing
/// `<lambda, Y_a(x)> = sqrt(c_a)/a(x)`. State is `[x | u]`.
pub fn reduced_hamiltonian_diffusion(rs: &RootSystem, s: &SpinLevel) -> Result<SdeProblem> {
    let d = rs.ambient_dim();
    let n_roots = rs.n_roots();
    if s.coefficients().len() != n_roots {
        return Err(Error::DimensionMismatch {
            expected: n_roots,
            got: s.coefficients().len(),
        });
    }
    let needs_projection = rs.needs_span_projection();
    let span_basis: Arc<Vec<Vec<f64>>> = Arc::new(rs.span_basis());

    let rs_drift = rs.clone();
    let basis_for_drift = Arc::clone(&span_basis);
    let drift = move |state: &[f64], out: &mut [f64]| {
        let (x, u) = state.split_at(d);
        // base drift: + (1/2) grad log delta
        let g = rs_drift.grad_log_delta_unchecked(x);
        if needs_projection {
            out[..d].fill(0.0);
            for b in basis_for_drift.iter() {
                linalg::axpy(0.5 * linalg::dot(&g, b), b, &mut out[..d]);
            }
        } else {
            for (o, gi) in out[..d].iter_mut().zip(&g) {
                *o = 0.5 * gi;
            }
        }
        // momentum drift: -grad_x h0 with h0 = (1/2) <u, grad log delta>
        out[d..].fill(0.0);
        for (alpha, &m) in rs_drift
            .positive_roots()
            .iter()
            .zip(rs_drift.multiplicities())
        {
            let av = linalg::dot(alpha, x);
            let coeff = 0.5 * f64::from(m) * linalg::dot(alpha, u) / (av * av);
            linalg::axpy(coeff, alpha, &mut out[d..]);
        }
    };

    // diffusion columns: d unit columns on the base, one column per root on
    // the momentum
    let mut columns: Vec<crate::sde::problem::Field> = Vec::with_capacity(d + n_roots);
    for i in 0..d {
        columns.push(Arc::new(move |_: &[f64], out: &mut [f64]| {
            out.fill(0.0);
            out[i] = 1.0;
        }));
    }
    for (idx, &c) in s.coefficients().iter().enumerate() {
        let alpha = rs.positive_roots()[idx].clone();
        let sqrt_c = c.sqrt();
        columns.push(Arc::new(move |state: &[f64], out: &mut [f64]| {
            out.fill(0.0);
            if sqrt_c == 0.0 {
                return;
            }
            let x = &state[..alpha.len()];
            let av = linalg::dot(&alpha, x);
            let coeff = sqrt_c / (av * av);
            linalg::axpy(coeff, &alpha, &mut out[alpha.len()..]);
        }));
    }

    let rs_guard = rs.clone();
    let guard = move |state: &[f64]| rs_guard.min_root_value(&state[..d]) > SIM_WALL_EPS;

    let projector: Option<crate::sde::problem::Projector> = if needs_projection {
        let basis = Arc::clone(&span_basis);
        Some(Arc::new(move |state: &mut [f64]| {
            let d = basis[0].len();
            for half in 0..2 {
                let seg = &mut state[half * d..(half + 1) * d];
                let mut proj = vec![0.0; d];
                for b in basis.iter() {
                    linalg::axpy(linalg::dot(seg, b), b, &mut proj);
                }
                seg.copy_from_slice(&proj);
            }
        }))
    } else {
        None
    };

    Ok(SdeProblem {
        dim: 2 * d,
        drift: Arc::new(drift),
        diffusion: Diffusion::Columns(columns),
        interpretation: Interpretation::Stratonovich,
        domain_guard: Arc::new(guard),
        wall_policy: WallPolicy::Substep,
        constraint_projector: projector,
        label: format!("reduced_hamiltonian({})", rs.name()),
    })
}

/// Frame-bundle Brownian motion on the unit sphere: per step a Gaussian
/// tangent direction is drawn and the frame moves by the exact horizontal
/// (geodesic + parallel transport) rotation. Returns base-point paths.
pub fn frame_bundle_bm_sphere(
    u0: &FrameState,
    t_final: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
    store_stride: usize,
) -> Result<PathEnsemble> {
    let n_steps = (t_final / dt).round() as usize;
    if n_steps == 0 {
        return Err(Error::Grid("t_final shorter than one step".into()));
    }
    let stride = store_stride.max(1);
    let sqrt_dt = dt.sqrt();
    let paths: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|path| {
            let mut stream = RngStream::derive(master_seed, path as u64);
            let mut frame = *u0;
            let mut stored = Vec::with_capacity((n_steps / stride + 2) * 3);
            stored.extend_from_slice(&frame.base);
            for step in 1..=n_steps {
                let w = [stream.next_gaussian(), stream.next_gaussian()];
                frame = sphere_horizontal_step(&frame, w, sqrt_dt);
                if step % stride == 0 || step == n_steps {
                    stored.extend_from_slice(&frame.base);
                }
            }
            stored
        })
        .collect();
    let times = stored_times(n_steps, dt, stride);
    let mut values = Vec::with_capacity(n_paths * times.len() * 3);
    for p in paths {
        values.extend_from_slice(&p);
    }
    PathEnsemble::new(3, times, dt, master_seed, "sphere_frame_bm".into(), values)
}
