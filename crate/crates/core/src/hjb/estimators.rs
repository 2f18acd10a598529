//! Monte Carlo estimators for the forward and reversed wave functions.
//!
//! The forward estimator runs the repulsive radial process; the reversed
//! estimator runs the attractive time-reversed process and carries the
//! conditional-Gaussian spin weight `exp(int spin_potential ds)` along the
//! path. Since the attractive process can reach the walls in finite time,
//! reversed paths are absorbed (contributing zero) once they cross the kill
//! radius or exhaust the substep budget; the kill events are counted and
//! reported, never silently dropped. The absorbed-path convention is what
//! makes the estimator agree with the Dirichlet reference solution of the
//! associated diffusion equation.

use crate::error::Result;
use crate::reduce::MCEstimate;
use crate::rootsys::{RootSystem, SpinLevel};
use crate::sde::integrate::fold_path;
use crate::sde::models::{radial_sde, Direction};
use crate::sde::rng::RngStream;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Monte Carlo parameters for the wave-function estimators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McParams {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Reversed paths are absorbed when min_a alpha(x)/|alpha| falls below
    /// this radius (also the left Dirichlet wall of grid references).
    pub kill_radius: f64,
}

impl McParams {
    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Self {
        McParams {
            n_paths,
            dt,
            seed,
            kill_radius: 0.05,
        }
    }
}

/// Overflow guard on the exponential spin weight.
pub const WEIGHT_OVERFLOW: f64 = 1e12;

/// Forward estimator `psi_plus(t, x) = sqrt(delta(x)) E[f(X_t)]` with X the
/// forward radial diffusion started at x.
pub fn psi_plus_estimate(
    rs: &RootSystem,
    f: impl Fn(&[f64]) -> f64 + Sync,
    x: &[f64],
    t: f64,
    mc: &McParams,
) -> Result<MCEstimate> {
    let problem = radial_sde(rs, Direction::Forward);
    let n_steps = (t / mc.dt).round().max(1.0) as usize;
    let samples: Vec<Result<f64>> = (0..mc.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut stream = RngStream::derive(mc.seed, path as u64);
            let run = fold_path(
                &problem,
                x,
                n_steps,
                mc.dt,
                &mut stream,
                (),
                |_, _, _| {},
                None,
                false,
                path,
            )?;
            Ok(f(&run.state))
        })
        .collect();
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    let base = MCEstimate::from_samples(&samples, mc.seed)?;
    let scale = rs.delta(x)?.sqrt();
    Ok(MCEstimate {
        mean: scale * base.mean,
        stderr: scale * base.stderr,
        n: base.n,
        seed: base.seed,
    })
}

/// Reversed estimator with absorption diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiTildeEstimate {
    pub estimate: MCEstimate,
    /// Paths absorbed at the kill radius or by substep exhaustion.
    pub killed_paths: usize,
    /// Paths stopped by the weight overflow guard.
    pub overflow_paths: usize,
}

/// Reversed estimator
/// `psi(t, x) = delta(x)^{-1/2} E[exp(-f(Xrev_t)) exp(int_0^t spin(Xrev_s) ds)]`
/// with the integral accumulated by the trapezoidal rule on the path grid.
/// Absorbed paths contribute zero to the numerator while staying in the
/// sample count.
pub fn psi_tilde_estimate(
    rs: &RootSystem,
    f: impl Fn(&[f64]) -> f64 + Sync,
    s: &SpinLevel,
    x: &[f64],
    t: f64,
    mc: &McParams,
) -> Result<PsiTildeEstimate> {
    let problem = radial_sde(rs, Direction::Reversed);
    let n_steps = (t / mc.dt).round().max(1.0) as usize;
    let overflow_exponent = WEIGHT_OVERFLOW.ln();
    let root_scales: Vec<f64> = rs
        .positive_roots()
        .iter()
        .map(|a| crate::linalg::norm(a))
        .collect();
    let kill_radius = mc.kill_radius;
    let rs_kill = rs.clone();
    let kill = move |x: &[f64]| {
        rs_kill
            .positive_roots()
            .iter()
            .zip(&root_scales)
            .any(|(a, scale)| crate::linalg::dot(a, x) / scale < kill_radius)
    };
    let spin_at = |rs: &RootSystem, s: &SpinLevel, x: &[f64]| -> f64 {
        // open form of spin_potential without the chamber check; guards and
        // kill radius keep x inside
        let mut v = 0.0;
        for (alpha, &c) in rs.positive_roots().iter().zip(s.coefficients()) {
            let av = crate::linalg::dot(alpha, x);
            v += 0.5 * c / (av * av);
        }
        v
    };

    struct Acc {
        weight_exponent: f64,
        prev_spin: f64,
    }

    #[derive(Clone, Copy)]
    enum Outcome {
        Survived(f64),
        Killed,
        Overflow,
    }

    let outcomes: Vec<Result<Outcome>> = (0..mc.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut stream = RngStream::derive(mc.seed, path as u64);
            let init = Acc {
                weight_exponent: 0.0,
                prev_spin: spin_at(rs, s, x),
            };
            let run = fold_path(
                &problem,
                x,
                n_steps,
                mc.dt,
                &mut stream,
                init,
                |acc, _, state| {
                    let spin_now = spin_at(rs, s, state);
                    acc.weight_exponent += 0.5 * mc.dt * (acc.prev_spin + spin_now);
                    acc.prev_spin = spin_now;
                },
                Some(&kill),
                true,
                path,
            )?;
            if run.killed_at.is_some() {
                return Ok(Outcome::Killed);
            }
            if run.acc.weight_exponent > overflow_exponent {
                return Ok(Outcome::Overflow);
            }
            Ok(Outcome::Survived(
                (-f(&run.state)).exp() * run.acc.weight_exponent.exp(),
            ))
        })
        .collect();

    let mut samples = Vec::with_capacity(mc.n_paths);
    let mut killed_paths = 0usize;
    let mut overflow_paths = 0usize;
    for o in outcomes {
        match o? {
            Outcome::Survived(v) => samples.push(v),
            Outcome::Killed => {
                killed_paths += 1;
                samples.push(0.0);
            }
            Outcome::Overflow => {
                overflow_paths += 1;
                samples.push(0.0);
            }
        }
    }
    let base = MCEstimate::from_samples(&samples, mc.seed)?;
    let scale = 1.0 / rs.delta(x)?.sqrt();
    Ok(PsiTildeEstimate {
        estimate: MCEstimate {
            mean: scale * base.mean,
            stderr: scale * base.stderr,
            n: base.n,
            seed: base.seed,
        },
        killed_paths,
        overflow_paths,
    })
}

/// A Monte Carlo surface over (t, x) nodes: row-major `[t][x]` values with
/// matching standard errors and absorption counts per x-node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McSurface {
    pub t_nodes: Vec<f64>,
    /// x-nodes as ambient points
    pub x_nodes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub killed_paths: Vec<usize>,
    pub overflow_paths: Vec<usize>,
}

impl McSurface {
    pub fn value(&self, ti: usize, xi: usize) -> f64 {
        self.values[ti * self.x_nodes.len() + xi]
    }

    pub fn stderr(&self, ti: usize, xi: usize) -> f64 {
        self.stderrs[ti * self.x_nodes.len() + xi]
    }
}

fn node_steps(t_nodes: &[f64], dt: f64) -> Result<(usize, Vec<usize>)> {
    if t_nodes.is_empty() {
        return Err(crate::error::Error::Grid("need at least one time node".into()));
    }
    if t_nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(crate::error::Error::Grid(
            "time nodes must be strictly increasing".into(),
        ));
    }
    let mut steps = Vec::with_capacity(t_nodes.len());
    for &t in t_nodes {
        let s = (t / dt).round() as usize;
        if ((s as f64) * dt - t).abs() > 1e-9 {
            return Err(crate::error::Error::TimeNotOnGrid(t));
        }
        steps.push(s);
    }
    let n_steps = *steps.last().expect("nonempty by the check above");
    Ok((n_steps, steps))
}

/// psi_plus on a (t, x) grid. One ensemble per x-node serves every time
/// node, and all x-nodes share the same seeds (common random numbers), so
/// finite differences of the surface see correlated noise.
pub fn psi_plus_surface(
    rs: &RootSystem,
    f: impl Fn(&[f64]) -> f64 + Sync,
    x_nodes: &[Vec<f64>],
    t_nodes: &[f64],
    mc: &McParams,
) -> Result<McSurface> {
    let problem = radial_sde(rs, Direction::Forward);
    let (n_steps, steps) = node_steps(t_nodes, mc.dt)?;
    let nt = t_nodes.len();
    let nx = x_nodes.len();
    let mut values = vec![0.0; nt * nx];
    let mut stderrs = vec![0.0; nt * nx];
    for (xi, x) in x_nodes.iter().enumerate() {
        let per_path: Vec<Result<Vec<f64>>> = (0..mc.n_paths)
            .into_par_iter()
            .map(|path| {
                let mut stream = RngStream::derive(mc.seed, path as u64);
                let mut rec = vec![0.0; nt];
                if steps[0] == 0 {
                    rec[0] = f(x);
                }
                let mut next = if steps[0] == 0 { 1 } else { 0 };
                fold_path(
                    &problem,
                    x,
                    n_steps,
                    mc.dt,
                    &mut stream,
                    (),
                    |_, t_new, state| {
                        let step = (t_new / mc.dt).round() as usize;
                        while next < steps.len() && steps[next] == step {
                            rec[next] = f(state);
                            next += 1;
                        }
                    },
                    None,
                    false,
                    path,
                )?;
                Ok(rec)
            })
            .collect();
        let per_path: Vec<Vec<f64>> = per_path.into_iter().collect::<Result<_>>()?;
        let scale = rs.delta(x)?.sqrt();
        for ti in 0..nt {
            let samples: Vec<f64> = per_path.iter().map(|r| r[ti]).collect();
            let base = MCEstimate::from_samples(&samples, mc.seed)?;
            values[ti * nx + xi] = scale * base.mean;
            stderrs[ti * nx + xi] = scale * base.stderr;
        }
    }
    Ok(McSurface {
        t_nodes: t_nodes.to_vec(),
        x_nodes: x_nodes.to_vec(),
        values,
        stderrs,
        killed_paths: vec![0; nx],
        overflow_paths: vec![0; nx],
    })
}

/// psi_tilde on a (t, x) grid; one reversed ensemble per x-node serves all
/// time nodes, absorbed paths contribute zero from their kill time on.
pub fn psi_tilde_surface(
    rs: &RootSystem,
    f: impl Fn(&[f64]) -> f64 + Sync,
    s: &SpinLevel,
    x_nodes: &[Vec<f64>],
    t_nodes: &[f64],
    mc: &McParams,
) -> Result<McSurface> {
    let problem = radial_sde(rs, Direction::Reversed);
    let (n_steps, steps) = node_steps(t_nodes, mc.dt)?;
    let nt = t_nodes.len();
    let nx = x_nodes.len();
    let overflow_exponent = WEIGHT_OVERFLOW.ln();
    let root_scales: Vec<f64> = rs
        .positive_roots()
        .iter()
        .map(|a| crate::linalg::norm(a))
        .collect();
    let kill_radius = mc.kill_radius;
    let rs_kill = rs.clone();
    let kill = move |x: &[f64]| {
        rs_kill
            .positive_roots()
            .iter()
            .zip(&root_scales)
            .any(|(a, scale)| crate::linalg::dot(a, x) / scale < kill_radius)
    };
    let spin_at = |x: &[f64]| -> f64 {
        let mut v = 0.0;
        for (alpha, &c) in rs.positive_roots().iter().zip(s.coefficients()) {
            let av = crate::linalg::dot(alpha, x);
            v += 0.5 * c / (av * av);
        }
        v
    };

    struct Acc {
        weight_exponent: f64,
        prev_spin: f64,
        rec: Vec<f64>,
        next: usize,
        overflowed: bool,
    }

    let mut values = vec![0.0; nt * nx];
    let mut stderrs = vec![0.0; nt * nx];
    let mut killed_paths = vec![0usize; nx];
    let mut overflow_paths = vec![0usize; nx];
    for (xi, x) in x_nodes.iter().enumerate() {
        let per_path: Vec<Result<(Vec<f64>, bool, bool)>> = (0..mc.n_paths)
            .into_par_iter()
            .map(|path| {
                let mut stream = RngStream::derive(mc.seed, path as u64);
                let mut rec = vec![0.0; nt];
                let mut next = 0usize;
                if steps[0] == 0 {
                    rec[0] = (-f(x)).exp();
                    next = 1;
                }
                let init = Acc {
                    weight_exponent: 0.0,
                    prev_spin: spin_at(x),
                    rec,
                    next,
                    overflowed: false,
                };
                let run = fold_path(
                    &problem,
                    x,
                    n_steps,
                    mc.dt,
                    &mut stream,
                    init,
                    |acc, t_new, state| {
                        if acc.overflowed {
                            return;
                        }
                        let spin_now = spin_at(state);
                        acc.weight_exponent += 0.5 * mc.dt * (acc.prev_spin + spin_now);
                        acc.prev_spin = spin_now;
                        if acc.weight_exponent > overflow_exponent {
                            acc.overflowed = true;
                            return;
                        }
                        let step = (t_new / mc.dt).round() as usize;
                        while acc.next < steps.len() && steps[acc.next] == step {
                            acc.rec[acc.next] = (-f(state)).exp() * acc.weight_exponent.exp();
                            acc.next += 1;
                        }
                    },
                    Some(&kill),
                    true,
                    path,
                )?;
                let killed = run.killed_at.is_some() || run.acc.overflowed;
                Ok((run.acc.rec, killed && !run.acc.overflowed, run.acc.overflowed))
            })
            .collect();
        let scale = 1.0 / rs.delta(x)?.sqrt();
        let mut recs = Vec::with_capacity(mc.n_paths);
        for r in per_path {
            let (rec, killed, overflowed) = r?;
            if killed {
                killed_paths[xi] += 1;
            }
            if overflowed {
                overflow_paths[xi] += 1;
            }
            recs.push(rec);
        }
        for ti in 0..nt {
            let samples: Vec<f64> = recs.iter().map(|r| r[ti]).collect();
            let base = MCEstimate::from_samples(&samples, mc.seed)?;
            values[ti * nx + xi] = scale * base.mean;
            stderrs[ti * nx + xi] = scale * base.stderr;
        }
    }
    Ok(McSurface {
        t_nodes: t_nodes.to_vec(),
        x_nodes: x_nodes.to_vec(),
        values,
        stderrs,
        killed_paths,
        overflow_paths,
    })
}

/// One node of a stationary-solution check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryRow {
    pub x: Vec<f64>,
    pub t: f64,
    /// psi_plus Monte Carlo value rescaled by exp(-gamma t / 2)
    pub rescaled: f64,
    pub stderr: f64,
    /// sqrt(delta(x)) f(x), the t-independent reference
    pub reference: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryCheck {
    pub rows: Vec<StationaryRow>,
    pub max_deviation: f64,
}

/// Stationarity of `psi_plus` for an eigenpair (gamma, f) of the drifted
/// radial operator: `psi_plus(t, x) exp(-gamma t / 2)` must equal
/// `sqrt(delta(x)) f(x)` at every node. One ensemble per x-node serves all
/// requested times.
pub fn stationary_check(
    rs: &RootSystem,
    f: impl Fn(&[f64]) -> f64 + Sync,
    gamma: f64,
    x_nodes: &[Vec<f64>],
    t_nodes: &[f64],
    mc: &McParams,
) -> Result<StationaryCheck> {
    let problem = radial_sde(rs, Direction::Forward);
    let mut rows = Vec::new();
    let mut sorted_t = t_nodes.to_vec();
    sorted_t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (n_steps, step_of_t) = node_steps(&sorted_t, mc.dt)?;

    for x in x_nodes {
        let per_path: Vec<Result<Vec<f64>>> = (0..mc.n_paths)
            .into_par_iter()
            .map(|path| {
                let mut stream = RngStream::derive(mc.seed, path as u64);
                let mut recorded = vec![0.0; sorted_t.len()];
                let mut next = 0usize;
                let run = fold_path(
                    &problem,
                    x,
                    n_steps,
                    mc.dt,
                    &mut stream,
                    (),
                    |_, t_new, state| {
                        let step = (t_new / mc.dt).round() as usize;
                        while next < step_of_t.len() && step_of_t[next] == step {
                            recorded[next] = f(state);
                            next += 1;
                        }
                    },
                    None,
                    false,
                    path,
                )?;
                let _ = run;
                Ok(recorded)
            })
            .collect();
        let per_path: Vec<Vec<f64>> = per_path.into_iter().collect::<Result<_>>()?;
        let sqrt_delta = rs.delta(x)?.sqrt();
        let reference = sqrt_delta * f(x);
        for (ti, &t) in sorted_t.iter().enumerate() {
            let samples: Vec<f64> = per_path.iter().map(|r| r[ti]).collect();
            let base = MCEstimate::from_samples(&samples, mc.seed)?;
            let factor = sqrt_delta * (-0.5 * gamma * t).exp();
            let rescaled = factor * base.mean;
            rows.push(StationaryRow {
                x: x.clone(),
                t,
                rescaled,
                stderr: factor * base.stderr,
                reference,
                deviation: (rescaled - reference).abs(),
            });
        }
    }
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(StationaryCheck {
        rows,
        max_deviation,
    })
}
