//! Pathwise stepping of [`SdeProblem`]s into [`PathEnsemble`]s.
//!
//! Each path owns the stream `RngStream::derive(master_seed, path_index)`
//! and is advanced independently, so the ensemble is a pure function of
//! (problem, x0, t, dt, n_paths, master_seed) no matter how work is split
//! across threads.

use crate::error::{Error, Result};
use crate::sde::ensemble::{PathEnsemble, RejectedPath};
use crate::sde::problem::{Diffusion, Interpretation, SdeProblem, WallPolicy};
use crate::sde::rng::RngStream;
use rayon::prelude::*;

/// Maximum local dt-halving depth before a wall collision is an error.
pub const MAX_SUBSTEP_DEPTH: u32 = 20;

struct PathOutcome {
    stored: Vec<f64>,
    substep_events: u64,
    rejected_at: Option<f64>,
}

/// target += sum_i sigma_i(eval_point) * noise_i * sqrt_dt
fn add_noise(
    diffusion: &Diffusion,
    eval_point: &[f64],
    noise: &[f64],
    sqrt_dt: f64,
    target: &mut [f64],
    col: &mut [f64],
) {
    match diffusion {
        Diffusion::UnitColumns => {
            for (t, n) in target.iter_mut().zip(noise) {
                *t += n * sqrt_dt;
            }
        }
        Diffusion::Columns(cols) => {
            for (c, n) in cols.iter().zip(noise) {
                c(eval_point, col);
                for (t, ci) in target.iter_mut().zip(col.iter()) {
                    *t += ci * n * sqrt_dt;
                }
            }
        }
    }
}

struct Stepper<'a> {
    p: &'a SdeProblem,
    // scratch buffers
    drift_a: Vec<f64>,
    drift_b: Vec<f64>,
    col: Vec<f64>,
    midpoint: Vec<f64>,
    predictor: Vec<f64>,
    proposal: Vec<f64>,
    noise: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(p: &'a SdeProblem) -> Self {
        let d = p.dim;
        Stepper {
            p,
            drift_a: vec![0.0; d],
            drift_b: vec![0.0; d],
            col: vec![0.0; d],
            midpoint: vec![0.0; d],
            predictor: vec![0.0; d],
            proposal: vec![0.0; d],
            noise: vec![0.0; p.noise_dim()],
        }
    }

    /// One proposal from `x` over `dt`; the noise buffer is freshly drawn.
    fn propose(&mut self, x: &[f64], dt: f64, stream: &mut RngStream) {
        let sqrt_dt = dt.sqrt();
        stream.fill_gaussian(&mut self.noise);
        match self.p.interpretation {
            Interpretation::Ito => {
                (self.p.drift)(x, &mut self.drift_a);
                self.proposal.copy_from_slice(x);
                for (pi, di) in self.proposal.iter_mut().zip(&self.drift_a) {
                    *pi += di * dt;
                }
                add_noise(
                    &self.p.diffusion,
                    x,
                    &self.noise,
                    sqrt_dt,
                    &mut self.proposal,
                    &mut self.col,
                );
            }
            Interpretation::Stratonovich => {
                // predictor: Euler step with diffusion at x
                (self.p.drift)(x, &mut self.drift_a);
                self.predictor.copy_from_slice(x);
                for (pi, di) in self.predictor.iter_mut().zip(&self.drift_a) {
                    *pi += di * dt;
                }
                add_noise(
                    &self.p.diffusion,
                    x,
                    &self.noise,
                    sqrt_dt,
                    &mut self.predictor,
                    &mut self.col,
                );
                // corrector: averaged drift, diffusion columns at the midpoint
                (self.p.drift)(&self.predictor, &mut self.drift_b);
                for (m, (xi, pi)) in self.midpoint.iter_mut().zip(x.iter().zip(&self.predictor)) {
                    *m = 0.5 * (xi + pi);
                }
                self.proposal.copy_from_slice(x);
                for i in 0..self.p.dim {
                    self.proposal[i] += 0.5 * (self.drift_a[i] + self.drift_b[i]) * dt;
                }
                add_noise(
                    &self.p.diffusion,
                    &self.midpoint,
                    &self.noise,
                    sqrt_dt,
                    &mut self.proposal,
                    &mut self.col,
                );
            }
        }
        if let Some(proj) = &self.p.constraint_projector {
            proj(&mut self.proposal);
        }
    }

    /// Advance `x` by `dt`, substepping on guard rejection; returns the
    /// number of substep recursions spent.
    fn advance(
        &mut self,
        x: &mut Vec<f64>,
        dt: f64,
        depth: u32,
        time: f64,
        path: usize,
        stream: &mut RngStream,
    ) -> Result<u64> {
        self.propose(x, dt, stream);
        // a non-finite proposal is a numerical fault, not a wall event
        // (NaN would silently fail the guard comparisons)
        if self.proposal.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFault { path, time });
        }
        if (self.p.domain_guard)(&self.proposal) {
            x.copy_from_slice(&self.proposal);
            return Ok(0);
        }
        match self.p.wall_policy {
            WallPolicy::RejectPath => Err(Error::WallCollision { path, time }),
            WallPolicy::Substep => {
                if depth >= MAX_SUBSTEP_DEPTH {
                    return Err(Error::WallCollision { path, time });
                }
                let half = 0.5 * dt;
                let e1 = self.advance(x, half, depth + 1, time, path, stream)?;
                let e2 = self.advance(x, half, depth + 1, time + half, path, stream)?;
                Ok(1 + e1 + e2)
            }
        }
    }
}

fn simulate_path(
    p: &SdeProblem,
    x0: &[f64],
    n_steps: usize,
    dt: f64,
    store_stride: usize,
    path: usize,
    master_seed: u64,
) -> Result<PathOutcome> {
    let mut stream = RngStream::derive(master_seed, path as u64);
    let mut stepper = Stepper::new(p);
    let mut x = x0.to_vec();
    let mut stored = Vec::with_capacity((n_steps / store_stride + 2) * p.dim);
    stored.extend_from_slice(&x);
    let mut substep_events = 0u64;
    for step in 0..n_steps {
        let time = step as f64 * dt;
        match stepper.advance(&mut x, dt, 0, time, path, &mut stream) {
            Ok(events) => substep_events += events,
            Err(Error::WallCollision { time, .. }) if p.wall_policy == WallPolicy::RejectPath => {
                return Ok(PathOutcome {
                    stored: Vec::new(),
                    substep_events,
                    rejected_at: Some(time),
                });
            }
            Err(e) => return Err(e),
        }
        let next = step + 1;
        if next % store_stride == 0 || next == n_steps {
            stored.extend_from_slice(&x);
        }
    }
    Ok(PathOutcome {
        stored,
        substep_events,
        rejected_at: None,
    })
}

/// Result of folding an observer over one path.
pub struct PathRun<T> {
    pub acc: T,
    pub state: Vec<f64>,
    pub substep_events: u64,
    /// Set when the kill predicate fired or (with `absorb_on_wall`) the
    /// substep limit was exhausted; the path stops there.
    pub killed_at: Option<f64>,
}

/// Step a single path, folding `on_step` over every accepted step, without
/// storing the trajectory. Used by the Feynman-Kac estimators.
///
/// `kill` is checked after every accepted step; `absorb_on_wall` turns a
/// substep-exhaustion error into a kill event instead of an error.
#[allow(clippy::too_many_arguments)]
pub fn fold_path<T>(
    p: &SdeProblem,
    x0: &[f64],
    n_steps: usize,
    dt: f64,
    stream: &mut RngStream,
    init: T,
    mut on_step: impl FnMut(&mut T, f64, &[f64]),
    kill: Option<&(dyn Fn(&[f64]) -> bool + Sync)>,
    absorb_on_wall: bool,
    path: usize,
) -> Result<PathRun<T>> {
    let mut stepper = Stepper::new(p);
    let mut x = x0.to_vec();
    let mut acc = init;
    let mut substep_events = 0u64;
    for step in 0..n_steps {
        let time = step as f64 * dt;
        match stepper.advance(&mut x, dt, 0, time, path, stream) {
            Ok(events) => substep_events += events,
            Err(Error::WallCollision { time, .. }) if absorb_on_wall => {
                return Ok(PathRun {
                    acc,
                    state: x,
                    substep_events,
                    killed_at: Some(time),
                });
            }
            Err(e) => return Err(e),
        }
        let t_new = (step + 1) as f64 * dt;
        if let Some(kill_fn) = kill {
            if kill_fn(&x) {
                return Ok(PathRun {
                    acc,
                    state: x,
                    substep_events,
                    killed_at: Some(t_new),
                });
            }
        }
        on_step(&mut acc, t_new, &x);
    }
    Ok(PathRun {
        acc,
        state: x,
        substep_events,
        killed_at: None,
    })
}

/// Stored time grid for `n_steps` steps of `dt` thinned by `store_stride`.
pub fn stored_times(n_steps: usize, dt: f64, store_stride: usize) -> Vec<f64> {
    let mut times = vec![0.0];
    for step in 1..=n_steps {
        if step % store_stride == 0 || step == n_steps {
            times.push(step as f64 * dt);
        }
    }
    times
}

/// Simulate an ensemble storing every step.
pub fn simulate_ensemble(
    p: &SdeProblem,
    x0: &[f64],
    t_final: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
) -> Result<PathEnsemble> {
    simulate_ensemble_strided(p, x0, t_final, dt, n_paths, master_seed, 1)
}

/// Simulate an ensemble keeping every `store_stride`-th step (the initial
/// and final states are always kept).
pub fn simulate_ensemble_strided(
    p: &SdeProblem,
    x0: &[f64],
    t_final: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
    store_stride: usize,
) -> Result<PathEnsemble> {
    if x0.len() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            got: x0.len(),
        });
    }
    if !(dt > 0.0) || !(t_final > 0.0) {
        return Err(Error::Grid("need positive dt and t_final".into()));
    }
    if !(p.domain_guard)(x0) {
        return Err(Error::InvalidPoint(
            "initial condition violates the domain guard".into(),
        ));
    }
    let stride = store_stride.max(1);
    let n_steps = (t_final / dt).round() as usize;
    if n_steps == 0 {
        return Err(Error::Grid("t_final shorter than one step".into()));
    }

    let outcomes: Vec<Result<PathOutcome>> = (0..n_paths)
        .into_par_iter()
        .map(|path| simulate_path(p, x0, n_steps, dt, stride, path, master_seed))
        .collect();

    let times = stored_times(n_steps, dt, stride);
    let mut values = Vec::with_capacity(n_paths * times.len() * p.dim);
    let mut substep_paths = 0usize;
    let mut substep_events = 0u64;
    let mut rejected = Vec::new();
    for (path, outcome) in outcomes.into_iter().enumerate() {
        let o = outcome?;
        substep_events += o.substep_events;
        if o.substep_events > 0 {
            substep_paths += 1;
        }
        match o.rejected_at {
            Some(time) => rejected.push(RejectedPath {
                path_index: path,
                time,
            }),
            None => values.extend_from_slice(&o.stored),
        }
    }
    let mut ens = PathEnsemble::new(
        p.dim,
        times,
        dt,
        master_seed,
        p.label.clone(),
        values,
    )?;
    ens.set_wall_stats(substep_paths, substep_events, rejected);
    Ok(ens)
}
