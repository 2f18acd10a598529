//! Drift/diffusion problem specification consumed by the integrator.

use std::sync::Arc;

/// In-place vector field: writes f(x) into `out`.
pub type Field = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// Domain membership predicate.
pub type Guard = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
/// In-place state projection applied after every accepted step.
pub type Projector = Arc<dyn Fn(&mut [f64]) + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpretation {
    /// Euler-Maruyama stepping.
    Ito,
    /// Heun predictor-corrector with midpoint evaluation of the diffusion
    /// columns.
    Stratonovich,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallPolicy {
    /// Halve dt locally (up to [`crate::sde::integrate::MAX_SUBSTEP_DEPTH`]
    /// levels) when the guard rejects a proposal, then error out.
    Substep,
    /// Drop the path at the first guard rejection and record it.
    RejectPath,
}

/// Diffusion part of the equation.
pub enum Diffusion {
    /// One unit column per state dimension (additive noise).
    UnitColumns,
    /// General state-dependent columns; the noise dimension is the number
    /// of columns.
    Columns(Vec<Field>),
}

impl Diffusion {
    pub fn noise_dim(&self, state_dim: usize) -> usize {
        match self {
            Diffusion::UnitColumns => state_dim,
            Diffusion::Columns(cols) => cols.len(),
        }
    }
}

/// A drift/diffusion specification with interpretation flag, domain guard
/// and wall policy.
pub struct SdeProblem {
    pub dim: usize,
    pub drift: Field,
    pub diffusion: Diffusion,
    pub interpretation: Interpretation,
    pub domain_guard: Guard,
    pub wall_policy: WallPolicy,
    pub constraint_projector: Option<Projector>,
    pub label: String,
}

impl SdeProblem {
    /// Plain additive-noise Ito problem on all of R^dim.
    pub fn additive(
        dim: usize,
        drift: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Self {
        SdeProblem {
            dim,
            drift: Arc::new(drift),
            diffusion: Diffusion::UnitColumns,
            interpretation: Interpretation::Ito,
            domain_guard: Arc::new(|_| true),
            wall_policy: WallPolicy::Substep,
            constraint_projector: None,
            label: label.into(),
        }
    }

    /// Driftless Brownian motion in R^dim.
    pub fn brownian(dim: usize) -> Self {
        SdeProblem::additive(dim, |_, out| out.fill(0.0), format!("bm{dim}"))
    }

    pub fn noise_dim(&self) -> usize {
        self.diffusion.noise_dim(self.dim)
    }

    pub fn with_interpretation(mut self, interpretation: Interpretation) -> Self {
        self.interpretation = interpretation;
        self
    }

    pub fn with_wall_policy(mut self, policy: WallPolicy) -> Self {
        self.wall_policy = policy;
        self
    }
}
