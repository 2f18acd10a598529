//! Grid functions, finite-difference operators and the Crank-Nicolson
//! reference solver.

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use std::io::Write;
use std::sync::Arc;

/// Values on a tensor grid; `values` is row-major over the axes.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let expect: usize = axes.iter().map(|a| a.len()).product();
        if expect == 0 || values.len() != expect {
            return Err(Error::Grid(format!(
                "value buffer ({}) does not match grid ({expect})",
                values.len()
            )));
        }
        for a in &axes {
            if a.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Grid("axis nodes must be strictly increasing".into()));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("grid values must be finite".into()));
        }
        Ok(GridFunction { axes, values })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Value at (i, j) of a 2-D grid.
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes[1].len() + j]
    }

    /// CSV export: node coordinates then the value.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        for d in 0..self.dim() {
            write!(w, "x_{}{}", d + 1, if d + 1 == self.dim() { "" } else { "," })?;
        }
        writeln!(w, ",value")?;
        let shape: Vec<usize> = self.axes.iter().map(|a| a.len()).collect();
        for (flat, v) in self.values.iter().enumerate() {
            let mut rem = flat;
            let mut idx = vec![0usize; shape.len()];
            for d in (0..shape.len()).rev() {
                idx[d] = rem % shape[d];
                rem /= shape[d];
            }
            for d in 0..shape.len() {
                write!(w, "{},", self.axes[d][idx[d]])?;
            }
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}

/// A second-order operator `L = kinetic d^2 + b(x) d + Z(x)` on a line.
#[derive(Clone)]
pub struct OperatorSpec {
    pub kinetic: f64,
    pub drift: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    pub zeroth: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub label: String,
}

impl OperatorSpec {
    /// `L = (1/2) d^2 + Z(x)`.
    pub fn heat_with_potential(
        zeroth: impl Fn(f64) -> f64 + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Self {
        OperatorSpec {
            kinetic: 0.5,
            drift: None,
            zeroth: Arc::new(zeroth),
            label: label.into(),
        }
    }

    /// Apply by central differences at the interior nodes of a uniform
    /// grid; the two boundary entries of the result are set to zero.
    pub fn apply(&self, nodes: &[f64], values: &[f64]) -> Result<Vec<f64>> {
        let n = nodes.len();
        if values.len() != n || n < 3 {
            return Err(Error::Grid("need at least 3 nodes".into()));
        }
        let h = uniform_spacing(nodes)?;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            let second = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
            let mut v = self.kinetic * second + (self.zeroth)(nodes[i]) * values[i];
            if let Some(b) = &self.drift {
                let first = (values[i + 1] - values[i - 1]) / (2.0 * h);
                v += b(nodes[i]) * first;
            }
            out[i] = v;
        }
        Ok(out)
    }
}

pub fn uniform_spacing(nodes: &[f64]) -> Result<f64> {
    if nodes.len() < 2 {
        return Err(Error::Grid("need at least 2 nodes".into()));
    }
    let h = nodes[1] - nodes[0];
    for w in nodes.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(Error::Grid("grid spacing is not uniform".into()));
        }
    }
    Ok(h)
}

/// `n` interior nodes of (a, b) with spacing h = (b-a)/(n+1); the Dirichlet
/// boundary sits at a and b.
pub fn interior_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n + 1) as f64;
    (1..=n).map(|i| a + i as f64 * h).collect()
}

/// Dirichlet discretization of the Hamiltonian `H = -kinetic d^2 + V(x)`
/// on a uniform grid of interior nodes: a symmetric tridiagonal matrix.
pub fn build_grid_operator(
    nodes: &[f64],
    potential: impl Fn(f64) -> f64,
    kinetic: f64,
) -> Result<Tridiagonal> {
    let n = nodes.len();
    if n < 2 {
        return Err(Error::Grid("need at least 2 interior nodes".into()));
    }
    let h = uniform_spacing(nodes)?;
    let mut diag = Vec::with_capacity(n);
    for &x in nodes {
        let v = potential(x);
        if !v.is_finite() {
            return Err(Error::Grid(format!("potential not finite at {x}")));
        }
        diag.push(2.0 * kinetic / (h * h) + v);
    }
    let off = vec![-kinetic / (h * h); n - 1];
    Ok(Tridiagonal { diag, off })
}

/// Residuals of `d_t psi = L psi` on a (t, x) surface, by central
/// differences in both variables over the interior nodes.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceResidual {
    pub sup: f64,
    /// sup residual normalized by sup |psi|
    pub sup_relative: f64,
}

pub fn pde_residual(
    times: &[f64],
    nodes: &[f64],
    values: &[f64],
    spec: &OperatorSpec,
) -> Result<SurfaceResidual> {
    let nt = times.len();
    let nx = nodes.len();
    if nt < 3 || nx < 3 {
        return Err(Error::Grid("need at least 3 time slices and 3 nodes".into()));
    }
    if values.len() != nt * nx {
        return Err(Error::Grid("surface does not tile the (t, x) grid".into()));
    }
    let dt = uniform_spacing(times)?;
    let sup_psi = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup_psi == 0.0 {
        return Err(Error::Grid("surface is identically zero".into()));
    }
    let mut sup: f64 = 0.0;
    for j in 1..nt - 1 {
        let row = &values[j * nx..(j + 1) * nx];
        let l_row = spec.apply(nodes, row)?;
        for i in 1..nx - 1 {
            let dpsi_dt = (values[(j + 1) * nx + i] - values[(j - 1) * nx + i]) / (2.0 * dt);
            sup = sup.max((dpsi_dt - l_row[i]).abs());
        }
    }
    Ok(SurfaceResidual {
        sup,
        sup_relative: sup / sup_psi,
    })
}

/// Crank-Nicolson evolution of `d_t psi = kinetic psi'' + Z(x) psi` with
/// Dirichlet walls at `x_lo`, `x_hi`, from `psi(0, x) = initial(x)`.
///
/// Returns the surface on the stored times `0, store_every*dt, ...` over the
/// interior nodes.
#[allow(clippy::too_many_arguments)]
pub fn crank_nicolson(
    spec: &OperatorSpec,
    x_lo: f64,
    x_hi: f64,
    n_interior: usize,
    dt: f64,
    n_steps: usize,
    store_every: usize,
    initial: impl Fn(f64) -> f64,
) -> Result<GridFunction> {
    if spec.drift.is_some() {
        return Err(Error::Grid(
            "the Crank-Nicolson solver handles drift-free operators".into(),
        ));
    }
    let nodes = interior_grid(x_lo, x_hi, n_interior);
    let h = uniform_spacing(&nodes)?;
    let k = spec.kinetic;
    // L = kinetic D2 + Z as tridiagonal pieces
    let z: Vec<f64> = nodes.iter().map(|&x| (spec.zeroth)(x)).collect();
    let l_diag: Vec<f64> = z.iter().map(|zi| -2.0 * k / (h * h) + zi).collect();
    let l_off = k / (h * h);
    // (I - dt/2 L) and (I + dt/2 L)
    let a = Tridiagonal {
        diag: l_diag.iter().map(|d| 1.0 - 0.5 * dt * d).collect(),
        off: vec![-0.5 * dt * l_off; n_interior - 1],
    };
    let b = Tridiagonal {
        diag: l_diag.iter().map(|d| 1.0 + 0.5 * dt * d).collect(),
        off: vec![0.5 * dt * l_off; n_interior - 1],
    };
    let mut psi: Vec<f64> = nodes.iter().map(|&x| initial(x)).collect();
    let stride = store_every.max(1);
    let mut times = vec![0.0];
    let mut surface = psi.clone();
    let mut rhs = vec![0.0; n_interior];
    for step in 1..=n_steps {
        b.apply(&psi, &mut rhs);
        psi = a.solve_shifted(0.0, &rhs);
        if step % stride == 0 || step == n_steps {
            times.push(step as f64 * dt);
            surface.extend_from_slice(&psi);
        }
    }
    GridFunction::new(vec![times, nodes], surface)
}
