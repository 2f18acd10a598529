//! Coupling adjudication and ground-state residuals.
//!
//! The defining quantity is `(1/2) delta^{-1/2} (laplacian of delta^{1/2})`.
//! Its closed form is `RootSystem::potential_from_delta`; the independent
//! finite-difference route below evaluates it from `delta` alone. The two
//! published coupling conventions for the inverse-square potential are
//! compared against the closed form point by point.

use crate::error::{Error, Result};
use crate::linalg;
use crate::rootsys::{CmConvention, RootSystem};
use crate::sde::rng::RngStream;
use serde::{Deserialize, Serialize};

/// Finite-difference evaluation of `(1/2) delta^{-1/2} lap(delta^{1/2})`
/// from delta values alone (central second differences, step `h`, along
/// every ambient coordinate).
///
/// For A-type systems delta is constant along the direction orthogonal to
/// the root span, so the ambient Laplacian equals the intrinsic one.
pub fn fd_half_delta_potential(rs: &RootSystem, x: &[f64], h: f64) -> Result<f64> {
    let s0 = rs.delta(x)?.sqrt();
    let mut lap = 0.0;
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let sp = rs.delta(&xp)?.sqrt();
        xp[i] = x[i] - h;
        let sm = rs.delta(&xp)?.sqrt();
        xp[i] = x[i];
        lap += (sp - 2.0 * s0 + sm) / (h * h);
    }
    Ok(0.5 * lap / s0)
}

/// Deterministic chamber-interior sample points: perturbations of a
/// positive multiple of the sum of positive roots, resampled until all
/// normalized root values clear `min_gap`.
pub fn random_chamber_points(
    rs: &RootSystem,
    count: usize,
    seed: u64,
    min_gap: f64,
) -> Result<Vec<Vec<f64>>> {
    let d = rs.ambient_dim();
    // 2 rho = sum of positive roots lies in the closed chamber interior
    let mut center = vec![0.0; d];
    for alpha in rs.positive_roots() {
        linalg::axpy(1.0, alpha, &mut center);
    }
    let nc = linalg::norm(&center);
    if nc > 0.0 {
        linalg::scale(1.0 / nc, &mut center);
    }
    let mut stream = RngStream::derive(seed, 0);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 10_000 * count.max(1) {
            return Err(Error::NonConvergence {
                what: "chamber point sampling".into(),
                iterations: attempts,
            });
        }
        let scale = 0.8 + 1.4 * stream.next_uniform();
        let mut x: Vec<f64> = center.iter().map(|c| scale * c).collect();
        for xi in x.iter_mut() {
            *xi += 0.35 * stream.next_gaussian();
        }
        let x = rs.project_to_root_span(&x)?;
        let ok = rs.positive_roots().iter().all(|alpha| {
            linalg::dot(alpha, &x) / linalg::norm(alpha) > min_gap
        });
        if ok {
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdjudicationRow {
    pub system: String,
    pub point: Vec<f64>,
    /// the defining potential (closed form of the delta expression)
    pub oracle: f64,
    /// coefficient m(2m-2)
    pub two_m_value: f64,
    /// coefficient m(m-2+2 m2)
    pub op83_value: f64,
    pub two_m_matches: bool,
    pub op83_matches: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdjudicationReport {
    pub tolerance: f64,
    pub rows: Vec<AdjudicationRow>,
    pub two_m_matches_all: bool,
    pub op83_matches_all: bool,
    pub verdict: String,
}

impl AdjudicationReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str("system     |           oracle |          m(2m-2) |      m(m-2+2m2) | 2m ok | op83 ok\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:10} | {:16.10e} | {:16.10e} | {:15.10e} | {:5} | {:5}\n",
                r.system, r.oracle, r.two_m_value, r.op83_value, r.two_m_matches, r.op83_matches
            ));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out
    }
}

/// Compare both coupling conventions against the defining potential on the
/// given chamber points. A convention matches when every sampled value
/// agrees within `tol * (1 + |oracle|)`.
pub fn cm_adjudicate_coupling(
    systems: &[RootSystem],
    points_per_system: &[Vec<Vec<f64>>],
    tol: f64,
) -> Result<AdjudicationReport> {
    if systems.len() != points_per_system.len() {
        return Err(Error::DimensionMismatch {
            expected: systems.len(),
            got: points_per_system.len(),
        });
    }
    let mut rows = Vec::new();
    let mut two_m_all = true;
    let mut op83_all = true;
    for (rs, points) in systems.iter().zip(points_per_system) {
        for x in points {
            let oracle = rs.potential_from_delta(x)?;
            let two_m_value = rs.cm_potential(x, CmConvention::TwoM)?;
            let op83_value = rs.cm_potential(x, CmConvention::Op83)?;
            let budget = tol * (1.0 + oracle.abs());
            let two_m_matches = (two_m_value - oracle).abs() <= budget;
            let op83_matches = (op83_value - oracle).abs() <= budget;
            two_m_all &= two_m_matches;
            op83_all &= op83_matches;
            rows.push(AdjudicationRow {
                system: rs.name().to_string(),
                point: x.clone(),
                oracle,
                two_m_value,
                op83_value,
                two_m_matches,
                op83_matches,
            });
        }
    }
    let verdict = match (op83_all, two_m_all) {
        (true, false) => "m(m-2+2m2) matches the defining potential; m(2m-2) does not".to_string(),
        (true, true) => "both conventions match on the sampled systems".to_string(),
        (false, true) => "m(2m-2) matches; m(m-2+2m2) does not".to_string(),
        (false, false) => "neither convention matches the defining potential".to_string(),
    };
    Ok(AdjudicationReport {
        tolerance: tol,
        rows,
        two_m_matches_all: two_m_all,
        op83_matches_all: op83_all,
        verdict,
    })
}

/// A uniform chart of a chamber region: `point(i_1, .., i_d) = origin +
/// sum_d axes[d][i_d] * basis[d]` with an orthonormal basis.
#[derive(Debug, Clone)]
pub struct ChamberChart {
    pub origin: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub axes: Vec<Vec<f64>>,
}

impl ChamberChart {
    /// 1-D chart along the coordinate line of a rank-one system.
    pub fn line(a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / (n - 1) as f64;
        ChamberChart {
            origin: vec![0.0],
            basis: vec![vec![1.0]],
            axes: vec![(0..n).map(|i| a + i as f64 * h).collect()],
        }
    }

    /// 2-D chart centered at `origin` spanned by orthonormal `b1`, `b2`.
    pub fn patch2(
        origin: Vec<f64>,
        b1: Vec<f64>,
        b2: Vec<f64>,
        half_extent: f64,
        n: usize,
    ) -> Result<Self> {
        for (i, u) in [&b1, &b2].iter().enumerate() {
            if (linalg::norm(u) - 1.0).abs() > 1e-12 {
                return Err(Error::Grid(format!("basis vector {i} is not unit")));
            }
        }
        if linalg::dot(&b1, &b2).abs() > 1e-12 {
            return Err(Error::Grid("chart basis is not orthogonal".into()));
        }
        let h = 2.0 * half_extent / (n - 1) as f64;
        let axis: Vec<f64> = (0..n).map(|i| -half_extent + i as f64 * h).collect();
        Ok(ChamberChart {
            origin,
            basis: vec![b1, b2],
            axes: vec![axis.clone(), axis],
        })
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        let mut x = self.origin.clone();
        for (d, &i) in idx.iter().enumerate() {
            linalg::axpy(self.axes[d][i], &self.basis[d], &mut x);
        }
        x
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    pub fn spacing(&self, d: usize) -> f64 {
        self.axes[d][1] - self.axes[d][0]
    }
}

/// Ground-state residual: sup over interior chart nodes of
/// `|(-1/2 lap + V) sqrt(delta)|` divided by `sup sqrt(delta)`, with the
/// Laplacian by central differences in the orthonormal chart coordinates
/// and V the closed-form potential.
pub fn cm_ground_state_check(rs: &RootSystem, chart: &ChamberChart) -> Result<f64> {
    let shape = chart.shape();
    match shape.len() {
        1 => {
            let n = shape[0];
            let h = chart.spacing(0);
            let mut s = Vec::with_capacity(n);
            for i in 0..n {
                s.push(rs.delta(&chart.point(&[i]))?.sqrt());
            }
            let sup_s = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut sup_res: f64 = 0.0;
            for i in 1..n - 1 {
                let lap = (s[i + 1] - 2.0 * s[i] + s[i - 1]) / (h * h);
                let v = rs.potential_from_delta(&chart.point(&[i]))?;
                sup_res = sup_res.max((-0.5 * lap + v * s[i]).abs());
            }
            Ok(sup_res / sup_s)
        }
        2 => {
            let (n0, n1) = (shape[0], shape[1]);
            let (h0, h1) = (chart.spacing(0), chart.spacing(1));
            let mut s = vec![0.0; n0 * n1];
            for i in 0..n0 {
                for j in 0..n1 {
                    s[i * n1 + j] = rs.delta(&chart.point(&[i, j]))?.sqrt();
                }
            }
            let sup_s = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut sup_res: f64 = 0.0;
            for i in 1..n0 - 1 {
                for j in 1..n1 - 1 {
                    let lap = (s[(i + 1) * n1 + j] - 2.0 * s[i * n1 + j] + s[(i - 1) * n1 + j])
                        / (h0 * h0)
                        + (s[i * n1 + j + 1] - 2.0 * s[i * n1 + j] + s[i * n1 + j - 1])
                            / (h1 * h1);
                    let v = rs.potential_from_delta(&chart.point(&[i, j]))?;
                    sup_res = sup_res.max((-0.5 * lap + v * s[i * n1 + j]).abs());
                }
            }
            Ok(sup_res / sup_s)
        }
        d => Err(Error::Grid(format!("unsupported chart dimension {d}"))),
    }
}

/// Orthonormal basis of the A2 root span (trace-zero hyperplane in R^3).
pub fn a2_span_basis() -> (Vec<f64>, Vec<f64>) {
    let s2 = 2.0_f64.sqrt();
    let s6 = 6.0_f64.sqrt();
    (
        vec![1.0 / s2, -1.0 / s2, 0.0],
        vec![1.0 / s6, 1.0 / s6, -2.0 / s6],
    )
}
