//! Statistical verification of the reduction picture: pathwise orbit
//! projection of matrix ensembles, two-sample law comparison, and
//! generator/drift estimation from short-time slopes.

use crate::error::{Error, Result};
use crate::geom::hermitian::{eigen_project, HermitianPoint};
use crate::sde::ensemble::PathEnsemble;
use crate::sde::integrate::simulate_ensemble_strided;
use crate::sde::problem::SdeProblem;
use serde::{Deserialize, Serialize};

/// Mean, standard error and sample count of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

impl MCEstimate {
    pub fn from_samples(samples: &[f64], seed: u64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: samples.len(),
            });
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        Ok(MCEstimate {
            mean,
            stderr: (var / n).sqrt(),
            n: samples.len(),
            seed,
        })
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_stderr(&self, other: &MCEstimate) -> f64 {
        (self.stderr * self.stderr + other.stderr * other.stderr).sqrt()
    }
}

/// Project a matrix Brownian ensemble (interleaved Hermitian states) to
/// its sorted-eigenvalue paths on the chamber.
pub fn project_ensemble(matrix_ensemble: &PathEnsemble, wall_eps: f64) -> Result<PathEnsemble> {
    let dim = matrix_ensemble.dim;
    let n = ((dim / 2) as f64).sqrt() as usize;
    if 2 * n * n != dim {
        return Err(Error::DimensionMismatch {
            expected: 2 * n * n,
            got: dim,
        });
    }
    matrix_ensemble.map_states(n, format!("{}(eigen)", matrix_ensemble.label), |path, k, s| {
        let h = HermitianPoint::from_interleaved(n, s)
            .map_err(|e| Error::NonRegular(format!("path {path} time index {k}: {e}")))?;
        eigen_project(&h, wall_eps)
            .map_err(|e| Error::NonRegular(format!("path {path} time index {k}: {e}")))
    })
}

/// Two-sided two-sample Kolmogorov-Smirnov statistic and asymptotic
/// p-value with effective size `n_a n_b / (n_a + n_b)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 20 || b.len() < 20 {
        return Err(Error::InsufficientSamples {
            needed: 20,
            got: a.len().min(b.len()),
        });
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.total_cmp(q));
    ys.sort_by(|p, q| p.total_cmp(q));
    let (na, nb) = (xs.len(), ys.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        let fa = i as f64 / na as f64;
        let fb = j as f64 / nb as f64;
        d = d.max((fa - fb).abs());
    }
    let ne = (na as f64) * (nb as f64) / ((na + nb) as f64);
    let lambda = ne.sqrt() * d;
    Ok((d, kolmogorov_q(lambda)))
}

/// Survival function of the Kolmogorov distribution,
/// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2), with the dual series
/// for small arguments. Truncated at 100 terms or term size 1e-10.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Q = 1 - sqrt(2 pi)/x * sum exp(-(2k-1)^2 pi^2 / (8 x^2))
        let mut sum = 0.0;
        let f = std::f64::consts::PI * std::f64::consts::PI / (8.0 * x * x);
        for k in 1..=100 {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * f).exp();
            sum += term;
            if term < 1e-10 {
                break;
            }
        }
        let p = 1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * sum;
        p.clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kk = k as f64;
            let term = (-2.0 * kk * kk * x * x).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-10 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Per-coordinate comparison of two ensembles at a fixed time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoordinateComparison {
    pub coord: usize,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub mean_combined_stderr: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub var_combined_stderr: f64,
}

/// Law comparison of two ensembles at a fixed stored time: per-coordinate
/// two-sample KS plus a first/second moment table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LawComparison {
    pub at_time: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub coordinates: Vec<CoordinateComparison>,
    /// Largest |cov_a - cov_b| z-score over off-diagonal pairs.
    pub max_offdiag_cov_z: f64,
    pub rejected_a: usize,
    pub rejected_b: usize,
}

impl LawComparison {
    pub fn min_p_value(&self) -> f64 {
        self.coordinates
            .iter()
            .map(|c| c.p_value)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_mean_z(&self) -> f64 {
        self.coordinates
            .iter()
            .map(|c| (c.mean_a - c.mean_b).abs() / c.mean_combined_stderr.max(1e-300))
            .fold(0.0, f64::max)
    }

    pub fn max_var_z(&self) -> f64 {
        self.coordinates
            .iter()
            .map(|c| (c.var_a - c.var_b).abs() / c.var_combined_stderr.max(1e-300))
            .fold(0.0, f64::max)
    }

    /// Human-readable table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "law comparison at t = {} ({} vs {} paths)\n",
            self.at_time, self.n_a, self.n_b
        ));
        out.push_str("coord |   KS stat |   p-value |    mean A |    mean B |     var A |     var B\n");
        for c in &self.coordinates {
            out.push_str(&format!(
                "{:5} | {:9.5} | {:9.5} | {:9.5} | {:9.5} | {:9.5} | {:9.5}\n",
                c.coord, c.ks_statistic, c.p_value, c.mean_a, c.mean_b, c.var_a, c.var_b
            ));
        }
        out.push_str(&format!(
            "max |mean z| = {:.3}, max |var z| = {:.3}, max offdiag cov z = {:.3}\n",
            self.max_mean_z(),
            self.max_var_z(),
            self.max_offdiag_cov_z
        ));
        out
    }
}

fn moments(vals: &[f64]) -> (f64, f64, f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for v in vals {
        let d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    let mean_se = (m2 / n).sqrt();
    // stderr of the sample variance via the fourth central moment
    let var_se = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    (mean, mean_se, m2, var_se)
}

/// Compare the laws of two ensembles at a common stored time.
pub fn compare_laws(a: &PathEnsemble, b: &PathEnsemble, at_time: f64) -> Result<LawComparison> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let ka = a.time_index(at_time)?;
    let kb = b.time_index(at_time)?;
    let mut coordinates = Vec::with_capacity(a.dim);
    for coord in 0..a.dim {
        let va = a.column(ka, coord);
        let vb = b.column(kb, coord);
        let (ks_statistic, p_value) = ks_two_sample(&va, &vb)?;
        let (mean_a, se_a, var_a, vse_a) = moments(&va);
        let (mean_b, se_b, var_b, vse_b) = moments(&vb);
        coordinates.push(CoordinateComparison {
            coord,
            ks_statistic,
            p_value,
            mean_a,
            mean_b,
            mean_combined_stderr: (se_a * se_a + se_b * se_b).sqrt(),
            var_a,
            var_b,
            var_combined_stderr: (vse_a * vse_a + vse_b * vse_b).sqrt(),
        });
    }
    // off-diagonal covariance residuals
    let mut max_offdiag_cov_z: f64 = 0.0;
    for i in 0..a.dim {
        for j in (i + 1)..a.dim {
            let (ca, sa) = covariance(&a.column(ka, i), &a.column(ka, j));
            let (cb, sb) = covariance(&b.column(kb, i), &b.column(kb, j));
            let z = (ca - cb).abs() / (sa * sa + sb * sb).sqrt().max(1e-300);
            max_offdiag_cov_z = max_offdiag_cov_z.max(z);
        }
    }
    Ok(LawComparison {
        at_time,
        n_a: a.n_paths,
        n_b: b.n_paths,
        coordinates,
        max_offdiag_cov_z,
        rejected_a: a.rejected.len(),
        rejected_b: b.rejected.len(),
    })
}

fn covariance(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut c = 0.0;
    let mut c2 = 0.0;
    for (a, b) in x.iter().zip(y) {
        let p = (a - mx) * (b - my);
        c += p;
        c2 += p * p;
    }
    c /= n;
    c2 /= n;
    (c, ((c2 - c * c).max(0.0) / n).sqrt())
}

/// Short-time generator estimate with Richardson extrapolation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorEstimate {
    /// slope (E[f(G_t)] - f(x0)) / t at the full horizon
    pub raw: MCEstimate,
    /// slope at the halved horizon
    pub raw_half: MCEstimate,
    /// 2 * slope(t/2) - slope(t), removing the O(t) bias
    pub richardson: MCEstimate,
}

/// Estimate `(A f)(x0)` from two ensembles started at `x0` with horizons
/// `t` and `t/2`. The ensembles may come from any simulator; wall events
/// beyond 1% of paths are an error.
pub fn generator_estimate_from_ensembles(
    ens_t: &PathEnsemble,
    ens_half: &PathEnsemble,
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    t: f64,
) -> Result<GeneratorEstimate> {
    for e in [ens_t, ens_half] {
        let wall_events = e.rejected.len() + e.substep_paths;
        if (wall_events as f64) > 0.01 * (e.n_paths + e.rejected.len()) as f64 {
            return Err(Error::ExcessiveWallEvents {
                events: wall_events,
                total: e.n_paths + e.rejected.len(),
                limit: 1.0,
            });
        }
    }
    let f0 = f(x0);
    let slope = |e: &PathEnsemble, horizon: f64| -> Result<MCEstimate> {
        let k = e.time_index(horizon)?;
        let samples: Vec<f64> = (0..e.n_paths)
            .map(|p| (f(e.state(p, k)) - f0) / horizon)
            .collect();
        MCEstimate::from_samples(&samples, e.master_seed)
    };
    let raw = slope(ens_t, t)?;
    let raw_half = slope(ens_half, 0.5 * t)?;
    let richardson = MCEstimate {
        mean: 2.0 * raw_half.mean - raw.mean,
        stderr: (4.0 * raw_half.stderr * raw_half.stderr + raw.stderr * raw.stderr).sqrt(),
        n: raw.n + raw_half.n,
        seed: ens_t.master_seed,
    };
    Ok(GeneratorEstimate {
        raw,
        raw_half,
        richardson,
    })
}

/// Convenience wrapper simulating the two horizons of an [`SdeProblem`].
pub fn generator_estimate(
    p: &SdeProblem,
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    t: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
) -> Result<GeneratorEstimate> {
    let n_steps = (t / dt).round() as usize;
    let ens_t = simulate_ensemble_strided(p, x0, t, dt, n_paths, master_seed, n_steps)?;
    let ens_half = simulate_ensemble_strided(
        p,
        x0,
        0.5 * t,
        dt,
        n_paths,
        master_seed.wrapping_add(1),
        (n_steps / 2).max(1),
    )?;
    generator_estimate_from_ensembles(&ens_t, &ens_half, f, x0, t)
}

/// Local-constant drift estimate: the mean increment per unit time over
/// `window` steps, restricted to paths whose state at `at_time` lies within
/// half a standard deviation of the ensemble mean (per coordinate).
pub fn drift_estimate(
    ensemble: &PathEnsemble,
    at_time: f64,
    window: usize,
) -> Result<Vec<MCEstimate>> {
    if window < 2 {
        return Err(Error::Grid("window must cover at least 2 grid steps".into()));
    }
    let k0 = ensemble.time_index(at_time)?;
    let k1 = k0 + window;
    if k1 >= ensemble.n_times() {
        return Err(Error::Grid(format!(
            "window of {window} steps runs past the stored grid"
        )));
    }
    let dt_window = ensemble.times[k1] - ensemble.times[k0];
    // per-coordinate mean and std at the anchor time
    let dim = ensemble.dim;
    let mut mean = vec![0.0; dim];
    let mut std = vec![0.0; dim];
    for c in 0..dim {
        let col = ensemble.column(k0, c);
        let (m, _, v, _) = moments(&col);
        mean[c] = m;
        std[c] = v.sqrt();
    }
    // central bin: all coordinates within 0.5 std of the mean
    let selected: Vec<usize> = (0..ensemble.n_paths)
        .filter(|&p| {
            let s = ensemble.state(p, k0);
            s.iter()
                .enumerate()
                .all(|(c, v)| (v - mean[c]).abs() <= 0.5 * std[c].max(1e-12))
        })
        .collect();
    if selected.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: selected.len(),
        });
    }
    (0..dim)
        .map(|c| {
            let samples: Vec<f64> = selected
                .iter()
                .map(|&p| (ensemble.state(p, k1)[c] - ensemble.state(p, k0)[c]) / dt_window)
                .collect();
            MCEstimate::from_samples(&samples, ensemble.master_seed)
        })
        .collect()
}
