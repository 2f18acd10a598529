//! Small dense linear algebra used throughout the crate.
//!
//! Everything here is self-contained: the geometry code needs eigensolves of
//! matrices no larger than 16x16 and the grid operators are tridiagonal, so
//! a cyclic Jacobi sweep and Sturm bisection cover all uses.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += s * x
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn scale(s: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= s;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n);
            data.extend_from_slice(r);
        }
        SymMatrix { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn max_symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                d = d.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        d
    }

    /// det via LU with partial pivoting; only used for small matrices.
    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a[r * n + col].abs() > a[piv * n + col].abs() {
                    piv = r;
                }
            }
            if a[piv * n + col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(col * n + k, piv * n + k);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for r in (col + 1)..n {
                let f = a[r * n + col] / d;
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
            }
        }
        det
    }
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order together with the matching
/// orthonormal eigenvectors (as rows of the returned matrix).
pub fn jacobi_eigen(m: &SymMatrix, tol: f64, max_sweeps: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };
    let scale_ref: f64 = (0..n).map(|i| a[i * n + i].abs()).fold(1e-300, f64::max);

    let mut sweeps = 0;
    while off(&a) > tol * scale_ref.max(1.0) {
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::NonConvergence {
                what: "jacobi eigen".into(),
                iterations: max_sweeps,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol * scale_ref * 1e-3 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[p * n + k];
                    let vkq = v[q * n + k];
                    v[p * n + k] = c * vkp - s * vkq;
                    v[q * n + k] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| a[i * n + i]).collect();
    let vecs: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| v[i * n..(i + 1) * n].to_vec())
        .collect();
    Ok((vals, vecs))
}

/// Symmetric tridiagonal matrix: `diag` has n entries, `off` has n-1.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            out[i] = v;
        }
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    fn count_below(&self, x: f64) -> usize {
        let n = self.n();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let e2 = self.off[i - 1] * self.off[i - 1];
            let denom = if q.abs() < 1e-300 {
                1e-300_f64.copysign(if q == 0.0 { 1.0 } else { q })
            } else {
                q
            };
            q = self.diag[i] - x - e2 / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `count` smallest eigenvalues by bisection on the Sturm count.
    pub fn smallest_eigenvalues(&self, count: usize, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let (glo, ghi) = self.gershgorin();
        let span = (ghi - glo).max(1e-300);
        let mut vals = Vec::with_capacity(count);
        for k in 0..count {
            let mut lo = glo;
            let mut hi = ghi;
            let mut it = 0;
            while hi - lo > tol * span.max(1.0) {
                it += 1;
                if it > max_iter {
                    return Err(Error::NonConvergence {
                        what: format!("tridiagonal eigenvalue {k}"),
                        iterations: max_iter,
                    });
                }
                let mid = 0.5 * (lo + hi);
                if self.count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            vals.push(0.5 * (lo + hi));
        }
        Ok(vals)
    }

    /// Solve (T - shift I) x = b by the Thomas algorithm.
    pub fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0] - shift;
        if denom.abs() < 1e-300 {
            denom = 1e-300;
        }
        if n > 1 {
            c[0] = self.off[0] / denom;
        }
        d[0] = b[0] / denom;
        for i in 1..n {
            let e = self.off[i - 1];
            let mut m = self.diag[i] - shift - e * c[i - 1];
            if m.abs() < 1e-300 {
                m = 1e-300;
            }
            if i + 1 < n {
                c[i] = self.off[i] / m;
            }
            d[i] = (b[i] - e * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    /// Eigenvector near `eigenvalue` by inverse iteration, accepted when
    /// the residual against the Rayleigh quotient of the iterate drops
    /// below `tol` (the input eigenvalue from bisection is only accurate
    /// to its own stopping gap, so it cannot serve as the reference).
    /// Returns the refined eigenvalue together with the unit vector.
    pub fn eigenvector(&self, eigenvalue: f64, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>)> {
        let n = self.n();
        // deterministic, non-symmetric start vector
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.37 * ((i as f64) * 0.7).sin())
            .collect();
        let nv = norm(&v);
        scale(1.0 / nv, &mut v);
        let shift = eigenvalue + 1e-12 * (1.0 + eigenvalue.abs());
        let mut residual = f64::INFINITY;
        let mut tv = vec![0.0; n];
        for _ in 0..max_iter {
            let mut w = self.solve_shifted(shift, &v);
            let nw = norm(&w);
            scale(1.0 / nw, &mut w);
            self.apply(&w, &mut tv);
            let rayleigh = dot(&tv, &w);
            axpy(-rayleigh, &w, &mut tv);
            residual = norm(&tv);
            v = w;
            if residual <= tol * (1.0 + rayleigh.abs()) {
                let lead = v.iter().find(|x| x.abs() > 1e-8).copied().unwrap_or(1.0);
                if lead < 0.0 {
                    scale(-1.0, &mut v);
                }
                return Ok((rayleigh, v));
            }
        }
        Err(Error::NonConvergence {
            what: format!("inverse iteration at eigenvalue {eigenvalue} (residual {residual:e})"),
            iterations: max_iter,
        })
    }
}

/// Orthonormalize `vectors` by modified Gram-Schmidt, dropping vectors whose
/// residual norm falls below `drop_tol` relative to the input norm.
pub fn gram_schmidt(vectors: &[Vec<f64>], drop_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        let input_norm = norm(v).max(1e-300);
        for b in &basis {
            let c = dot(&w, b);
            axpy(-c, b, &mut w);
        }
        // second pass for numerical orthogonality
        for b in &basis {
            let c = dot(&w, b);
            axpy(-c, b, &mut w);
        }
        let r = norm(&w);
        if r > drop_tol * input_norm {
            scale(1.0 / r, &mut w);
            basis.push(w);
        }
    }
    basis
}

/// Rank of the span of `vectors` at relative tolerance `tol`.
pub fn span_rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    gram_schmidt(vectors, tol).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // spectrum {1, 2, 4}: build R D R^T from two explicit rotations
        let d = [1.0, 2.0, 4.0];
        let (c1, s1) = (0.6f64, 0.8f64); // rotation in the xy plane
        let (c2, s2) = ((0.5f64).sqrt(), (0.5f64).sqrt()); // yz plane
        let mut r = [[0.0f64; 3]; 3];
        // R = R_yz * R_xy
        let rxy = [[c1, -s1, 0.0], [s1, c1, 0.0], [0.0, 0.0, 1.0]];
        let ryz = [[1.0, 0.0, 0.0], [0.0, c2, -s2], [0.0, s2, c2]];
        for i in 0..3 {
            for j in 0..3 {
                for (k, rxy_row) in rxy.iter().enumerate() {
                    r[i][j] += ryz[i][k] * rxy_row[j];
                }
            }
        }
        let mut m = SymMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for (k, &dk) in d.iter().enumerate() {
                    v += r[i][k] * dk * r[j][k];
                }
                m.set(i, j, v);
            }
        }
        let (vals, vecs) = jacobi_eigen(&m, 1e-14, 60).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-10);
        assert!((vals[1] - 2.0).abs() < 1e-10);
        assert!((vals[2] - 4.0).abs() < 1e-10);
        // eigenvector residual
        for (val, vec) in vals.iter().zip(&vecs) {
            for i in 0..3 {
                let mut mv = 0.0;
                for j in 0..3 {
                    mv += m.get(i, j) * vec[j];
                }
                assert!((mv - val * vec[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tridiagonal_dirichlet_laplacian_eigenvalues() {
        // -d^2/dx^2 on (0, pi) with h = pi/100: lambda_k = (2/h^2)(1-cos(k h))
        let n = 99;
        let h = std::f64::consts::PI / 100.0;
        let t = Tridiagonal {
            diag: vec![2.0 / (h * h); n],
            off: vec![-1.0 / (h * h); n - 1],
        };
        let vals = t.smallest_eigenvalues(3, 1e-12, 200).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let kk = (k + 1) as f64;
            let exact = 2.0 / (h * h) * (1.0 - (kk * h).cos());
            assert!((v - exact).abs() < 1e-8, "k={k} got {v} want {exact}");
        }
        let (lambda, v1) = t.eigenvector(vals[0], 1e-10, 10_000).unwrap();
        assert!((lambda - vals[0]).abs() < 1e-7);
        // ground state of the discrete Laplacian is sin(x) sampled on the grid
        let scale_factor = v1[n / 2] / ((((n / 2 + 1) as f64) * h).sin());
        for (i, vi) in v1.iter().enumerate() {
            let exact = scale_factor * (((i + 1) as f64) * h).sin();
            assert!((vi - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let vs = vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![2.0, 1.0, 0.0], // dependent on the first two
        ];
        let b = gram_schmidt(&vs, 1e-10);
        assert_eq!(b.len(), 2);
        assert!(dot(&b[0], &b[1]).abs() < 1e-12);
        assert_eq!(span_rank(&vs, 1e-10), 2);
    }

    #[test]
    fn determinant_of_known_matrix() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((m.determinant() - 3.0).abs() < 1e-12);
    }
}
