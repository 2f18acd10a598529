//! Traceless Hermitian n x n matrices under unitary conjugation.
//!
//! The flat space carries the inner product mu(A, B) = Re tr(AB); the Lie
//! algebra of the acting group is the traceless anti-Hermitian matrices with
//! <X, Y> = Re tr(X Y^dagger). Fundamental fields are commutators
//! zeta_X(q) = [X, q], the momentum map is J(q, p) = [q, p], and the orbit
//! projection is the sorted eigenvalue map.

use crate::error::{Error, Result};
use crate::geom::orbit::OrbitGeometry;
use crate::linalg::{self, SymMatrix};
use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        CMat::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &CMat) -> CMat {
        let ab = self.mul(other);
        let ba = other.mul(self);
        let mut out = ab;
        for (o, b) in out.data.iter_mut().zip(&ba.data) {
            *o -= b;
        }
        out
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, s: Complex64) -> CMat {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn add_scaled(&mut self, s: Complex64, other: &CMat) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Re tr(self * other): the flat inner product for Hermitian arguments.
    pub fn re_tr_mul(&self, other: &CMat) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                s += (self.data[i * n + k] * other.data[k * n + i]).re;
            }
        }
        s
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                d = d.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        d
    }
}

/// A traceless Hermitian matrix point.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPoint {
    matrix: CMat,
}

impl HermitianPoint {
    pub fn new(matrix: CMat) -> Result<Self> {
        let defect = matrix.max_hermitian_defect();
        if defect > 1e-12 {
            return Err(Error::InvalidPoint(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        let tr = matrix.trace();
        if tr.norm() > 1e-12 {
            return Err(Error::InvalidPoint(format!(
                "matrix has nonzero trace ({tr})"
            )));
        }
        Ok(HermitianPoint { matrix })
    }

    pub fn from_diag(entries: &[f64]) -> Result<Self> {
        HermitianPoint::new(CMat::diag(entries))
    }

    pub fn n(&self) -> usize {
        self.matrix.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Interleaved [re, im, re, im, ...] row-major encoding.
    pub fn to_interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.matrix.data.len());
        for v in &self.matrix.data {
            out.push(v.re);
            out.push(v.im);
        }
        out
    }

    pub fn from_interleaved(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != 2 * n * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n * n,
                got: data.len(),
            });
        }
        let mut m = CMat::zeros(n);
        for (idx, chunk) in data.chunks_exact(2).enumerate() {
            m.data[idx] = Complex64::new(chunk[0], chunk[1]);
        }
        HermitianPoint::new(m)
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.matrix.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// The Hermitian geometry with its precomputed orthonormal bases.
pub struct HermitianGeometry {
    n: usize,
    /// Traceless Hermitian basis (flat-space directions).
    p_basis: Vec<CMat>,
    /// Traceless anti-Hermitian basis (Lie-algebra directions).
    k_basis: Vec<CMat>,
}

impl HermitianGeometry {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Hermitian geometry needs n >= 2");
        let sqrt2_inv = 1.0 / 2.0_f64.sqrt();
        let mut p_basis = Vec::new();
        let mut k_basis = Vec::new();
        for j in 0..n {
            for k in (j + 1)..n {
                // symmetric / antisymmetric off-diagonal pairs
                let mut sym = CMat::zeros(n);
                sym.set(j, k, Complex64::new(sqrt2_inv, 0.0));
                sym.set(k, j, Complex64::new(sqrt2_inv, 0.0));
                let mut asym_i = CMat::zeros(n);
                asym_i.set(j, k, Complex64::new(0.0, sqrt2_inv));
                asym_i.set(k, j, Complex64::new(0.0, -sqrt2_inv));
                p_basis.push(sym.clone());
                p_basis.push(asym_i.clone());

                let mut skew = CMat::zeros(n);
                skew.set(j, k, Complex64::new(sqrt2_inv, 0.0));
                skew.set(k, j, Complex64::new(-sqrt2_inv, 0.0));
                let mut skew_i = CMat::zeros(n);
                skew_i.set(j, k, Complex64::new(0.0, sqrt2_inv));
                skew_i.set(k, j, Complex64::new(0.0, sqrt2_inv));
                k_basis.push(skew);
                k_basis.push(skew_i);
            }
        }
        // orthonormalized projections of E_kk onto the trace-zero hyperplane
        let raw: Vec<Vec<f64>> = (0..n)
            .map(|c| {
                let mut v = vec![-1.0 / n as f64; n];
                v[c] += 1.0;
                v
            })
            .collect();
        for d in linalg::gram_schmidt(&raw, 1e-12) {
            p_basis.push(CMat::diag(&d));
            let mut kd = CMat::zeros(n);
            for (i, &di) in d.iter().enumerate() {
                kd.set(i, i, Complex64::new(0.0, di));
            }
            k_basis.push(kd);
        }
        debug_assert_eq!(p_basis.len(), n * n - 1);
        debug_assert_eq!(k_basis.len(), n * n - 1);
        HermitianGeometry { n, p_basis, k_basis }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Orthonormal basis of the traceless Hermitian space.
    pub fn flat_basis(&self) -> &[CMat] {
        &self.p_basis
    }

    /// Coordinates of a Hermitian point over the flat basis.
    pub fn coords(&self, h: &HermitianPoint) -> Vec<f64> {
        self.p_basis
            .iter()
            .map(|b| b.re_tr_mul(h.matrix()))
            .collect()
    }

    /// Reassemble a matrix from flat-basis coordinates.
    pub fn matrix_from_coords(&self, coords: &[f64]) -> CMat {
        let mut m = CMat::zeros(self.n);
        for (b, &c) in self.p_basis.iter().zip(coords) {
            m.add_scaled(Complex64::new(c, 0.0), b);
        }
        m
    }

    /// zeta_X(q) = [X, q] for an anti-Hermitian X.
    pub fn fundamental(&self, x: &CMat, q: &CMat) -> CMat {
        x.commutator(q)
    }

    /// Momentum map J(q, p) = [q, p] (anti-Hermitian when q, p Hermitian).
    pub fn momentum_map(&self, q: &HermitianPoint, p: &HermitianPoint) -> Result<CMat> {
        if q.n() != self.n || p.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: q.n().max(p.n()),
            });
        }
        Ok(q.matrix().commutator(p.matrix()))
    }
}

impl OrbitGeometry for HermitianGeometry {
    fn point_dim(&self) -> usize {
        self.n * self.n - 1
    }

    fn lie_dim(&self) -> usize {
        self.n * self.n - 1
    }

    fn fundamental_basis_field(&self, a: usize, q: &[f64], out: &mut [f64]) {
        let q_mat = self.matrix_from_coords(q);
        let zeta = self.k_basis[a].commutator(&q_mat);
        for (o, b) in out.iter_mut().zip(&self.p_basis) {
            *o = b.re_tr_mul(&zeta);
        }
    }

    fn label(&self) -> &str {
        "Hermitian/SU(n)"
    }
}

/// Eigenvalues of a Hermitian point in strictly decreasing order: the orbit
/// projection onto the open Weyl chamber.
///
/// Solved by cyclic Jacobi on the real 2n x 2n embedding [[A, -B], [B, A]]
/// of H = A + iB, whose spectrum is that of H doubled.
pub fn eigen_project(h: &HermitianPoint, wall_eps: f64) -> Result<Vec<f64>> {
    let n = h.n();
    let m = 2 * n;
    let mut emb = SymMatrix::zeros(m);
    for i in 0..n {
        for j in 0..n {
            let v = h.matrix().get(i, j);
            emb.set(i, j, v.re);
            emb.set(i + n, j + n, v.re);
            emb.set(i, j + n, -v.im);
            emb.set(i + n, j, v.im);
        }
    }
    let (vals, _) = linalg::jacobi_eigen(&emb, 1e-14, 100)?;
    // each eigenvalue of H appears twice; average the pairs
    let mut eig: Vec<f64> = (0..n).map(|i| 0.5 * (vals[2 * i] + vals[2 * i + 1])).collect();
    eig.reverse();
    for w in eig.windows(2) {
        if w[0] - w[1] <= wall_eps {
            return Err(Error::NonRegular(format!(
                "eigenvalue collision: {} and {} within {wall_eps:e}",
                w[0], w[1]
            )));
        }
    }
    let sum: f64 = eig.iter().sum();
    if sum.abs() > 1e-9 {
        return Err(Error::NumericalFault { path: 0, time: 0.0 });
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::orbit;
    use crate::sde::rng::RngStream;

    fn random_unitary(n: usize, stream: &mut RngStream) -> CMat {
        // QR-free: exponentiate-ish via Gram-Schmidt of a random complex matrix
        let mut cols: Vec<Vec<Complex64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| Complex64::new(stream.next_gaussian(), stream.next_gaussian()))
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in 0..i {
                let proj: Complex64 = (0..n).map(|k| cols[j][k].conj() * cols[i][k]).sum();
                for k in 0..n {
                    let cj = cols[j][k];
                    cols[i][k] -= proj * cj;
                }
            }
            let nrm: f64 = cols[i].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for v in cols[i].iter_mut() {
                *v /= nrm;
            }
        }
        CMat::from_fn(n, |i, j| cols[j][i])
    }

    fn conjugate(u: &CMat, h: &CMat) -> CMat {
        u.mul(h).mul(&u.dagger())
    }

    #[test]
    fn eigen_project_diagonal_and_conjugated() {
        let h = HermitianPoint::from_diag(&[1.0, 0.0, -1.0]).unwrap();
        let eig = eigen_project(&h, 1e-10).unwrap();
        assert!((eig[0] - 1.0).abs() < 1e-10);
        assert!(eig[1].abs() < 1e-10);
        assert!((eig[2] + 1.0).abs() < 1e-10);

        let mut stream = RngStream::derive(42, 0);
        for _ in 0..10 {
            let u = random_unitary(3, &mut stream);
            let conj = conjugate(&u, h.matrix());
            let hp = HermitianPoint::new(conj).unwrap();
            let eig2 = eigen_project(&hp, 1e-10).unwrap();
            for (a, b) in eig.iter().zip(&eig2) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eigen_project_rejects_non_regular() {
        let h = HermitianPoint::from_diag(&[1.0, 1.0, -2.0]).unwrap();
        assert!(matches!(
            eigen_project(&h, 1e-10),
            Err(Error::NonRegular(_))
        ));
    }

    #[test]
    fn hermitian_point_validation() {
        let mut bad = CMat::diag(&[1.0, -1.0]);
        bad.set(0, 1, Complex64::new(0.5, 0.0));
        assert!(HermitianPoint::new(bad).is_err()); // not Hermitian
        assert!(HermitianPoint::from_diag(&[1.0, 1.0]).is_err()); // trace 2

        let h = HermitianPoint::from_diag(&[2.0, -2.0]).unwrap();
        let l = h.to_interleaved();
        let back = HermitianPoint::from_interleaved(2, &l).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn fundamental_field_commutators() {
        let g = HermitianGeometry::new(2);
        // diagonal X and q commute
        let q = CMat::diag(&[1.0, -1.0]);
        let x = CMat::from_fn(2, |i, j| {
            if i == j {
                Complex64::new(0.0, if i == 0 { 1.0 } else { -1.0 })
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let z = g.fundamental(&x, &q);
        assert!(z.data.iter().all(|v| v.norm() < 1e-15));

        // X = i(E12 + E21), q = diag(1,-1): [X, q] = -2i E12 + 2i E21
        let x = CMat::from_fn(2, |i, j| {
            if i != j {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let z = g.fundamental(&x, &q);
        // brute-force commutator as the reference
        let brute = x.mul(&q);
        let brute2 = q.mul(&x);
        for i in 0..2 {
            for j in 0..2 {
                let want = brute.get(i, j) - brute2.get(i, j);
                assert!((z.get(i, j) - want).norm() < 1e-15);
            }
        }
        assert!((z.get(0, 1) - Complex64::new(0.0, -2.0)).norm() < 1e-14);
        assert!((z.get(1, 0) - Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn coords_round_trip() {
        let g = HermitianGeometry::new(3);
        let mut m = CMat::diag(&[0.7, 0.1, -0.8]);
        m.set(0, 1, Complex64::new(0.3, -0.2));
        m.set(1, 0, Complex64::new(0.3, 0.2));
        m.set(1, 2, Complex64::new(-0.1, 0.4));
        m.set(2, 1, Complex64::new(-0.1, -0.4));
        let h = HermitianPoint::new(m).unwrap();
        let c = g.coords(&h);
        assert_eq!(c.len(), 8);
        let back = g.matrix_from_coords(&c);
        for (a, b) in back.data.iter().zip(&h.matrix().data) {
            assert!((a - b).norm() < 1e-13);
        }
        // norm preserved: coords are over an orthonormal basis
        let nc: f64 = c.iter().map(|x| x * x).sum();
        assert!((nc - h.frobenius_norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn inertia_scaling_and_positivity_n2() {
        let g = HermitianGeometry::new(2);
        for t in [0.5, 1.0, 2.0] {
            let q = HermitianPoint::from_diag(&[t, -t]).unwrap();
            let inertia = orbit::inertia_form(&g, &g.coords(&q)).unwrap();
            assert_eq!(inertia.dim(), 2);
            assert_eq!(inertia.stabilizer_dim, 1);
            for b in 0..2 {
                assert!(inertia.matrix.get(b, b) > 0.0);
                // scaling proportional to t^2: entries are 4 t^2 here
                assert!((inertia.matrix.get(b, b) - 4.0 * t * t).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn momentum_map_vanishes_on_diagonal_pairs() {
        let g = HermitianGeometry::new(3);
        let q = HermitianPoint::from_diag(&[1.0, 0.0, -1.0]).unwrap();
        let p = HermitianPoint::from_diag(&[0.3, -0.1, -0.2]).unwrap();
        let j = g.momentum_map(&q, &p).unwrap();
        assert!(j.data.iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn momentum_map_equivariance() {
        let g = HermitianGeometry::new(3);
        let mut stream = RngStream::derive(99, 0);
        let mut q_mat = CMat::diag(&[1.0, 0.2, -1.2]);
        q_mat.set(0, 2, Complex64::new(0.1, 0.3));
        q_mat.set(2, 0, Complex64::new(0.1, -0.3));
        let p_mat = CMat::diag(&[0.5, -0.5, 0.0]);
        let q = HermitianPoint::new(q_mat).unwrap();
        let p = HermitianPoint::new(p_mat).unwrap();
        let j = g.momentum_map(&q, &p).unwrap();
        for _ in 0..20 {
            let u = random_unitary(3, &mut stream);
            let qu = HermitianPoint::new(conjugate(&u, q.matrix())).unwrap();
            let pu = HermitianPoint::new(conjugate(&u, p.matrix())).unwrap();
            let ju = g.momentum_map(&qu, &pu).unwrap();
            let want = conjugate(&u, &j);
            for (a, b) in ju.data.iter().zip(&want.data) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn momentum_map_realizes_the_pairing() {
        // <p, [X, q]> = tr([q, p] X) for Hermitian q, p and anti-Hermitian
        // X; with the Lie inner product <A, B> = Re tr(A B^dagger) this
        // means [q, p] represents the momentum pairing up to the sign of
        // the dual identification.
        let g = HermitianGeometry::new(3);
        let mut stream = RngStream::derive(17, 0);
        for _ in 0..10 {
            let qc: Vec<f64> = (0..8).map(|_| stream.next_gaussian()).collect();
            let pc: Vec<f64> = (0..8).map(|_| stream.next_gaussian()).collect();
            let q = HermitianPoint::new(g.matrix_from_coords(&qc)).unwrap();
            let p = HermitianPoint::new(g.matrix_from_coords(&pc)).unwrap();
            let j = g.momentum_map(&q, &p).unwrap();
            for x in &g.k_basis {
                let zeta = g.fundamental(x, q.matrix());
                let lhs = p.matrix().re_tr_mul(&zeta);
                // tr([q,p] X) with both anti-Hermitian: -<J, X>_k
                let rhs = j.mul(x).trace().re;
                assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn char_diagram_close_on_hermitian() {
        let g = HermitianGeometry::new(3);
        let q = HermitianPoint::from_diag(&[1.0, 0.0, -1.0]).unwrap();
        let res = orbit::char_diagram_check(&g, &g.coords(&q), 25, 5).unwrap();
        assert!(res < 1e-9, "residual {res}");
    }
}
