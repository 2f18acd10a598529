//! Generic orbit machinery shared by the concrete geometries.
//!
//! A geometry exposes an orthonormal basis of its Lie algebra and the
//! fundamental vector fields at a point, both in flat Euclidean coordinates.
//! Everything else -- stabilizer detection, the inertia tensor on the
//! complement of the stabilizer, the radial density and the connection
//! diagram -- is computed here from that data alone.

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::sde::rng::RngStream;

/// Detection threshold on |zeta_X(q)| / |X| below which a Lie-algebra
/// direction counts as infinitesimal stabilizer.
pub const STABILIZER_EPS: f64 = 1e-8;

pub trait OrbitGeometry {
    /// Dimension of the flat space the points live in.
    fn point_dim(&self) -> usize;
    /// Dimension of the acting group's Lie algebra.
    fn lie_dim(&self) -> usize;
    /// Fundamental vector field of the a-th orthonormal Lie basis element,
    /// evaluated at `q`, written into `out`.
    fn fundamental_basis_field(&self, a: usize, q: &[f64], out: &mut [f64]);
    fn label(&self) -> &str;

    /// Fundamental field of a general Lie-algebra element given by its
    /// coefficients over the orthonormal basis.
    fn fundamental_field(&self, coeffs: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.lie_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.lie_dim(),
                got: coeffs.len(),
            });
        }
        if q.len() != self.point_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.point_dim(),
                got: q.len(),
            });
        }
        let mut out = vec![0.0; self.point_dim()];
        let mut row = vec![0.0; self.point_dim()];
        for (a, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                self.fundamental_basis_field(a, q, &mut row);
                linalg::axpy(c, &row, &mut out);
            }
        }
        Ok(out)
    }

    /// Momentum pairing J(q, p) over the orthonormal Lie basis:
    /// J_a = <p, zeta_{e_a}(q)>.
    fn momentum_pairing(&self, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.point_dim() || p.len() != self.point_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.point_dim(),
                got: q.len().max(p.len()),
            });
        }
        let mut row = vec![0.0; self.point_dim()];
        let mut j = vec![0.0; self.lie_dim()];
        for (a, ja) in j.iter_mut().enumerate() {
            self.fundamental_basis_field(a, q, &mut row);
            *ja = linalg::dot(p, &row);
        }
        Ok(j)
    }
}

/// The inertia tensor at a regular point, expressed on a computed
/// orthonormal basis of the orthogonal complement of the stabilizer.
#[derive(Debug, Clone)]
pub struct InertiaForm {
    /// Orthonormal basis of g_q^perp, as coefficient vectors over the
    /// geometry's Lie basis.
    pub complement_basis: Vec<Vec<f64>>,
    /// Gram matrix I(X_b, X_c) on that basis (diagonal by construction,
    /// kept as a full matrix for the callers that treat it generically).
    pub matrix: SymMatrix,
    /// Stabilizer dimension found at the point.
    pub stabilizer_dim: usize,
    /// Fundamental fields of the complement basis at q (rows, point coords).
    fields: Vec<Vec<f64>>,
}

impl InertiaForm {
    pub fn dim(&self) -> usize {
        self.complement_basis.len()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }
}

/// Compute the inertia tensor of `geometry` at `q`.
///
/// The complement basis comes from the eigen-decomposition of the Gram
/// matrix of the fundamental fields over the full Lie basis; eigenvalues
/// below [`STABILIZER_EPS`]^2 mark stabilizer directions.
pub fn inertia_form(geometry: &dyn OrbitGeometry, q: &[f64]) -> Result<InertiaForm> {
    if q.len() != geometry.point_dim() {
        return Err(Error::DimensionMismatch {
            expected: geometry.point_dim(),
            got: q.len(),
        });
    }
    let k = geometry.lie_dim();
    let n = geometry.point_dim();
    let mut fields = vec![vec![0.0; n]; k];
    for (a, row) in fields.iter_mut().enumerate() {
        geometry.fundamental_basis_field(a, q, row);
    }
    let mut gram = SymMatrix::zeros(k);
    for a in 0..k {
        for b in a..k {
            let v = linalg::dot(&fields[a], &fields[b]);
            gram.set(a, b, v);
            gram.set(b, a, v);
        }
    }
    let (vals, vecs) = linalg::jacobi_eigen(&gram, 1e-14, 100)?;
    // absolute threshold on |zeta|/|X| plus a relative floor above the
    // eigensolver noise (numerically-zero Gram eigenvalues are resolved to
    // ~1e-14 * lambda_max and must not leak into the complement)
    let lambda_max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thresh = (STABILIZER_EPS * STABILIZER_EPS).max(1e-12 * lambda_max);
    let mut complement_basis = Vec::new();
    let mut inertia_diag = Vec::new();
    let mut stabilizer_dim = 0;
    for (val, vec) in vals.iter().zip(&vecs) {
        if *val < thresh {
            stabilizer_dim += 1;
        } else {
            complement_basis.push(vec.clone());
            inertia_diag.push(*val);
        }
    }
    let m = complement_basis.len();
    if m == 0 {
        return Err(Error::NonRegular(format!(
            "point of {} has a full stabilizer",
            geometry.label()
        )));
    }
    let mut matrix = SymMatrix::zeros(m);
    for (i, v) in inertia_diag.iter().enumerate() {
        matrix.set(i, i, *v);
    }
    let comp_fields: Vec<Vec<f64>> = complement_basis
        .iter()
        .map(|coeffs| {
            let mut out = vec![0.0; n];
            for (a, &c) in coeffs.iter().enumerate() {
                linalg::axpy(c, &fields[a], &mut out);
            }
            out
        })
        .collect();
    Ok(InertiaForm {
        complement_basis,
        matrix,
        stabilizer_dim,
        fields: comp_fields,
    })
}

/// Radial density from the inertia determinant, |det I_q|^{1/2}.
pub fn delta_from_inertia(geometry: &dyn OrbitGeometry, q: &[f64]) -> Result<f64> {
    let inertia = inertia_form(geometry, q)?;
    let det = inertia.determinant().abs();
    if det <= 0.0 {
        return Err(Error::NonRegular(
            "inertia determinant vanished at the requested point".into(),
        ));
    }
    Ok(det.sqrt())
}

/// Verify the pointwise diagram J_q . mu_q = I_q . A_q on random tangent
/// vectors; returns the maximal residual in the coalgebra norm.
///
/// The connection `A_q` is computed through the metric splitting: the
/// vertical part of a tangent vector is its projection onto the span of the
/// fundamental fields, and `A_q` returns the Lie-algebra element generating
/// that vertical part.
pub fn char_diagram_check(
    geometry: &dyn OrbitGeometry,
    q: &[f64],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let inertia = inertia_form(geometry, q)?;
    let n = geometry.point_dim();
    let mut stream = RngStream::derive(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let xi: Vec<f64> = (0..n).map(|_| stream.next_gaussian()).collect();
        let residual = diagram_residual(geometry, q, &inertia, &xi)?;
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// Residual of the diagram on a single tangent vector.
pub fn diagram_residual(
    geometry: &dyn OrbitGeometry,
    q: &[f64],
    inertia: &InertiaForm,
    xi: &[f64],
) -> Result<f64> {
    let a_xi = connection_apply(inertia, xi)?;
    // I_q(A_q xi) over the complement basis
    let m = inertia.dim();
    let mut lhs_on_complement = vec![0.0; m];
    for b in 0..m {
        for c in 0..m {
            lhs_on_complement[b] += inertia.matrix.get(b, c) * a_xi[c];
        }
    }
    // expand onto the full Lie basis
    let k = geometry.lie_dim();
    let mut ia = vec![0.0; k];
    for (b, coeff) in lhs_on_complement.iter().enumerate() {
        linalg::axpy(*coeff, &inertia.complement_basis[b], &mut ia);
    }
    // J_q(mu_q xi): with a flat metric the covector of xi has the same
    // coordinates, so this is the momentum pairing with p = xi.
    let j = geometry.momentum_pairing(q, xi)?;
    let diff = linalg::sub(&j, &ia);
    Ok(linalg::norm(&diff))
}

/// Apply the mechanical connection at `q`: the g_q^perp coefficients (over
/// `inertia.complement_basis`) of the Lie element generating the vertical
/// part of `xi`.
pub fn connection_apply(inertia: &InertiaForm, xi: &[f64]) -> Result<Vec<f64>> {
    let m = inertia.dim();
    let mut coeffs = vec![0.0; m];
    for b in 0..m {
        let lambda = inertia.matrix.get(b, b);
        // orthonormalized vertical direction v_b = zeta_b / sqrt(lambda_b)
        let proj = linalg::dot(xi, &inertia.fields[b]) / lambda.sqrt();
        coeffs[b] = proj / lambda.sqrt();
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::so3::So3Geometry;

    #[test]
    fn so3_inertia_is_r_squared_identity() {
        let g = So3Geometry;
        let q = [0.0, 0.0, 2.0];
        let inertia = inertia_form(&g, &q).unwrap();
        assert_eq!(inertia.dim(), 2);
        assert_eq!(inertia.stabilizer_dim, 1);
        for b in 0..2 {
            for c in 0..2 {
                let want = if b == c { 4.0 } else { 0.0 };
                assert!((inertia.matrix.get(b, c) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn so3_delta_from_inertia_is_r_squared() {
        let g = So3Geometry;
        for r in [0.5, 1.0, 2.0] {
            let q = [0.3 * r, -0.4 * r, (1.0f64 - 0.25).sqrt() * r * 1.0];
            let scale = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
            let d = delta_from_inertia(&g, &q).unwrap();
            assert!(
                (d - scale * scale).abs() < 1e-9 * (1.0 + scale * scale),
                "r={r}: {d} vs {}",
                scale * scale
            );
        }
        assert!((delta_from_inertia(&g, &[0.0, 0.0, 2.0]).unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn so3_diagram_residual_small_and_vertical_recovery() {
        let g = So3Geometry;
        let q = [0.0, 0.0, 2.0];
        let res = char_diagram_check(&g, &q, 50, 1234).unwrap();
        assert!(res < 1e-9, "residual {res}");

        // horizontal (radial) vectors are annihilated
        let inertia = inertia_form(&g, &q).unwrap();
        let radial = [0.0, 0.0, 1.7];
        let coeffs = connection_apply(&inertia, &radial).unwrap();
        assert!(linalg::norm(&coeffs) < 1e-12);
        let j = g.momentum_pairing(&q, &radial).unwrap();
        assert!(linalg::norm(&j) < 1e-12);

        // vertical xi = zeta_X(q) recovers X
        let x_coeffs: Vec<f64> = inertia.complement_basis[0]
            .iter()
            .map(|c| 0.8 * c)
            .collect();
        let xi = g.fundamental_field(&x_coeffs, &q).unwrap();
        let recovered = connection_apply(&inertia, &xi).unwrap();
        assert!((recovered[0] - 0.8).abs() < 1e-9);
        assert!(recovered[1].abs() < 1e-9);
    }
}
