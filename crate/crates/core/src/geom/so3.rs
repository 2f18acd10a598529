//! Punctured 3-space under rotations. The Lie algebra is identified with
//! R^3 so that the fundamental field of `x` at `q` is the cross product
//! `x × q`, and the momentum map is `J(q, p) = q × p`.

use crate::error::{Error, Result};
use crate::geom::orbit::OrbitGeometry;
use serde::{Deserialize, Serialize};

pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// A point of R^3 \ {0}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorPoint {
    pub coords: [f64; 3],
}

impl VectorPoint {
    pub fn new(coords: [f64; 3], wall_eps: f64) -> Result<Self> {
        let r = (coords[0] * coords[0] + coords[1] * coords[1] + coords[2] * coords[2]).sqrt();
        if r <= wall_eps {
            return Err(Error::InvalidPoint(format!(
                "point too close to the origin (|q| = {r:e})"
            )));
        }
        Ok(VectorPoint { coords })
    }

    pub fn radius(&self) -> f64 {
        let c = &self.coords;
        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
    }
}

pub struct So3Geometry;

impl So3Geometry {
    /// J(q, p) = q × p.
    pub fn momentum_map(&self, q: &[f64; 3], p: &[f64; 3]) -> [f64; 3] {
        cross(q, p)
    }

    /// zeta_x(q) = x × q.
    pub fn fundamental(&self, x: &[f64; 3], q: &[f64; 3]) -> [f64; 3] {
        cross(x, q)
    }
}

impl OrbitGeometry for So3Geometry {
    fn point_dim(&self) -> usize {
        3
    }

    fn lie_dim(&self) -> usize {
        3
    }

    fn fundamental_basis_field(&self, a: usize, q: &[f64], out: &mut [f64]) {
        let mut x = [0.0; 3];
        x[a] = 1.0;
        let v = cross(&x, &[q[0], q[1], q[2]]);
        out.copy_from_slice(&v);
    }

    fn label(&self) -> &str {
        "R3/SO(3)"
    }
}
