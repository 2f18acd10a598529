//! Orthonormal frames of the unit 2-sphere and the horizontal step that
//! drives frame-bundle Brownian motion.

use crate::error::{Error, Result};
use crate::geom::so3::cross;
use serde::{Deserialize, Serialize};

/// An orthonormal frame over a point of the sphere: `base` is the foot
/// point, `(e1, e2)` an orthonormal basis of the tangent plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameState {
    pub base: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

impl FrameState {
    pub fn new(base: [f64; 3], e1: [f64; 3], e2: [f64; 3]) -> Result<Self> {
        let f = FrameState { base, e1, e2 };
        let defect = f.orthonormality_defect();
        if defect > 1e-9 {
            return Err(Error::InvalidPoint(format!(
                "frame not orthonormal (defect {defect:e})"
            )));
        }
        Ok(f)
    }

    /// Frame at the north pole with the coordinate tangent directions.
    pub fn north_pole() -> Self {
        FrameState {
            base: [0.0, 0.0, 1.0],
            e1: [1.0, 0.0, 0.0],
            e2: [0.0, 1.0, 0.0],
        }
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let vs = [&self.base, &self.e1, &self.e2];
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in i..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                d = d.max((dot3(vs[i], vs[j]) - want).abs());
            }
        }
        d
    }

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.base[0], self.base[1], self.base[2], self.e1[0], self.e1[1], self.e1[2],
            self.e2[0], self.e2[1], self.e2[2],
        ]
    }

    pub fn from_array(a: &[f64; 9]) -> Result<Self> {
        FrameState::new(
            [a[0], a[1], a[2]],
            [a[3], a[4], a[5]],
            [a[6], a[7], a[8]],
        )
    }

    /// Re-orthonormalize after accumulated rounding; the base direction is
    /// kept, the tangent vectors are projected and normalized.
    pub fn renormalize(&mut self) {
        let nb = norm3(&self.base);
        for v in self.base.iter_mut() {
            *v /= nb;
        }
        let c1 = dot3(&self.e1, &self.base);
        for i in 0..3 {
            self.e1[i] -= c1 * self.base[i];
        }
        let n1 = norm3(&self.e1);
        for v in self.e1.iter_mut() {
            *v /= n1;
        }
        let cb = dot3(&self.e2, &self.base);
        let c2 = dot3(&self.e2, &self.e1);
        for i in 0..3 {
            self.e2[i] -= cb * self.base[i] + c2 * self.e1[i];
        }
        let n2 = norm3(&self.e2);
        for v in self.e2.iter_mut() {
            *v /= n2;
        }
    }
}

fn rodrigues(v: &[f64; 3], axis: &[f64; 3], angle: f64) -> [f64; 3] {
    let c = angle.cos();
    let s = angle.sin();
    let kv = cross(axis, v);
    let kdv = dot3(axis, v);
    [
        v[0] * c + kv[0] * s + axis[0] * kdv * (1.0 - c),
        v[1] * c + kv[1] * s + axis[1] * kdv * (1.0 - c),
        v[2] * c + kv[2] * s + axis[2] * kdv * (1.0 - c),
    ]
}

/// Move the frame along the great circle in direction `u(w) = w1 e1 + w2 e2`
/// by arclength `|w| * ds`, parallel-transporting the tangent frame.
///
/// One exact rotation about `base x direction` does both at once, so the
/// frame constraints are preserved by construction; a renormalization pass
/// removes residual rounding.
pub fn sphere_horizontal_step(u: &FrameState, w: [f64; 2], ds: f64) -> FrameState {
    let speed = (w[0] * w[0] + w[1] * w[1]).sqrt();
    let angle = speed * ds;
    if angle == 0.0 {
        return *u;
    }
    let inv = 1.0 / speed;
    let dir = [
        (w[0] * u.e1[0] + w[1] * u.e2[0]) * inv,
        (w[0] * u.e1[1] + w[1] * u.e2[1]) * inv,
        (w[0] * u.e1[2] + w[1] * u.e2[2]) * inv,
    ];
    let axis = cross(&u.base, &dir);
    let mut out = FrameState {
        base: rodrigues(&u.base, &axis, angle),
        e1: rodrigues(&u.e1, &axis, angle),
        e2: rodrigues(&u.e2, &axis, angle),
    };
    out.renormalize();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_step_is_identity() {
        let u = FrameState::north_pole();
        let v = sphere_horizontal_step(&u, [0.0, 0.0], 1.0);
        assert_eq!(u, v);
    }

    #[test]
    fn quarter_turn_along_meridian() {
        let u = FrameState::north_pole();
        let v = sphere_horizontal_step(&u, [std::f64::consts::FRAC_PI_2, 0.0], 1.0);
        let want_base = [1.0, 0.0, 0.0];
        let want_e1 = [0.0, 0.0, -1.0];
        let want_e2 = [0.0, 1.0, 0.0];
        for i in 0..3 {
            assert!((v.base[i] - want_base[i]).abs() < 1e-12);
            assert!((v.e1[i] - want_e1[i]).abs() < 1e-12);
            assert!((v.e2[i] - want_e2[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_backward_holonomy_is_second_order() {
        let u = FrameState::north_pole();
        // out and back along the same tangent vector retraces the same
        // great circle: error stays at rounding level, far below the
        // curvature bound O(ds^2 |w|^2)
        for ds in [0.1, 0.05, 0.025] {
            let w = [0.7, -0.4];
            let w2 = w[0] * w[0] + w[1] * w[1];
            let v = sphere_horizontal_step(&u, w, ds);
            let back = sphere_horizontal_step(&v, [-w[0], -w[1]], ds);
            let err: f64 = (0..3)
                .map(|i| (back.base[i] - u.base[i]).abs())
                .fold(0.0, f64::max);
            assert!(err < ds * ds * w2, "ds={ds} err={err}");
            assert!(err < 1e-11, "exact rotations should retrace: ds={ds} err={err}");
        }
        // a square loop of two non-parallel legs picks up frame holonomy
        // proportional to the enclosed area (~ds^2); quartering ds must
        // quarter the frame rotation
        let holonomy = |ds: f64| {
            let mut f = u;
            for w in [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]] {
                f = sphere_horizontal_step(&f, w, ds);
            }
            let de1: f64 = (0..3)
                .map(|i| (f.e1[i] - u.e1[i]).powi(2))
                .sum::<f64>()
                .sqrt();
            de1
        };
        let h1 = holonomy(0.1);
        let h2 = holonomy(0.05);
        assert!(h1 > 0.5 * 0.01, "holonomy invisible at ds=0.1: {h1}");
        let ratio = h1 / h2;
        assert!((3.0..5.0).contains(&ratio), "holonomy ratio {ratio}");
    }

    #[test]
    fn frame_invariants_preserved_over_many_steps() {
        let mut u = FrameState::north_pole();
        let mut stream = crate::sde::rng::RngStream::derive(3, 0);
        for _ in 0..2000 {
            let w = [stream.next_gaussian(), stream.next_gaussian()];
            u = sphere_horizontal_step(&u, w, 0.03);
            assert!(u.orthonormality_defect() < 1e-9);
        }
    }

    #[test]
    fn frame_validation_rejects_bad_frames() {
        assert!(FrameState::new([0.0, 0.0, 2.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).is_err());
        assert!(FrameState::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn frame_serializes_as_nine_reals() {
        let u = FrameState::north_pole();
        let arr = u.to_array();
        let json = serde_json::to_string(&arr).unwrap();
        assert_eq!(json, "[0.0,0.0,1.0,1.0,0.0,0.0,0.0,1.0,0.0]");
        let back: [f64; 9] = serde_json::from_str(&json).unwrap();
        assert_eq!(FrameState::from_array(&back).unwrap(), u);
    }
}
