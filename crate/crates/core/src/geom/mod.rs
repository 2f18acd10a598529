//! Concrete Riemannian G-manifolds: punctured 3-space under rotations,
//! traceless Hermitian matrices under unitary conjugation, and orthonormal
//! frames of the 2-sphere.
//!
//! The first two share the generic orbit machinery in [`orbit`]: fundamental
//! vector fields, stabilizer detection, inertia tensors, the radial density
//! from the inertia determinant, and the pointwise connection diagram.

pub mod hermitian;
pub mod orbit;
pub mod so3;
pub mod sphere;

pub use hermitian::{eigen_project, HermitianGeometry, HermitianPoint};
pub use orbit::{char_diagram_check, delta_from_inertia, inertia_form, InertiaForm, OrbitGeometry};
pub use so3::{So3Geometry, VectorPoint};
pub use sphere::{sphere_horizontal_step, FrameState};
