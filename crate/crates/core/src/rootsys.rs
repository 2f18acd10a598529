//! Root-system data and the closed-form radial quantities built from it:
//! the radial density `delta`, its logarithmic derivatives, the reduced
//! potential and the Calogero-Moser couplings.

use crate::error::{Error, Result};
use crate::linalg;
use serde::{Deserialize, Serialize};

/// Default wall tolerance for chamber membership tests.
pub const WALL_EPS: f64 = 1e-10;

/// A finite set of positive restricted roots with multiplicities.
///
/// Roots live in an ambient Euclidean space of dimension `ambient_dim()`
/// which may exceed the rank (A-type systems sit inside the trace-zero
/// hyperplane of R^n). A root `alpha` acts on a point `x` by the ambient
/// inner product `alpha(x) = <alpha, x>`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawRootSystem", into = "RawRootSystem")]
pub struct RootSystem {
    name: String,
    rank: usize,
    positive_roots: Vec<Vec<f64>>,
    multiplicities: Vec<u32>,
    double_multiplicities: Vec<u32>,
}

/// Wire format: `{name, rank, roots: [[..]], m: [..], m2: [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawRootSystem {
    name: String,
    rank: usize,
    roots: Vec<Vec<f64>>,
    m: Vec<u32>,
    m2: Vec<u32>,
}

impl TryFrom<RawRootSystem> for RootSystem {
    type Error = Error;
    fn try_from(raw: RawRootSystem) -> Result<Self> {
        RootSystem::new(raw.name, raw.rank, raw.roots, raw.m, raw.m2)
    }
}

impl From<RootSystem> for RawRootSystem {
    fn from(rs: RootSystem) -> Self {
        RawRootSystem {
            name: rs.name,
            rank: rs.rank,
            roots: rs.positive_roots,
            m: rs.multiplicities,
            m2: rs.double_multiplicities,
        }
    }
}

/// Root-system family selector for [`build_root_system`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    A,
    B,
    C,
    D,
    BC,
    Single,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "BC" => Ok(Family::BC),
            "SINGLE" => Ok(Family::Single),
            other => Err(Error::InvalidRootSystem(format!("unknown family `{other}`"))),
        }
    }
}

/// Multiplicity assignment per root class.
///
/// `pairwise` applies to the e_i +- e_j classes, `axis` to the e_i (B, BC)
/// or 2e_i (C) class; `axis_double` is the m_{2a} weight carried by the
/// axis roots of a BC system.
#[derive(Debug, Clone, Copy)]
pub struct MultiplicityAssignment {
    pub pairwise: u32,
    pub axis: u32,
    pub axis_double: u32,
}

impl MultiplicityAssignment {
    pub fn uniform(m: u32) -> Self {
        MultiplicityAssignment {
            pairwise: m,
            axis: m,
            axis_double: 0,
        }
    }
}

impl RootSystem {
    /// Validating constructor; the invariants are those required by every
    /// downstream formula: nonzero roots, no opposite pairs, rank equal to
    /// the span dimension, m >= 1, m2 >= 0.
    pub fn new(
        name: impl Into<String>,
        rank: usize,
        positive_roots: Vec<Vec<f64>>,
        multiplicities: Vec<u32>,
        double_multiplicities: Vec<u32>,
    ) -> Result<Self> {
        let name = name.into();
        if multiplicities.len() != positive_roots.len() {
            return Err(Error::InvalidRootSystem(format!(
                "{} roots but {} multiplicities",
                positive_roots.len(),
                multiplicities.len()
            )));
        }
        if double_multiplicities.len() != positive_roots.len() {
            return Err(Error::InvalidRootSystem(format!(
                "{} roots but {} double multiplicities",
                positive_roots.len(),
                double_multiplicities.len()
            )));
        }
        let dim = positive_roots.first().map(|r| r.len()).unwrap_or(rank);
        for (i, alpha) in positive_roots.iter().enumerate() {
            if alpha.len() != dim {
                return Err(Error::InvalidRootSystem(format!(
                    "root {i} has dimension {} != {dim}",
                    alpha.len()
                )));
            }
            if linalg::norm(alpha) <= 0.0 {
                return Err(Error::InvalidRootSystem(format!("root {i} has zero norm")));
            }
        }
        for m in &multiplicities {
            if *m < 1 {
                return Err(Error::InvalidRootSystem("multiplicity below 1".into()));
            }
        }
        // no two roots may be negative multiples of each other
        for i in 0..positive_roots.len() {
            for j in (i + 1)..positive_roots.len() {
                let a = &positive_roots[i];
                let b = &positive_roots[j];
                let cos = linalg::dot(a, b) / (linalg::norm(a) * linalg::norm(b));
                if cos < -1.0 + 1e-12 {
                    return Err(Error::InvalidRootSystem(format!(
                        "roots {i} and {j} are negative multiples of each other"
                    )));
                }
            }
        }
        let span = linalg::span_rank(&positive_roots, 1e-10);
        if span != rank {
            return Err(Error::InvalidRootSystem(format!(
                "declared rank {rank} but roots span dimension {span}"
            )));
        }
        Ok(RootSystem {
            name,
            rank,
            positive_roots,
            multiplicities,
            double_multiplicities,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.positive_roots
            .first()
            .map(|r| r.len())
            .unwrap_or(self.rank)
    }

    pub fn positive_roots(&self) -> &[Vec<f64>] {
        &self.positive_roots
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn double_multiplicities(&self) -> &[u32] {
        &self.double_multiplicities
    }

    pub fn n_roots(&self) -> usize {
        self.positive_roots.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Smallest root value over the positive roots; the chamber is where
    /// this is positive.
    pub fn min_root_value(&self, x: &[f64]) -> f64 {
        self.positive_roots
            .iter()
            .map(|a| linalg::dot(a, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// `true` iff `alpha(x) > wall_eps` for every positive root alpha.
    pub fn chamber_contains(&self, x: &[f64], wall_eps: f64) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.min_root_value(x) > wall_eps)
    }

    fn require_chamber(&self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        let min = self.min_root_value(x);
        if min > WALL_EPS {
            Ok(())
        } else {
            Err(Error::OutsideChamber {
                min_root_value: min,
            })
        }
    }

    /// Radial density `delta(x) = prod_a alpha(x)^{m_a}`.
    ///
    /// The product realization agrees with the inertia determinant of the
    /// concrete geometries up to a constant; see `geom::delta_from_inertia`
    /// and the consistency tests.
    pub fn delta(&self, x: &[f64]) -> Result<f64> {
        self.require_chamber(x)?;
        let mut d = 1.0;
        for (alpha, &m) in self.positive_roots.iter().zip(&self.multiplicities) {
            d *= linalg::dot(alpha, x).powi(m as i32);
        }
        Ok(d)
    }

    /// log delta, computed as a sum to stay finite for large systems.
    pub fn log_delta(&self, x: &[f64]) -> Result<f64> {
        self.require_chamber(x)?;
        let mut s = 0.0;
        for (alpha, &m) in self.positive_roots.iter().zip(&self.multiplicities) {
            s += f64::from(m) * linalg::dot(alpha, x).ln();
        }
        Ok(s)
    }

    /// Ambient gradient of log delta: `sum_a m_a alpha / alpha(x)`.
    pub fn grad_log_delta(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_chamber(x)?;
        Ok(self.grad_log_delta_unchecked(x))
    }

    #[inline]
    pub(crate) fn grad_log_delta_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.ambient_dim()];
        for (alpha, &m) in self.positive_roots.iter().zip(&self.multiplicities) {
            let av = linalg::dot(alpha, x);
            linalg::axpy(f64::from(m) / av, alpha, &mut g);
        }
        g
    }

    /// Ambient Laplacian of log delta: `-sum_a m_a |alpha|^2 / alpha(x)^2`.
    pub fn laplace_log_delta(&self, x: &[f64]) -> Result<f64> {
        self.require_chamber(x)?;
        let mut s = 0.0;
        for (alpha, &m) in self.positive_roots.iter().zip(&self.multiplicities) {
            let av = linalg::dot(alpha, x);
            s -= f64::from(m) * linalg::dot(alpha, alpha) / (av * av);
        }
        Ok(s)
    }

    /// Reduced potential in closed form,
    /// `V = (1/8)|grad log delta|^2 + (1/4) lap log delta`,
    /// which equals `(1/2) delta^{-1/2} (lap delta^{1/2})`.
    pub fn potential_from_delta(&self, x: &[f64]) -> Result<f64> {
        let g = self.grad_log_delta(x)?;
        let lap = self.laplace_log_delta(x)?;
        Ok(0.125 * linalg::dot(&g, &g) + 0.25 * lap)
    }

    /// Rational Calogero-Moser potential under the chosen coupling
    /// convention: the coefficient over `alpha(x)^2` is
    /// `m(2m-2)|alpha|^2/8` for [`CmConvention::TwoM`] and
    /// `m(m-2+2 m2)|alpha|^2/8` for [`CmConvention::Op83`].
    pub fn cm_potential(&self, x: &[f64], convention: CmConvention) -> Result<f64> {
        self.require_chamber(x)?;
        let mut s = 0.0;
        for ((alpha, &m), &m2) in self
            .positive_roots
            .iter()
            .zip(&self.multiplicities)
            .zip(&self.double_multiplicities)
        {
            let m = f64::from(m);
            let m2 = f64::from(m2);
            let coeff = match convention {
                CmConvention::TwoM => m * (2.0 * m - 2.0),
                CmConvention::Op83 => m * (m - 2.0 + 2.0 * m2),
            };
            let av = linalg::dot(alpha, x);
            s += coeff * linalg::dot(alpha, alpha) / (8.0 * av * av);
        }
        Ok(s)
    }

    /// Spin potential `(1/2) sum_a c_a / alpha(x)^2`.
    pub fn spin_potential(&self, x: &[f64], s: &SpinLevel) -> Result<f64> {
        self.require_chamber(x)?;
        if s.coefficients.len() != self.n_roots() {
            return Err(Error::DimensionMismatch {
                expected: self.n_roots(),
                got: s.coefficients.len(),
            });
        }
        let mut v = 0.0;
        for (alpha, &c) in self.positive_roots.iter().zip(&s.coefficients) {
            let av = linalg::dot(alpha, x);
            v += 0.5 * c / (av * av);
        }
        Ok(v)
    }

    /// Orthogonal projection of `v` onto the span of the roots.
    ///
    /// A-type systems live in the trace-zero hyperplane; drifts built from
    /// `grad_log_delta` are passed through this projector before use.
    pub fn project_to_root_span(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        let basis = self.span_basis();
        let mut out = vec![0.0; v.len()];
        for b in &basis {
            linalg::axpy(linalg::dot(v, b), b, &mut out);
        }
        Ok(out)
    }

    pub(crate) fn span_basis(&self) -> Vec<Vec<f64>> {
        linalg::gram_schmidt(&self.positive_roots, 1e-10)
    }

    /// Whether the span of roots is a proper subspace of the ambient space.
    pub fn needs_span_projection(&self) -> bool {
        self.rank < self.ambient_dim()
    }
}

/// Coupling convention selector for [`RootSystem::cm_potential`].
///
/// The two conventions disagree; `hjb::cm_adjudicate_coupling` compares both
/// against the defining oracle and reports which one matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmConvention {
    /// coefficient m(2m-2)
    TwoM,
    /// coefficient m(m-2+2 m_{2a}), as in the inverse-square couplings of
    /// Olshanetsky-Perelomov type systems
    Op83,
}

impl std::fmt::Display for CmConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmConvention::TwoM => write!(f, "m(2m-2)"),
            CmConvention::Op83 => write!(f, "m(m-2+2m2)"),
        }
    }
}

/// A point strictly inside the open Weyl chamber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChamberPoint {
    coords: Vec<f64>,
}

impl ChamberPoint {
    pub fn new(rs: &RootSystem, coords: Vec<f64>, wall_eps: f64) -> Result<Self> {
        if !rs.chamber_contains(&coords, wall_eps)? {
            return Err(Error::OutsideChamber {
                min_root_value: rs.min_root_value(&coords),
            });
        }
        Ok(ChamberPoint { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl std::ops::Deref for ChamberPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

/// Per-root spin coefficients c_a >= 0 (squared momentum units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinLevel {
    coefficients: Vec<f64>,
}

impl SpinLevel {
    pub fn new(rs: &RootSystem, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != rs.n_roots() {
            return Err(Error::DimensionMismatch {
                expected: rs.n_roots(),
                got: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| *c < 0.0 || !c.is_finite()) {
            return Err(Error::InvalidPoint(
                "spin coefficients must be finite and nonnegative".into(),
            ));
        }
        Ok(SpinLevel { coefficients })
    }

    pub fn zero(rs: &RootSystem) -> Self {
        SpinLevel {
            coefficients: vec![0.0; rs.n_roots()],
        }
    }

    /// Same coefficient on every root.
    pub fn uniform(rs: &RootSystem, c: f64) -> Result<Self> {
        Self::new(rs, vec![c; rs.n_roots()])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| *c == 0.0)
    }
}

/// Standard positive-root lists for the classical families.
///
/// `A` builds A_{n-1} inside R^n (roots e_i - e_j, i < j); `single` is the
/// one-root rank-one system on R.
pub fn build_root_system(
    family: Family,
    n: usize,
    m: MultiplicityAssignment,
) -> Result<RootSystem> {
    if n < 1 {
        return Err(Error::InvalidRootSystem("n must be at least 1".into()));
    }
    let mut roots: Vec<Vec<f64>> = Vec::new();
    let mut mult: Vec<u32> = Vec::new();
    let mut mult2: Vec<u32> = Vec::new();

    let mut push = |r: Vec<f64>, m: u32, m2: u32| {
        roots.push(r);
        mult.push(m);
        mult2.push(m2);
    };

    let e = |i: usize, dim: usize, c: f64| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = c;
        v
    };
    let eij = |i: usize, j: usize, dim: usize, sj: f64| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v[j] = sj;
        v
    };

    let (rank, name) = match family {
        Family::A => {
            if n < 2 {
                return Err(Error::InvalidRootSystem(
                    "family A needs n >= 2 (it builds A_{n-1})".into(),
                ));
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    push(eij(i, j, n, -1.0), m.pairwise, 0);
                }
            }
            (n - 1, format!("A{}", n - 1))
        }
        Family::B => {
            for i in 0..n {
                for j in (i + 1)..n {
                    push(eij(i, j, n, -1.0), m.pairwise, 0);
                    push(eij(i, j, n, 1.0), m.pairwise, 0);
                }
            }
            for i in 0..n {
                push(e(i, n, 1.0), m.axis, 0);
            }
            (n, format!("B{n}"))
        }
        Family::C => {
            for i in 0..n {
                for j in (i + 1)..n {
                    push(eij(i, j, n, -1.0), m.pairwise, 0);
                    push(eij(i, j, n, 1.0), m.pairwise, 0);
                }
            }
            for i in 0..n {
                push(e(i, n, 2.0), m.axis, 0);
            }
            (n, format!("C{n}"))
        }
        Family::D => {
            if n < 2 {
                return Err(Error::InvalidRootSystem("family D needs n >= 2".into()));
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    push(eij(i, j, n, -1.0), m.pairwise, 0);
                    push(eij(i, j, n, 1.0), m.pairwise, 0);
                }
            }
            (n, format!("D{n}"))
        }
        Family::BC => {
            for i in 0..n {
                for j in (i + 1)..n {
                    push(eij(i, j, n, -1.0), m.pairwise, 0);
                    push(eij(i, j, n, 1.0), m.pairwise, 0);
                }
            }
            for i in 0..n {
                push(e(i, n, 1.0), m.axis, m.axis_double);
            }
            (n, format!("BC{n}"))
        }
        Family::Single => {
            if n != 1 {
                return Err(Error::InvalidRootSystem(
                    "family `single` is rank one; use n = 1".into(),
                ));
            }
            push(vec![1.0], m.pairwise, m.axis_double);
            (1, "single".to_string())
        }
    };

    RootSystem::new(name, rank, roots, mult, mult2)
}

/// The single-root system on R with multiplicity `m`; `delta(r) = r^m`.
pub fn single_root(m: u32) -> RootSystem {
    build_root_system(Family::Single, 1, MultiplicityAssignment::uniform(m))
        .expect("single root system is always valid")
}

/// A_{n-1} with all multiplicities equal to `m`, inside R^n.
pub fn type_a(n: usize, m: u32) -> Result<RootSystem> {
    build_root_system(Family::A, n, MultiplicityAssignment::uniform(m))
}

/// Chamber representative of an arbitrary point of an A-type system:
/// coordinates sorted in decreasing order.
pub fn sort_to_chamber(x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    y.sort_by(|a, b| b.partial_cmp(a).unwrap());
    y
}
