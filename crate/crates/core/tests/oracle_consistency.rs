//! Cross-module oracle checks: the closed-form radial quantities against
//! finite differences, the product density against the inertia determinant
//! of the concrete geometries, and the operator conjugation identity.

use wden::geom::hermitian::{HermitianGeometry, HermitianPoint};
use wden::geom::orbit::{char_diagram_check, delta_from_inertia};
use wden::geom::so3::So3Geometry;
use wden::hjb::{fd_half_delta_potential, random_chamber_points};
use wden::linalg;
use wden::rootsys::{single_root, type_a, CmConvention, RootSystem};
use wden::sde::rng::RngStream;

#[test]
fn closed_potential_matches_fd_oracle_on_100_points() {
    // |V_closed - FD| < 1e-6 (1 + |FD|) on 100 random chamber points per system
    let systems: Vec<RootSystem> = vec![
        single_root(1),
        single_root(2),
        single_root(3),
        type_a(3, 2).unwrap(),
    ];
    for rs in &systems {
        let points = random_chamber_points(rs, 100, 2024, 0.3).unwrap();
        for x in &points {
            let fd = fd_half_delta_potential(rs, x, 1e-4).unwrap();
            let cf = rs.potential_from_delta(x).unwrap();
            assert!(
                (cf - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                "{} at {:?}: closed {} fd {}",
                rs.name(),
                x,
                cf,
                fd
            );
        }
    }
}

#[test]
fn grad_log_delta_matches_fd_on_random_points() {
    let systems: Vec<RootSystem> = vec![single_root(1), single_root(3), type_a(3, 2).unwrap(), type_a(4, 2).unwrap()];
    let h = 1e-6;
    for rs in &systems {
        let points = random_chamber_points(rs, 40, 7, 0.3).unwrap();
        for x in &points {
            let g = rs.grad_log_delta(x).unwrap();
            let mut xp = x.clone();
            for i in 0..x.len() {
                xp[i] = x[i] + h;
                let up = rs.log_delta(&xp).unwrap();
                xp[i] = x[i] - h;
                let dn = rs.log_delta(&xp).unwrap();
                xp[i] = x[i];
                let fd = (up - dn) / (2.0 * h);
                assert!(
                    (g[i] - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                    "{} coord {i}: {} vs {}",
                    rs.name(),
                    g[i],
                    fd
                );
            }
        }
    }
}

#[test]
fn harmonicity_at_m2_and_cm_convention_split() {
    // For A-type with all m = 2, sqrt(delta) is harmonic: the potential
    // vanishes identically; the m(m-2+2m2) convention matches the oracle
    // while m(2m-2) does not.
    for n in [2usize, 3, 4] {
        let rs = type_a(n, 2).unwrap();
        let points = random_chamber_points(&rs, 30, 5, 0.3).unwrap();
        for x in &points {
            let v = rs.potential_from_delta(x).unwrap();
            assert!(v.abs() < 1e-10, "A_{} potential {v} at {x:?}", n - 1);
            let op = rs.cm_potential(x, CmConvention::Op83).unwrap();
            assert!((op - v).abs() < 1e-10);
            let two_m = rs.cm_potential(x, CmConvention::TwoM).unwrap();
            assert!(
                (two_m - v).abs() > 1e-3,
                "m(2m-2) should visibly disagree with the oracle: {two_m} vs {v}"
            );
        }
    }
}

#[test]
fn delta_ratio_constant_across_so3_points() {
    // delta_from_inertia(q) / delta(pi(q)) constant over 100 regular points
    let geom = So3Geometry;
    let rs = single_root(2);
    let mut stream = RngStream::derive(31, 0);
    let mut ratios = Vec::new();
    for _ in 0..100 {
        let q: Vec<f64> = (0..3).map(|_| stream.next_gaussian()).collect();
        let r = linalg::norm(&q);
        if r < 0.3 {
            continue;
        }
        let di = delta_from_inertia(&geom, &q).unwrap();
        let dp = rs.delta(&[r]).unwrap();
        ratios.push(di / dp);
    }
    let first = ratios[0];
    for r in &ratios {
        assert!(
            (r - first).abs() < 1e-8 * first.abs(),
            "ratio spread: {r} vs {first}"
        );
    }
}

#[test]
fn delta_ratio_constant_across_hermitian_points() {
    let n = 3;
    let geom = HermitianGeometry::new(n);
    let rs = type_a(n, 2).unwrap();
    let mut stream = RngStream::derive(32, 0);
    let mut ratios = Vec::new();
    let mut tries = 0;
    while ratios.len() < 100 && tries < 2000 {
        tries += 1;
        // random traceless Hermitian via coordinates over the flat basis
        let coords: Vec<f64> = (0..n * n - 1).map(|_| stream.next_gaussian()).collect();
        let m = geom.matrix_from_coords(&coords);
        let h = HermitianPoint::new(m).unwrap();
        let eig = match wden::geom::hermitian::eigen_project(&h, 1e-3) {
            Ok(e) => e,
            Err(_) => continue, // nearly degenerate draw
        };
        let di = delta_from_inertia(&geom, &coords).unwrap();
        let dp = rs.delta(&eig).unwrap();
        ratios.push(di / dp);
    }
    assert!(ratios.len() == 100, "only {} regular samples", ratios.len());
    let first = ratios[0];
    for r in &ratios {
        assert!(
            (r - first).abs() < 1e-7 * first.abs(),
            "ratio spread: {r} vs {first}"
        );
    }
}

#[test]
fn char_diagram_residuals_on_both_geometries() {
    let geom = So3Geometry;
    let res = char_diagram_check(&geom, &[0.4, -0.8, 1.3], 50, 77).unwrap();
    assert!(res < 1e-9, "so3 residual {res}");

    let hg = HermitianGeometry::new(3);
    let q = HermitianPoint::from_diag(&[1.3, -0.2, -1.1]).unwrap();
    let res = char_diagram_check(&hg, &hg.coords(&q), 50, 78).unwrap();
    assert!(res < 1e-9, "hermitian residual {res}");
}

#[test]
fn operator_conjugation_identity_discrete() {
    // delta^{-1/2} H(delta^{1/2} g) = (-1/2 lap - b d - div b / 2 - |b|^2/2 + V) g
    // with b = (log delta)'/2, discretely within O(h^2), for a generic
    // positive density and a generic test function.
    let n = 401;
    let a = 0.5;
    let b_end = 2.5;
    let h = (b_end - a) / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
    let density = |x: f64| ((x).sin() * 0.7 + 0.3 * x * x).exp();
    let potential = |x: f64| 0.4 * (2.0 * x).cos();
    let g_fun = |x: f64| (1.3 * x).sin() + 0.2 * x;

    // analytic drift pieces for the right-hand side
    let b_fun = |x: f64| 0.5 * (x.cos() * 0.7 + 0.6 * x); // (log density)'/2
    let db_fun = |x: f64| 0.5 * (-x.sin() * 0.7 + 0.6); // b'

    let sqrt_d: Vec<f64> = nodes.iter().map(|&x| density(x).sqrt()).collect();
    let g: Vec<f64> = nodes.iter().map(|&x| g_fun(x)).collect();
    let prod: Vec<f64> = sqrt_d.iter().zip(&g).map(|(s, gi)| s * gi).collect();

    let second = |f: &[f64], i: usize| (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    let first = |f: &[f64], i: usize| (f[i + 1] - f[i - 1]) / (2.0 * h);

    let mut max_err: f64 = 0.0;
    for i in 1..n - 1 {
        let x = nodes[i];
        let lhs = (-0.5 * second(&prod, i) + potential(x) * prod[i]) / sqrt_d[i];
        let b = b_fun(x);
        let rhs = -0.5 * second(&g, i) - b * first(&g, i)
            + (-0.5 * db_fun(x) - 0.5 * b * b + potential(x)) * g[i];
        max_err = max_err.max((lhs - rhs).abs());
    }
    assert!(max_err < 20.0 * h * h, "conjugation defect {max_err} vs {}", 20.0 * h * h);
}
