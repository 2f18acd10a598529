//! Desk-scale statistical verification of the reduction picture: the
//! eigenvalue projection of matrix Brownian motion against the radial SDE,
//! generator transfer for invariant observables, law separation of the
//! forward and reversed drifts, and the momentum conservation contrast.

use wden::geom::hermitian::HermitianPoint;
use wden::reduce::{compare_laws, generator_estimate_from_ensembles, project_ensemble};
use wden::rootsys::type_a;
use wden::sde::models::{
    flat_hamiltonian_diffusion, matrix_bm, radial_sde, reduced_hamiltonian_diffusion, Direction,
};
use wden::sde::problem::WallPolicy;
use wden::sde::{simulate_ensemble_strided, PathEnsemble};
use wden::rootsys::SpinLevel;

fn mean_var(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn eigenvalues_of_matrix_bm_match_radial_sde() {
    // Theorem-level check at desk scale: 1500 paths per side, t = 0.4
    let n = 3;
    let t = 0.4;
    let dt = 2e-3;
    let q0 = HermitianPoint::from_diag(&[1.0, 0.0, -1.0]).unwrap();
    let upstairs = matrix_bm(n, &q0, t, dt, 1500, 101, 200).unwrap();
    let projected = project_ensemble(&upstairs, 1e-9).unwrap();

    let rs = type_a(n, 2).unwrap();
    let p = radial_sde(&rs, Direction::Forward);
    let downstairs =
        simulate_ensemble_strided(&p, &[1.0, 0.0, -1.0], t, dt, 1500, 202, 200).unwrap();

    let cmp = compare_laws(&projected, &downstairs, t).unwrap();
    assert!(
        cmp.min_p_value() > 0.005,
        "KS rejects the reduction:\n{}",
        cmp.render_table()
    );
    assert!(cmp.max_mean_z() < 3.0, "{}", cmp.render_table());
    assert!(cmp.max_var_z() < 3.0, "{}", cmp.render_table());

    // projected coordinates are strictly decreasing at all stored times
    for path in 0..projected.n_paths {
        for k in 0..projected.n_times() {
            let s = projected.state(path, k);
            assert!(s.windows(2).all(|w| w[0] > w[1]));
        }
    }
}

#[test]
fn reduction_also_holds_at_n4() {
    // same comparison one rank up: 4x4 matrix BM against the A3 radial SDE
    let n = 4;
    let t = 0.3;
    let dt = 2e-3;
    let q0 = HermitianPoint::from_diag(&[1.5, 0.5, -0.5, -1.5]).unwrap();
    let upstairs = matrix_bm(n, &q0, t, dt, 1200, 401, 150).unwrap();
    let projected = project_ensemble(&upstairs, 1e-9).unwrap();
    let rs = type_a(n, 2).unwrap();
    let p = radial_sde(&rs, Direction::Forward);
    let downstairs =
        simulate_ensemble_strided(&p, &[1.5, 0.5, -0.5, -1.5], t, dt, 1200, 402, 150).unwrap();
    let cmp = compare_laws(&projected, &downstairs, t).unwrap();
    assert!(
        cmp.min_p_value() > 0.005,
        "KS rejects the n=4 reduction:\n{}",
        cmp.render_table()
    );
    assert!(cmp.max_mean_z() < 3.5, "{}", cmp.render_table());
}

#[test]
fn projection_is_conjugation_invariant() {
    // conjugating every sample by a fixed unitary leaves the projection
    // unchanged: both projections are literally the same array
    let n = 3;
    let q0 = HermitianPoint::from_diag(&[1.0, 0.0, -1.0]).unwrap();
    let ens = matrix_bm(n, &q0, 0.2, 1e-2, 40, 7, 10).unwrap();
    let proj = project_ensemble(&ens, 1e-9).unwrap();

    // a fixed unitary: complex rotation mixing all coordinates
    let u = {
        use wden::num_complex::Complex64;
        use wden::geom::hermitian::CMat;
        let c = Complex64::new(0.6, 0.0);
        let s = Complex64::new(0.0, 0.8);
        let mut m = CMat::zeros(3);
        m.set(0, 0, c);
        m.set(0, 1, s);
        m.set(1, 0, s);
        m.set(1, 1, c);
        m.set(2, 2, Complex64::new(1.0, 0.0));
        m
    };
    let conjugated = ens
        .map_states(ens.dim, "conjugated".into(), |_, _, state| {
            let h = HermitianPoint::from_interleaved(3, state).unwrap();
            let rotated = u.mul(h.matrix()).mul(&u.dagger());
            Ok(HermitianPoint::new(rotated).unwrap().to_interleaved())
        })
        .unwrap();
    let proj2 = project_ensemble(&conjugated, 1e-9).unwrap();
    for path in 0..proj.n_paths {
        for k in 0..proj.n_times() {
            for (a, b) in proj.state(path, k).iter().zip(proj2.state(path, k)) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }
    // in law-comparison terms the two projections are the same sample set;
    // samples agree only to eigensolver tolerance, which can split ties in
    // the empirical CDFs, so the statistic is bounded by single tie-breaks
    let cmp = compare_laws(&proj, &proj2, 0.2).unwrap();
    for c in &cmp.coordinates {
        assert!(
            c.ks_statistic <= 2.0 / proj.n_paths as f64,
            "coord {}: KS {}",
            c.coord,
            c.ks_statistic
        );
        assert!(c.p_value > 0.99);
    }
}

#[test]
fn reduced_hamiltonian_generator_on_the_energy() {
    // rank one, m = 2, spin c: for H(x, u) = u^2/2 + c/(2 x^2) the
    // generator gives A H = u^2/x^2 + c/x^4 (base drift u^2/x^2 term,
    // -c/x^4 from transporting the potential, +3c/(2x^4) base Ito term,
    // +c/(2x^4) from the momentum noise). This exercises the momentum
    // drift and the spin-noise amplitude together.
    let rs = wden::rootsys::single_root(2);
    let c = 1.0;
    let spin = SpinLevel::new(&rs, vec![c]).unwrap();
    let p = reduced_hamiltonian_diffusion(&rs, &spin).unwrap();
    let (x0, u0) = (1.5, 0.4);
    let energy = move |s: &[f64]| 0.5 * s[1] * s[1] + 0.5 * c / (s[0] * s[0]);
    let t = 0.02;
    let est = wden::reduce::generator_estimate(&p, energy, &[x0, u0], t, 1e-4, 30_000, 91).unwrap();
    let want = u0 * u0 / (x0 * x0) + c / x0.powi(4);
    assert!(
        (est.richardson.mean - want).abs() < 3.0 * est.richardson.stderr + 0.01,
        "A(energy) = {} +- {} vs {}",
        est.richardson.mean,
        est.richardson.stderr,
        want
    );
}

#[test]
fn reduced_hamiltonian_interpretations_share_the_law() {
    // the momentum noise depends on the base only and the base noise is
    // additive, so the Stratonovich correction vanishes and both steppers
    // must produce the same law
    use wden::sde::problem::Interpretation;
    let rs = wden::rootsys::single_root(2);
    let spin = SpinLevel::new(&rs, vec![1.0]).unwrap();
    let x0 = [1.2, 0.4];
    let t = 0.3;
    let mk = |interp: Interpretation, seed: u64| {
        let mut p = reduced_hamiltonian_diffusion(&rs, &spin).unwrap();
        p.interpretation = interp;
        simulate_ensemble_strided(&p, &x0, t, 1e-3, 4000, seed, 300).unwrap()
    };
    let strat = mk(Interpretation::Stratonovich, 71);
    let ito = mk(Interpretation::Ito, 72);
    let cmp = compare_laws(&strat, &ito, t).unwrap();
    assert!(
        cmp.min_p_value() > 0.01,
        "interpretations separate:\n{}",
        cmp.render_table()
    );
    assert!(cmp.max_mean_z() < 3.5, "{}", cmp.render_table());
}

#[test]
fn generator_transfer_for_invariant_observable() {
    // f = sum of squared eigenvalues: upstairs it is the squared Frobenius
    // norm; both generator estimates must agree (the common value is n^2-1
    // plus the drift term, 8 at these points)
    let n = 3;
    let t = 0.05;
    let dt = 5e-4;
    let n_paths = 8000;
    let q0 = HermitianPoint::from_diag(&[1.0, 0.0, -1.0]).unwrap();

    let up_t = matrix_bm(n, &q0, t, dt, n_paths, 11, 100).unwrap();
    let up_half = matrix_bm(n, &q0, t / 2.0, dt, n_paths, 12, 50).unwrap();
    let f_up = |state: &[f64]| -> f64 { state.iter().map(|v| v * v).sum() };
    let up = generator_estimate_from_ensembles(&up_t, &up_half, f_up, &q0.to_interleaved(), t)
        .unwrap();

    let rs = type_a(n, 2).unwrap();
    let p = radial_sde(&rs, Direction::Forward);
    let x0 = [1.0, 0.0, -1.0];
    let down_t = simulate_ensemble_strided(&p, &x0, t, dt, n_paths, 13, 100).unwrap();
    let down_half = simulate_ensemble_strided(&p, &x0, t / 2.0, dt, n_paths, 14, 50).unwrap();
    let f_down = |state: &[f64]| -> f64 { state.iter().map(|v| v * v).sum() };
    let down =
        generator_estimate_from_ensembles(&down_t, &down_half, f_down, &x0, t).unwrap();

    let gap = (up.richardson.mean - down.richardson.mean).abs();
    let budget = 3.0 * up.richardson.combined_stderr(&down.richardson);
    assert!(
        gap < budget,
        "upstairs {} vs downstairs {} (budget {budget})",
        up.richardson.mean,
        down.richardson.mean
    );
    // and both sit at the analytic value n^2 - 1 + 2 sum_{i<j} 1 = 8
    assert!((up.richardson.mean - 8.0).abs() < 3.0 * up.richardson.stderr + 0.05);
    assert!((down.richardson.mean - 8.0).abs() < 3.0 * down.richardson.stderr + 0.05);
}

#[test]
fn sphere_generator_on_degree_one_harmonic() {
    // f = z at the north pole: the generator acts on degree-1 spherical
    // harmonics with eigenvalue -1
    let t = 0.05_f64;
    let dt = 5e-4;
    let n_paths = 30_000;
    let u0 = wden::geom::sphere::FrameState::north_pole();
    let steps = (t / dt).round() as usize;
    let ens_t = wden::sde::models::frame_bundle_bm_sphere(&u0, t, dt, n_paths, 61, steps).unwrap();
    let ens_half =
        wden::sde::models::frame_bundle_bm_sphere(&u0, t / 2.0, dt, n_paths, 62, steps / 2)
            .unwrap();
    let est = generator_estimate_from_ensembles(
        &ens_t,
        &ens_half,
        |b: &[f64]| b[2],
        &[0.0, 0.0, 1.0],
        t,
    )
    .unwrap();
    assert!(
        (est.richardson.mean + 1.0).abs() < 3.0 * est.richardson.stderr + 2e-3,
        "got {} +- {}",
        est.richardson.mean,
        est.richardson.stderr
    );
}

#[test]
fn forward_and_reversed_laws_separate() {
    let rs = type_a(3, 2).unwrap();
    let x0 = [1.0, 0.0, -1.0];
    let t = 0.5;
    let dt = 1e-3;
    let fwd = radial_sde(&rs, Direction::Forward);
    let a = simulate_ensemble_strided(&fwd, &x0, t, dt, 1200, 55, 500).unwrap();
    let rev = radial_sde(&rs, Direction::Reversed).with_wall_policy(WallPolicy::RejectPath);
    let b = simulate_ensemble_strided(&rev, &x0, t, dt, 1200, 56, 500).unwrap();
    // the attractive reversed drift loses paths at the walls; they are
    // reported, never silently dropped
    assert!(
        b.n_paths + b.rejected.len() == 1200,
        "rejected paths must be accounted for"
    );

    let smallest = |e: &PathEnsemble| {
        let vals = e.column(e.terminal_index(), 2);
        mean_var(&vals)
    };
    let (ma, va) = smallest(&a);
    let (mb, vb) = smallest(&b);
    let se = (va / a.n_paths as f64 + vb / b.n_paths as f64).sqrt();
    assert!(
        (ma - mb).abs() > 3.0 * se,
        "forward {ma} vs reversed {mb} should separate (se {se})"
    );
    // repulsion pushes the smallest eigenvalue further down
    assert!(ma < mb);
}

#[test]
fn momentum_conservation_contrast() {
    // flat Hamiltonian diffusion: p constant exactly; the commutator
    // J = [q_t, p0] is NOT conserved in the constant frame (its sampled
    // variance grows), matching the known failure of the naive momentum
    // reduction. The reduced Hamiltonian diffusion treats spin as a fixed
    // parameter by construction.
    let n = 3;
    let q0 = HermitianPoint::from_diag(&[1.0, 0.0, -1.0]).unwrap();
    let p0 = {
        use wden::num_complex::Complex64;
        use wden::geom::hermitian::CMat;
        let mut m = CMat::diag(&[0.2, 0.1, -0.3]);
        m.set(0, 1, Complex64::new(0.3, 0.1));
        m.set(1, 0, Complex64::new(0.3, -0.1));
        HermitianPoint::new(m).unwrap()
    };
    let ens = flat_hamiltonian_diffusion(n, &q0, &p0, 0.5, 1e-2, 800, 21, 10).unwrap();
    let geom = wden::geom::hermitian::HermitianGeometry::new(n);

    let j_component_var = |k: usize| -> f64 {
        let vals: Vec<f64> = (0..ens.n_paths)
            .map(|path| {
                let state = ens.state(path, k);
                let (q, p) = wden::sde::models::split_flat_hamiltonian_state(n, state).unwrap();
                let j = geom.momentum_map(&q, &p).unwrap();
                // a fixed coalgebra coordinate of J
                j.get(0, 1).im
            })
            .collect();
        mean_var(&vals).1
    };
    let v_early = j_component_var(1);
    let v_late = j_component_var(ens.terminal_index());
    assert!(
        v_late > 3.0 * v_early.max(1e-12),
        "J variance should grow: early {v_early} late {v_late}"
    );

    // base marginal of the reduced Hamiltonian diffusion agrees in law with
    // the forward radial SDE (the base equation decouples)
    let rs = type_a(3, 2).unwrap();
    let spin = SpinLevel::uniform(&rs, 0.5).unwrap();
    let red = reduced_hamiltonian_diffusion(&rs, &spin).unwrap();
    let x0 = [1.0, 0.0, -1.0, 0.1, 0.0, -0.1];
    let t = 0.4;
    let red_ens = simulate_ensemble_strided(&red, &x0, t, 1e-3, 1500, 300, 400).unwrap();
    let base = red_ens
        .map_states(3, "base marginal".into(), |_, _, s| Ok(s[0..3].to_vec()))
        .unwrap();
    let fwd = radial_sde(&rs, Direction::Forward);
    let radial = simulate_ensemble_strided(&fwd, &[1.0, 0.0, -1.0], t, 1e-3, 1500, 301, 400).unwrap();
    let cmp = compare_laws(&base, &radial, t).unwrap();
    assert!(
        cmp.min_p_value() > 0.01,
        "base marginal should match the radial law:\n{}",
        cmp.render_table()
    );
}
