mod support;

use ffcirc::circuit::{evenly_spaced_sites, sample_disorder, HoppingPropagator};
use ffcirc::linalg::CMat;
use ffcirc::{
    brownian_evolve, correlation_matrix, nonunitary_step, unitary_step, weight_distribution,
    Boundary, BrownianParams, Circuit, CircuitParams, Error, Frame, ObserveAt, Renormalization,
};
use nalgebra::DVector;
use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::fock::{self, FockSector};

fn random_frame(l: usize, n: usize, seed: u64) -> Frame<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Frame::random(l, n, &mut rng).unwrap()
}

fn random_signs(l: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..l).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect()
}

fn to_c64(c: Complex<f64>) -> Complex64 {
    Complex64::new(c.re, c.im)
}

#[test]
fn two_site_unitary_rotation() {
    for tau in [0.0, 0.1, 0.4, 1.0, 2.3] {
        let f = Frame::product(2, &[0]).unwrap();
        let g = unitary_step(&f, &[1.0, 1.0], tau, Boundary::Open).unwrap();
        let c = correlation_matrix(&g);
        let expect = (2.0f64 * tau).cos().powi(2);
        assert!((c.get(0, 0).re - expect).abs() < 1e-14, "tau = {tau}");
    }
}

#[test]
fn zero_tau_is_identity() {
    let f = random_frame(6, 3, 1);
    let g = unitary_step(&f, &[1.0, -1.0, 1.0, 1.0, -1.0, 1.0], 0.0, Boundary::Periodic).unwrap();
    assert_eq!(f, g);
}

#[test]
fn unitary_step_preserves_orthonormality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_frame(6, 3, 3);
    for boundary in [Boundary::Open, Boundary::Periodic] {
        let g = unitary_step(&f, &random_signs(6, &mut rng), 1.0, boundary).unwrap();
        assert!(g.orthonormality_error() < 1e-12);
    }
    assert!(matches!(
        unitary_step(&f, &[1.0; 5], 1.0, Boundary::Open),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn propagator_matches_dense_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for &l in &[2usize, 3, 7, 12, 33] {
        for &tau in &[0.3, 1.0, 2.7] {
            for boundary in [Boundary::Open, Boundary::Periodic] {
                let prop = HoppingPropagator::<f64>::new(l, tau, boundary).unwrap();
                for _ in 0..3 {
                    let kappa = random_signs(l, &mut rng);
                    let h = fock::hopping_matrix(&kappa, boundary == Boundary::Periodic);
                    let oracle = fock::unitary_exp(&h, 2.0 * tau);
                    let u = prop.matrix(&kappa).unwrap();
                    let mut err: f64 = 0.0;
                    for x in 0..l {
                        for y in 0..l {
                            err = err.max((to_c64(u[(x, y)]) - oracle[(x, y)]).norm());
                        }
                    }
                    assert!(err < 1e-12, "L={l} tau={tau} {boundary}: {err}");
                }
            }
        }
    }
}

#[test]
fn nonunitary_step_zero_beta_keeps_correlations() {
    let f = random_frame(8, 3, 5);
    let g = nonunitary_step(&f, &[1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0], 0.0).unwrap();
    let (c0, c1) = (correlation_matrix(&f), correlation_matrix(&g));
    assert!(c0.matrix().max_abs_diff(c1.matrix()) < 1e-12);
}

/// `dC/ds = −{h, C} + 2 C h C` with `s = 2β` and real diagonal `h`.
fn imaginary_time_rhs(c: &CMat<f64>, lambda: &[f64]) -> CMat<f64> {
    let l = c.rows();
    let mut hc = c.clone();
    for x in 0..l {
        for v in hc.row_mut(x) {
            *v = v.scale(lambda[x]);
        }
    }
    let chc = c.matmul(&hc);
    CMat::from_fn(l, l, |x, y| {
        -(c[(x, y)] * (lambda[x] + lambda[y])) + chc[(x, y)] * 2.0
    })
}

#[test]
fn nonunitary_step_matches_correlation_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..3 {
        let f = random_frame(6, 3, 10 + trial);
        let lambda: Vec<f64> = (0..6).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect();
        let beta = 0.35;
        let g = nonunitary_step(&f, &lambda, beta).unwrap();
        let target = correlation_matrix(&g);
        // Flow P = W W† (the transpose of C) under s; h is diagonal so the
        // flow commutes with transposition.
        let mut p = f.orbitals().mul_adjoint(f.orbitals());
        let steps = 4000;
        let ds = 2.0 * beta / steps as f64;
        let axpy = |a: &CMat<f64>, b: &CMat<f64>, s: f64| {
            CMat::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + b[(i, j)] * s)
        };
        for _ in 0..steps {
            let k1 = imaginary_time_rhs(&p, &lambda);
            let k2 = imaginary_time_rhs(&axpy(&p, &k1, ds / 2.0), &lambda);
            let k3 = imaginary_time_rhs(&axpy(&p, &k2, ds / 2.0), &lambda);
            let k4 = imaginary_time_rhs(&axpy(&p, &k3, ds), &lambda);
            p = CMat::from_fn(6, 6, |i, j| {
                p[(i, j)] + (k1[(i, j)] + k2[(i, j)] * 2.0 + k3[(i, j)] * 2.0 + k4[(i, j)]) * (ds / 6.0)
            });
        }
        let c_flow = p.transpose();
        assert!(c_flow.max_abs_diff(target.matrix()) < 1e-6);
    }
}

#[test]
fn unitary_dynamics_conserves_projector() {
    let mut p = CircuitParams::<f64>::new(32, 16);
    p.steps = 1000;
    p.seed = 7;
    let obs = ObserveAt::Steps(vec![1, 10, 100, 500, 1000]);
    let rec = Circuit::new(p)
        .unwrap()
        .run(0, &obs, |_, f| {
            let c = correlation_matrix(f);
            ((c.trace() - 16.0).abs(), c.projector_error())
        })
        .unwrap();
    for (t, (dtr, proj)) in rec {
        assert!(dtr < 1e-9 && proj < 1e-9, "t = {t}: {dtr} {proj}");
    }
}

fn fock_comparison(boundary: Boundary, seed: u64, realization: u64) -> f64 {
    let (l, n) = (8, 4);
    let mut p = CircuitParams::<f64>::new(l, n);
    p.beta = 0.5;
    p.steps = 20;
    p.boundary = boundary;
    p.seed = seed;
    let c = Circuit::new(p.clone())
        .unwrap()
        .run(realization, &ObserveAt::Final, |_, f| correlation_matrix(f))
        .unwrap()
        .pop()
        .unwrap()
        .1;
    let sector = FockSector::new(l, n);
    assert_eq!(sector.dim(), 70);
    let mut psi: DVector<Complex64> = sector.product_state(&evenly_spaced_sites(l, n));
    for t in 1..=p.steps {
        let d = sample_disorder(&p, realization, t);
        psi = fock::period(&sector, &psi, &d.kappa, &d.lambda, p.tau, p.beta, boundary == Boundary::Periodic);
    }
    let oracle = sector.correlation(&psi);
    let mut err: f64 = 0.0;
    for x in 0..l {
        for y in 0..l {
            err = err.max((to_c64(c.get(x, y)) - oracle[(x, y)]).norm());
        }
    }
    err
}

#[test]
fn matches_many_body_evolution() {
    for boundary in [Boundary::Open, Boundary::Periodic] {
        for r in 0..3 {
            let err = fock_comparison(boundary, 11, r);
            assert!(err < 1e-8, "{boundary} realization {r}: {err}");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let mut p = CircuitParams::<f64>::new(40, 20);
    p.beta = 0.8;
    p.steps = 60;
    p.seed = 99;
    let circuit = Circuit::new(p).unwrap();
    let grab = |r| {
        circuit
            .run(r, &ObserveAt::Final, |_, f| f.orbitals().clone())
            .unwrap()
            .pop()
            .unwrap()
            .1
    };
    assert_eq!(grab(3), grab(3));
    assert!(grab(3).max_abs_diff(&grab(4)) > 1e-3);
}

#[test]
fn degenerate_state_reports_step() {
    let mut p = CircuitParams::<f64>::new(4, 2);
    p.beta = 400.0;
    p.p2 = 0.5;
    p.steps = 50;
    p.seed = 1;
    // Extreme damping underflows a column eventually; either the run
    // completes or the failure names the step.
    match Circuit::new(p).unwrap().run(0, &ObserveAt::Final, |_, _| ()) {
        Ok(_) => {}
        Err(Error::DegenerateState { step, .. }) => assert!(step.is_some()),
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn adaptive_schedule_keeps_invariants() {
    let mut p = CircuitParams::<f64>::new(60, 30);
    p.beta = 1.6;
    p.steps = 200;
    p.seed = 5;
    let circuit = Circuit::new(p).unwrap().with_renormalization(Renormalization::adaptive());
    let rec = circuit
        .run(0, &ObserveAt::Steps(vec![37, 200]), |_, f| {
            let c = correlation_matrix(f);
            (f.orthonormality_error(), c.projector_error())
        })
        .unwrap();
    for (_, (o, proj)) in rec {
        assert!(o < 1e-10 && proj < 1e-9);
    }
}

#[test]
fn brownian_unitary_noise_conserves_trace() {
    let bp = BrownianParams {
        a: 1.0,
        b: 0.0,
        dt: 0.01,
    };
    let times: Vec<f64> = (0..=10).map(|k| k as f64 * 10.0).collect();
    let rec = brownian_evolve(16, 8, &bp, 100.0, 3, 0, &times, |_, f| correlation_matrix(f).trace())
        .unwrap();
    assert_eq!(rec.len(), 11);
    for (t, tr) in rec {
        assert!((tr - 8.0).abs() < 1e-8, "t = {t}: {tr}");
    }
}

#[test]
fn brownian_onsite_noise_keeps_product_state() {
    let bp = BrownianParams::<f64> {
        a: 0.0,
        b: 1.0,
        dt: 0.01,
    };
    let rec = brownian_evolve(10, 5, &bp, 5.0, 4, 0, &[5.0], |_, f| correlation_matrix(f)).unwrap();
    let c = &rec[0].1;
    assert!((c.trace() - 5.0).abs() < 1e-10);
    for x in 0..10 {
        for y in 0..10 {
            if x != y {
                assert!(c.get(x, y).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn brownian_weight_approaches_inverse_square() {
    // Reduced-size version of the plateau check: L = 64, 16 trajectories.
    let (l, n) = (64, 32);
    let bp = BrownianParams::new(1.0, 1.0);
    let t_end = 40.0;
    let mut mean = vec![0.0; l / 2 + 1];
    let reps = 16;
    for r in 0..reps {
        let rec = brownian_evolve(l, n, &bp, t_end, 21, r, &[t_end], |_, f| {
            weight_distribution(&correlation_matrix(f), Boundary::Periodic)
        })
        .unwrap();
        for (m, v) in mean.iter_mut().zip(&rec[0].1.f) {
            *m += v / reps as f64;
        }
    }
    let plateau: Vec<f64> = (3..=16).map(|k| (k * k) as f64 * mean[k]).collect();
    let (lo, hi) = plateau
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo < 2.0, "n² f_n ranges over [{lo}, {hi}]");
}
