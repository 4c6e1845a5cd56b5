use ffcirc::{integrate, master_rhs, master_rhs_direct, steady_state_check, MasterState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run(n_max: usize, theta: f64, dt: f64, t: f64) -> MasterState<f64> {
    let s = MasterState::new(n_max, 1.0, theta).unwrap();
    integrate(s, dt, t, &[t]).unwrap().pop().unwrap()
}

#[test]
fn fft_rhs_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n_max in [2, 3, 64, 257, 1000] {
        let mut s = MasterState::new(n_max, rng.gen_range(0.0..2.0), rng.gen_range(0.0..5.0)).unwrap();
        for (k, f) in s.f.iter_mut().enumerate() {
            *f = rng.gen::<f64>() / (1.0 + k as f64);
        }
        let err = master_rhs(&s)
            .iter()
            .zip(master_rhs_direct(&s))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "n_max = {n_max}: {err:e}");
    }
}

#[test]
fn fourth_order_convergence() {
    for theta in [0.0, 1.0] {
        let reference = run(60, theta, 0.0125, 4.0);
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&dt| {
                let s = run(60, theta, dt, 4.0);
                s.f.iter()
                    .zip(&reference.f)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 4.0).abs() < 0.3, "θ = {theta}: order {order}");
        }
    }
}

#[test]
fn step_halving() {
    let a = run(60, 0.0, 0.01, 4.0);
    let b = run(60, 0.0, 0.005, 4.0);
    let rel = (0..60)
        .filter(|&k| b.f[k] > 1e-12)
        .map(|k| ((a.f[k] - b.f[k]) / b.f[k]).abs())
        .fold(0.0, f64::max);
    assert!(rel < 1e-6, "{rel:e}");
}

#[test]
fn truncation_robustness() {
    let n_max = 400;
    let t = (n_max / 8) as f64;
    let a = run(n_max, 0.0, 0.01, t);
    let b = run(2 * n_max, 0.0, 0.01, t);
    let rel = (1..=n_max / 4)
        .map(|n| ((a.get(n) - b.get(n)) / b.get(n)).abs())
        .fold(0.0, f64::max);
    assert!(rel < 1e-6, "{rel:e}");
}

#[test]
fn positivity_and_saturation() {
    let s = MasterState::new(300, 1.0f64, 0.0).unwrap();
    let snaps = integrate(s, 0.01, 80.0, &[40.0, 80.0]).unwrap();
    for snap in &snaps {
        assert!(snap.worst_undershoot > -1e-12);
        assert!(snap.f.iter().all(|&v| v >= 0.0));
    }
    let (s40, s80) = (snaps[0].total(), snaps[1].total());
    assert!(((s80 - s40) / s80).abs() < 1e-2);
}

#[test]
fn hopping_does_not_change_the_tail_exponent() {
    for theta in [0.0, 5.0] {
        let s = run(400, theta, 0.01, 100.0);
        let fit = steady_state_check(&s).unwrap();
        assert!((fit.slope + 2.0).abs() < 0.15, "θ = {theta}: {fit:?}");
    }
}
