use ffcirc::linalg::hermitian_eigenvalues;
use ffcirc::{
    apply_weak_measurement, light_cone_protocol, linear_fit, mutual_information_14,
    unitary_sequence, SmallState,
};
use num_complex::Complex64;

fn state_from(terms: &[(&str, f64)]) -> SmallState<f64> {
    let mut amps = [Complex64::new(0.0, 0.0); 16];
    for &(label, a) in terms {
        amps[usize::from_str_radix(label, 2).unwrap()] = Complex64::new(a, 0.0);
    }
    SmallState::from_amplitudes(amps).unwrap()
}

#[test]
fn unitary_gates_leave_ends_uncorrelated() {
    let psi = unitary_sequence::<f64>();
    assert!((psi.norm() - 1.0).abs() < 1e-14);
    assert!(mutual_information_14(&psi).abs() < 1e-12);
    let r = 8f64.sqrt().recip();
    for (label, expect) in [("0101", r), ("1010", r), ("0110", -0.5), ("1001", -0.5)] {
        assert!((psi.amplitude(label).unwrap().re - expect).abs() < 1e-14, "{label}");
    }
    for label in ["0011", "1100"] {
        assert!((psi.amplitude(label).unwrap().norm() - r).abs() < 1e-14, "{label}");
    }
}

#[test]
fn measurement_reweights_occupied_branch() {
    let r = 8f64.sqrt().recip();
    let psi1 = state_from(&[
        ("0101", r),
        ("0011", -r),
        ("1010", r),
        ("1100", r),
        ("0110", -0.5),
        ("1001", -0.5),
    ]);
    let beta = 0.1f64;
    let e = (-beta).exp();
    let expect = state_from(&[
        ("0101", e * r),
        ("0011", -r),
        ("1010", r),
        ("1100", e * r),
        ("0110", -0.5 * e),
        ("1001", -0.5),
    ]);
    let got = apply_weak_measurement(&psi1, 2, beta).unwrap();
    for (a, b) in got.amplitudes().iter().zip(expect.amplitudes()) {
        assert!((a - b).norm() < 1e-14);
    }
    assert_eq!(apply_weak_measurement(&psi1, 2, 0.0).unwrap(), psi1);
}

fn binary_entropy(p: f64) -> f64 {
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

/// Closed form for the protocol: with `x = 1/(1 + e^{2β})`, the pair (1, 4)
/// has spectrum `{x/2, x/2, (1−x)/2, (1−x)/2}` and each end has occupation
/// `x/2 + 1/4`.
fn exact_mutual_information(beta: f64) -> f64 {
    let x = 1.0 / (1.0 + (2.0 * beta).exp());
    2.0 * binary_entropy(x / 2.0 + 0.25) - 2f64.ln() - binary_entropy(x)
}

#[test]
fn protocol_matches_closed_form() {
    for beta in [0.01, 0.1, 0.5, 2.0] {
        let i = mutual_information_14(&light_cone_protocol(beta).unwrap());
        assert!((i - exact_mutual_information(beta)).abs() < 1e-12, "β = {beta}");
    }
}

#[test]
fn small_beta_mutual_information() {
    let beta = 0.01f64;
    let i = mutual_information_14(&light_cone_protocol(beta).unwrap());
    let ratio = i / (beta * beta);
    assert!((ratio * 4.0 - 1.0).abs() < 0.01, "I/β² = {ratio}");
}

#[test]
fn even_in_beta() {
    for k in 1..=10 {
        let beta = 0.01 * k as f64;
        let plus = mutual_information_14(&light_cone_protocol(beta).unwrap());
        let minus = mutual_information_14(&light_cone_protocol(-beta).unwrap());
        assert!((plus - minus).abs() < 1e-12, "β = {beta}");
    }
}

#[test]
fn quadratic_law() {
    let betas: Vec<f64> = (0..10).map(|k| 0.005 + 0.005 * k as f64).collect();
    let x: Vec<f64> = betas.iter().map(|b| b * b).collect();
    let y: Vec<f64> = betas
        .iter()
        .map(|&b| mutual_information_14(&light_cone_protocol(b).unwrap()))
        .collect();
    let fit = linear_fit(&x, &y).unwrap();
    assert!((fit.slope - 0.25).abs() < 1e-3, "{fit:?}");
    // The straight line absorbs the β⁴ term into a small offset.
    assert!(fit.intercept.abs() < 1e-7, "{fit:?}");
    let ratio: Vec<f64> = y.iter().zip(&x).map(|(i, b2)| i / b2).collect();
    let curved = linear_fit(&x, &ratio).unwrap();
    assert!((curved.intercept - 0.25).abs() < 1e-7, "{curved:?}");
    let tiny = mutual_information_14(&light_cone_protocol(1e-6f64).unwrap());
    assert!(tiny.abs() < 1e-10);
}

#[test]
fn reduced_density_matrices_are_states() {
    let psi = light_cone_protocol(0.7f64).unwrap();
    for sites in [&[1][..], &[4], &[1, 4], &[2, 3], &[3, 1, 4]] {
        let rho = psi.reduced_density_matrix(sites).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12 && rho.trace().im.abs() < 1e-12);
        assert!(rho.max_abs_diff(&rho.adjoint()) < 1e-12);
        assert!(hermitian_eigenvalues(&rho).iter().all(|&p| p > -1e-12));
    }
    assert!(psi.reduced_density_matrix(&[1, 1]).is_err());
}
