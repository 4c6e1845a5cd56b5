use ffcirc::geometry::aspect_ratio;
use ffcirc::observables::entropy_from_spectrum;
use ffcirc::{
    correlation_matrix, entanglement_entropy, jacobi_sn_cn_dn, master_rhs, master_rhs_direct,
    solve_modulus, weight_distribution, Boundary, Circuit, CircuitParams, Error, MasterState,
    ObserveAt, RenyiIndex, SubsystemSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Open), Just(Boundary::Periodic)]
}

fn final_state(
    l: usize,
    n: usize,
    beta: f64,
    steps: usize,
    boundary: Boundary,
    seed: u64,
) -> ffcirc::Frame<f64> {
    let mut p = CircuitParams::new(l, n);
    p.beta = beta;
    p.steps = steps;
    p.boundary = boundary;
    p.seed = seed;
    Circuit::new(p)
        .unwrap()
        .run(0, &ObserveAt::Final, |_, f| f.clone())
        .unwrap()
        .pop()
        .unwrap()
        .1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_keeps_a_projector(
        l in 4usize..40,
        fill in 0.1f64..0.9,
        beta in 0.0f64..2.0,
        steps in 1usize..40,
        b in boundary(),
        seed in any::<u64>(),
    ) {
        let n = ((l as f64 * fill).round() as usize).clamp(1, l - 1);
        let frame = final_state(l, n, beta, steps, b, seed);
        prop_assert!(frame.orthonormality_error() < 1e-10);
        let c = correlation_matrix(&frame);
        prop_assert!((c.trace() - n as f64).abs() < 1e-9);
        prop_assert!(c.projector_error() < 1e-9);
        prop_assert!(c.hermiticity_error() < 1e-12);
        prop_assert!((weight_distribution(&c, b).total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_state_entropy_is_symmetric(
        l in 6usize..30,
        beta in 0.1f64..1.5,
        start in 0usize..30,
        len in 1usize..29,
        seed in any::<u64>(),
    ) {
        let len = len.min(l - 1);
        let start = start % l;
        let frame = final_state(l, l / 2, beta, 30, Boundary::Periodic, seed);
        let a = SubsystemSpec::interval(l, Boundary::Periodic, start, len).unwrap();
        let rest = SubsystemSpec::interval(l, Boundary::Periodic, (start + len) % l, l - len).unwrap();
        for n in [1.0, 2.0, 3.5] {
            let idx = RenyiIndex::new(n).unwrap();
            let sa = entanglement_entropy(&frame, &a, idx).unwrap();
            let sb = entanglement_entropy(&frame, &rest, idx).unwrap();
            prop_assert!((sa - sb).abs() < 1e-9, "n={} {} {}", n, sa, sb);
        }
    }

    #[test]
    fn renyi_entropies_decrease_with_index(
        spectrum in prop::collection::vec(0.0f64..1.0, 1..20),
    ) {
        let mut last = f64::INFINITY;
        for n in [0.5, 1.0, 2.0, 3.0, 10.0] {
            let s = entropy_from_spectrum(&spectrum, RenyiIndex::new(n).unwrap(), 1e-12);
            prop_assert!(s >= 0.0 && s <= last + 1e-12);
            last = s;
        }
    }

    #[test]
    fn clamped_modes_do_not_contribute(
        spectrum in prop::collection::vec(0.01f64..0.99, 1..10),
        extra in prop::collection::vec(prop_oneof![0.0f64..1e-13, (1.0 - 1e-13)..1.0f64], 0..5),
    ) {
        let mut padded = spectrum.clone();
        padded.extend(&extra);
        for idx in [RenyiIndex::VonNeumann, RenyiIndex::Renyi(2.0)] {
            let a = entropy_from_spectrum(&spectrum, idx, 1e-12);
            let b = entropy_from_spectrum(&padded, idx, 1e-12);
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn jacobi_identities(
        m in 0.001f64..0.999,
        x in -5.0f64..5.0,
        y in -5.0f64..5.0,
    ) {
        match jacobi_sn_cn_dn(Complex64::new(x, y), m) {
            Ok((sn, cn, dn)) => {
                let scale = 1.0 + sn.norm_sqr();
                prop_assert!((sn * sn + cn * cn - 1.0).norm() < 1e-10 * scale);
                prop_assert!((sn * sn * m + dn * dn - 1.0).norm() < 1e-10 * scale);
            }
            Err(Error::PoleProximity { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn modulus_inverts_aspect_ratio(m in 0.001f64..0.999) {
        let back = solve_modulus(aspect_ratio(m).unwrap()).unwrap();
        prop_assert!((back - m).abs() < 1e-10);
    }

    #[test]
    fn master_rhs_oracle(
        f in prop::collection::vec(0.0f64..1.0, 2..120),
        mu in 0.0f64..3.0,
        theta in 0.0f64..5.0,
    ) {
        let mut s = MasterState::new(f.len(), mu, theta).unwrap();
        s.f = f;
        let err = master_rhs(&s)
            .iter()
            .zip(master_rhs_direct(&s))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        prop_assert!(err < 1e-12, "{:e}", err);
    }
}
