mod support;

use ffcirc::circuit::{evenly_spaced_sites, sample_disorder};
use ffcirc::{
    correlation_matrix, cross_ratio_periodic, entanglement_entropy, mutual_information,
    squared_correlation_profile, weight_distribution, Boundary, Circuit, CircuitParams, Frame,
    ObserveAt, ProfileGeometry, RenyiIndex, SubsystemSpec,
};
use nalgebra::DVector;
use num_complex::Complex64;
use support::fock::{self, FockSector};

struct Pair {
    frame: Frame<f64>,
    psi: DVector<Complex64>,
    sector: FockSector,
}

fn evolve_both(boundary: Boundary, realization: u64) -> Pair {
    let (l, n) = (8, 4);
    let mut p = CircuitParams::<f64>::new(l, n);
    p.beta = 0.5;
    p.steps = 20;
    p.boundary = boundary;
    p.seed = 2024;
    let frame = Circuit::new(p.clone())
        .unwrap()
        .run(realization, &ObserveAt::Final, |_, f| f.clone())
        .unwrap()
        .pop()
        .unwrap()
        .1;
    let sector = FockSector::new(l, n);
    let mut psi = sector.product_state(&evenly_spaced_sites(l, n));
    for t in 1..=p.steps {
        let d = sample_disorder(&p, realization, t);
        psi = fock::period(&sector, &psi, &d.kappa, &d.lambda, p.tau, p.beta, boundary == Boundary::Periodic);
    }
    Pair { frame, psi, sector }
}

#[test]
fn block_entropies_match_many_body_state() {
    for boundary in [Boundary::Open, Boundary::Periodic] {
        for r in 0..4 {
            let Pair { frame, psi, sector } = evolve_both(boundary, r);
            let c = correlation_matrix(&frame);
            for (start, len) in [(0, 4), (2, 4), (1, 2), (0, 7), (3, 1)] {
                let a = SubsystemSpec::interval(8, boundary, start, len).unwrap();
                let exact = sector.block_entropy(&psi, start, start + len);
                let from_c = entanglement_entropy(&c, &a, RenyiIndex::VonNeumann).unwrap();
                let from_w = entanglement_entropy(&frame, &a, RenyiIndex::VonNeumann).unwrap();
                assert!((from_c - exact).abs() < 1e-7, "{boundary} r={r} [{start},+{len})");
                assert!((from_w - exact).abs() < 1e-7, "{boundary} r={r} [{start},+{len})");
                for n in [2.0, 3.0] {
                    let exact = sector.block_renyi(&psi, start, start + len, n);
                    let got = entanglement_entropy(&c, &a, RenyiIndex::new(n).unwrap()).unwrap();
                    assert!((got - exact).abs() < 1e-7, "n={n} {boundary} r={r}");
                }
            }
        }
    }
}

#[test]
fn adjacent_mutual_information_matches_many_body_state() {
    for boundary in [Boundary::Open, Boundary::Periodic] {
        for r in 0..4 {
            let Pair { frame, psi, sector } = evolve_both(boundary, r);
            for (sa, la, lb) in [(0, 2, 3), (1, 3, 3), (2, 1, 1)] {
                let a = SubsystemSpec::interval(8, boundary, sa, la).unwrap();
                let b = SubsystemSpec::interval(8, boundary, sa + la, lb).unwrap();
                let exact = sector.block_entropy(&psi, sa, sa + la)
                    + sector.block_entropy(&psi, sa + la, sa + la + lb)
                    - sector.block_entropy(&psi, sa, sa + la + lb);
                let got = mutual_information(&frame, &a, &b, RenyiIndex::VonNeumann).unwrap();
                assert!((got - exact).abs() < 1e-7, "{boundary} r={r}");
            }
        }
    }
}

#[test]
fn weight_distribution_of_evolved_state() {
    let Pair { frame, .. } = evolve_both(Boundary::Periodic, 1);
    let c = correlation_matrix(&frame);
    let f = weight_distribution(&c, Boundary::Periodic);
    assert_eq!(f.n_max(), 4);
    assert!((f.total() - 1.0).abs() < 1e-12);
    let ring = squared_correlation_profile(&c, ProfileGeometry::RingAverage);
    // Separations 1..3 appear twice per site on a ring of 8; separation 4 once.
    for r in 1..=3 {
        let expect = f.f[r] * 4.0 / (2.0 * 8.0);
        assert!((ring.at(r).unwrap() - expect).abs() < 1e-12);
    }
}

#[test]
fn cross_ratio_examples() {
    let eta = cross_ratio_periodic(0.0f64, 10.0, 20.0, 30.0, 100.0).unwrap();
    let s = |d: f64| (std::f64::consts::PI * d / 100.0).sin();
    assert!((eta - s(10.0) * s(10.0) / (s(20.0) * s(20.0))).abs() < 1e-14);
    assert!(cross_ratio_periodic(0.0f64, 10.0, 10.0, 30.0, 100.0).is_err());
}
