//! What a single realization records.

use ffcirc::circuit::{stream, Purpose};
use ffcirc::observables::{entropy_from_spectrum, SPECTRUM_EPS};
use ffcirc::{
    brownian_evolve, correlation_matrix, squared_correlation_profile, weight_distribution, Boundary, Circuit,
    Frame, GaussianState, ObserveAt, ProfileGeometry, RenyiIndex,
};
use rand::Rng;

use crate::config::{BrownianPlan, CircuitPlan};
use crate::table::Table;

/// Interval endpoints `x1 < x2 < x3 < x4` on a ring; `A = [x1, x2)`,
/// `B = [x3, x4)`.
pub type Quadruple = [usize; 4];

/// Samples `count` quadruples uniformly among those whose endpoints are
/// pairwise at least `min_gap` apart along the ring. Depends only on the
/// seed.
pub fn sample_quadruples(sites: usize, count: usize, min_gap: usize, seed: u64) -> Vec<Quadruple> {
    let mut rng = stream(seed, 0, Purpose::Sampling, 0);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut q: Quadruple = [0; 4];
        q.iter_mut().for_each(|x| *x = rng.gen_range(0..sites));
        q.sort_unstable();
        let gaps = [q[1] - q[0], q[2] - q[1], q[3] - q[2], q[0] + sites - q[3]];
        if gaps.iter().all(|&g| g >= min_gap) {
            out.push(q);
        }
    }
    out
}

fn renyi_indices(ns: &[f64]) -> Vec<RenyiIndex> {
    ns.iter().map(|&n| RenyiIndex::new(n).expect("validated")).collect()
}

fn entropies(state: &Frame<f64>, sites: &[usize], idx: &[RenyiIndex]) -> Vec<f64> {
    let spectrum = state.entanglement_spectrum(sites);
    idx.iter().map(|&n| entropy_from_spectrum(&spectrum, n, SPECTRUM_EPS)).collect()
}

fn interval(l: usize, start: usize, len: usize) -> impl Iterator<Item = usize> {
    (start..start + len).map(move |x| x % l)
}

/// `|C_{x,x+r}|²` averaged over the pairs with both ends in the central
/// half `[L/4, 3L/4)` of an open chain, for `r = 1..L/2`. Only the needed
/// block of the correlation matrix is formed.
pub fn bulk_profile(frame: &Frame<f64>) -> Vec<(usize, f64)> {
    let w = frame.orbitals();
    let l = w.rows();
    let (lo, hi) = (l / 4, l / 4 + l / 2);
    let mut sum = vec![0.0; hi - lo];
    for x in lo..hi {
        let a = w.row(x);
        for y in x + 1..hi {
            let (re, im) = a.iter().zip(w.row(y).iter()).fold((0.0, 0.0), |(re, im), (p, q)| {
                (re + p.re * q.re + p.im * q.im, im + p.re * q.im - p.im * q.re)
            });
            sum[y - x] += re * re + im * im;
        }
    }
    (1..hi - lo)
        .map(|r| (r, sum[r] / (hi - lo - r) as f64))
        .collect()
}

fn sorted(it: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = it.collect();
    v.sort_unstable();
    v
}

/// Tables recorded along one circuit trajectory.
///
/// * `entropy` (t, n, l_a): on a ring averaged over `interval_starts`
///   evenly spaced positions, on an open chain the interval `[0, l_a)`.
/// * `correlation` (t, r): ring average of `|C_{x,x+r}|²`, or
///   [`bulk_profile`] on an open chain.
/// * `mutual_information` (t, n, x1, x2, x3, x4): ring quadruples at the
///   last sample step, first `mi_realizations` realizations only.
/// * `edge_mutual_information` (t, n, l_a, l_b): `A = [0, l_a)` and
///   `B = [L − l_b, L)` on an open chain, same realizations.
pub fn circuit_realization(
    plan: &CircuitPlan,
    circuit: &Circuit<f64>,
    quadruples: &[Quadruple],
    realization: u64,
) -> ffcirc::Result<Vec<Table>> {
    let l = plan.sites;
    let idx = renyi_indices(&plan.renyi);
    let boundary = plan.boundary();
    let starts: Vec<usize> = match boundary {
        Boundary::Periodic => (0..plan.interval_starts).map(|k| k * l / plan.interval_starts).collect(),
        Boundary::Open => vec![0],
    };
    let with_mi = (realization as usize) < plan.mi_realizations;
    let last = *plan.sample_steps.last().expect("validated");

    let mut entropy = Table::new("entropy", &["t", "n", "l_a"]);
    let mut correlation = Table::new("correlation", &["t", "r"]);
    let mut mi = Table::new("mutual_information", &["t", "n", "x1", "x2", "x3", "x4"]);
    let mut edge_mi = Table::new("edge_mutual_information", &["t", "n", "l_a", "l_b"]);

    let observe = ObserveAt::Steps(plan.sample_steps.clone());
    circuit.run(realization, &observe, |t, frame| {
        let tf = t as f64;
        for &la in &plan.subsystem_sizes {
            let mut acc = vec![0.0; idx.len()];
            for &s in &starts {
                let e = entropies(frame, &sorted(interval(l, s, la)), &idx);
                acc.iter_mut().zip(e).for_each(|(a, v)| *a += v);
            }
            for (n, a) in plan.renyi.iter().zip(acc) {
                entropy.push(&[tf, *n, la as f64], a / starts.len() as f64);
            }
        }
        let profile = match boundary {
            Boundary::Open => bulk_profile(frame),
            Boundary::Periodic => {
                let p = squared_correlation_profile(&correlation_matrix(frame), ProfileGeometry::RingAverage);
                p.separation.into_iter().zip(p.value).collect()
            }
        };
        for (r, v) in profile {
            correlation.push(&[tf, r as f64], v);
        }
        if !with_mi {
            return;
        }
        if t == last {
            for q in quadruples {
                let a = sorted(interval(l, q[0], q[1] - q[0]));
                let b = sorted(interval(l, q[2], q[3] - q[2]));
                let ab = sorted(a.iter().chain(&b).copied());
                let (sa, sb, sab) = (entropies(frame, &a, &idx), entropies(frame, &b, &idx), entropies(frame, &ab, &idx));
                for (k, n) in plan.renyi.iter().enumerate() {
                    let key = [tf, *n, q[0] as f64, q[1] as f64, q[2] as f64, q[3] as f64];
                    mi.push(&key, sa[k] + sb[k] - sab[k]);
                }
            }
        }
        if boundary == Boundary::Open && !plan.mi_sizes.is_empty() {
            let left: Vec<Vec<f64>> = plan.mi_sizes.iter().map(|&n| entropies(frame, &sorted(0..n), &idx)).collect();
            let right: Vec<Vec<f64>> = plan.mi_sizes.iter().map(|&n| entropies(frame, &sorted(l - n..l), &idx)).collect();
            for (i, &la) in plan.mi_sizes.iter().enumerate() {
                for (j, &lb) in plan.mi_sizes.iter().enumerate() {
                    if la + lb >= l {
                        continue;
                    }
                    let ab: Vec<usize> = (0..la).chain(l - lb..l).collect();
                    let sab = entropies(frame, &ab, &idx);
                    for (k, n) in plan.renyi.iter().enumerate() {
                        edge_mi.push(&[tf, *n, la as f64, lb as f64], left[i][k] + right[j][k] - sab[k]);
                    }
                }
            }
        }
    })?;
    Ok([entropy, correlation, mi, edge_mi]
        .into_iter()
        .filter(|t| !t.rows.is_empty())
        .collect())
}

/// `weights` (t, n): the distribution `f_n` along one Brownian trajectory.
pub fn brownian_realization(plan: &BrownianPlan, seed: u64, realization: u64) -> ffcirc::Result<Vec<Table>> {
    let mut weights = Table::new("weights", &["t", "n"]);
    brownian_evolve(
        plan.sites,
        plan.particles,
        &plan.params(),
        plan.t_end,
        seed,
        realization,
        &plan.sample_times,
        |t, frame| {
            let f = weight_distribution(&correlation_matrix(frame), Boundary::Periodic);
            for (n, v) in f.f.iter().enumerate() {
                weights.push(&[t, n as f64], *v);
            }
        },
    )?;
    Ok(vec![weights])
}
