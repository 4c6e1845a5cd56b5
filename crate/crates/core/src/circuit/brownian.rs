use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::disorder::{stream, Purpose};
use super::frame::Frame;
use super::params::BrownianParams;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::Real;

/// One increment `W ← (1 + X + X²/2)·W` with
/// `X = −i·h_hop − diag(dW′)` on a periodic chain.
fn brownian_increment<T: Real, R: Rng>(w: &CMat<T>, bp: &BrownianParams<T>, rng: &mut R) -> CMat<T> {
    let l = w.rows();
    let hop_sd = (bp.a * bp.dt * T::lit(0.5)).sqrt();
    let site_sd = (bp.b * bp.dt).sqrt();
    // dw[j]: amplitude of c†_{j+1} c_j
    let dw: Vec<Complex<T>> = (0..l)
        .map(|_| {
            let (g1, g2): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            Complex::new(T::lit(g1), T::lit(g2)) * hop_sd
        })
        .collect();
    let dv: Vec<T> = (0..l)
        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)) * site_sd)
        .collect();
    let minus_i = Complex::new(T::zero(), -T::one());
    let apply = |v: &CMat<T>| -> CMat<T> {
        let mut out = CMat::zeros(l, v.cols());
        for x in 0..l {
            let (up, down) = ((x + 1) % l, (x + l - 1) % l);
            // (h v)_x = dW_{x−1} v_{x−1} + conj(dW_x) v_{x+1}
            let a = minus_i * dw[down];
            let b = minus_i * dw[x].conj();
            let d = -dv[x];
            let (vd, vu, vx) = (v.row(down), v.row(up), v.row(x));
            for (k, o) in out.row_mut(x).iter_mut().enumerate() {
                *o = a * vd[k] + b * vu[k] + vx[k].scale(d);
            }
        }
        out
    };
    let xw = apply(w);
    let xxw = apply(&xw);
    let half = T::lit(0.5);
    let mut next = w.clone();
    for ((n, a), b) in next.as_mut_slice().iter_mut().zip(xw.as_slice()).zip(xxw.as_slice()) {
        *n += *a + b.scale(half);
    }
    next
}

/// Continuous-time Brownian evolution of the evenly spaced product state on
/// a periodic chain until `t_end`. `observer(t, frame)` runs at the grid
/// step nearest to each entry of `sample_times`.
#[allow(clippy::too_many_arguments)]
pub fn brownian_evolve<T: Real, R>(
    sites: usize,
    particles: usize,
    bp: &BrownianParams<T>,
    t_end: T,
    seed: u64,
    realization: u64,
    sample_times: &[T],
    mut observer: impl FnMut(T, &Frame<T>) -> R,
) -> Result<Vec<(T, R)>> {
    bp.validate()?;
    if !(t_end >= T::zero()) {
        return Err(Error::invalid("t_end must be non-negative"));
    }
    let mut frame = Frame::neel(sites, particles)?;
    let steps = (t_end / bp.dt).round().to_usize().unwrap_or(0);
    let mut wanted: Vec<(usize, usize)> = sample_times
        .iter()
        .enumerate()
        .map(|(i, &s)| ((s / bp.dt).round().to_usize().unwrap_or(0).min(steps), i))
        .collect();
    wanted.sort_unstable();
    let mut records = Vec::with_capacity(wanted.len());
    let mut next = wanted.iter().peekable();
    let mut rng = stream(seed, realization, Purpose::Brownian, 0);
    for step in 0..=steps {
        if step > 0 {
            let w = brownian_increment(frame.orbitals(), bp, &mut rng);
            *frame.orbitals_mut() = w;
            frame.renormalize(1).map_err(|e| e.at_step(step))?;
        }
        while let Some(&&(s, _)) = next.peek() {
            if s != step {
                break;
            }
            records.push((bp.dt * T::of_usize(step), observer(bp.dt * T::of_usize(step), &frame)));
            next.next();
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshots_land_on_grid() {
        let bp = BrownianParams {
            a: 1.0,
            b: 1.0,
            dt: 0.01,
        };
        let rec = brownian_evolve(8, 4, &bp, 0.1, 1, 0, &[0.0, 0.05, 0.1], |t, _| t).unwrap();
        let ts: Vec<f64> = rec.iter().map(|r| r.0).collect();
        assert_eq!(ts.len(), 3);
        assert!((ts[1] - 0.05).abs() < 1e-12 && (ts[2] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_noise() {
        let bp = BrownianParams {
            a: -1.0,
            b: 1.0,
            dt: 0.01,
        };
        assert!(brownian_evolve(8, 4, &bp, 1.0, 1, 0, &[], |_, _| ()).is_err());
    }
}
