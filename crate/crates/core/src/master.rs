//! Nonlinear master equation for the distribution `f_n(t)` of squared
//! correlations at separation `n`.
//!
//! ```text
//! df_n/dt = μ δ_{n,1} + θ (f_{n+1} + f_{n−1} − 2 f_n) − 2 f_n Σ_m f_m
//!           + Σ_m f_m f_{m+n} + ½ Σ_{m=1}^{n−1} f_m f_{n−m}
//! ```
//!
//! with `f_0` excluded, `f_{n_max+1} = 0` and every sum truncated at `n_max`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fit::{fit_log_log, FitReport};
use crate::scalar::Real;

/// Values above this abort the integration.
pub const DIVERGENCE_THRESHOLD: f64 = 1e3;

#[derive(Clone, Debug, PartialEq)]
pub struct MasterState<T> {
    /// `f[k]` holds `f_{k+1}`.
    pub f: Vec<T>,
    pub t: T,
    pub mu: T,
    pub theta: T,
    /// Number of negative entries reset to zero so far.
    pub clipped: usize,
    /// Most negative value seen before clipping (0 if none).
    pub worst_undershoot: T,
}

impl<T: Real> MasterState<T> {
    /// `f ≡ 0` at `t = 0`.
    pub fn new(n_max: usize, mu: T, theta: T) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::invalid("n_max must be at least 2"));
        }
        if !(mu >= T::zero() && theta >= T::zero()) {
            return Err(Error::invalid("μ and θ must be non-negative"));
        }
        Ok(Self {
            f: vec![T::zero(); n_max],
            t: T::zero(),
            mu,
            theta,
            clipped: 0,
            worst_undershoot: T::zero(),
        })
    }

    pub fn n_max(&self) -> usize {
        self.f.len()
    }

    /// `f_n` for `n ≥ 1`; zero outside `1..=n_max`.
    pub fn get(&self, n: usize) -> T {
        if n == 0 {
            T::zero()
        } else {
            self.f.get(n - 1).copied().unwrap_or_else(T::zero)
        }
    }

    pub fn total(&self) -> T {
        self.f.iter().copied().fold(T::zero(), |a, b| a + b)
    }

    fn validate(&self) -> Result<()> {
        if self.f.len() < 2 {
            return Err(Error::invalid("n_max must be at least 2"));
        }
        if !(self.mu >= T::zero() && self.theta >= T::zero()) {
            return Err(Error::invalid("μ and θ must be non-negative"));
        }
        Ok(())
    }
}

/// Evaluates the right-hand side with one complex FFT pair: the inverse
/// transform of `F² + i|F|²` carries the convolution in its real part and
/// the autocorrelation in its imaginary part.
struct Rhs<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> Rhs<T> {
    fn new(n_max: usize) -> Self {
        let len = (2 * (n_max + 1)).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            buf: vec![Complex::default(); len],
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    fn eval(&mut self, f: &[T], mu: T, theta: T, out: &mut [T]) {
        let n_max = f.len();
        let len = self.buf.len();
        self.buf.fill(Complex::default());
        for (b, &v) in self.buf[1..=n_max].iter_mut().zip(f) {
            b.re = v;
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        for z in self.buf.iter_mut() {
            *z = *z * *z + Complex::new(T::zero(), z.norm_sqr());
        }
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        let norm = T::of_usize(len).recip();
        let total = f.iter().copied().fold(T::zero(), |a, b| a + b);
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        for (k, o) in out.iter_mut().enumerate() {
            let n = k + 1;
            let fn_ = f[k];
            let prev = if k > 0 { f[k - 1] } else { T::zero() };
            let next = if n < n_max { f[k + 1] } else { T::zero() };
            let y = self.buf[n];
            *o = theta * (next + prev - two * fn_) - two * fn_ * total
                + y.im * norm
                + half * y.re * norm;
        }
        out[0] += mu;
    }
}

/// `df_n/dt` for every `n = 1..=n_max`, evaluated in `O(n_max log n_max)`.
pub fn master_rhs<T: Real>(state: &MasterState<T>) -> Vec<T> {
    let mut out = vec![T::zero(); state.n_max()];
    Rhs::new(state.n_max()).eval(&state.f, state.mu, state.theta, &mut out);
    out
}

/// Reference `O(n_max²)` evaluation of [`master_rhs`] by explicit loops.
pub fn master_rhs_direct<T: Real>(state: &MasterState<T>) -> Vec<T> {
    let n_max = state.n_max();
    let f = |n: usize| state.get(n);
    let total = state.total();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    (1..=n_max)
        .map(|n| {
            let mut d = state.theta * (f(n + 1) + f(n - 1) - two * f(n)) - two * f(n) * total;
            for m in 1..=n_max - n {
                d += f(m) * f(m + n);
            }
            for m in 1..n {
                d += half * f(m) * f(n - m);
            }
            if n == 1 {
                d += state.mu;
            }
            d
        })
        .collect()
}

/// Classic fourth-order Runge–Kutta with fixed `dt` from `state.t` to
/// `t_end`. A snapshot is taken at the grid time nearest to each entry of
/// `sample_times` (sorted order). Negative entries are reset to zero after
/// each step and counted in `clipped`.
pub fn integrate<T: Real>(
    mut state: MasterState<T>,
    dt: T,
    t_end: T,
    sample_times: &[T],
) -> Result<Vec<MasterState<T>>> {
    state.validate()?;
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(Error::invalid("dt must be positive"));
    }
    if !(t_end >= state.t) {
        return Err(Error::invalid("t_end precedes the current time"));
    }
    let t0 = state.t;
    let steps = ((t_end - t0) / dt).round().to_usize().unwrap_or(0);
    let mut wanted: Vec<usize> = sample_times
        .iter()
        .map(|&s| {
            ((s - t0) / dt)
                .round()
                .max(T::zero())
                .to_usize()
                .unwrap_or(0)
                .min(steps)
        })
        .collect();
    wanted.sort_unstable();

    let n = state.n_max();
    let mut rhs = Rhs::new(n);
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut tmp = vec![T::zero(); n];
    let half = T::lit(0.5);
    let sixth = dt / T::lit(6.0);
    let limit = T::lit(DIVERGENCE_THRESHOLD);
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut next = wanted.iter().peekable();

    for step in 0..=steps {
        if step > 0 {
            let (mu, theta) = (state.mu, state.theta);
            rhs.eval(&state.f, mu, theta, &mut k1);
            for ((t, f), k) in tmp.iter_mut().zip(&state.f).zip(&k1) {
                *t = *f + half * dt * *k;
            }
            rhs.eval(&tmp, mu, theta, &mut k2);
            for ((t, f), k) in tmp.iter_mut().zip(&state.f).zip(&k2) {
                *t = *f + half * dt * *k;
            }
            rhs.eval(&tmp, mu, theta, &mut k3);
            for ((t, f), k) in tmp.iter_mut().zip(&state.f).zip(&k3) {
                *t = *f + dt * *k;
            }
            rhs.eval(&tmp, mu, theta, &mut k4);
            let mut max = T::zero();
            for (i, f) in state.f.iter_mut().enumerate() {
                *f += sixth * (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]);
                if *f < T::zero() {
                    state.worst_undershoot = state.worst_undershoot.min(*f);
                    state.clipped += 1;
                    *f = T::zero();
                }
                if !(*f <= max) {
                    max = *f;
                }
            }
            state.t = t0 + dt * T::of_usize(step);
            if !(max <= limit) {
                return Err(Error::Divergence {
                    t: state.t.to_f64_lossy(),
                    max_value: max.to_f64_lossy(),
                });
            }
        }
        while next.peek() == Some(&&step) {
            snapshots.push(state.clone());
            next.next();
        }
    }
    Ok(snapshots)
}

/// Pairs `(n/t, t²·f_n)` for `n = 1..=n_max`.
pub fn collapse_transform<T: Real>(snapshot: &MasterState<T>) -> Result<Vec<(T, T)>> {
    let t = snapshot.t;
    if !(t > T::zero()) {
        return Err(Error::invalid("collapse needs t > 0"));
    }
    Ok(snapshot
        .f
        .iter()
        .enumerate()
        .map(|(k, &f)| (T::of_usize(k + 1) / t, t * t * f))
        .collect())
}

/// Fits `log f_n` against `log n` over `n ∈ [5, min(t, n_max/4)]`.
pub fn steady_state_check<T: Real>(snapshot: &MasterState<T>) -> Result<FitReport> {
    let upper = snapshot
        .t
        .to_f64_lossy()
        .floor()
        .min((snapshot.n_max() / 4) as f64);
    if upper < 7.0 {
        return Err(Error::InsufficientData(format!(
            "window [5, {upper}] too short for a power-law fit"
        )));
    }
    let hi = upper as usize;
    let xs: Vec<f64> = (5..=hi).map(|n| n as f64).collect();
    let ys: Vec<f64> = (5..=hi).map(|n| snapshot.get(n).to_f64_lossy()).collect();
    fit_log_log(&xs, &ys, (5.0, upper))
}
