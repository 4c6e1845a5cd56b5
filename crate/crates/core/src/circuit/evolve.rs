use super::disorder::sample_disorder;
use super::frame::{passes_for_growth, Frame};
use super::params::{Boundary, CircuitParams};
use super::propagator::HoppingPropagator;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// When to restore orthonormality of the frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Renormalization {
    /// After every non-unitary step.
    EveryStep,
    /// Whenever the accumulated row-scaling bound on the condition number
    /// would exceed `exp(max_log_condition)`, and always before observing.
    /// The column span (hence `C`) is the same as with `EveryStep`.
    Adaptive { max_log_condition: f64 },
}

impl Renormalization {
    /// Adaptive with a condition bound of 10⁶.
    pub fn adaptive() -> Self {
        Renormalization::Adaptive {
            max_log_condition: 1e6f64.ln(),
        }
    }
}

impl Default for Renormalization {
    fn default() -> Self {
        Renormalization::EveryStep
    }
}

/// Steps at which the observer runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObserveAt {
    Every,
    Final,
    /// Explicit step indices; 0 is the initial state.
    Steps(Vec<usize>),
}

impl ObserveAt {
    /// Roughly logarithmic grid `1 ..= t_max` with `per_decade` points.
    pub fn log_grid(t_max: usize, per_decade: usize) -> Self {
        let mut steps: Vec<usize> = Vec::new();
        let n = ((t_max as f64).log10() * per_decade as f64).ceil() as usize;
        for i in 0..=n {
            let t = 10f64.powf(i as f64 / per_decade as f64).round() as usize;
            let t = t.clamp(1, t_max);
            if steps.last() != Some(&t) {
                steps.push(t);
            }
        }
        if steps.last() != Some(&t_max) {
            steps.push(t_max);
        }
        ObserveAt::Steps(steps)
    }

    fn mask(&self, t_max: usize) -> Result<Vec<bool>> {
        let mut m = vec![false; t_max + 1];
        match self {
            ObserveAt::Every => m[1..].iter_mut().for_each(|v| *v = true),
            ObserveAt::Final => m[t_max] = true,
            ObserveAt::Steps(steps) => {
                for &s in steps {
                    if s > t_max {
                        return Err(Error::invalid(format!(
                            "observation step {s} beyond horizon {t_max}"
                        )));
                    }
                    m[s] = true;
                }
            }
        }
        Ok(m)
    }
}

/// `exp(−2iτh₁)·W` with hoppings `kappa`.
///
/// Builds a propagator for a single use; loops should hold a
/// [`HoppingPropagator`] or a [`Circuit`] instead.
pub fn unitary_step<T: Real>(
    frame: &Frame<T>,
    kappa: &[T],
    tau: T,
    boundary: Boundary,
) -> Result<Frame<T>> {
    if tau == T::zero() {
        if kappa.len() != frame.sites() {
            return Err(Error::DimensionMismatch {
                expected: frame.sites(),
                got: kappa.len(),
            });
        }
        return Ok(frame.clone());
    }
    let prop = HoppingPropagator::new(frame.sites(), tau, boundary)?;
    Ok(Frame::from_raw(prop.apply(frame.orbitals(), kappa)?))
}

/// A validated circuit with its cached propagator. Shareable across
/// threads; each trajectory owns its own frame.
#[derive(Clone, Debug)]
pub struct Circuit<T> {
    params: CircuitParams<T>,
    propagator: HoppingPropagator<T>,
    renormalization: Renormalization,
}

impl<T: Real> Circuit<T> {
    pub fn new(params: CircuitParams<T>) -> Result<Self> {
        params.validate()?;
        let propagator = HoppingPropagator::new(params.sites, params.tau, params.boundary)?;
        Ok(Self {
            params,
            propagator,
            renormalization: Renormalization::default(),
        })
    }

    pub fn with_renormalization(mut self, r: Renormalization) -> Self {
        self.renormalization = r;
        self
    }

    pub fn params(&self) -> &CircuitParams<T> {
        &self.params
    }

    pub fn initial_frame(&self) -> Frame<T> {
        Frame::neel(self.params.sites, self.params.particles).expect("validated params")
    }

    /// Applies period `t` of realization `realization` in place and
    /// renormalizes.
    pub fn step(&self, frame: &mut Frame<T>, realization: u64, t: usize) -> Result<()> {
        let log_growth = self.apply_period(frame, realization, t)?;
        if log_growth > 0.0 {
            frame
                .renormalize(passes_for_growth(log_growth))
                .map_err(|e| e.at_step(t))?;
        }
        Ok(())
    }

    /// Unitary then imaginary-time step without renormalization. Returns
    /// the log of the condition-number bound added by the row scaling.
    fn apply_period(&self, frame: &mut Frame<T>, realization: u64, t: usize) -> Result<f64> {
        let d = sample_disorder(&self.params, realization, t);
        let w = self.propagator.apply(frame.orbitals(), &d.kappa)?;
        *frame.orbitals_mut() = w;
        let beta = self.params.beta;
        if beta == T::zero() {
            return Ok(0.0);
        }
        let first = d.lambda[0];
        if d.lambda.iter().all(|&l| l == first) {
            // Uniform damping only rescales; the span is unchanged.
            return Ok(0.0);
        }
        frame.scale_rows(&d.lambda, beta);
        Ok(2.0 * beta.to_f64_lossy())
    }

    /// Runs realization `realization` from the initial state through the
    /// horizon, calling `observer(t, frame)` at the requested steps.
    pub fn run<R>(
        &self,
        realization: u64,
        observe: &ObserveAt,
        mut observer: impl FnMut(usize, &Frame<T>) -> R,
    ) -> Result<Vec<(usize, R)>> {
        self.run_from(self.initial_frame(), realization, observe, &mut observer)
    }

    /// As [`Circuit::run`] from an arbitrary starting frame.
    pub fn run_from<R>(
        &self,
        mut frame: Frame<T>,
        realization: u64,
        observe: &ObserveAt,
        mut observer: impl FnMut(usize, &Frame<T>) -> R,
    ) -> Result<Vec<(usize, R)>> {
        if frame.sites() != self.params.sites {
            return Err(Error::DimensionMismatch {
                expected: self.params.sites,
                got: frame.sites(),
            });
        }
        let t_max = self.params.steps;
        let mask = observe.mask(t_max)?;
        let mut records = Vec::new();
        if mask[0] {
            records.push((0, observer(0, &frame)));
        }
        let limit = match self.renormalization {
            Renormalization::EveryStep => 0.0,
            Renormalization::Adaptive { max_log_condition } => max_log_condition,
        };
        let next = 2.0 * self.params.beta.to_f64_lossy();
        let mut pending = 0.0;
        for t in 1..=t_max {
            pending += self.apply_period(&mut frame, realization, t)?;
            let must = mask[t] || pending + next > limit;
            if pending > 0.0 && must {
                frame
                    .renormalize(passes_for_growth(pending))
                    .map_err(|e| e.at_step(t))?;
                pending = 0.0;
            }
            if mask[t] {
                records.push((t, observer(t, &frame)));
            }
        }
        Ok(records)
    }
}

/// Runs one realization of `params` with per-step renormalization.
pub fn evolve<T: Real, R>(
    params: &CircuitParams<T>,
    realization: u64,
    observe: &ObserveAt,
    observer: impl FnMut(usize, &Frame<T>) -> R,
) -> Result<Vec<(usize, R)>> {
    Circuit::new(params.clone())?.run(realization, observe, observer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_is_increasing_and_ends_at_horizon() {
        let ObserveAt::Steps(s) = ObserveAt::log_grid(1000, 5) else {
            unreachable!()
        };
        assert_eq!(s[0], 1);
        assert_eq!(*s.last().unwrap(), 1000);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn observation_beyond_horizon_is_rejected() {
        let mut p = CircuitParams::<f64>::new(8, 4);
        p.steps = 3;
        let r = evolve(&p, 0, &ObserveAt::Steps(vec![4]), |_, _| ());
        assert!(r.is_err());
    }

    #[test]
    fn schedules_agree() {
        let mut p = CircuitParams::<f64>::new(24, 12);
        p.beta = 0.7;
        p.steps = 40;
        p.seed = 9;
        let proj = |_: usize, f: &Frame<f64>| f.orbitals().mul_adjoint(f.orbitals());
        let a = Circuit::new(p.clone()).unwrap();
        let b = Circuit::new(p).unwrap().with_renormalization(Renormalization::adaptive());
        let obs = ObserveAt::Steps(vec![5, 17, 40]);
        let ra = a.run(3, &obs, proj).unwrap();
        let rb = b.run(3, &obs, proj).unwrap();
        for ((ta, ca), (tb, cb)) in ra.iter().zip(&rb) {
            assert_eq!(ta, tb);
            assert!(ca.max_abs_diff(cb) < 1e-10, "t = {ta}");
        }
    }
}
