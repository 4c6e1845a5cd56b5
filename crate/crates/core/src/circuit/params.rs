use crate::error::{Error, Result};
use crate::scalar::Real;

/// Boundary condition of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

impl Boundary {
    /// Number of hopping bonds on a chain of `sites` sites.
    pub fn bonds(self, sites: usize) -> usize {
        match self {
            Boundary::Open => sites.saturating_sub(1),
            Boundary::Periodic => sites,
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" | "obc" => Ok(Boundary::Open),
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            other => Err(Error::invalid(format!("unknown boundary `{other}`"))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

/// Full configuration of one discrete-time circuit.
///
/// One period applies `exp(−2iτH₁)` (random ±1 hopping) followed by
/// `exp(−2βH₂)` (random 0/1 on-site potential) and renormalization.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitParams<T> {
    pub sites: usize,
    pub particles: usize,
    /// Unitary time unit.
    pub tau: T,
    /// Imaginary time unit.
    pub beta: T,
    /// Probability that a hopping amplitude is +1.
    pub p1: f64,
    /// Probability that a site carries the potential.
    pub p2: f64,
    pub boundary: Boundary,
    /// Number of periods to apply.
    pub steps: usize,
    pub seed: u64,
}

impl<T: Real> CircuitParams<T> {
    /// Defaults: τ = 1, β = 0, p₁ = p₂ = ½, periodic, one step, seed 0.
    pub fn new(sites: usize, particles: usize) -> Self {
        Self {
            sites,
            particles,
            tau: T::one(),
            beta: T::zero(),
            p1: 0.5,
            p2: 0.5,
            boundary: Boundary::Periodic,
            steps: 1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::invalid("at least two sites are required"));
        }
        if self.particles == 0 || self.particles >= self.sites {
            return Err(Error::invalid(format!(
                "particle count must satisfy 0 < N < L (N = {}, L = {})",
                self.particles, self.sites
            )));
        }
        if !(self.tau > T::zero()) {
            return Err(Error::invalid("tau must be positive"));
        }
        if !(self.beta >= T::zero()) {
            return Err(Error::invalid("beta must be non-negative"));
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.steps == 0 {
            return Err(Error::invalid("step horizon must be positive"));
        }
        Ok(())
    }

    pub fn filling(&self) -> f64 {
        self.particles as f64 / self.sites as f64
    }
}

/// Noise strengths of the continuous-time Brownian model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrownianParams<T> {
    /// Hopping noise strength, `E|dW|² = A dt`. Zero disables hopping.
    pub a: T,
    /// On-site imaginary noise strength, `E dW'² = B dt`.
    pub b: T,
    pub dt: T,
}

impl<T: Real> BrownianParams<T> {
    /// Uses the default increment `dt = 0.01 / max(A, B)`.
    pub fn new(a: T, b: T) -> Self {
        let scale = a.max(b);
        let dt = if scale > T::zero() {
            T::lit(0.01) / scale
        } else {
            T::lit(0.01)
        };
        Self { a, b, dt }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= T::zero()) || !(self.b >= T::zero()) {
            return Err(Error::invalid("noise strengths must be non-negative"));
        }
        if !(self.dt > T::zero()) {
            return Err(Error::invalid("dt must be positive"));
        }
        Ok(())
    }
}
