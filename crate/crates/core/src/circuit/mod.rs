//! Disorder generation and time stepping of the Gaussian state.

mod brownian;
mod disorder;
mod evolve;
mod frame;
mod params;
mod propagator;

pub use brownian::brownian_evolve;
pub use disorder::{sample_disorder, stream, DisorderStep, Purpose};
pub use evolve::{evolve, unitary_step, Circuit, ObserveAt, Renormalization};
pub use frame::{evenly_spaced_sites, nonunitary_step, Frame};
pub use params::{Boundary, BrownianParams, CircuitParams};
pub use propagator::{bessel_j_sequence, HoppingPropagator};
