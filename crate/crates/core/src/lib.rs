//! Simulation and analysis of non-unitary random free-fermion circuits.
//!
//! The state is a Slater determinant stored as an `L×N` frame of
//! orthonormal orbitals. One circuit period applies random ±1 hopping for
//! a unitary time τ and a random 0/1 potential for an imaginary time β.
//!
//! ```
//! use ffcirc::{Circuit, CircuitParams, ObserveAt, correlation_matrix};
//!
//! let mut p = CircuitParams::<f64>::new(16, 8);
//! p.beta = 0.5;
//! p.steps = 10;
//! let circuit = Circuit::new(p).unwrap();
//! let traces = circuit
//!     .run(0, &ObserveAt::Final, |_, f| correlation_matrix(f).trace())
//!     .unwrap();
//! assert!((traces[0].1 - 8.0).abs() < 1e-9);
//! ```

pub mod circuit;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod lightcone;
pub mod linalg;
pub mod master;
pub mod observables;
pub mod scalar;

pub use circuit::{
    brownian_evolve, evolve, nonunitary_step, sample_disorder, unitary_step, Boundary,
    BrownianParams, Circuit, CircuitParams, DisorderStep, Frame, HoppingPropagator, ObserveAt,
    Renormalization,
};
pub use error::{Error, Result};
pub use geometry::{
    elliptic_k, eta_rectangle, jacobi_sn_cn_dn, solve_modulus, strip_and_cylinder_predictions,
    xi_rectangle, Geometry, RectangleMap,
};
pub use fit::{fit_log_log, linear_fit, FitReport};
pub use lightcone::{
    apply_two_site_gate, apply_weak_measurement, light_cone_protocol, mutual_information_14,
    unitary_sequence, SmallState,
};
pub use linalg::CMat;
pub use master::{
    collapse_transform, integrate, master_rhs, master_rhs_direct, steady_state_check, MasterState,
};
pub use observables::{
    correlation_matrix, cross_ratio_periodic, entanglement_entropy, mutual_information,
    squared_correlation_profile, weight_distribution, CorrelationMatrix, CorrelationProfile,
    GaussianState, ProfileGeometry, RenyiIndex, SubsystemSpec, WeightDistribution,
};
pub use scalar::Real;

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Frame64 = Frame<f64>;
pub type Frame32 = Frame<f32>;
pub type CorrelationMatrix64 = CorrelationMatrix<f64>;
pub type CorrelationMatrix32 = CorrelationMatrix<f32>;
pub type CircuitParams64 = CircuitParams<f64>;
pub type Circuit64 = Circuit<f64>;
pub type MasterState64 = MasterState<f64>;
