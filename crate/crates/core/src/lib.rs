//! Optimal unambiguous discrimination of symmetric pure states.
//!
//! The crate builds the optimal POVM for `N` equiprobable symmetric states,
//! compiles it to a linear-optical netlist (wave plates, polarizing and 50:50
//! beam splitters, phase shifters), simulates that netlist for a single
//! photon, and runs Monte-Carlo photon-counting experiments with imperfect
//! elements.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar.

pub mod discrimination;
pub mod error;
pub mod linalg;
pub mod optics;
pub mod scalar;
pub mod sim;
pub mod states;
pub mod verify;

pub use discrimination::{
    apply_protocol, apply_protocol_all, build_povm, conditional_unitary, detection_operators,
    failure_operator, failure_rank, fourier, idp_probability, inverse_fourier, optimal_probability,
    success_operator, verify_completeness, ConditionalUnitary, Povm, ProtocolOutcome,
};
pub use error::{Error, Result};
pub use linalg::{CMatrix, StateVector};
pub use optics::{compile_full, count_components, ComponentCount, Element, OpticalNetlist, Stage};
pub use scalar::Real;
pub use sim::{run_trials, SimConfig, SimReport};
pub use states::{
    angles_from_coefficients, build_family, coefficients_from_angles, AngleVector,
    CoefficientVector, Dimension, SymmetricFamily,
};

pub type AngleVector64 = AngleVector<f64>;
pub type CoefficientVector64 = CoefficientVector<f64>;
pub type SymmetricFamily64 = SymmetricFamily<f64>;
pub type Povm64 = Povm<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type StateVector64 = StateVector<f64>;
pub type OpticalNetlist64 = OpticalNetlist<f64>;

pub type AngleVector32 = AngleVector<f32>;
pub type CoefficientVector32 = CoefficientVector<f32>;
pub type SymmetricFamily32 = SymmetricFamily<f32>;
pub type Povm32 = Povm<f32>;
pub type CMatrix32 = CMatrix<f32>;
pub type StateVector32 = StateVector<f32>;
pub type OpticalNetlist32 = OpticalNetlist<f32>;
