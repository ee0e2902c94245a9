//! Numerical laboratory for entanglement in semiconductor microcavities and
//! driven cavity QED.
//!
//! The core is generic over [`scalar::Real`] (`f32`, `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod combstate;
pub mod dicke;
pub mod error;
pub mod matfun;
pub mod microcavity;
pub mod phasematch;
pub mod scalar;
pub mod witness;

pub use error::{Error, Result};

pub type SymMatrix64 = matfun::SymMatrix<f64>;
pub type HermMatrix64 = matfun::HermMatrix<f64>;
pub type MicrocavityParams64 = microcavity::MicrocavityParams<f64>;
pub type WaveVector2D64 = microcavity::WaveVector2D<f64>;
pub type PairState64 = microcavity::PairState<f64>;
pub type PumpComb64 = phasematch::PumpComb<f64>;
pub type GridSpec64 = phasematch::GridSpec<f64>;
pub type QuadraticForm64 = combstate::QuadraticForm<f64>;
pub type GaussianState64 = combstate::GaussianState<f64>;
pub type WitnessReport64 = witness::WitnessReport<f64>;
pub type DickeParams64 = dicke::DickeParams<f64>;
pub type FloquetBasis64 = dicke::FloquetBasis<f64>;
pub type FloquetDensityMatrix64 = dicke::FloquetDensityMatrix<f64>;
pub type MasterEquation64 = dicke::MasterEquation<f64>;
pub type TwoQubitState64 = dicke::TwoQubitState<f64>;
pub type ExperimentResult64 = dicke::ExperimentResult<f64>;
