//! Single-photon scattering off a double single-sided cavity with an NV
//! center, and the photonic c-phase / cc-phase gates built on it.
//!
//! The numeric core is generic over [`scalar::Real`] (`f32`, `f64`); the
//! purely algebraic pieces (resonant coefficients, closed-form averages)
//! also accept exact rationals through [`scalar::Field`]. The aliases below
//! fix the scalar to `f64`, which is what the command-line tool uses.
//!
//! ```
//! use cavsim::{metrics, scattering};
//!
//! let c = scattering::resonant_from_rate_ratios(2.0f64, 2.0).unwrap();
//! let (fidelity, efficiency) = metrics::closed_form_cphase(&c.p);
//! assert!((fidelity - 0.9405).abs() < 5e-5);
//! assert!((efficiency - 0.9412).abs() < 5e-5);
//! ```

// `!(x > 0)` is used on purpose so NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod export;
pub mod metrics;
pub mod network;
pub mod oracle;
pub mod presets;
pub mod protocol;
pub mod scalar;
pub mod scattering;
pub mod state;

use thiserror::Error;

pub type Complex = num_complex::Complex<f64>;
pub type Exact = num_rational::BigRational;
pub type Params = scattering::SystemParams<f64>;
pub type Coeffs = scattering::ScatterCoeffs<f64>;
pub type Resonant = scattering::ResonantCoeffs<f64>;
pub type Pulse = oracle::Pulse<f64>;
pub type Trajectory = oracle::AmplitudeTrajectory<f64>;
pub type State = state::StateVector<f64>;
pub type CPhaseSpec = protocol::CPhaseSpec<f64>;
pub type CCPhaseSpec = protocol::CCPhaseSpec<f64>;
pub type Report = protocol::GateReport<f64>;
pub type AngleSpec = metrics::AngleSpec<f64>;
pub type MetricsPoint = metrics::MetricsPoint<f64>;

pub use metrics::SweepTable;
pub use network::NetworkProgram;
pub use presets::Preset;
pub use protocol::Gate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Scatter(#[from] scattering::ScatterError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    State(#[from] state::StateError),
    #[error(transparent)]
    Network(#[from] network::NetworkError),
    #[error(transparent)]
    Exec(#[from] network::ExecError),
    #[error(transparent)]
    Protocol(#[from] protocol::ProtocolError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
