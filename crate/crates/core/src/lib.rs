//! Secret-key-rate bounds for four-state discrete-modulation CVQKD, with and
//! without a noiseless linear amplifier in front of Bob's homodyne detector.
//!
//! * [`gaussian`]: thermal entropy, two-mode covariance matrices and their
//!   symplectic spectra.
//! * [`fourstate`]: protocol quantities and the plain key rate.
//! * [`nla`]: the equivalent-channel mapping of an amplified run.
//! * [`solvers`]: maximum-loss and maximum-noise frontiers.
//! * [`fock`]: a truncated Fock-space oracle that cross-checks the closed
//!   forms from first principles.

pub mod error;
pub mod fock;
pub mod fourstate;
pub mod gaussian;
pub mod nla;
pub mod solvers;

pub use error::{Error, Result};
pub use fourstate::{
    channel_covariance, correlation_z, holevo_bound, key_rate, lambda_weights, mutual_information, ChannelParams,
    LambdaWeights, ProtocolParams,
};
pub use gaussian::{
    conditional_eigenvalue_v3, entropy_g, symplectic_eigenvalues, HolevoBound, KeyRateBreakdown, RateStatus,
    SymplecticEigenvalues, TwoModeCovariance,
};
pub use nla::{equivalent_channel, g_max, lambda_from_noise, nla_key_rate, EquivalentChannel, NlaParams, SuccessModel};
pub use solvers::{
    distance_to_loss, loss_to_transmittance, max_excess_noise, max_loss, transmittance_to_loss, Diagnostic, FiberModel,
    FrontierResult,
};
