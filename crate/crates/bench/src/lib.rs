//! Criterion benchmarks for the key-rate numerics; see `benches/`.

use nlaqkd_core::{ChannelParams, ProtocolParams};

/// The operating point of the loss sweeps: `V_A = 0.25`, `β = 0.8`.
pub fn reference_protocol() -> ProtocolParams {
    ProtocolParams::from_modulation_variance(0.25, 0.8).expect("valid protocol")
}

pub fn reference_channel(loss_db: f64) -> ChannelParams {
    ChannelParams::new(nlaqkd_core::loss_to_transmittance(loss_db), 0.002).expect("valid channel")
}
