//! Noiseless linear amplification on Bob's side.
//!
//! A successful `g^n̂` event on the channel output is equivalent to running
//! the unamplified protocol over a fictitious channel `(η, ε^g)` with the
//! same Alice amplitude:
//!
//! ```text
//! η   = 4 g² T / [2 + (1 - g²) T ε]²
//! ε^g = ε - ½ (g² - 1) T ε²
//! ```
//!
//! The mapping is physical only while `η <= 1` and `ε^g >= 0`, which caps
//! the gain at [`g_max`].

use crate::error::{check_finite, Error, Result};
use crate::fourstate::{key_rate, ChannelParams, ProtocolParams};
use crate::gaussian::{KeyRateBreakdown, RateStatus};

/// Slack allowed on `η <= 1` and `g <= g_max` before a mapping is called
/// unphysical. Covers rounding exactly at the boundary.
const BOUNDARY_SLACK: f64 = 1e-12;

/// How the heralding probability of the amplifier is modelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessModel {
    /// `P = 1/g²`, the upper bound for an ideal amplifier.
    InverseGainSquared,
    /// A fixed probability in `(0, 1]`.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlaParams {
    gain: f64,
    success_model: SuccessModel,
}

impl NlaParams {
    pub fn new(gain: f64, success_model: SuccessModel) -> Result<Self> {
        check_finite("gain", gain)?;
        if gain < 1.0 {
            return Err(Error::Domain {
                name: "gain",
                value: gain,
                expected: ">= 1",
            });
        }
        if let SuccessModel::Fixed(p) = success_model {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Domain {
                    name: "p_success",
                    value: p,
                    expected: "in (0, 1]",
                });
            }
        }
        Ok(Self { gain, success_model })
    }

    /// Gain `g` with `P_success = 1/g²`.
    pub fn with_gain(gain: f64) -> Result<Self> {
        Self::new(gain, SuccessModel::InverseGainSquared)
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn success_model(&self) -> SuccessModel {
        self.success_model
    }

    pub fn p_success(&self) -> f64 {
        match self.success_model {
            SuccessModel::InverseGainSquared => 1.0 / (self.gain * self.gain),
            SuccessModel::Fixed(p) => p,
        }
    }
}

/// Parameters of the NLA-free channel that reproduces the post-selected
/// covariance matrix. `alpha_g` always equals the input amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentChannel {
    pub eta: f64,
    pub eps_g: f64,
    pub alpha_g: f64,
    pub physical: bool,
}

/// Largest gain with a physical equivalent channel:
/// `1/√T` for `ε = 0`, otherwise
/// `(-2√T + sqrt(4T + 4Tε(2 + Tε))) / (2Tε)`.
///
/// Evaluated as `2(2 + Tε) / (2√T + sqrt(4T + 4Tε(2 + Tε)))`, the same
/// expression with the numerator rationalised; it has no cancellation as
/// `ε → 0` and reduces to `1/√T` there.
pub fn g_max(ch: &ChannelParams) -> f64 {
    let t = ch.transmittance();
    let te = t * ch.excess_noise();
    let root = (4.0 * t + 4.0 * te * (2.0 + te)).sqrt();
    2.0 * (2.0 + te) / (2.0 * t.sqrt() + root)
}

/// Equivalent channel for gain `g` applied after `ch`, evaluated for an
/// input amplitude `alpha`.
pub fn equivalent_channel(ch: &ChannelParams, gain: f64, alpha: f64) -> EquivalentChannel {
    let t = ch.transmittance();
    let eps = ch.excess_noise();
    let g2 = gain * gain;
    let denom = 2.0 + (1.0 - g2) * t * eps;
    let eta = 4.0 * g2 * t / (denom * denom);
    let eps_g = eps - 0.5 * (g2 - 1.0) * t * eps * eps;
    let physical = gain >= 1.0
        && denom > 0.0
        && eta > 0.0
        && eta <= 1.0 + BOUNDARY_SLACK
        && eps_g >= 0.0
        && gain <= g_max(ch) * (1.0 + BOUNDARY_SLACK);
    EquivalentChannel {
        eta,
        eps_g,
        alpha_g: alpha,
        physical,
    }
}

/// Thermal parameter of Bob's conditional state: `λ² = Tε / (2 + Tε)`, from
/// `(1 + λ²)/(1 - λ²) = 1 + Tε`. Returns `λ²`.
pub fn lambda_from_noise(ch: &ChannelParams) -> f64 {
    let te = ch.transmittance() * ch.excess_noise();
    te / (2.0 + te)
}

/// Quadrature variance of Bob's state after a successful amplification,
/// `(1 + g²λ²)/(1 - g²λ²) + 2g² ((1 - λ²)/(1 - g²λ²))² T α²`.
pub fn amplified_output_variance(p: &ProtocolParams, ch: &ChannelParams, gain: f64) -> f64 {
    let l2 = lambda_from_noise(ch);
    let g2 = gain * gain;
    let gl2 = g2 * l2;
    let shrink = (1.0 - l2) / (1.0 - gl2);
    (1.0 + gl2) / (1.0 - gl2) + 2.0 * g2 * shrink * shrink * ch.transmittance() * p.alpha2()
}

/// Smallest loss (dB) at which gain `g` maps to a physical channel for
/// excess noise `eps`, i.e. where `η = 1`.
///
/// Solves `(g² - 1) ε T + 2 g √T - 2 = 0` for `√T` in the rationalised form
/// `√T = 2 / (g + sqrt(g² + 2 (g² - 1) ε))`.
pub fn min_physical_loss_db(gain: f64, eps: f64) -> f64 {
    let g2 = gain * gain;
    let sqrt_t = 2.0 / (gain + (g2 + 2.0 * (g2 - 1.0) * eps).sqrt());
    -20.0 * sqrt_t.log10()
}

/// Largest excess noise for which gain `g` is still physical at
/// transmittance `T`: `2(1 - g√T) / ((g² - 1) T)`. Infinite for `g = 1`,
/// negative when no noise level is physical.
pub fn max_physical_noise(gain: f64, transmittance: f64) -> f64 {
    let g2 = gain * gain;
    if g2 == 1.0 {
        return f64::INFINITY;
    }
    2.0 * (1.0 - gain * transmittance.sqrt()) / ((g2 - 1.0) * transmittance)
}

/// Key rate of the amplified protocol: `P_success · R(α, η, ε^g)`.
///
/// Unphysical mappings give a breakdown with status
/// [`RateStatus::UnphysicalNlaMapping`] and no rate.
pub fn nla_key_rate(p: &ProtocolParams, ch: &ChannelParams, nla: &NlaParams) -> Result<KeyRateBreakdown> {
    let eq = equivalent_channel(ch, nla.gain(), p.alpha());
    if !eq.physical {
        return Ok(KeyRateBreakdown::undefined(RateStatus::UnphysicalNlaMapping));
    }
    let virtual_channel = ChannelParams::new(eq.eta.min(1.0), eq.eps_g)?;
    let mut breakdown = key_rate(p, &virtual_channel)?;
    let p_success = nla.p_success();
    breakdown.rate *= p_success;
    breakdown.p_success = p_success;
    Ok(breakdown)
}
