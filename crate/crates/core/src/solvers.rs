//! Zero-crossing searches on the key-rate surface: maximum tolerable loss
//! and maximum tolerable excess noise.

use crate::error::{check_finite, Error, Result};
use crate::fourstate::{key_rate, ChannelParams, ProtocolParams};
use crate::nla::{max_physical_noise, min_physical_loss_db, nla_key_rate, NlaParams};

/// Upper end of the loss bracket in dB.
pub const LOSS_BRACKET_DB: f64 = 150.0;
/// Upper end of the excess-noise bracket in shot-noise units.
pub const NOISE_BRACKET: f64 = 0.5;
pub const DEFAULT_LOSS_TOL_DB: f64 = 1e-3;
pub const DEFAULT_NOISE_TOL: f64 = 1e-6;
/// Points in the coarse sign audit run before bisecting.
pub const AUDIT_POINTS: usize = 64;

/// Fiber with attenuation in dB/km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberModel {
    attenuation: f64,
}

impl FiberModel {
    pub fn new(attenuation: f64) -> Result<Self> {
        check_finite("attenuation", attenuation)?;
        if attenuation <= 0.0 {
            return Err(Error::Domain {
                name: "attenuation",
                value: attenuation,
                expected: "> 0 dB/km",
            });
        }
        Ok(Self { attenuation })
    }

    pub fn attenuation(&self) -> f64 {
        self.attenuation
    }
}

impl Default for FiberModel {
    fn default() -> Self {
        Self { attenuation: 0.2 }
    }
}

/// `T = 10^(-loss/10)`.
pub fn loss_to_transmittance(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// `loss = -10 log10 T`.
pub fn transmittance_to_loss(transmittance: f64) -> f64 {
    -10.0 * transmittance.log10()
}

pub fn distance_to_loss(distance_km: f64, fiber: &FiberModel) -> f64 {
    fiber.attenuation() * distance_km
}

pub fn loss_to_distance(loss_db: f64, fiber: &FiberModel) -> f64 {
    loss_db / fiber.attenuation()
}

/// Why a search ended without (or with a qualified) zero crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnostic {
    /// The rate is undefined at the start of the bracket (amplifier
    /// mapping unphysical there).
    UndefinedAtStart,
    /// The rate is not positive at the start of the bracket.
    NoKeyAtStart,
    /// The rate stays positive over the whole bracket.
    NoSignChange,
    /// The search stopped at the edge of the physical region rather than
    /// at a zero of the rate.
    FeasibilityEdge,
    /// The coarse audit saw more than one sign change; the first one was
    /// bisected.
    MultipleCrossings(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierResult {
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub converged: bool,
    pub diagnostic: Option<Diagnostic>,
}

impl FrontierResult {
    fn failed(value: f64, bracket: (f64, f64), diagnostic: Diagnostic) -> Self {
        Self {
            value,
            bracket,
            iterations: 0,
            converged: false,
            diagnostic: Some(diagnostic),
        }
    }
}

/// Sign used for bracketing: undefined rates count as negative.
fn positive(rate: Option<f64>) -> bool {
    matches!(rate, Some(r) if r > 0.0)
}

/// Bisects the first positive-to-nonpositive transition of `rate` on
/// `[lo, hi]`. `rate` returns `None` where the rate is undefined.
pub fn bisect_frontier<F>(rate: F, lo: f64, hi: f64, tol: f64) -> FrontierResult
where
    F: Fn(f64) -> Option<f64>,
{
    match rate(lo) {
        None => return FrontierResult::failed(0.0, (lo, hi), Diagnostic::UndefinedAtStart),
        Some(r) if r <= 0.0 => return FrontierResult::failed(0.0, (lo, hi), Diagnostic::NoKeyAtStart),
        Some(_) => {}
    }

    let step = (hi - lo) / (AUDIT_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..AUDIT_POINTS)
        .map(|i| {
            if i + 1 == AUDIT_POINTS {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect();
    let signs: Vec<bool> = grid.iter().map(|&x| positive(rate(x))).collect();
    let crossings = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let Some(first) = signs.windows(2).position(|w| w[0] && !w[1]) else {
        return FrontierResult::failed(hi, (lo, hi), Diagnostic::NoSignChange);
    };

    let (mut a, mut b) = (grid[first], grid[first + 1]);
    let mut iterations = 0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if positive(rate(mid)) {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }

    let mut diagnostic = (crossings > 1).then_some(Diagnostic::MultipleCrossings(crossings));
    let converged = rate(b).is_some();
    if !converged {
        diagnostic = Some(Diagnostic::FeasibilityEdge);
    }
    FrontierResult {
        value: 0.5 * (a + b),
        bracket: (a, b),
        iterations,
        converged,
        diagnostic,
    }
}

/// Rate of the original protocol, or of the amplified one when `nla` is
/// given, at the given loss and excess noise. `None` when undefined.
pub fn rate_at(p: &ProtocolParams, loss_db: f64, eps: f64, nla: Option<&NlaParams>) -> Option<f64> {
    let ch = ChannelParams::new(loss_to_transmittance(loss_db), eps).ok()?;
    let breakdown = match nla {
        None => key_rate(p, &ch),
        Some(n) => nla_key_rate(p, &ch, n),
    }
    .ok()?;
    breakdown.secret_rate()
}

/// Loss (dB) at which the key rate reaches zero, for excess noise `eps`.
///
/// Amplified runs start at the smallest loss where the gain is physical.
pub fn max_loss(p: &ProtocolParams, eps: f64, nla: Option<&NlaParams>, tol: f64) -> FrontierResult {
    let lo = match nla {
        None => 0.0,
        Some(n) => min_physical_loss_db(n.gain(), eps),
    };
    let mut result = bisect_frontier(|loss| rate_at(p, loss, eps, nla), lo, LOSS_BRACKET_DB, tol);
    if nla.is_some() && result.diagnostic == Some(Diagnostic::UndefinedAtStart) {
        // rounding at η = 1; nudge inside the physical region
        let lo = lo + 1e-9;
        result = bisect_frontier(|loss| rate_at(p, loss, eps, nla), lo, LOSS_BRACKET_DB, tol);
    }
    result
}

/// Largest excess noise with a positive key rate at fixed loss.
pub fn max_excess_noise(p: &ProtocolParams, loss_db: f64, nla: Option<&NlaParams>, tol: f64) -> FrontierResult {
    let hi = NOISE_BRACKET;
    if let Some(n) = nla {
        let t = loss_to_transmittance(loss_db);
        if max_physical_noise(n.gain(), t) < 0.0 {
            return FrontierResult::failed(0.0, (0.0, hi), Diagnostic::UndefinedAtStart);
        }
    }
    bisect_frontier(|eps| rate_at(p, loss_db, eps, nla), 0.0, hi, tol)
}
