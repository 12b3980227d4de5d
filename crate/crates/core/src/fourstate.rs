//! The four-state protocol: ensemble weights, the correlation term, the
//! channel-output covariance matrix and the reverse-reconciliation key
//! rate bound.

use std::f64::consts::LN_2;

use crate::error::{check_finite, Error, Result};
use crate::gaussian::{homodyne_holevo_bound, HolevoBound, KeyRateBreakdown, RateStatus, TwoModeCovariance};

/// Alice's side: coherent amplitude `alpha` (so `V_A = 2α²`) and the
/// reconciliation efficiency `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    alpha: f64,
    beta: f64,
}

impl ProtocolParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_finite("alpha", alpha)?;
        check_finite("beta", beta)?;
        if alpha < 0.0 {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                expected: ">= 0",
            });
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Domain {
                name: "beta",
                value: beta,
                expected: "in (0, 1]",
            });
        }
        Ok(Self { alpha, beta })
    }

    /// From the modulation variance `V_A = 2α²`.
    pub fn from_modulation_variance(va: f64, beta: f64) -> Result<Self> {
        check_finite("va", va)?;
        if va < 0.0 {
            return Err(Error::Domain {
                name: "va",
                value: va,
                expected: ">= 0",
            });
        }
        Self::new((va / 2.0).sqrt(), beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha * self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Modulation variance `V_A = 2α²`.
    pub fn va(&self) -> f64 {
        2.0 * self.alpha2()
    }

    /// Quadrature variance of either mode before the channel, `V = V_A + 1`.
    pub fn v(&self) -> f64 {
        self.va() + 1.0
    }
}

/// Gaussian channel with transmittance `T ∈ (0, 1]` and input-referred
/// excess noise `ε >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    transmittance: f64,
    excess_noise: f64,
}

impl ChannelParams {
    pub fn new(transmittance: f64, excess_noise: f64) -> Result<Self> {
        check_finite("transmittance", transmittance)?;
        check_finite("excess_noise", excess_noise)?;
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return Err(Error::Domain {
                name: "transmittance",
                value: transmittance,
                expected: "in (0, 1]",
            });
        }
        if excess_noise < 0.0 {
            return Err(Error::Domain {
                name: "excess_noise",
                value: excess_noise,
                expected: ">= 0",
            });
        }
        Ok(Self {
            transmittance,
            excess_noise,
        })
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn excess_noise(&self) -> f64 {
        self.excess_noise
    }

    /// Input-referred total noise `χ = (1 - T)/T + ε`.
    pub fn total_noise(&self) -> f64 {
        (1.0 - self.transmittance) / self.transmittance + self.excess_noise
    }
}

/// Weights `λ0..λ3` of the photon-number classes `n mod 4` in a coherent
/// state of amplitude `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaWeights(pub [f64; 4]);

impl LambdaWeights {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for LambdaWeights {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

// Above this α² the closed forms have no cancellation and the series
// would need too many terms.
const SERIES_LIMIT: f64 = 40.0;

/// `s_k(x) = Σ_n x^{4n} / (4n + k)!`, so that `λ_k = e^{-x} x^k s_k(x)`.
fn class_series(x: f64) -> [f64; 4] {
    let x4 = x * x * x * x;
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut term = 1.0 / [1.0, 1.0, 2.0, 6.0][k];
        let mut sum = term;
        let mut m = k as f64;
        loop {
            term *= x4 / ((m + 1.0) * (m + 2.0) * (m + 3.0) * (m + 4.0));
            m += 4.0;
            sum += term;
            if term <= sum * 1e-18 {
                break;
            }
        }
        *slot = sum;
    }
    out
}

/// `λ0,2 = ½e^{-α²}[cosh α² ± cos α²]`, `λ1,3 = ½e^{-α²}[sinh α² ± sin α²]`.
///
/// Evaluated through the class series for moderate `α²`, where
/// `sinh - sin` and `cosh - cos` would otherwise cancel.
pub fn lambda_weights(alpha: f64) -> Result<LambdaWeights> {
    check_finite("alpha", alpha)?;
    let x = alpha * alpha;
    if x <= SERIES_LIMIT {
        let s = class_series(x);
        let e = (-x).exp();
        Ok(LambdaWeights([
            e * s[0],
            e * x * s[1],
            e * x * x * s[2],
            e * x * x * x * s[3],
        ]))
    } else {
        let e2 = (-2.0 * x).exp();
        let e = (-x).exp();
        let ch = 0.25 * (1.0 + e2);
        let sh = 0.25 * (1.0 - e2);
        Ok(LambdaWeights([
            ch + 0.5 * e * x.cos(),
            sh + 0.5 * e * x.sin(),
            ch - 0.5 * e * x.cos(),
            sh - 0.5 * e * x.sin(),
        ]))
    }
}

/// Correlation `Z = 2α² Σ_k λ_k^{3/2} λ_{k+1}^{-1/2}` between Alice's and
/// Bob's quadratures; `Z → 2α` as `α → 0`.
pub fn correlation_z(alpha: f64) -> f64 {
    let alpha = alpha.abs();
    let x = alpha * alpha;
    if x == 0.0 || !x.is_finite() {
        return 0.0;
    }
    if x <= SERIES_LIMIT {
        let s = class_series(x);
        let ratio = |num: f64, den: f64| num * (num / den).sqrt();
        let bracket =
            ratio(s[0], s[1]) + x * ratio(s[1], s[2]) + x * x * ratio(s[2], s[3]) + x.powi(5) * ratio(s[3], s[0]);
        2.0 * alpha * (-x).exp() * bracket
    } else {
        let l = lambda_weights(alpha).expect("finite alpha");
        let sum: f64 = (0..4).map(|k| l[k] * (l[k] / l[(k + 1) % 4]).sqrt()).sum();
        2.0 * x * sum
    }
}

/// Covariance after the channel: `a = V`, `b = T(V + χ) = 1 + T(V_A + ε)`,
/// `c = √T Z`.
pub fn channel_covariance(p: &ProtocolParams, ch: &ChannelParams) -> TwoModeCovariance {
    let t = ch.transmittance();
    TwoModeCovariance::from_excess(
        p.va(),
        t * (p.va() + ch.excess_noise()),
        t.sqrt() * correlation_z(p.alpha()),
    )
}

/// `I_AB = ½ log2((V + χ)/(1 + χ)) = ½ log2(1 + T V_A / (1 + T ε))`.
pub fn mutual_information(p: &ProtocolParams, ch: &ChannelParams) -> f64 {
    let t = ch.transmittance();
    let snr = t * p.va() / (1.0 + t * ch.excess_noise());
    0.5 * snr.ln_1p() / LN_2
}

/// Gaussian bound `S_BE^G` on Eve's information for reverse reconciliation.
pub fn holevo_bound(p: &ProtocolParams, ch: &ChannelParams) -> Result<HolevoBound> {
    homodyne_holevo_bound(&channel_covariance(p, ch))
}

/// Lower bound `β I_AB - S_BE^G` on the secret key rate (bits per use).
/// Negative values are returned unclamped.
pub fn key_rate(p: &ProtocolParams, ch: &ChannelParams) -> Result<KeyRateBreakdown> {
    let info = mutual_information(p, ch);
    let holevo = holevo_bound(p, ch)?;
    let status = if holevo.physical {
        RateStatus::Physical
    } else {
        RateStatus::UnphysicalCovariance
    };
    let rate = if holevo.physical {
        p.beta() * info - holevo.bits
    } else {
        f64::NAN
    };
    Ok(KeyRateBreakdown {
        mutual_information: info,
        holevo_bound: holevo.bits,
        rate,
        nu1: holevo.nu1,
        nu2: holevo.nu2,
        nu3: holevo.nu3,
        p_success: 1.0,
        status,
    })
}
