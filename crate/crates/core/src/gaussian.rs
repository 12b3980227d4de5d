//! Two-mode Gaussian-state numerics in shot-noise units (vacuum variance 1).
//!
//! Everything here works on the symmetric covariance form
//!
//! ```text
//!     | a·I    c·σz |
//!     | c·σz   b·I  |
//! ```
//!
//! The diagonal entries are stored as excess over the vacuum (`a - 1`,
//! `b - 1`). At high channel loss Bob's variance sits a few parts in 1e10
//! above vacuum, and keeping the excess explicit is what lets the Holevo
//! bound stay accurate far past the point where `b - 1` would be lost to
//! rounding.

use std::f64::consts::LN_2;
use std::fmt;

use crate::error::{check_finite, Error, Result};

/// Relative tolerance for clamping the symplectic discriminant and for
/// flagging eigenvalues below the vacuum bound.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

/// Entropy of a thermal state with mean photon number `x`, in bits:
/// `(x + 1) log2(1 + x) - x log2 x`, extended continuously by `G(0) = 0`.
pub fn entropy_g(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain {
            name: "x",
            value: x,
            expected: "a finite value >= 0",
        });
    }
    Ok(g_unchecked(x))
}

fn g_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    ((x + 1.0) * x.ln_1p() - x * x.ln()) / LN_2
}

/// `G(hi) - G(lo)` given `diff = hi - lo` computed independently.
///
/// When `hi` and `lo` agree to many digits the naive difference of two
/// O(1) entropies keeps only the rounding noise; this form is linear in
/// `diff`.
fn g_difference(hi: f64, lo: f64, diff: f64) -> f64 {
    if lo <= 0.0 {
        return g_unchecked(hi.max(0.0));
    }
    if hi <= 0.0 {
        return -g_unchecked(lo);
    }
    let rel = diff / lo;
    if rel <= -1.0 {
        return g_unchecked(hi) - g_unchecked(lo);
    }
    ((lo + 1.0) * (diff / (1.0 + lo)).ln_1p() + diff * hi.ln_1p() - lo * rel.ln_1p() - diff * hi.ln()) / LN_2
}

/// Covariance matrix `[[a I, c σz], [c σz, b I]]` of a two-mode state.
///
/// Constructors do not reject unphysical entries; [`symplectic_eigenvalues`]
/// reports them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance {
    a_excess: f64,
    b_excess: f64,
    c: f64,
}

impl TwoModeCovariance {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self {
            a_excess: a - 1.0,
            b_excess: b - 1.0,
            c,
        }
    }

    /// Builds the matrix from the variances above vacuum, `a - 1` and `b - 1`.
    pub fn from_excess(a_excess: f64, b_excess: f64, c: f64) -> Self {
        Self { a_excess, b_excess, c }
    }

    pub fn a(&self) -> f64 {
        1.0 + self.a_excess
    }

    pub fn b(&self) -> f64 {
        1.0 + self.b_excess
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn a_excess(&self) -> f64 {
        self.a_excess
    }

    pub fn b_excess(&self) -> f64 {
        self.b_excess
    }

    /// `ab - c²`, the square root of the full determinant.
    pub fn det_sqrt(&self) -> f64 {
        self.a() * self.b() - self.c * self.c
    }

    /// `Δ = a² + b² - 2c²`.
    pub fn delta(&self) -> f64 {
        let a = self.a();
        let b = self.b();
        a * a + b * b - 2.0 * self.c * self.c
    }

    fn check_finite(&self) -> Result<()> {
        check_finite("a", self.a_excess)?;
        check_finite("b", self.b_excess)?;
        check_finite("c", self.c)?;
        Ok(())
    }

    /// Squared symplectic eigenvalues minus one, `u = ν² - 1`.
    ///
    /// With `s = u1 + u2 = Δ - 2` and `p = u1·u2 = ((a+1)(b-1) - c²)((a-1)(b+1) - c²)`
    /// every factor is formed from excess variances, so `u2` keeps full
    /// relative precision when it is tiny.
    fn spectrum_parts(&self) -> Result<SpectrumParts> {
        self.check_finite()?;
        let c2 = self.c * self.c;
        let big_a = self.a_excess * (self.a_excess + 2.0);
        let sigma = self.b_excess * (self.b_excess + 2.0) - 2.0 * c2;
        let s = big_a + sigma;
        let p = ((self.a() + 1.0) * self.b_excess - c2) * ((self.b() + 1.0) * self.a_excess - c2);
        let disc = s * s - 4.0 * p;
        let delta = s + 2.0;
        if disc < -CLAMP_TOLERANCE * (delta * delta).max(1.0) {
            return Err(Error::UnphysicalCovariance(format!(
                "symplectic discriminant {disc:e} is negative (Δ = {delta})"
            )));
        }
        let root = disc.max(0.0).sqrt();
        let u1 = 0.5 * (s + root);
        let u2 = if u1 > 0.0 { p / u1 } else { 0.5 * (s - root) };
        Ok(SpectrumParts {
            big_a,
            sigma,
            p,
            root,
            u1,
            u2,
        })
    }

    /// `ν3² - 1` for the conditional state of mode A after homodyne
    /// detection on mode B: `ν3² = a(a - c²/b)`.
    fn conditional_excess(&self) -> f64 {
        let c2 = self.c * self.c;
        self.a_excess * (self.a_excess + 2.0) - self.a() * c2 / self.b()
    }
}

struct SpectrumParts {
    big_a: f64,
    sigma: f64,
    p: f64,
    root: f64,
    u1: f64,
    u2: f64,
}

fn nu_from_excess(u: f64) -> f64 {
    (1.0 + u).max(0.0).sqrt()
}

/// `(ν - 1) / 2` computed without cancellation from `u = ν² - 1`.
fn thermal_occupation(u: f64, nu: f64) -> f64 {
    u / (2.0 * (1.0 + nu))
}

/// The two symplectic eigenvalues of a [`TwoModeCovariance`], `nu1 >= nu2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticEigenvalues {
    pub nu1: f64,
    pub nu2: f64,
    /// `false` when `nu2` falls below the vacuum bound by more than the
    /// clamp tolerance.
    pub physical: bool,
}

/// Closed-form symplectic eigenvalues
/// `ν1,2 = sqrt((Δ ± sqrt(Δ² - 4D)) / 2)` with `D = (ab - c²)²`.
///
/// A slightly negative discriminant (relative size below
/// [`CLAMP_TOLERANCE`]) is clamped to zero; anything larger is an
/// [`Error::UnphysicalCovariance`].
pub fn symplectic_eigenvalues(cm: &TwoModeCovariance) -> Result<SymplecticEigenvalues> {
    let parts = cm.spectrum_parts()?;
    let nu1 = nu_from_excess(parts.u1);
    let nu2 = nu_from_excess(parts.u2);
    Ok(SymplecticEigenvalues {
        nu1,
        nu2,
        physical: nu2 >= 1.0 - CLAMP_TOLERANCE,
    })
}

/// Symplectic eigenvalue of Alice's mode conditioned on Bob's homodyne
/// outcome, for the four-state covariance with amplitude `alpha`,
/// transmittance `transmittance`, excess noise `eps` and correlation `z`:
/// `ν3 = sqrt(V(V_A + 1 - T Z² / (T V_A + 1 + T ε)))`.
pub fn conditional_eigenvalue_v3(alpha: f64, transmittance: f64, eps: f64, z: f64) -> Result<f64> {
    check_finite("alpha", alpha)?;
    check_finite("transmittance", transmittance)?;
    check_finite("eps", eps)?;
    check_finite("z", z)?;
    let va = 2.0 * alpha * alpha;
    let cm = TwoModeCovariance::from_excess(va, transmittance * (va + eps), transmittance.sqrt() * z);
    let u3 = cm.conditional_excess();
    if 1.0 + u3 < 0.0 {
        return Err(Error::UnphysicalCovariance(format!(
            "conditional variance product {} is negative",
            1.0 + u3
        )));
    }
    Ok(nu_from_excess(u3))
}

/// Gaussian upper bound on Eve's information about Bob's homodyne data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoBound {
    /// `S = G((ν1-1)/2) + G((ν2-1)/2) - G((ν3-1)/2)` in bits.
    pub bits: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    pub physical: bool,
}

/// Holevo bound `S_BE` of the Gaussian state with covariance `cm`, under
/// reverse reconciliation with homodyne detection on mode B.
///
/// `ν1` and `ν3` both approach `a` at high loss, so their entropy
/// difference is formed from `ν1² - ν3²` directly instead of from the two
/// entropies.
pub fn homodyne_holevo_bound(cm: &TwoModeCovariance) -> Result<HolevoBound> {
    let parts = cm.spectrum_parts()?;
    let u3 = cm.conditional_excess();
    if 1.0 + u3 < 0.0 {
        return Err(Error::UnphysicalCovariance(format!(
            "conditional variance product {} is negative",
            1.0 + u3
        )));
    }
    let nu1 = nu_from_excess(parts.u1);
    let nu2 = nu_from_excess(parts.u2);
    let nu3 = nu_from_excess(u3);
    let physical = nu2 >= 1.0 - CLAMP_TOLERANCE && nu3 >= 1.0 - CLAMP_TOLERANCE;
    if !physical {
        return Ok(HolevoBound {
            bits: f64::NAN,
            nu1,
            nu2,
            nu3,
            physical,
        });
    }

    // u1 - u3. The rationalised branch removes the O(1) parts of u1 and u3
    // analytically: u1 - A = 2(Aσ - p) / (root + A - σ) and u3 - A = -a c²/b.
    let c2 = cm.c() * cm.c();
    let gap = if parts.big_a - parts.sigma > 0.0 {
        2.0 * (parts.big_a * parts.sigma - parts.p) / (parts.root + parts.big_a - parts.sigma) + cm.a() * c2 / cm.b()
    } else {
        parts.u1 - u3
    };

    let x1 = thermal_occupation(parts.u1, nu1).max(0.0);
    let x2 = thermal_occupation(parts.u2, nu2).max(0.0);
    let x3 = thermal_occupation(u3, nu3).max(0.0);
    let d13 = gap / (2.0 * (nu1 + nu3));
    let bits = g_difference(x1, x3, d13) + g_unchecked(x2);
    Ok(HolevoBound {
        bits,
        nu1,
        nu2,
        nu3,
        physical,
    })
}

/// Physicality status attached to every key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateStatus {
    Physical,
    UnphysicalCovariance,
    UnphysicalNlaMapping,
}

impl fmt::Display for RateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateStatus::Physical => "Physical",
            RateStatus::UnphysicalCovariance => "UnphysicalCovariance",
            RateStatus::UnphysicalNlaMapping => "UnphysicalNlaMapping",
        })
    }
}

/// One evaluation of the key-rate lower bound.
///
/// Quantities that could not be evaluated are `NaN`. For the original
/// protocol `p_success` is 1; for the amplified protocol the entropic
/// quantities belong to the equivalent channel and `rate` includes the
/// success-probability factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateBreakdown {
    pub mutual_information: f64,
    pub holevo_bound: f64,
    pub rate: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    pub p_success: f64,
    pub status: RateStatus,
}

impl KeyRateBreakdown {
    pub(crate) fn undefined(status: RateStatus) -> Self {
        Self {
            mutual_information: f64::NAN,
            holevo_bound: f64::NAN,
            rate: f64::NAN,
            nu1: f64::NAN,
            nu2: f64::NAN,
            nu3: f64::NAN,
            p_success: f64::NAN,
            status,
        }
    }

    /// The rate, if the evaluation was physical.
    pub fn secret_rate(&self) -> Option<f64> {
        (self.status == RateStatus::Physical).then_some(self.rate)
    }
}
