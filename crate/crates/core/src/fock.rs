//! Brute-force cross-checks in a truncated Fock space.
//!
//! The oracle rebuilds the four-state entangled state photon number by
//! photon number, and applies `g^n̂` to displaced thermal states, so the
//! closed forms used by [`crate::fourstate`] and [`crate::nla`] can be
//! checked against an independent route. Quadratures follow `X = a + a†`
//! (vacuum variance 1).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_finite, Error, Result};
use crate::fourstate::{lambda_weights, ChannelParams, ProtocolParams};
use crate::nla::lambda_from_noise;

/// Largest probability mass allowed above the photon-number cutoff.
pub const TAIL_LIMIT: f64 = 1e-10;

/// Default cutoff for `α² <= 0.5`, `g <= 2` workloads.
pub const DEFAULT_CUTOFF: usize = 40;

fn truncation_check(cutoff: usize, tail: f64) -> Result<()> {
    if tail > TAIL_LIMIT {
        Err(Error::Truncation {
            cutoff,
            tail,
            limit: TAIL_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Ket with amplitudes on photon numbers `0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: DVector<Complex64>,
}

impl FockVector {
    pub fn new(amplitudes: DVector<Complex64>) -> Self {
        assert!(!amplitudes.is_empty(), "a Fock vector needs at least the vacuum");
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn truncation(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `1 - ||ψ||²`: the mass that fell above the cutoff.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Mean photon number `Σ n |c_n|²`.
    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.norm_sqr())
            .sum()
    }
}

/// `c_m = β^m / sqrt(m!)` for `m = 0..=cutoff`, without the Gaussian prefactor.
fn coherent_powers(beta: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut c = Complex64::new(1.0, 0.0);
    out.push(c);
    for m in 1..=cutoff {
        c = c * beta / (m as f64).sqrt();
        out.push(c);
    }
    out
}

/// Coherent state `|β⟩` truncated at `cutoff`.
pub fn coherent_state(beta: Complex64, cutoff: usize) -> Result<FockVector> {
    let pref = (-0.5 * beta.norm_sqr()).exp();
    let amps = coherent_powers(beta, cutoff).into_iter().map(|c| c * pref);
    let v = FockVector::new(DVector::from_iterator(cutoff + 1, amps));
    truncation_check(cutoff, v.tail_mass())?;
    Ok(v)
}

/// The four orthonormal states
/// `|φ_k⟩ = e^{-α²/2}/√λ_k Σ_n (-1)^n α^{4n+k}/sqrt((4n+k)!) |4n+k⟩`.
pub fn build_phi_states(alpha: f64, cutoff: usize) -> Result<[FockVector; 4]> {
    check_finite("alpha", alpha)?;
    if alpha <= 0.0 {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "> 0",
        });
    }
    let lambda = lambda_weights(alpha)?;
    let powers = coherent_powers(Complex64::new(alpha, 0.0), cutoff);
    let pref = (-0.5 * alpha * alpha).exp();
    let states: [FockVector; 4] = std::array::from_fn(|k| {
        let norm = pref / lambda[k].sqrt();
        let amps = (0..=cutoff).map(|m| {
            if m % 4 != k {
                return Complex64::new(0.0, 0.0);
            }
            let sign = if (m / 4) % 2 == 0 { 1.0 } else { -1.0 };
            powers[m] * (sign * norm)
        });
        FockVector::new(DVector::from_iterator(cutoff + 1, amps))
    });
    for v in &states {
        truncation_check(cutoff, v.tail_mass())?;
    }
    Ok(states)
}

/// Alice's measurement basis `|ψ_k⟩ = ½ Σ_m e^{-i(1+2k)mπ/4} |φ_m⟩`.
///
/// With this phase `½ Σ_k |ψ_k⟩|α_k⟩ = Σ_m √λ_m |φ_m⟩|φ_m⟩`, whose mode-A
/// variance is `V` and whose `X` correlation is `+Z`. The opposite phase
/// pairs `|φ_m⟩` with `|φ_{-m mod 4}⟩` and does not reproduce that
/// covariance matrix.
pub fn build_psi_states(phi: &[FockVector; 4]) -> [FockVector; 4] {
    let dim = phi[0].amplitudes.len();
    std::array::from_fn(|k| {
        let mut acc = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        for (m, state) in phi.iter().enumerate() {
            let phase = Complex64::from_polar(0.5, -((1 + 2 * k) as f64) * m as f64 * PI / 4.0);
            acc += &state.amplitudes * phase;
        }
        FockVector::new(acc)
    })
}

/// Pure two-mode state with amplitudes `ψ[i, j]` on `|i⟩_A |j⟩_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amplitudes: DMatrix<Complex64>,
}

impl TwoModeState {
    pub fn amplitudes(&self) -> &DMatrix<Complex64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨X_A X_B⟩ = 2 Re⟨ab⟩ + 2 Re⟨a†b⟩`.
    pub fn xx_correlation(&self) -> f64 {
        let (ab, adag_b) = self.ladder_correlations();
        2.0 * ab.re + 2.0 * adag_b.re
    }

    /// `⟨P_A P_B⟩ = -2 Re⟨ab⟩ + 2 Re⟨a†b⟩` with `P = -i(a - a†)`.
    pub fn pp_correlation(&self) -> f64 {
        let (ab, adag_b) = self.ladder_correlations();
        -2.0 * ab.re + 2.0 * adag_b.re
    }

    fn ladder_correlations(&self) -> (Complex64, Complex64) {
        let psi = &self.amplitudes;
        let (rows, cols) = psi.shape();
        let mut ab = Complex64::new(0.0, 0.0);
        let mut adag_b = Complex64::new(0.0, 0.0);
        for i in 0..rows {
            for j in 0..cols.saturating_sub(1) {
                if i + 1 < rows {
                    // a b |i+1, j+1⟩ lands on |i, j⟩
                    ab += psi[(i, j)].conj() * psi[(i + 1, j + 1)] * (((i + 1) * (j + 1)) as f64).sqrt();
                }
                if i > 0 {
                    // a† b |i-1, j+1⟩ lands on |i, j⟩
                    adag_b += psi[(i, j)].conj() * psi[(i - 1, j + 1)] * (i as f64).sqrt() * ((j + 1) as f64).sqrt();
                }
            }
        }
        (ab, adag_b)
    }

    /// Reduced state of mode A.
    pub fn reduced_a(&self) -> FockDensityMatrix {
        FockDensityMatrix::new(&self.amplitudes * self.amplitudes.adjoint())
    }

    /// Reduced state of mode B.
    pub fn reduced_b(&self) -> FockDensityMatrix {
        let t = self.amplitudes.transpose();
        FockDensityMatrix::new(&t * t.adjoint())
    }
}

/// `|Φ_AB⟩ = ½ Σ_k |ψ_k⟩_A |α e^{i(2k+1)π/4}⟩_B`.
pub fn four_state_entangled(alpha: f64, cutoff: usize) -> Result<TwoModeState> {
    let phi = build_phi_states(alpha, cutoff)?;
    let psi = build_psi_states(&phi);
    let dim = cutoff + 1;
    let mut amps = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (k, psi_k) in psi.iter().enumerate() {
        let beta = Complex64::from_polar(alpha, (2 * k + 1) as f64 * PI / 4.0);
        let coh = coherent_state(beta, cutoff)?;
        amps += (&psi_k.amplitudes * coh.amplitudes.transpose()) * Complex64::new(0.5, 0.0);
    }
    Ok(TwoModeState { amplitudes: amps })
}

/// Correlation `⟨X_A X_B⟩` of the truncated four-state entangled state.
pub fn oracle_z(alpha: f64, cutoff: usize) -> Result<f64> {
    Ok(four_state_entangled(alpha, cutoff)?.xx_correlation())
}

/// Density matrix on photon numbers `0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    entries: DMatrix<Complex64>,
}

impl FockDensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Self {
        assert!(
            entries.is_square() && !entries.is_empty(),
            "density matrix must be square"
        );
        Self { entries }
    }

    pub fn from_pure(state: &FockVector) -> Self {
        Self::new(&state.amplitudes * state.amplitudes.adjoint())
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn truncation(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // symmetrise first; the eigen solver reads one triangle only
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `⟨a⟩`, normalised by the trace.
    pub fn mean_annihilation(&self) -> Complex64 {
        let rho = &self.entries;
        let s: Complex64 = (1..rho.nrows()).map(|n| rho[(n, n - 1)] * (n as f64).sqrt()).sum();
        s / self.trace()
    }

    fn mean_annihilation_sq(&self) -> Complex64 {
        let rho = &self.entries;
        let s: Complex64 = (2..rho.nrows())
            .map(|n| rho[(n, n - 2)] * ((n * (n - 1)) as f64).sqrt())
            .sum();
        s / self.trace()
    }

    pub fn mean_photon_number(&self) -> f64 {
        let rho = &self.entries;
        let s: f64 = (0..rho.nrows()).map(|n| n as f64 * rho[(n, n)].re).sum();
        s / self.trace()
    }

    /// Mean of `X_θ = a e^{-iθ} + a† e^{iθ}`.
    pub fn quadrature_mean(&self, theta: f64) -> f64 {
        2.0 * (self.mean_annihilation() * Complex64::from_polar(1.0, -theta)).re
    }

    /// Variance of `X_θ`; `θ = 0` is the `X = a + a†` quadrature.
    pub fn quadrature_variance(&self, theta: f64) -> f64 {
        let second = 2.0 * (self.mean_annihilation_sq() * Complex64::from_polar(1.0, -2.0 * theta)).re
            + 2.0 * self.mean_photon_number()
            + 1.0;
        let mean = self.quadrature_mean(theta);
        second - mean * mean
    }

    /// Thermal parameter `λ²` read off the `X` variance of a displaced
    /// thermal state: `V = (1 + λ²)/(1 - λ²)`.
    pub fn thermal_parameter(&self) -> f64 {
        let v = self.quadrature_variance(0.0);
        (v - 1.0) / (v + 1.0)
    }
}

/// `D(β) ρ_th(λ) D(-β)` with `ρ_th(λ) = (1 - λ²) Σ λ^{2n} |n⟩⟨n|`.
///
/// Built from displaced number states `D(β)|k⟩ = (a† - β*)^k |β⟩ / sqrt(k!)`;
/// the recursion only reads lower photon numbers, so every kept component
/// is exact. All number states up to the cutoff are summed even when their
/// weight is negligible, so the geometric tail stays visible to
/// [`apply_nla`].
pub fn displaced_thermal(beta: Complex64, lambda: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    check_finite("beta", beta.norm())?;
    check_finite("lambda", lambda)?;
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain {
            name: "lambda",
            value: lambda,
            expected: "in [0, 1)",
        });
    }
    let dim = cutoff + 1;
    let l2 = lambda * lambda;
    let mut v = coherent_state_unchecked(beta, cutoff);
    let mut rho = &v * v.adjoint() * Complex64::new(1.0 - l2, 0.0);
    let mut weight = 1.0 - l2;
    let mut k = 0usize;
    while l2 > 0.0 && (k < cutoff || weight > 1e-18) {
        k += 1;
        let scale = 1.0 / (k as f64).sqrt();
        let prev = v.clone();
        for m in 0..dim {
            let raised = if m > 0 {
                prev[m - 1] * (m as f64).sqrt()
            } else {
                Complex64::new(0.0, 0.0)
            };
            v[m] = (raised - beta.conj() * prev[m]) * scale;
        }
        weight *= l2;
        rho += &v * v.adjoint() * Complex64::new(weight, 0.0);
    }
    let rho = FockDensityMatrix::new(rho);
    truncation_check(cutoff, 1.0 - rho.trace())?;
    Ok(rho)
}

fn coherent_state_unchecked(beta: Complex64, cutoff: usize) -> DVector<Complex64> {
    let pref = (-0.5 * beta.norm_sqr()).exp();
    DVector::from_iterator(cutoff + 1, coherent_powers(beta, cutoff).into_iter().map(|c| c * pref))
}

/// Successful amplification `g^n̂ ρ g^n̂`, renormalised to unit trace.
///
/// The mass pushed above the cutoff is estimated from the geometric ratio
/// of the two highest diagonal entries. A ratio at or above one means the
/// amplified state is not normalisable.
pub fn apply_nla(rho: &FockDensityMatrix, gain: f64) -> Result<FockDensityMatrix> {
    check_finite("gain", gain)?;
    if gain < 1.0 {
        return Err(Error::Domain {
            name: "gain",
            value: gain,
            expected: ">= 1",
        });
    }
    let n = rho.entries.nrows();
    let powers: Vec<f64> = (0..n).map(|k| gain.powi(k as i32)).collect();
    let mut out = rho.entries.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] *= powers[i] * powers[j];
        }
    }
    let out = FockDensityMatrix::new(out);
    let trace = out.trace();
    let cutoff = n - 1;
    if n >= 2 {
        let top = out.entries[(cutoff, cutoff)].re;
        let below = out.entries[(cutoff - 1, cutoff - 1)].re;
        if top > 0.0 && below > 0.0 {
            let ratio = top / below;
            if ratio >= 1.0 {
                return Err(Error::DivergentAmplification { ratio });
            }
            truncation_check(cutoff, top * ratio / (1.0 - ratio) / trace)?;
        }
    }
    Ok(FockDensityMatrix::new(out.entries / Complex64::new(trace, 0.0)))
}

/// Amplifies `D(β) ρ_th(λ) D(-β)` by `g`, rejecting `g²λ² >= 1` up front.
pub fn amplify_displaced_thermal(beta: Complex64, lambda: f64, gain: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    let ratio = gain * gain * lambda * lambda;
    if ratio >= 1.0 {
        return Err(Error::DivergentAmplification { ratio });
    }
    apply_nla(&displaced_thermal(beta, lambda, cutoff)?, gain)
}

/// `X` variance of Bob's amplified state when he does not know Alice's
/// symbol: the equal mixture of `D(√T α_k) ρ_th(λ) D(-√T α_k)` through
/// `g^n̂`.
pub fn oracle_output_variance(p: &ProtocolParams, ch: &ChannelParams, gain: f64, cutoff: usize) -> Result<f64> {
    let l2 = lambda_from_noise(ch);
    let ratio = gain * gain * l2;
    if ratio >= 1.0 {
        return Err(Error::DivergentAmplification { ratio });
    }
    let lambda = l2.sqrt();
    let amp = ch.transmittance().sqrt() * p.alpha();
    let dim = cutoff + 1;
    let mut mix = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for k in 0..4 {
        let beta = Complex64::from_polar(amp, (2 * k + 1) as f64 * PI / 4.0);
        mix += displaced_thermal(beta, lambda, cutoff)?.entries * Complex64::new(0.25, 0.0);
    }
    let out = apply_nla(&FockDensityMatrix::new(mix), gain)?;
    Ok(out.quadrature_variance(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourstate::correlation_z;

    const A2: f64 = 0.125;

    #[test]
    fn phi_states_are_orthonormal() {
        let phi = build_phi_states(A2.sqrt(), 40).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let ip = phi[j].inner(&phi[k]);
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((ip - expected).norm() < 1e-10, "⟨φ{j}|φ{k}⟩ = {ip}");
            }
        }
    }

    #[test]
    fn psi_states_are_orthonormal() {
        let psi = build_psi_states(&build_phi_states(0.5f64.sqrt(), 40).unwrap());
        for j in 0..4 {
            for k in 0..4 {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((psi[j].inner(&psi[k]) - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn inadequate_cutoff_is_rejected() {
        assert!(matches!(build_phi_states(1.0, 4), Err(Error::Truncation { .. })));
        assert!(build_phi_states(0.0, 40).is_err());
    }

    #[test]
    fn mode_b_carries_the_coherent_photon_number() {
        let state = four_state_entangled(A2.sqrt(), 40).unwrap();
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((state.reduced_b().mean_photon_number() - A2).abs() < 1e-12);
    }

    #[test]
    fn mode_variances_equal_v() {
        let state = four_state_entangled(A2.sqrt(), 40).unwrap();
        let v = 2.0 * A2 + 1.0;
        for rho in [state.reduced_a(), state.reduced_b()] {
            assert!((rho.quadrature_variance(0.0) - v).abs() < 1e-10);
            assert!((rho.quadrature_variance(PI / 2.0) - v).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_z_matches_closed_form() {
        let z = oracle_z(A2.sqrt(), 40).unwrap();
        assert!((z - 0.742_786).abs() < 1e-6);
        assert!((z - correlation_z(A2.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn momentum_correlation_has_opposite_sign() {
        let state = four_state_entangled(A2.sqrt(), 40).unwrap();
        assert!((state.pp_correlation() + state.xx_correlation()).abs() < 1e-10);
    }

    #[test]
    fn vacuum_and_coherent_references() {
        let vac = displaced_thermal(Complex64::new(0.0, 0.0), 0.0, 10).unwrap();
        assert!((vac.entries()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((vac.trace() - 1.0).abs() < 1e-15);

        let coh = displaced_thermal(Complex64::new(1.0, 0.0), 0.0, 30).unwrap();
        assert!((coh.quadrature_mean(0.0) - 2.0).abs() < 1e-12);
        assert!((coh.quadrature_variance(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn displaced_thermal_variance() {
        let l2: f64 = 0.002 / 2.002;
        let rho = displaced_thermal(Complex64::new(0.5, 0.0), l2.sqrt(), 30).unwrap();
        assert!((rho.quadrature_variance(0.0) - 1.002).abs() < 1e-6);
        assert!((rho.quadrature_variance(PI / 2.0) - 1.002).abs() < 1e-6);
        assert!(rho.hermiticity_error() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn displaced_thermal_validates_lambda() {
        assert!(displaced_thermal(Complex64::new(0.1, 0.0), 1.0, 20).is_err());
        assert!(displaced_thermal(Complex64::new(0.1, 0.0), -0.1, 20).is_err());
        assert!(matches!(
            displaced_thermal(Complex64::new(4.0, 0.0), 0.5, 10),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn unit_gain_is_identity() {
        let rho = displaced_thermal(Complex64::new(0.3, 0.2), 0.1, 40).unwrap();
        let out = apply_nla(&rho, 1.0).unwrap();
        let diff = (out.entries() - rho.entries())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn amplified_coherent_state() {
        let out = amplify_displaced_thermal(Complex64::new(0.3, 0.0), 0.0, 2.0, 40).unwrap();
        assert!((out.mean_annihilation() - Complex64::new(0.6, 0.0)).norm() < 1e-12);
        assert!((out.quadrature_variance(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplified_thermal_state() {
        let out = amplify_displaced_thermal(Complex64::new(0.3, 0.0), 0.1, 2.0, 40).unwrap();
        assert!((out.mean_annihilation().re - 0.618_75).abs() < 1e-5);
        assert!((out.quadrature_variance(0.0) - 1.04 / 0.96).abs() < 1e-5);
        assert!((out.thermal_parameter() - 0.04).abs() < 1e-10);
    }

    #[test]
    fn divergent_gain_is_rejected() {
        assert!(matches!(
            amplify_displaced_thermal(Complex64::new(0.3, 0.0), 0.5, 2.0, 40),
            Err(Error::DivergentAmplification { .. })
        ));
        // without the up-front check the tail ratio catches it
        let rho = displaced_thermal(Complex64::new(0.0, 0.0), 0.6, 120).unwrap();
        assert!(matches!(
            apply_nla(&rho, 2.0),
            Err(Error::DivergentAmplification { .. })
        ));
    }

    #[test]
    fn output_variance_matches_closed_form() {
        use crate::nla::{amplified_output_variance, equivalent_channel};
        let p = ProtocolParams::from_modulation_variance(0.25, 0.8).unwrap();
        let ch = ChannelParams::new(0.5, 0.004).unwrap();
        let oracle = oracle_output_variance(&p, &ch, 2.0, 40).unwrap();
        assert!((oracle - amplified_output_variance(&p, &ch, 2.0)).abs() < 1e-10);
        let eq = equivalent_channel(&ch, 2.0, p.alpha());
        let via_channel = 1.0 + eq.eta * eq.eps_g + 2.0 * eq.eta * eq.alpha_g * eq.alpha_g;
        assert!((oracle - via_channel).abs() < 1e-10);

        let unit = oracle_output_variance(&p, &ch, 1.0, 40).unwrap();
        assert!((unit - (1.0 + 0.5 * 0.004 + 0.5 * 0.25)).abs() < 1e-12);
    }
}
