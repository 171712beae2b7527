//! Ideal noiseless amplifier `g^n̂` at the receiver, handled through the
//! equivalent unamplified protocol with transformed parameters.
//!
//! The received state is a Gaussian mixture of coherent states
//! `|√T(λβ* + α̃/2) + w⟩` with `w` thermal of mean photon number `n = Tε/2`.
//! Since `g^n̂|γ⟩ ∝ e^{(g²-1)|γ|²/2}|gγ⟩`, post-selection reweights the
//! mixture by a Gaussian tilt, which keeps it Gaussian and gives the map below.

use serde::{Deserialize, Serialize};

use crate::baseline::{gaussian_ber, ln_gaussian_ber, ber_noise_from_log, ChannelModel, ProtocolConfig};
use crate::error::{domain, Result, SqccError};
use crate::gaussian::{rate_report, RateReport, TwoModeCovariance};
use crate::scalar::Scalar;

/// Parameters `{α', V', T', ε₀'}` of the equivalent protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams<S> {
    pub alpha_eff: S,
    pub variance_eff: S,
    pub transmissivity_eff: S,
    /// `ε₀' = ε' - (α')²σ`.
    pub excess_noise_eff: S,
    /// Total input-referred excess noise `ε'` of the equivalent channel.
    pub total_excess_eff: S,
}

impl<S: Scalar> EffectiveParams<S> {
    /// `B^ID = T'(V' - 1 + ε') + 1`.
    pub fn bob_noise(&self) -> S {
        self.transmissivity_eff * (self.variance_eff - S::one() + self.total_excess_eff) + S::one()
    }
}

fn out_of_domain<S: Scalar>(gain: S, reason: &'static str) -> SqccError {
    SqccError::GainOutOfDomain {
        gain: gain.to_f64(),
        reason,
    }
}

pub fn effective_params<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
    gain: S,
) -> Result<EffectiveParams<S>> {
    config.validate()?;
    channel.validate()?;
    if !(gain >= S::one()) || gain.is_infinite() {
        return Err(domain(format!("ideal amplifier gain {gain} must be finite and ≥ 1")));
    }
    let one = S::one();
    let two = S::c(2.0);
    let t = channel.transmissivity;
    let v = config.variance;
    let g2 = gain * gain;
    let delta = g2 - one;
    let n = t * config.total_excess(channel) / two;
    let den = one - n * delta;
    if den <= S::zero() {
        return Err(out_of_domain(gain, "thermal noise makes the amplified state unnormalizable"));
    }
    let k = delta / den;
    let lambda2 = (v - one) / (v + one);
    let stretch = one + k * t;
    let lambda2_eff = lambda2 * stretch;
    if lambda2_eff >= one {
        return Err(out_of_domain(gain, "effective squeezing reaches 1"));
    }
    let variance_eff = (one + lambda2_eff) / (one - lambda2_eff);
    let transmissivity_eff = g2 * t / (den * den * stretch);
    if !(transmissivity_eff <= one) || !variance_eff.is_finite() {
        return Err(out_of_domain(gain, "effective transmissivity exceeds 1"));
    }
    let n_eff = n * g2 / den;
    let total_excess_eff = two * n_eff / transmissivity_eff;
    let alpha_eff = config.alpha * stretch.sqrt() * (one - lambda2) / (one - lambda2_eff);
    Ok(EffectiveParams {
        alpha_eff,
        variance_eff,
        transmissivity_eff,
        excess_noise_eff: total_excess_eff - alpha_eff * alpha_eff * config.phase_noise,
        total_excess_eff,
    })
}

/// `e_C^ID = ½ erfc(√(T'α'²/(2B^ID)))`.
pub fn ideal_ber<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
    gain: S,
) -> Result<S> {
    let p = effective_params(config, channel, gain)?;
    Ok(gaussian_ber(p.transmissivity_eff * p.alpha_eff * p.alpha_eff, p.bob_noise()))
}

/// Amplified key rate with success prefactor `1/g²`.
pub fn ideal_key_rate<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
    gain: S,
) -> Result<RateReport<S>> {
    let p = effective_params(config, channel, gain)?;
    let t = p.transmissivity_eff;
    let d_sq = t * p.alpha_eff * p.alpha_eff;
    let b_id = p.bob_noise();
    let e_c = gaussian_ber(d_sq, b_id);
    let eps_ber = ber_noise_from_log(p.alpha_eff, ln_gaussian_ber(d_sq, b_id));
    let v = p.variance_eff;
    let cov = TwoModeCovariance::new(
        v,
        t * (v - S::one() + p.total_excess_eff + eps_ber) + S::one(),
        (t * (v * v - S::one())).sqrt(),
    );
    rate_report(&cov, config.reconciliation, S::one() / (gain * gain), e_c, eps_ber)
}
