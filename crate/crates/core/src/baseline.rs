//! Non-amplified protocol: one pulse carries a BPSK bit `±α e^{iθ}` on top of
//! a Gaussian-modulated key signal.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::{rate_report, RateReport, TwoModeCovariance};
use crate::scalar::Scalar;

/// Thermal-loss channel `{T, ε₀}`; `ε₀` is input-referred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel<S> {
    pub transmissivity: S,
    pub excess_noise: S,
    pub loss_db: S,
}

impl<S: Scalar> ChannelModel<S> {
    pub fn from_loss_db(loss_db: S, excess_noise: S) -> Result<Self> {
        if !(loss_db >= S::zero()) || loss_db.is_infinite() {
            return Err(domain(format!("loss {loss_db} dB must be finite and ≥ 0")));
        }
        let ch = Self {
            transmissivity: S::c(10.0).powf(-loss_db / S::c(10.0)),
            excess_noise,
            loss_db,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn from_transmissivity(transmissivity: S, excess_noise: S) -> Result<Self> {
        if !(transmissivity > S::zero() && transmissivity <= S::one()) {
            return Err(domain(format!("transmissivity {transmissivity} outside (0, 1]")));
        }
        let ch = Self {
            transmissivity,
            excess_noise,
            loss_db: -S::c(10.0) * transmissivity.log10(),
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.transmissivity;
        if !(t > S::zero() && t <= S::one()) {
            return Err(domain(format!("transmissivity {t} outside (0, 1]")));
        }
        if !(self.excess_noise >= S::zero()) || self.excess_noise.is_infinite() {
            return Err(domain(format!("excess noise {} must be finite and ≥ 0", self.excess_noise)));
        }
        Ok(())
    }
}

/// Alice-side settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig<S> {
    /// Modulation variance `V ≥ 1`.
    pub variance: S,
    /// Classical displacement `α ≥ 0` (x-quadrature mean of the bit).
    pub alpha: S,
    /// BPSK orientation `θ`.
    pub theta: S,
    /// Phase-noise coefficient `σ`; adds `α²σ` excess noise.
    pub phase_noise: S,
    /// Reconciliation efficiency `β`.
    pub reconciliation: S,
}

impl<S: Scalar> ProtocolConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance >= S::one()) || self.variance.is_infinite() {
            return Err(domain(format!("modulation variance {} must be ≥ 1", self.variance)));
        }
        if !(self.alpha >= S::zero()) || self.alpha.is_infinite() {
            return Err(domain(format!("amplitude {} must be finite and ≥ 0", self.alpha)));
        }
        if !(self.phase_noise >= S::zero()) {
            return Err(domain(format!("phase noise {} must be ≥ 0", self.phase_noise)));
        }
        if !(self.reconciliation >= S::zero() && self.reconciliation <= S::one()) {
            return Err(domain(format!("reconciliation {} outside [0, 1]", self.reconciliation)));
        }
        if !self.theta.is_finite() {
            return Err(domain("BPSK orientation must be finite"));
        }
        Ok(())
    }

    /// `ε_σ = α²σ`.
    pub fn phase_noise_excess(&self) -> S {
        self.alpha * self.alpha * self.phase_noise
    }

    /// `ε = ε₀ + α²σ`.
    pub fn total_excess(&self, channel: &ChannelModel<S>) -> S {
        channel.excess_noise + self.phase_noise_excess()
    }
}

/// Quantum and classical service targets `{K₀, e_C₀}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosTarget<S> {
    pub min_key_rate: S,
    pub max_ber: S,
}

impl<S: Scalar> QosTarget<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_key_rate > S::zero()) {
            return Err(domain(format!("K₀ = {} must be > 0", self.min_key_rate)));
        }
        if !(self.max_ber > S::zero() && self.max_ber < S::one()) {
            return Err(domain(format!("e_C₀ = {} outside (0, 1)", self.max_ber)));
        }
        Ok(())
    }
}

fn check<S: Scalar>(config: &ProtocolConfig<S>, channel: &ChannelModel<S>) -> Result<()> {
    config.validate()?;
    channel.validate()
}

/// Covariance after the channel, `(V, T(V + χ), √(T(V² - 1)))` with
/// `χ = (1-T)/T + ε₀ + α²σ`.
pub fn channel_cov<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
) -> Result<TwoModeCovariance<S>> {
    check(config, channel)?;
    let v = config.variance;
    let t = channel.transmissivity;
    // T(V + χ) written without the 1/T to stay exact at T = 1
    let b = t * (v - S::one() + config.total_excess(channel)) + S::one();
    Ok(TwoModeCovariance::new(v, b, (t * (v * v - S::one())).sqrt()))
}

/// `B = T(V - 1 + ε₀ + α²σ) + 1`.
pub fn total_noise_b<S: Scalar>(config: &ProtocolConfig<S>, channel: &ChannelModel<S>) -> Result<S> {
    check(config, channel)?;
    Ok(channel.transmissivity * (config.variance - S::one() + config.total_excess(channel)) + S::one())
}

/// `½ erfc(√(d²/(2B)))` for a decision on a Gaussian of mean `±d`.
pub fn gaussian_ber<S: Scalar>(d_sq: S, variance: S) -> S {
    S::c(0.5) * (d_sq / (S::c(2.0) * variance)).sqrt().erfc()
}

/// Natural log of [`gaussian_ber`].
pub fn ln_gaussian_ber<S: Scalar>(d_sq: S, variance: S) -> S {
    (d_sq / (S::c(2.0) * variance)).sqrt().ln_erfc() - S::LN_2()
}

/// `e_C = ½ erfc(√(Tα²/(2B)))`.
pub fn ber<S: Scalar>(config: &ProtocolConfig<S>, channel: &ChannelModel<S>) -> Result<S> {
    let b = total_noise_b(config, channel)?;
    Ok(gaussian_ber(channel.transmissivity * config.alpha * config.alpha, b))
}

/// `ln e_C`, finite where `e_C` itself underflows.
pub fn ln_ber<S: Scalar>(config: &ProtocolConfig<S>, channel: &ChannelModel<S>) -> Result<S> {
    let b = total_noise_b(config, channel)?;
    Ok(ln_gaussian_ber(channel.transmissivity * config.alpha * config.alpha, b))
}

/// `ε_BER = 4α² e_C`.
pub fn ber_noise<S: Scalar>(alpha: S, e_c: S) -> S {
    S::c(4.0) * alpha * alpha * e_c
}

/// `4α² e_C` from `ln e_C`, so that `α² → ∞` with `e_C → 0` stays finite.
pub fn ber_noise_from_log<S: Scalar>(alpha: S, ln_e_c: S) -> S {
    if alpha == S::zero() {
        return S::zero();
    }
    (S::c(4.0).ln() + S::c(2.0) * alpha.ln() + ln_e_c).exp()
}

/// Key rate of the non-amplified protocol including the post-processing
/// noise of wrong-bit displacement reversal.
pub fn sqcc_key_rate<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
) -> Result<RateReport<S>> {
    let base = channel_cov(config, channel)?;
    let e_c = ber(config, channel)?;
    let eps_ber = ber_noise_from_log(config.alpha, ln_ber(config, channel)?);
    let t = channel.transmissivity;
    let cov = TwoModeCovariance::new(base.a, base.b + t * eps_ber, base.c);
    rate_report(&cov, config.reconciliation, S::one(), e_c, eps_ber)
}

/// Mean photon number of the pulse, `n̄ = α² + 2V`.
pub fn mean_photon<S: Scalar>(alpha: S, variance: S) -> S {
    alpha * alpha + S::c(2.0) * variance
}
