//! Tap-and-amplify receiver: a fraction `1 - t` of the received light is
//! heterodyned to decode the classical bit, the bit is undone on the
//! remaining light, and the now zero-mean signal goes through a scissor.

use crate::baseline::{ChannelModel, ProtocolConfig};
use crate::error::{domain, Result};
use crate::gaussian::RateReport;
use crate::scalar::Scalar;
use crate::scissor::scissor_key_rate;
use crate::special;

/// Amplitude at and above which, with `σ = 0`, the tap decodes essentially
/// without error and only log-domain quantities are meaningful.
pub const EXACT_DECODE_ALPHA: f64 = 1e6;

fn check_t<S: Scalar>(t: S) -> Result<()> {
    if !(t > S::zero() && t <= S::one()) {
        return Err(domain(format!("tap transmissivity {t} outside (0, 1]")));
    }
    Ok(())
}

/// `B_tap = (1-t)T(V - 1 + ε₀ + α²σ) + 1`.
pub fn tap_noise<S: Scalar>(config: &ProtocolConfig<S>, channel: &ChannelModel<S>, t: S) -> Result<S> {
    config.validate()?;
    channel.validate()?;
    check_t(t)?;
    Ok((S::one() - t) * channel.transmissivity * (config.variance - S::one() + config.total_excess(channel))
        + S::one())
}

/// `ln e_tap` with `e_tap = ½ erfc(√((1-t)Tα²/(2B_tap)))`.
pub fn ln_tap_ber<S: Scalar>(config: &ProtocolConfig<S>, channel: &ChannelModel<S>, t: S) -> Result<S> {
    let b = tap_noise(config, channel, t)?;
    let d_sq = (S::one() - t) * channel.transmissivity * config.alpha * config.alpha;
    Ok(S::c(special::ln_half_erfc((d_sq / (S::c(2.0) * b)).sqrt().to_f64())))
}

pub fn tap_ber<S: Scalar>(config: &ProtocolConfig<S>, channel: &ChannelModel<S>, t: S) -> Result<S> {
    Ok(ln_tap_ber(config, channel, t)?.exp())
}

/// Input-referred residual noise `ε_tap/(tT) = 4α²e_tap` left on the retained
/// arm by wrong-bit reversal.
pub fn residual_noise<S: Scalar>(config: &ProtocolConfig<S>, channel: &ChannelModel<S>, t: S) -> Result<S> {
    let ln_e = ln_tap_ber(config, channel, t)?;
    if config.alpha == S::zero() {
        return Ok(S::zero());
    }
    Ok((S::c(4.0).ln() + S::c(2.0) * config.alpha.ln() + ln_e).exp())
}

/// Whether `(α, σ)` puts the tap in the exact-decode regime.
pub fn exact_decode<S: Scalar>(config: &ProtocolConfig<S>) -> bool {
    config.alpha >= S::c(EXACT_DECODE_ALPHA) && config.phase_noise == S::zero()
}

/// Key rate of the retained arm: a zero-mean scissor-amplified signal over
/// transmissivity `tT` with excess noise `ε₀ + α²σ + ε_tap/(tT)`.
/// `ber` in the report is the tap error rate.
pub fn dual_key_rate<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
    gain: S,
    t: S,
) -> Result<RateReport<S>> {
    let e_tap = tap_ber(config, channel, t)?;
    let residual = residual_noise(config, channel, t)?;
    let retained = ChannelModel::from_transmissivity(
        t * channel.transmissivity,
        config.total_excess(channel) + residual,
    )?;
    let quantum = ProtocolConfig {
        alpha: S::zero(),
        phase_noise: S::zero(),
        ..*config
    };
    let mut report = scissor_key_rate(&quantum, &retained, gain)?;
    report.ber = e_tap;
    report.ber_noise = residual * t * channel.transmissivity;
    Ok(report)
}
