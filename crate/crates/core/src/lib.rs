//! Key-rate, bit-error-rate and photon-budget models for continuous-variable
//! QKD pulses that also carry a classical BPSK bit, with optional
//! noiseless amplification at the receiver.
//!
//! All variances are in shot-noise units (vacuum variance 1). The analytic
//! models are generic over [`Scalar`]; the optimizer and oracle checks run
//! in `f64`.

pub mod baseline;
pub mod dual;
pub mod error;
pub mod gaussian;
pub mod ideal;
pub mod optimize;
pub mod oracle;
pub mod photon;
pub mod scalar;
pub mod scissor;
pub mod special;

pub use error::{Result, SqccError};
pub use scalar::Scalar;

pub type TwoModeCovariance = gaussian::TwoModeCovariance<f64>;
pub type EntropySpectrum = gaussian::EntropySpectrum<f64>;
pub type RateReport = gaussian::RateReport<f64>;
pub type ChannelModel = baseline::ChannelModel<f64>;
pub type ProtocolConfig = baseline::ProtocolConfig<f64>;
pub type QosTarget = baseline::QosTarget<f64>;
pub type EffectiveParams = ideal::EffectiveParams<f64>;
pub type ScissorPoint = scissor::ScissorPoint<f64>;
pub type ScissorMoments = scissor::ScissorMoments<f64>;
