//! First-order quantum-scissor receiver.
//!
//! The moments of the heralded state are evaluated in closed form. Alice's
//! heterodyne outcome `u` and the channel noise `w` make the scissor input a
//! Gaussian mixture of coherent states `|γ⟩`, `γ = √T λ u + a + w`, and every
//! heralded quantity is a Gaussian-weighted polynomial in `γ` times
//! `e^{-|γ|²/2}` or `e^{-|γ|²}`. Real and imaginary parts factorize, so each
//! expectation reduces to moments of a tilted bivariate normal.

use serde::{Deserialize, Serialize};

use crate::baseline::{gaussian_ber, ln_gaussian_ber, ber_noise_from_log, ChannelModel, ProtocolConfig};
use crate::error::{domain, Result, SqccError};
use crate::gaussian::{rate_report, RateReport, TwoModeCovariance};
use crate::scalar::Scalar;

/// How the protocol amplitude `α` maps to the x-quadrature mean entering
/// the scissor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeConvention {
    /// `α` is already the mean at the scissor input (no channel scaling).
    AtScissor,
    /// The mean at the scissor input is `√T α`.
    Transmitted,
    /// `α` is a complex amplitude, so the mean at the scissor input is `2√T α`.
    #[default]
    TransmittedAmplitude,
}

impl AmplitudeConvention {
    pub fn input_mean<S: Scalar>(self, alpha: S, transmissivity: S) -> S {
        match self {
            Self::AtScissor => alpha,
            Self::Transmitted => transmissivity.sqrt() * alpha,
            Self::TransmittedAmplitude => S::c(2.0) * transmissivity.sqrt() * alpha,
        }
    }
}

/// Resource beamsplitter and the noise parameters `R`, `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScissorPoint<S> {
    pub tau: S,
    pub gain: S,
    /// `R = 2 + T(V + ε - 1)`.
    pub r_param: S,
    /// `S = R + 2`.
    pub s_param: S,
}

impl<S: Scalar> ScissorPoint<S> {
    pub fn new(config: &ProtocolConfig<S>, channel: &ChannelModel<S>, gain: S) -> Result<Self> {
        config.validate()?;
        channel.validate()?;
        let tau = gain_to_tau(gain)?;
        let two = S::c(2.0);
        let r = two
            + channel.transmissivity * (config.variance + config.total_excess(channel) - S::one());
        Ok(Self {
            tau,
            gain,
            r_param: r,
            s_param: r + two,
        })
    }
}

/// Heralded-state quantities for one accepted detector pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScissorMoments<S> {
    /// Single-pattern success probability `P^QS`.
    pub success_prob: S,
    /// Magnitude `d_QS` of Bob's output mean.
    pub displacement: S,
    /// Variance `B^QS` of Bob's x quadrature.
    pub bob_variance: S,
    /// Variance `A^QS` of Alice's x quadrature.
    pub alice_variance: S,
    /// `|Cov(x_A, x_B)|`.
    pub correlation: S,
    /// Alice's x mean, shifted by post-selection when `α ≠ 0`.
    pub alice_mean: S,
    /// p-quadrature counterparts of the three second moments.
    /// `correlation_p` is `Cov(p_A, p_B)` times the sign of `Cov(x_A, x_B)`,
    /// so it is negative for the usual `σz` structure.
    pub alice_variance_p: S,
    pub bob_variance_p: S,
    pub correlation_p: S,
}

impl<S: Scalar> ScissorMoments<S> {
    /// Phase-averaged covariance `((A_x+A_p)/2, (B_x+B_p)/2, |C_x-C_p|/2)`.
    /// It is the covariance of the
    /// state twirled by opposite phase rotations on the two modes, so it is
    /// physical, and it equals the x block when the state is phase symmetric.
    pub fn symmetric_covariance(&self) -> TwoModeCovariance<S> {
        let half = S::c(0.5);
        TwoModeCovariance::new(
            half * (self.alice_variance + self.alice_variance_p),
            half * (self.bob_variance + self.bob_variance_p),
            half * (self.correlation - self.correlation_p).abs(),
        )
    }
}

/// `τ = 1/(1 + g²)`.
pub fn gain_to_tau<S: Scalar>(gain: S) -> Result<S> {
    if !(gain > S::zero()) || gain.is_infinite() {
        return Err(domain(format!("scissor gain {gain} must be finite and > 0")));
    }
    Ok(S::one() / (S::one() + gain * gain))
}

/// `g = √((1-τ)/τ)`.
pub fn tau_to_gain<S: Scalar>(tau: S) -> Result<S> {
    if !(tau > S::zero() && tau < S::one()) {
        return Err(domain(format!("scissor τ = {tau} outside (0, 1)")));
    }
    Ok(((S::one() - tau) / tau).sqrt())
}

fn underflow<S: Scalar>(what: &str, alpha: S) -> SqccError {
    SqccError::NumericUnderflow(format!("{what} underflows at input mean {alpha}"))
}

/// Closed-form single-pattern success probability for input mean `α`
/// (`4e^{-α²/2S}[τ(α²-2S)+S²]/S³ - 2(1-τ)e^{-α²/2R}/R`).
pub fn scissor_success_prob<S: Scalar>(alpha: S, point: &ScissorPoint<S>) -> Result<S> {
    let ScissorPoint {
        tau,
        r_param: r,
        s_param: s,
        ..
    } = *point;
    let one = S::one();
    let two = S::c(2.0);
    let a2 = alpha * alpha;
    let outer = (-a2 / (two * s)).exp();
    if outer == S::zero() {
        return Err(underflow("success probability", alpha));
    }
    let rel = (a2 / (two * s) - a2 / (two * r)).exp();
    let bracket = S::c(4.0) * (tau * (a2 - two * s) + s * s) / (s * s * s)
        - two * (one - tau) * rel / r;
    let p = outer * bracket;
    if !(p > S::zero()) {
        return Err(underflow("success probability", alpha));
    }
    Ok(p.min(one))
}

/// Closed-form squared output mean `d_QS²`.
pub fn scissor_displacement_sq<S: Scalar>(alpha: S, point: &ScissorPoint<S>) -> Result<S> {
    let ScissorPoint {
        tau,
        r_param: r,
        s_param: s,
        ..
    } = *point;
    let one = S::one();
    let two = S::c(2.0);
    let a2 = alpha * alpha;
    // numerator and denominator both scaled by e^{-α²/R}
    let rel = (a2 / (two * s) - a2 / (two * r)).exp();
    let den = two * r * (tau * (a2 - two * s) + s * s) - s * s * s * (one - tau) * rel;
    if den == S::zero() {
        return Err(underflow("output displacement", alpha));
    }
    Ok(S::c(16.0) * a2 * (one - tau) * tau * r * r * s * s / (den * den))
}

/// Bob's x variance exactly as typeset in the closed-form expression with
/// the `cos²θ` term. It differs from the variance of the heralded state by
/// `(1 - P^QS)·d²cos²θ`; [`scissor_moments`] uses the latter.
pub fn scissor_bob_variance_typeset<S: Scalar>(
    alpha: S,
    theta: S,
    point: &ScissorPoint<S>,
) -> Result<S> {
    let ScissorPoint {
        tau,
        r_param: r,
        s_param: s,
        ..
    } = *point;
    let one = S::one();
    let two = S::c(2.0);
    let a2 = alpha * alpha;
    let cos2 = theta.cos().powi(2);
    // every exponential divided by e^{α²(R+S)/(2RS)}
    let e_first = (-a2 / (two * s)).exp();
    let e_sq = (a2 / (two * s) - a2 / (two * r)).exp();
    let num = -S::c(32.0) * a2 * r * (one - tau) * tau * e_first * cos2
        - S::c(3.0) * s.powi(4) * (one - tau) * e_sq
        + two * r * s * (tau * (a2 - two * s) - s * s * (two * tau - S::c(3.0)));
    let den = two * r * s * (tau * (a2 - two * s) + s * s) - s.powi(4) * (one - tau) * e_sq;
    if den == S::zero() {
        return Err(underflow("output variance", alpha));
    }
    Ok(num / den)
}

/// Bivariate normal `(X, Y)` moments up to `E[X²Y²]`.
#[derive(Debug, Clone, Copy)]
struct Bivariate<S> {
    mx: S,
    my: S,
    vx: S,
    vy: S,
    cxy: S,
}

impl<S: Scalar> Bivariate<S> {
    /// `E[X^i Y^j]` for `i, j ≤ 2`.
    fn moment(&self, i: u32, j: u32) -> S {
        let Self { mx, my, vx, vy, cxy } = *self;
        let two = S::c(2.0);
        // centred moments E[A^p B^q], A = X - mx, B = Y - my
        let central = |p: u32, q: u32| -> S {
            match (p, q) {
                (0, 0) => S::one(),
                (2, 0) => vx,
                (0, 2) => vy,
                (1, 1) => cxy,
                (2, 2) => vx * vy + two * cxy * cxy,
                _ => S::zero(),
            }
        };
        let binom = |n: u32, k: u32| -> S {
            match (n, k) {
                (2, 1) => two,
                _ => S::one(),
            }
        };
        let mut acc = S::zero();
        for p in 0..=i {
            for q in 0..=j {
                acc = acc
                    + binom(i, p)
                        * binom(j, q)
                        * mx.powi((i - p) as i32)
                        * my.powi((j - q) as i32)
                        * central(p, q);
            }
        }
        acc
    }
}

/// One quadrature of the mixture: `X` is Alice's outcome component,
/// `Y = κX + μ + W` the matching component of `γ`.
#[derive(Debug, Clone, Copy)]
struct Quadrature<S> {
    vx: S,
    vy: S,
    cxy: S,
    mu: S,
}

impl<S: Scalar> Quadrature<S> {
    fn new(kappa: S, vu: S, vw: S, mu: S) -> Self {
        Self {
            vx: vu,
            vy: kappa * kappa * vu + vw,
            cxy: kappa * vu,
            mu,
        }
    }

    /// `ln E[e^{-sY²}]`.
    fn ln_weight(&self, s: S) -> S {
        let q = S::c(2.0) * s * self.vy;
        -S::c(0.5) * q.ln_1p() - s * self.mu * self.mu / (S::one() + q)
    }

    /// The normal law of `(X, Y)` after tilting by `e^{-sY²}`.
    fn tilted(&self, s: S) -> Bivariate<S> {
        let q = S::one() + S::c(2.0) * s * self.vy;
        let my = self.mu / q;
        let vy = self.vy / q;
        let slope = if self.vy > S::zero() {
            self.cxy / self.vy
        } else {
            S::zero()
        };
        Bivariate {
            mx: slope * (my - self.mu),
            my,
            vx: self.vx - slope * self.cxy + slope * slope * vy,
            vy,
            cxy: slope * vy,
        }
    }
}

/// Full heralded-state moments for input mean `alpha_in` at orientation `θ`.
pub fn scissor_moments_at<S: Scalar>(
    alpha_in: S,
    theta: S,
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
    gain: S,
) -> Result<ScissorMoments<S>> {
    let point = ScissorPoint::new(config, channel, gain)?;
    let one = S::one();
    let half = S::c(0.5);
    let tau = point.tau;
    let t = channel.transmissivity;
    let v = config.variance;
    let kappa = (t * (v - one) / (v + one)).sqrt();
    let vu = (v + one) / S::c(4.0);
    let vw = t * config.total_excess(channel) / S::c(4.0);
    let re = Quadrature::new(kappa, vu, vw, half * alpha_in * theta.cos());
    let im = Quadrature::new(kappa, vu, vw, half * alpha_in * theta.sin());

    let x = quadrature_moments(&re, &im, tau)?;
    let p = quadrature_moments(&im, &re, tau)?;
    Ok(ScissorMoments {
        success_prob: x.herald.min(one),
        displacement: (x.bob_mean * x.bob_mean + p.bob_mean * p.bob_mean).sqrt(),
        bob_variance: x.bob_variance,
        alice_variance: x.alice_variance,
        correlation: x.correlation.abs(),
        alice_mean: x.alice_mean,
        alice_variance_p: p.alice_variance,
        bob_variance_p: p.bob_variance,
        // p_A pairs with -Im u, which flips the sign of the p correlation
        correlation_p: -p.correlation * x.correlation.signum(),
    })
}

struct QuadratureMoments<S> {
    herald: S,
    bob_mean: S,
    bob_variance: S,
    alice_mean: S,
    alice_variance: S,
    /// Signed `Cov(2 Re u, x_B)`.
    correlation: S,
}

/// Moments along `main`, with `other` the orthogonal quadrature of `γ`.
fn quadrature_moments<S: Scalar>(
    main: &Quadrature<S>,
    other: &Quadrature<S>,
    tau: S,
) -> Result<QuadratureMoments<S>> {
    let one = S::one();
    let two = S::c(2.0);
    let half = S::c(0.5);
    let quarter = S::c(0.25);
    let (lm_h, lm_1) = (main.ln_weight(half), main.ln_weight(one));
    let (lo_h, lo_1) = (other.ln_weight(half), other.ln_weight(one));
    let ln_h = lm_h + lo_h;
    let w_h = ln_h.exp();
    if w_h == S::zero() {
        return Err(underflow("heralding probability", main.mu));
    }
    let (bm_h, bm_1) = (main.tilted(half), main.tilted(one));
    let bo_h = other.tilted(half);
    // E[e^{-|γ|²/2}] - E[e^{-|γ|²}], kept accurate when both are near 1
    let w_diff = -w_h * (lm_1 + lo_1 - ln_h).exp_m1();
    let w_1 = (lm_1 + lo_1).exp();
    let other_sq = bo_h.moment(0, 2);

    // (1-τ)(e^{-|γ|²/2} - e^{-|γ|²}) weighted by f(X), f ∈ {1, X, X²}
    let rho11 = |i: u32| -> S {
        if i == 0 {
            (one - tau) * w_diff
        } else {
            (one - tau) * (w_h * bm_h.moment(i, 0) - w_1 * bm_1.moment(i, 0))
        }
    };
    let herald = |i: u32| -> S {
        rho11(i)
            + half * tau * w_h * bm_h.moment(i, 0)
            + quarter * tau * w_h * (bm_h.moment(i, 2) + bm_h.moment(i, 0) * other_sq)
    };
    let p = herald(0);
    if !(p > S::zero()) {
        return Err(underflow("heralding probability", main.mu));
    }
    let coupling = -(tau * (one - tau)).sqrt();
    let bob_mean = coupling * w_h * bm_h.moment(0, 1) / p;
    let bob_sq = one + two * rho11(0) / p;
    let alice_mean = two * herald(1) / p;
    let alice_sq = S::c(4.0) * herald(2) / p - one;
    let cross = two * coupling * w_h * bm_h.moment(1, 1) / p;
    Ok(QuadratureMoments {
        herald: p,
        bob_mean,
        bob_variance: bob_sq - bob_mean * bob_mean,
        alice_mean,
        alice_variance: alice_sq - alice_mean * alice_mean,
        correlation: cross - alice_mean * bob_mean,
    })
}

/// Heralded-state moments under the given amplitude convention.
pub fn scissor_moments_with<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
    gain: S,
    convention: AmplitudeConvention,
) -> Result<ScissorMoments<S>> {
    let alpha_in = convention.input_mean(config.alpha, channel.transmissivity);
    scissor_moments_at(alpha_in, config.theta, config, channel, gain)
}

pub fn scissor_moments<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
    gain: S,
) -> Result<ScissorMoments<S>> {
    scissor_moments_with(config, channel, gain, AmplitudeConvention::default())
}

/// `e_C^QS = ½ erfc(√(d²/(2B^QS)))`.
pub fn scissor_ber<S: Scalar>(moments: &ScissorMoments<S>) -> S {
    let d = moments.displacement;
    gaussian_ber(d * d, moments.bob_variance)
}

pub fn scissor_key_rate_with<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
    gain: S,
    convention: AmplitudeConvention,
) -> Result<RateReport<S>> {
    let m = scissor_moments_with(config, channel, gain, convention)?;
    let d_sq = m.displacement * m.displacement;
    let e_c = scissor_ber(&m);
    let eps_ber = ber_noise_from_log(m.displacement, ln_gaussian_ber(d_sq, m.bob_variance));
    let sym = m.symmetric_covariance();
    let cov = TwoModeCovariance::new(sym.a, sym.b + channel.transmissivity * eps_ber, sym.c);
    let prefactor = (S::c(2.0) * m.success_prob).min(S::one());
    rate_report(&cov, config.reconciliation, prefactor, e_c, eps_ber)
}

/// `K^QS = 2P^QS[β I_AB - χ_EB]` on the Gaussian state with the heralded
/// state's moments; `ε_BER^QS = 4d²e_C^QS` enters Bob's variance scaled by `T`.
pub fn scissor_key_rate<S: Scalar>(
    config: &ProtocolConfig<S>,
    channel: &ChannelModel<S>,
    gain: S,
) -> Result<RateReport<S>> {
    scissor_key_rate_with(config, channel, gain, AmplitudeConvention::default())
}
