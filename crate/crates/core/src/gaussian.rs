//! Two-mode Gaussian information quantities in shot-noise units.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, SqccError};
use crate::scalar::Scalar;

/// Absolute tolerance for physicality checks; values inside the band are
/// clamped rather than rejected.
pub const PHYS_TOL: f64 = 1e-9;

/// Covariance `(a𝕀, cσz; cσz, b𝕀)` of Alice's and Bob's modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeCovariance<S> {
    pub a: S,
    pub b: S,
    pub c: S,
}

impl<S: Scalar> TwoModeCovariance<S> {
    pub fn new(a: S, b: S, c: S) -> Self {
        Self { a, b, c }
    }

    /// Two-mode squeezed vacuum of modulation variance `V`.
    pub fn tmsv(v: S) -> Self {
        Self::new(v, v, (v * v - S::one()).max(S::zero()).sqrt())
    }

    /// Two-mode squeezed vacuum from the squeezing parameter `λ ∈ [0, 1)`.
    pub fn from_lambda(lambda: S) -> Result<Self> {
        if !(lambda >= S::zero() && lambda < S::one()) {
            return Err(domain(format!("squeezing λ = {lambda} outside [0, 1)")));
        }
        let l2 = lambda * lambda;
        Ok(Self::tmsv((S::one() + l2) / (S::one() - l2)))
    }

    /// `ab - c²`.
    pub fn determinant_root(&self) -> S {
        self.a * self.b - self.c * self.c
    }

    fn non_physical(&self, reason: &'static str) -> SqccError {
        SqccError::NonPhysicalCovariance {
            a: self.a.to_f64(),
            b: self.b.to_f64(),
            c: self.c.to_f64(),
            reason,
        }
    }

    /// Checks `a, b ≥ 1` and `ab - c² - 1 ≥ |a - b|` (equivalently `ν₋ ≥ 1`)
    /// within [`PHYS_TOL`].
    pub fn validate(&self) -> Result<()> {
        let lo = S::one() - S::c(PHYS_TOL);
        if !(self.a.is_finite() && self.b.is_finite() && self.c.is_finite()) {
            return Err(self.non_physical("non-finite entry"));
        }
        if self.a < lo || self.b < lo {
            return Err(self.non_physical("diagonal entry below vacuum"));
        }
        if self.determinant_root() < lo {
            return Err(self.non_physical("ab - c² below 1"));
        }
        let slack = S::c(PHYS_TOL) * (self.a * self.b).max(S::one());
        if self.determinant_root() - S::one() < (self.a - self.b).abs() - slack {
            return Err(self.non_physical("smaller symplectic eigenvalue below 1"));
        }
        Ok(())
    }
}

/// Symplectic eigenvalues of the joint state and of Alice's mode
/// conditioned on Bob's heterodyne.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySpectrum<S> {
    pub nu1: S,
    pub nu2: S,
    pub nu3: S,
}

/// Per-operating-point result of a key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport<S> {
    pub mutual_information: S,
    pub holevo: S,
    /// `max(0, signed_rate)`.
    pub key_rate: S,
    /// `prefactor · (β I_AB - χ_EB)` before clamping.
    pub signed_rate: S,
    pub ber: S,
    pub success_prob: S,
    pub ber_noise: S,
    pub covariance: TwoModeCovariance<S>,
}

fn clamp_unit<S: Scalar>(nu: S) -> Option<S> {
    if nu >= S::one() {
        Some(nu)
    } else if nu >= S::one() - S::c(PHYS_TOL) {
        Some(S::one())
    } else {
        None
    }
}

/// `(ν₁, ν₂)` with `ν₁ ≥ ν₂ ≥ 1`.
pub fn symplectic_eigenvalues<S: Scalar>(cov: &TwoModeCovariance<S>) -> Result<(S, S)> {
    cov.validate()?;
    let TwoModeCovariance { a, b, c } = *cov;
    let two = S::c(2.0);
    let delta = a * a + b * b - two * c * c;
    let d = cov.determinant_root();
    let mut disc = delta * delta - S::c(4.0) * d * d;
    if disc < S::zero() {
        // relative band: Δ² and 4D² are both O(a²b²)
        if disc < -S::c(PHYS_TOL) * delta * delta {
            return Err(cov.non_physical("Δ² < 4D²"));
        }
        disc = S::zero();
    }
    let plus2 = (delta + disc.sqrt()) / two;
    // ν₊²ν₋² = D² avoids cancellation for nearly pure states
    let minus2 = d * d / plus2;
    let nu1 = clamp_unit(plus2.sqrt()).ok_or_else(|| cov.non_physical("ν₁ < 1"))?;
    let nu2 = clamp_unit(minus2.sqrt()).ok_or_else(|| cov.non_physical("ν₂ < 1"))?;
    Ok((nu1, nu2))
}

/// `ν₃ = a - c²/(b + 1)`.
pub fn conditional_eigenvalue<S: Scalar>(cov: &TwoModeCovariance<S>) -> Result<S> {
    let nu3 = cov.a - cov.c * cov.c / (cov.b + S::one());
    clamp_unit(nu3).ok_or_else(|| cov.non_physical("conditional eigenvalue below 1"))
}

pub fn entropy_spectrum<S: Scalar>(cov: &TwoModeCovariance<S>) -> Result<EntropySpectrum<S>> {
    let (nu1, nu2) = symplectic_eigenvalues(cov)?;
    let nu3 = conditional_eigenvalue(cov)?;
    Ok(EntropySpectrum { nu1, nu2, nu3 })
}

fn xlog2x<S: Scalar>(x: S) -> S {
    if x <= S::zero() {
        S::zero()
    } else {
        x * x.log2()
    }
}

/// Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue `ν`.
pub fn entropy_g<S: Scalar>(nu: S) -> Result<S> {
    let nu = clamp_unit(nu).ok_or_else(|| domain(format!("entropy_g needs ν ≥ 1, got {nu}")))?;
    let half = S::c(0.5);
    Ok(xlog2x((nu + S::one()) * half) - xlog2x((nu - S::one()) * half))
}

/// `I_AB = log₂((a+1)/(a+1 - c²/(b+1)))`.
/// Only the denominator is checked, not full physicality.
pub fn mutual_information<S: Scalar>(cov: &TwoModeCovariance<S>) -> Result<S> {
    if !(cov.a.is_finite() && cov.b.is_finite() && cov.c.is_finite()) {
        return Err(cov.non_physical("non-finite entry"));
    }
    if cov.b + S::one() <= S::zero() {
        return Err(cov.non_physical("b + 1 ≤ 0"));
    }
    let ap1 = cov.a + S::one();
    let x = cov.c * cov.c / ((cov.b + S::one()) * ap1);
    if x >= S::one() {
        return Err(cov.non_physical("mutual-information denominator ≤ 0"));
    }
    Ok(-(-x).ln_1p() / S::LN_2())
}

/// `χ_EB = G(ν₁) + G(ν₂) - G(ν₃)`.
pub fn holevo_bound<S: Scalar>(cov: &TwoModeCovariance<S>) -> Result<S> {
    let spec = entropy_spectrum(cov)?;
    let chi = entropy_g(spec.nu1)? + entropy_g(spec.nu2)? - entropy_g(spec.nu3)?;
    if chi >= S::zero() {
        Ok(chi)
    } else if chi >= -S::c(PHYS_TOL) {
        Ok(S::zero())
    } else {
        Err(cov.non_physical("negative Holevo information"))
    }
}

/// Assembles a [`RateReport`] with the given success prefactor; `ber` and
/// `ber_noise` are carried through unchanged.
pub fn rate_report<S: Scalar>(
    cov: &TwoModeCovariance<S>,
    beta: S,
    prefactor: S,
    ber: S,
    ber_noise: S,
) -> Result<RateReport<S>> {
    if !(beta >= S::zero() && beta <= S::one()) {
        return Err(domain(format!("reconciliation efficiency {beta} outside [0, 1]")));
    }
    if !(prefactor > S::zero() && prefactor <= S::one()) {
        return Err(domain(format!("prefactor {prefactor} outside (0, 1]")));
    }
    let mutual_information = mutual_information(cov)?;
    let holevo = holevo_bound(cov)?;
    let signed_rate = prefactor * (beta * mutual_information - holevo);
    Ok(RateReport {
        mutual_information,
        holevo,
        key_rate: signed_rate.max(S::zero()),
        signed_rate,
        ber,
        success_prob: prefactor,
        ber_noise,
        covariance: *cov,
    })
}

/// `max(0, prefactor·(β I_AB - χ_EB))`.
pub fn key_rate<S: Scalar>(cov: &TwoModeCovariance<S>, beta: S, prefactor: S) -> Result<S> {
    Ok(rate_report(cov, beta, prefactor, S::c(0.5), S::zero())?.key_rate)
}

/// Repeaterless bound `-log₂(1 - T)`.
pub fn plob_bound<S: Scalar>(t: S) -> Result<S> {
    if !(t > S::zero() && t < S::one()) {
        return Err(domain(format!("transmissivity {t} outside (0, 1)")));
    }
    Ok(-(-t).ln_1p() / S::LN_2())
}

/// Entropy (bits) of a thermal mode with mean photon number `x`.
pub fn thermal_entropy<S: Scalar>(x: S) -> S {
    let xp1 = x + S::one();
    xlog2x(xp1) - xlog2x(x)
}

/// `g[(1+T)N/2] - g[(1-T)N/2]` for mean input photon number `N`.
pub fn takeoka_bound<S: Scalar>(t: S, n_mode: S) -> Result<S> {
    if !(t > S::zero() && t < S::one()) {
        return Err(domain(format!("transmissivity {t} outside (0, 1)")));
    }
    if !(n_mode >= S::zero()) || n_mode.is_infinite() {
        return Err(domain(format!("mean photon number {n_mode} must be finite and ≥ 0")));
    }
    let half = S::c(0.5);
    let a = (S::one() + t) * n_mode * half;
    let b = (S::one() - t) * n_mode * half;
    // g(x) = log₂(1+x) + x·log₂(1+1/x); differencing g directly cancels badly for large N
    let tail = |x: S| if x > S::zero() { x * x.recip().ln_1p() } else { S::zero() };
    Ok(((a - b) / (S::one() + b)).ln_1p() / S::LN_2() + (tail(a) - tail(b)) / S::LN_2())
}

/// `N → ∞` limit of [`takeoka_bound`], `log₂((1+T)/(1-T))`.
pub fn takeoka_limit<S: Scalar>(t: S) -> Result<S> {
    if !(t > S::zero() && t < S::one()) {
        return Err(domain(format!("transmissivity {t} outside (0, 1)")));
    }
    Ok((t.ln_1p() - (-t).ln_1p()) / S::LN_2())
}
