use nalgebra::{DMatrix, DVector};

use crate::state::{FockTensor, ModeOp};
use crate::{FockError, C64, NORM_TOL};

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// `⟨m, l| U(t) |n, j⟩` for a beamsplitter of transmissivity `t` acting on
/// modes (a, e) with `a† → √t a† + √(1-t) e†`, `e† → -√(1-t) a† + √t e†`.
pub fn beamsplitter_amplitude(t: f64, m: usize, l: usize, n: usize, j: usize) -> f64 {
    if m + l != n + j {
        return 0.0;
    }
    let st = t.sqrt();
    let sr = (1.0 - t).max(0.0).sqrt();
    // k creation operators on `a` come from the first factor, m - k from the second
    let k_lo = m.saturating_sub(j);
    let k_hi = n.min(m);
    let mut sum = 0.0;
    for k in k_lo..=k_hi {
        let from_second = m - k;
        let term = binomial(n, k)
            * binomial(j, from_second)
            * st.powi(k as i32)
            * sr.powi((n - k) as i32)
            * (-sr).powi(from_second as i32)
            * st.powi((j - from_second) as i32);
        sum += term;
    }
    let norm = 0.5 * (ln_factorial(m) + ln_factorial(l) - ln_factorial(n) - ln_factorial(j));
    sum * norm.exp()
}

/// Coherent-state amplitudes `e^{-|γ|²/2} γⁿ/√n!` for `n < dim`.
pub fn coherent_amplitudes(gamma: C64, dim: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    let mut amp = C64::new((-0.5 * gamma.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        v[n] = amp;
        amp = amp * gamma / ((n + 1) as f64).sqrt();
    }
    v
}

/// Generalized Laguerre polynomials `L_0^{(k)}(x) … L_{n_max}^{(k)}(x)`.
fn laguerre_table(n_max: usize, k: usize, x: f64) -> Vec<f64> {
    let kf = k as f64;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max >= 1 {
        out.push(1.0 + kf - x);
    }
    for i in 1..n_max {
        let fi = i as f64;
        let next = ((2.0 * fi + 1.0 + kf - x) * out[i] - (fi + kf) * out[i - 1]) / (fi + 1.0);
        out.push(next);
    }
    out
}

/// Exact matrix elements `⟨m|D(γ)|n⟩` of the (infinite) displacement operator,
/// restricted to the first `dim` levels.
pub fn displacement_matrix(gamma: C64, dim: usize) -> DMatrix<C64> {
    let x = gamma.norm_sqr();
    let pref = (-0.5 * x).exp();
    let mut d = DMatrix::<C64>::zeros(dim, dim);
    for diff in 0..dim {
        let lag = laguerre_table(dim - 1 - diff, diff, x);
        let up = gamma.powu(diff as u32);
        let down = (-gamma.conj()).powu(diff as u32);
        for (lo, l) in lag.iter().enumerate() {
            let hi = lo + diff;
            let ratio = (0.5 * (ln_factorial(lo) - ln_factorial(hi))).exp();
            d[(hi, lo)] = up * (ratio * pref * l);
            if diff > 0 {
                d[(lo, hi)] = down * (ratio * pref * l);
            }
        }
    }
    d
}

fn check_norm(before: f64, after: f64, context: &'static str) -> Result<(), FockError> {
    let lost = (before - after).abs() / before.max(f64::MIN_POSITIVE);
    if lost > NORM_TOL {
        Err(FockError::Truncation { lost, context })
    } else {
        Ok(())
    }
}

/// Two-mode squeezed vacuum `√(1-λ²) Σ λⁿ |n, n⟩`, renormalized on the
/// truncated space.
pub fn build_tmsv(lambda: f64, dims: (usize, usize)) -> Result<FockTensor, FockError> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(FockError::Domain(format!(
            "squeezing λ = {lambda} outside [0, 1)"
        )));
    }
    let (da, db) = dims;
    let levels = da.min(db);
    let tail = lambda.powi(2 * levels as i32);
    if tail > NORM_TOL {
        return Err(FockError::Truncation {
            lost: tail,
            context: "two-mode squeezed vacuum",
        });
    }
    let mut v = DVector::<C64>::zeros(da * db);
    let pref = (1.0 - lambda * lambda).sqrt();
    for n in 0..levels {
        v[n * db + n] = C64::new(pref * lambda.powi(n as i32), 0.0);
    }
    let mut state = FockTensor::from_ket(&[da, db], v);
    state.normalize();
    Ok(state)
}

/// Thermal state with the given mean photon number on `dim` levels.
pub fn thermal_state(mean_photons: f64, dim: usize) -> Result<FockTensor, FockError> {
    if mean_photons < 0.0 {
        return Err(FockError::Domain(format!(
            "negative photon number {mean_photons}"
        )));
    }
    let q = mean_photons / (1.0 + mean_photons);
    let probs: Vec<f64> = (0..dim)
        .map(|n| q.powi(n as i32) / (1.0 + mean_photons))
        .collect();
    let kept: f64 = probs.iter().sum();
    check_norm(1.0, kept, "thermal state")?;
    let diag: Vec<C64> = probs.iter().map(|&p| C64::new(p / kept, 0.0)).collect();
    let rho = DMatrix::from_diagonal(&DVector::from_vec(diag));
    Ok(FockTensor::from_density(&[dim], rho))
}

/// Applies the displacement `D(γ)` to one mode. `γ` is the complex
/// amplitude, so the x-quadrature mean shifts by `2 Re γ`.
pub fn displace(state: &FockTensor, mode: usize, gamma: C64) -> Result<FockTensor, FockError> {
    if gamma == C64::new(0.0, 0.0) {
        return Ok(state.clone());
    }
    let dim = state.mode_dims()[mode.min(state.modes() - 1)];
    let op = ModeOp::from_dense(&displacement_matrix(gamma, dim));
    let before = state.trace();
    let out = state.apply(mode, &op)?;
    check_norm(before, out.trace(), "displacement")?;
    Ok(out)
}

/// Thermal-loss channel parameters for [`thermal_loss`].
#[derive(Debug, Clone, Copy)]
pub struct ThermalLoss {
    pub transmissivity: f64,
    /// Input-referred excess noise in shot-noise units.
    pub excess_noise: f64,
}

impl ThermalLoss {
    /// Variance `W = 1 + Tε/(1-T)` of the thermal environment.
    pub fn environment_variance(&self) -> f64 {
        1.0 + self.transmissivity * self.excess_noise / (1.0 - self.transmissivity)
    }
}

/// Mixes one mode with a thermal environment on a beamsplitter and traces
/// the environment out. The output variance is `T·V + (1-T)·W`.
pub fn thermal_loss(
    state: &FockTensor,
    mode: usize,
    channel: ThermalLoss,
) -> Result<FockTensor, FockError> {
    let t = channel.transmissivity;
    let eps = channel.excess_noise;
    if !(t > 0.0 && t <= 1.0) || eps < 0.0 {
        return Err(FockError::Domain(format!(
            "thermal-loss channel needs 0 < T ≤ 1 and ε ≥ 0 (got T = {t}, ε = {eps})"
        )));
    }
    if t == 1.0 {
        if eps > 0.0 {
            return Err(FockError::Domain(
                "no finite-temperature realization of excess noise at T = 1".into(),
            ));
        }
        return Ok(state.clone());
    }
    let dim = state.mode_dims()[mode.min(state.modes() - 1)];
    let n_env = 0.5 * (channel.environment_variance() - 1.0);
    let q = n_env / (1.0 + n_env);
    let mut env_probs = Vec::new();
    let mut tail = 1.0;
    while tail > 1e-14 && env_probs.len() < 200 {
        let j = env_probs.len();
        let p = q.powi(j as i32) / (1.0 + n_env);
        env_probs.push(p);
        tail -= p;
        if n_env == 0.0 {
            break;
        }
    }
    let mut kraus = Vec::new();
    for (j, &pj) in env_probs.iter().enumerate() {
        let w = pj.sqrt();
        for l in 0..dim + j {
            let mut k = ModeOp::new(dim, dim);
            for n in 0..dim {
                if n + j < l {
                    continue;
                }
                let m = n + j - l;
                if m >= dim {
                    continue;
                }
                let amp = beamsplitter_amplitude(t, m, l, n, j);
                k.push(m, n, C64::new(w * amp, 0.0));
            }
            if !k.entries.is_empty() {
                kraus.push(k);
            }
        }
    }
    let before = state.trace();
    let out = state.apply_kraus(mode, &kraus)?;
    // probability leaking above the truncation plus the discarded environment tail
    check_norm(before, out.trace(), "thermal-loss output")?;
    Ok(out)
}

/// Result of a first-order quantum scissor: the conditional state and the
/// probability of each accepted (one on, one off) detector pattern.
#[derive(Debug, Clone)]
pub struct ScissorOutcome {
    pub states: [FockTensor; 2],
    pub probabilities: [f64; 2],
}

impl ScissorOutcome {
    pub fn total_probability(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// First-order quantum scissor on one mode.
///
/// Ancillas hold `√(1-τ)|0,1⟩ - √τ|1,0⟩`; the first ancilla is mixed with the
/// target on a balanced beamsplitter whose outputs are read by on/off
/// detectors. The second ancilla becomes the output mode (two levels).
pub fn scissor_apply(
    state: &FockTensor,
    mode: usize,
    tau: f64,
) -> Result<ScissorOutcome, FockError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(FockError::Domain(format!(
            "scissor τ = {tau} outside (0, 1)"
        )));
    }
    let dim = state.mode_dims()[mode.min(state.modes() - 1)];
    // ancilla amplitudes indexed by the photon number j in the mixed ancilla;
    // the output ancilla then holds 1 - j photons
    let anc = [(1.0 - tau).sqrt(), -tau.sqrt()];
    let mut patterns: Vec<Vec<ModeOp>> = vec![Vec::new(), Vec::new()];
    for total in 1..=dim {
        for (pattern, kraus) in patterns.iter_mut().enumerate() {
            let mut k = ModeOp::new(2, dim);
            for (j, &a) in anc.iter().enumerate() {
                if total < j || total - j >= dim {
                    continue;
                }
                let n = total - j;
                // pattern 0: all photons exit port c, none in d; pattern 1: the reverse
                let amp = if pattern == 0 {
                    beamsplitter_amplitude(0.5, total, 0, n, j)
                } else {
                    beamsplitter_amplitude(0.5, 0, total, n, j)
                };
                k.push(1 - j, n, C64::new(a * amp, 0.0));
            }
            if !k.entries.is_empty() {
                kraus.push(k);
            }
        }
    }
    let mut states = Vec::with_capacity(2);
    let mut probs = [0.0; 2];
    let norm = state.trace();
    for (i, kraus) in patterns.iter().enumerate() {
        let mut out = state.apply_kraus(mode, kraus)?;
        let p = out.normalize() / norm;
        if p < 1e-300 {
            return Err(FockError::ZeroProbability(p));
        }
        probs[i] = p;
        states.push(out);
    }
    let s1 = states.pop().unwrap();
    let s0 = states.pop().unwrap();
    Ok(ScissorOutcome {
        states: [s0, s1],
        probabilities: probs,
    })
}

/// Ideal noiseless amplifier `gⁿ` on one mode, renormalized.
pub fn ideal_nla_apply(
    state: &FockTensor,
    mode: usize,
    gain: f64,
) -> Result<FockTensor, FockError> {
    if gain <= 0.0 {
        return Err(FockError::Domain(format!("gain {gain} must be positive")));
    }
    let dim = state.mode_dims()[mode.min(state.modes() - 1)];
    let diag: Vec<C64> = (0..dim)
        .map(|n| C64::new(gain.powi(n as i32), 0.0))
        .collect();
    let mut out = state.apply(mode, &ModeOp::diagonal(&diag))?;
    out.normalize();
    let dist = out.photon_distribution(mode)?;
    let top: f64 = dist.iter().rev().take(2).sum();
    if top > 1e-8 {
        return Err(FockError::Truncation {
            lost: top,
            context: "noiseless amplification",
        });
    }
    Ok(out)
}
