//! Comparisons of the analytic models against the truncated Fock-basis
//! simulator in `sqcc-fock`.
//!
//! Every oracle value is computed at a truncation `D` and again at `D + step`;
//! the two must agree within the suite tolerance (otherwise `D` is raised)
//! before the value is compared with the analytic prediction.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sqcc_fock::{
    build_tmsv, displace, ideal_nla_apply, scissor_apply, symplectic_spectrum, thermal_loss, FockError,
    FockTensor, GaussianMoments, ThermalLoss, C64,
};

use crate::baseline::channel_cov;
use crate::error::{domain, Result, SqccError};
use crate::gaussian::{conditional_eigenvalue, holevo_bound, mutual_information, symplectic_eigenvalues};
use crate::ideal::effective_params;
use crate::scissor::{
    gain_to_tau, scissor_displacement_sq, scissor_moments_at, scissor_success_prob, ScissorPoint,
};
use crate::{ChannelModel, ProtocolConfig, TwoModeCovariance};

/// Values smaller than this in magnitude are compared absolutely.
pub const SCALE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Scissor,
    IdealNla,
    GaussianCore,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Scissor, Suite::IdealNla, Suite::GaussianCore];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Scissor => "scissor",
            Suite::IdealNla => "ideal-nla",
            Suite::GaussianCore => "gaussian-core",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SqccError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| domain(format!("unknown oracle suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    /// Starting truncation per mode.
    pub dim: usize,
    /// Convergence partner is `dim + step`; also the escalation increment.
    pub step: usize,
    pub max_dim: usize,
    pub seed: u64,
    pub random_points: usize,
    pub covariances: usize,
    pub tolerance: f64,
    pub spectrum_tolerance: f64,
    /// Also run the Holevo and Gaussification spot checks.
    pub spot_checks: bool,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            dim: 20,
            step: 5,
            max_dim: 45,
            seed: 20_240_917,
            random_points: 100,
            covariances: 1000,
            tolerance: 1e-6,
            spectrum_tolerance: 1e-10,
            spot_checks: true,
        }
    }
}

impl OracleSettings {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 4 || self.step == 0 || self.max_dim < self.dim + self.step {
            return Err(domain("oracle truncation needs dim >= 4, step > 0, max_dim >= dim + step"));
        }
        if !(self.tolerance > 0.0 && self.spectrum_tolerance > 0.0) {
            return Err(domain("oracle tolerances must be positive"));
        }
        Ok(())
    }
}

/// One analytic-vs-oracle number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub suite: Suite,
    pub case: String,
    pub quantity: String,
    pub analytic: f64,
    pub oracle: f64,
    pub rel_dev: f64,
    pub tolerance: f64,
    /// Truncation of the reported oracle value (0 for matrix-only checks).
    pub dim: usize,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.rel_dev < self.tolerance
    }
}

/// Key rate of the heralded state from its Gaussian-equivalent moments
/// against the same rate evaluated on the exact state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussificationCheck {
    pub case: String,
    pub gaussian_rate: f64,
    pub exact_rate: f64,
}

impl GaussificationCheck {
    /// Slack allowed for the quadrature of the exact rate.
    pub const SLACK: f64 = 1e-6;

    pub fn passed(&self) -> bool {
        self.gaussian_rate <= self.exact_rate + Self::SLACK
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub comparisons: Vec<Comparison>,
    pub gaussification: Vec<GaussificationCheck>,
}

impl SuiteReport {
    pub fn max_rel_dev(&self) -> f64 {
        self.comparisons.iter().map(|c| c.rel_dev).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(Comparison::passed) && self.gaussification.iter().all(|g| g.passed())
    }
}

/// `|a - b| / max(|a|, |b|, SCALE_FLOOR)`.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(SCALE_FLOOR)
}

pub fn run_suite(suite: Suite, settings: &OracleSettings) -> Result<SuiteReport> {
    settings.validate()?;
    match suite {
        Suite::Scissor => scissor_suite(settings),
        Suite::IdealNla => ideal_suite(settings),
        Suite::GaussianCore => gaussian_suite(settings),
    }
}

/// Runs `f` at `D` and `D + step`, raising `D` until the two agree and no
/// truncation error occurs. Returns the values at the larger truncation.
fn converged<F>(settings: &OracleSettings, tol: f64, f: F) -> Result<(Vec<f64>, usize)>
where
    F: Fn(usize) -> std::result::Result<Vec<f64>, FockError>,
{
    let mut d = settings.dim;
    let mut last_err = None;
    while d + settings.step <= settings.max_dim {
        let hi = d + settings.step;
        match (f(d), f(hi)) {
            (Ok(lo_v), Ok(hi_v)) => {
                if lo_v.iter().zip(&hi_v).all(|(a, b)| rel_dev(*a, *b) < tol) {
                    return Ok((hi_v, hi));
                }
                last_err = Some(format!("values at D = {d} and {hi} differ beyond {tol:e}"));
            }
            (Err(e), _) | (_, Err(e)) => last_err = Some(e.to_string()),
        }
        d += settings.step;
    }
    Err(SqccError::Domain(format!(
        "oracle did not converge up to D = {}: {}",
        settings.max_dim,
        last_err.unwrap_or_default()
    )))
}

fn lambda_of(variance: f64) -> f64 {
    ((variance - 1.0) / (variance + 1.0)).sqrt()
}

/// TMSV of variance `V` with mode 1 sent through the channel.
fn channel_state(variance: f64, channel: &ChannelModel, dim: usize) -> std::result::Result<FockTensor, FockError> {
    let tmsv = build_tmsv(lambda_of(variance), (dim, dim))?;
    thermal_loss(
        &tmsv,
        1,
        ThermalLoss {
            transmissivity: channel.transmissivity,
            excess_noise: channel.excess_noise,
        },
    )
}

/// Heralded state for detector pattern 0 and the two pattern probabilities.
fn scissor_state(
    variance: f64,
    channel: &ChannelModel,
    alpha_in: f64,
    theta: f64,
    gain: f64,
    dim: usize,
) -> std::result::Result<(FockTensor, [f64; 2]), FockError> {
    let state = channel_state(variance, channel, dim)?;
    let shifted = displace(&state, 1, C64::from_polar(0.5 * alpha_in, theta))?;
    let tau = 1.0 / (1.0 + gain * gain);
    let out = scissor_apply(&shifted, 1, tau)?;
    let [s0, _] = out.states;
    Ok((s0, out.probabilities))
}

fn phase_averaged(m: &GaussianMoments) -> TwoModeCovariance {
    let v = &m.covariance;
    TwoModeCovariance::new(
        0.5 * (v[(0, 0)] + v[(1, 1)]),
        0.5 * (v[(2, 2)] + v[(3, 3)]),
        0.5 * (v[(0, 2)] - v[(1, 3)]).abs(),
    )
}

#[allow(clippy::too_many_arguments)]
fn push(out: &mut Vec<Comparison>, suite: Suite, case: &str, quantity: &str, analytic: f64, oracle: f64, tol: f64, dim: usize) {
    out.push(Comparison {
        suite,
        case: case.to_string(),
        quantity: quantity.to_string(),
        analytic,
        oracle,
        rel_dev: rel_dev(analytic, oracle),
        tolerance: tol,
        dim,
    });
}

/// Points of the scissor comparison grid: `(α, g, ℒ, V)`.
pub fn scissor_grid() -> Vec<(f64, f64, f64, f64)> {
    let mut pts = Vec::new();
    for &alpha in &[0.0, 0.06, 0.12] {
        for &gain in &[1.0, 3.0, 10.0] {
            for &loss in &[10.0, 30.0, 50.0] {
                for &v in &[1.05, 1.2] {
                    pts.push((alpha, gain, loss, v));
                }
            }
        }
    }
    pts
}

/// Channel excess noise used on the scissor grid.
pub const SCISSOR_GRID_EXCESS: f64 = 0.03;

fn scissor_suite(settings: &OracleSettings) -> Result<SuiteReport> {
    let suite = Suite::Scissor;
    let tol = settings.tolerance;
    let rows: Vec<Result<Vec<Comparison>>> = scissor_grid()
        .par_iter()
        .map(|&(alpha, gain, loss, v)| {
            let channel = ChannelModel::from_loss_db(loss, SCISSOR_GRID_EXCESS)?;
            let config = ProtocolConfig {
                variance: v,
                alpha,
                theta: 0.0,
                phase_noise: 0.0,
                reconciliation: 1.0,
            };
            let point = ScissorPoint::new(&config, &channel, gain)?;
            let m = scissor_moments_at(alpha, 0.0, &config, &channel, gain)?;
            let (vals, dim) = converged(settings, tol, |d| {
                let (s, probs) = scissor_state(v, &channel, alpha, 0.0, gain, d)?;
                let mo = s.moments();
                Ok(vec![
                    probs[0],
                    probs[1],
                    mo.x_mean(1).powi(2),
                    mo.x_variance(1),
                    mo.x_variance(0),
                    mo.xx_covariance(0, 1).abs(),
                ])
            })?;
            let case = format!("alpha={alpha} g={gain} loss_db={loss} V={v}");
            let mut out = Vec::new();
            let p = scissor_success_prob(alpha, &point)?;
            push(&mut out, suite, &case, "P_pattern0", p, vals[0], tol, dim);
            push(&mut out, suite, &case, "P_pattern1", p, vals[1], tol, dim);
            push(&mut out, suite, &case, "d_sq", scissor_displacement_sq(alpha, &point)?, vals[2], tol, dim);
            push(&mut out, suite, &case, "B", m.bob_variance, vals[3], tol, dim);
            push(&mut out, suite, &case, "A", m.alice_variance, vals[4], tol, dim);
            push(&mut out, suite, &case, "C", m.correlation, vals[5], tol, dim);
            Ok(out)
        })
        .collect();
    let mut comparisons = Vec::new();
    for r in rows {
        comparisons.extend(r?);
    }
    let gaussification = if settings.spot_checks {
        gaussification_points()
            .par_iter()
            .map(|&(v, loss, gain)| gaussification_check(v, loss, gain, settings))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(SuiteReport {
        suite,
        comparisons,
        gaussification,
    })
}

/// Random point of the ideal-amplifier comparison (`α ≤ 0.3`, `V ≤ 1.5`,
/// `g ≤ 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealPoint {
    pub variance: f64,
    pub transmissivity: f64,
    pub excess_noise: f64,
    pub alpha: f64,
    pub gain: f64,
}

impl IdealPoint {
    fn config(&self) -> ProtocolConfig {
        ProtocolConfig {
            variance: self.variance,
            alpha: self.alpha,
            theta: 0.0,
            phase_noise: 0.0,
            reconciliation: 1.0,
        }
    }

    fn channel(&self) -> Result<ChannelModel> {
        ChannelModel::from_transmissivity(self.transmissivity, self.excess_noise)
    }
}

/// `n` points inside the amplifier's equivalence domain. Draws falling
/// outside it are discarded, so the sequence depends only on the seed.
pub fn ideal_points(n: usize, seed: u64) -> Vec<IdealPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut pts = std::iter::from_fn(|| {
        Some(IdealPoint {
            variance: rng.random_range(1.05..1.5),
            transmissivity: rng.random_range(0.05..0.95),
            excess_noise: rng.random_range(0.0..0.1),
            alpha: rng.random_range(0.0..0.3),
            gain: rng.random_range(1.0..2.0),
        })
    });
    while out.len() < n {
        let p = pts.next().expect("endless");
        let ok = p
            .channel()
            .and_then(|ch| effective_params(&p.config(), &ch, p.gain))
            .is_ok();
        if ok {
            out.push(p);
        }
    }
    out
}

fn ideal_suite(settings: &OracleSettings) -> Result<SuiteReport> {
    let suite = Suite::IdealNla;
    let tol = settings.tolerance;
    let mut points = vec![IdealPoint {
        variance: 1.2,
        transmissivity: 0.8,
        excess_noise: 0.0,
        alpha: 0.1,
        gain: 1.3,
    }];
    points.extend(ideal_points(settings.random_points, settings.seed));
    let rows: Vec<Result<Vec<Comparison>>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let channel = p.channel()?;
            let eff = effective_params(&p.config(), &channel, p.gain)?;
            let t = eff.transmissivity_eff;
            let a = eff.variance_eff;
            let b = eff.bob_noise();
            let c = (t * (a * a - 1.0)).sqrt();
            let mean = t.sqrt() * eff.alpha_eff;
            let (vals, dim) = converged(settings, tol, |d| {
                let state = channel_state(p.variance, &channel, d)?;
                let shifted = displace(&state, 1, C64::new(0.5 * channel.transmissivity.sqrt() * p.alpha, 0.0))?;
                let amp = ideal_nla_apply(&shifted, 1, p.gain)?;
                let mo = amp.moments();
                Ok(vec![
                    mo.x_variance(0),
                    mo.x_variance(1),
                    mo.xx_covariance(0, 1),
                    mo.x_mean(1),
                    mo.covariance[(3, 3)],
                ])
            })?;
            let case = format!(
                "#{i} V={:.6} T={:.6} eps={:.6} alpha={:.6} g={:.6}",
                p.variance, p.transmissivity, p.excess_noise, p.alpha, p.gain
            );
            let mut out = Vec::new();
            push(&mut out, suite, &case, "A", a, vals[0], tol, dim);
            push(&mut out, suite, &case, "B", b, vals[1], tol, dim);
            push(&mut out, suite, &case, "C", c, vals[2], tol, dim);
            push(&mut out, suite, &case, "bob_mean", mean, vals[3], tol, dim);
            push(&mut out, suite, &case, "B_p", b, vals[4], tol, dim);
            Ok(out)
        })
        .collect();
    let mut comparisons = Vec::new();
    for r in rows {
        comparisons.extend(r?);
    }
    Ok(SuiteReport {
        suite,
        comparisons,
        gaussification: Vec::new(),
    })
}

/// `n` random physical covariances `(a, b, c)` with `a, b ∈ [1, 20]`.
pub fn random_covariances(n: usize, seed: u64) -> Vec<TwoModeCovariance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let a: f64 = 1.0 + rng.random::<f64>() * 19.0;
        let b: f64 = 1.0 + rng.random::<f64>() * 19.0;
        let c = rng.random::<f64>() * a.min(b);
        let cov = TwoModeCovariance::new(a, b, c);
        if cov.validate().is_ok() {
            out.push(cov);
        }
    }
    out
}

/// `4 × 4` matrix in `(x_A, p_A, x_B, p_B)` order.
pub fn full_matrix(cov: &TwoModeCovariance) -> DMatrix<f64> {
    let (a, b, c) = (cov.a, cov.b, cov.c);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            a, 0.0, c, 0.0, //
            0.0, a, 0.0, -c, //
            c, 0.0, b, 0.0, //
            0.0, -c, 0.0, b,
        ],
    )
}

/// Alice's covariance after Bob heterodynes: `σ_A - σ_AB (σ_B + I)⁻¹ σ_BA`.
fn heterodyne_schur(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sa = m.view((0, 0), (2, 2)).into_owned();
    let sab = m.view((0, 2), (2, 2)).into_owned();
    let sb = m.view((2, 2), (2, 2)).into_owned() + DMatrix::identity(2, 2);
    let inv = sb.try_inverse()?;
    Some(sa - &sab * inv * sab.transpose())
}

/// Channel points of the Holevo spot check: `(V, T, ε₀)`.
pub fn holevo_points() -> Vec<(f64, f64, f64)> {
    vec![
        (1.2, 0.9, 0.0),
        (1.5, 0.5, 0.05),
        (1.3, 0.2, 0.1),
        (1.4, 0.7, 0.02),
        (1.1, 0.05, 0.2),
    ]
}

fn gaussian_suite(settings: &OracleSettings) -> Result<SuiteReport> {
    let suite = Suite::GaussianCore;
    let tol = settings.spectrum_tolerance;
    let covs = random_covariances(settings.covariances, settings.seed);
    let mut comparisons = Vec::new();
    for (i, cov) in covs.iter().enumerate() {
        let (nu1, nu2) = symplectic_eigenvalues(cov)?;
        let m = full_matrix(cov);
        let spec = symplectic_spectrum(&m);
        let case = format!("#{i} a={:.6} b={:.6} c={:.6}", cov.a, cov.b, cov.c);
        push(&mut comparisons, suite, &case, "nu_1", nu1, spec[0], tol, 0);
        push(&mut comparisons, suite, &case, "nu_2", nu2, spec[1], tol, 0);
        let nu3 = conditional_eigenvalue(cov)?;
        let schur = heterodyne_schur(&m).ok_or_else(|| domain("singular heterodyne block"))?;
        let brute = symplectic_spectrum(&schur)[0];
        push(&mut comparisons, suite, &case, "nu_3", nu3, brute, tol, 0);
    }
    if settings.spot_checks {
        let rows: Vec<Result<Comparison>> = holevo_points()
            .par_iter()
            .map(|&(v, t, eps)| {
                let channel = ChannelModel::from_transmissivity(t, eps)?;
                let config = ProtocolConfig {
                    variance: v,
                    alpha: 0.0,
                    theta: 0.0,
                    phase_noise: 0.0,
                    reconciliation: 1.0,
                };
                let cov = channel_cov(&config, &channel)?;
                let analytic = holevo_bound(&cov)?;
                let (vals, dim) = converged(settings, settings.tolerance, |d| {
                    let rho = channel_state(v, &channel, d)?.into_density();
                    Ok(vec![purified_holevo(&rho, d)?])
                })?;
                Ok(Comparison {
                    suite,
                    case: format!("holevo V={v} T={t} eps={eps}"),
                    quantity: "chi".into(),
                    analytic,
                    oracle: vals[0],
                    rel_dev: rel_dev(analytic, vals[0]),
                    tolerance: settings.tolerance,
                    dim,
                })
            })
            .collect();
        for r in rows {
            comparisons.push(r?);
        }
    }
    Ok(SuiteReport {
        suite,
        comparisons,
        gaussification: Vec::new(),
    })
}

/// Eve holds the purification of `ρ_AB`, so `S(E) = S(AB)`, and after Bob's
/// heterodyne `S(E|β) = S(A|β)`. For a Gaussian state the conditional
/// entropy is the same for every outcome; `β = 0` is used.
fn purified_holevo(rho_ab: &FockTensor, dim: usize) -> std::result::Result<f64, FockError> {
    let s_ab = rho_ab.entropy_bits();
    let mut vac = nalgebra::DVector::<C64>::zeros(dim);
    vac[0] = C64::new(1.0, 0.0);
    let mut cond = rho_ab.project_mode(1, &vac)?;
    cond.normalize();
    Ok(s_ab - cond.entropy_bits())
}

/// Zero-amplitude scissor points of the Gaussification check: `(V, ℒ, g)`.
pub fn gaussification_points() -> Vec<(f64, f64, f64)> {
    vec![
        (1.2, 3.0, 1.0),
        (1.3, 5.0, 1.5),
        (1.3, 10.0, 2.0),
        (1.25, 1.0, 1.0),
        (1.1, 6.0, 3.0),
    ]
}

/// Reconciliation efficiency used by the Gaussification check.
pub const GAUSSIFICATION_BETA: f64 = 0.95;

/// Truncation of the Gaussification check (its cost grows as `D²`).
pub const GAUSSIFICATION_DIM: usize = 12;

const HET_POINTS: usize = 41;
const HET_RANGE: f64 = 6.0;

fn hermitian_entropy_bits(m: &DMatrix<C64>) -> f64 {
    let tr = m.trace().re;
    if tr <= 0.0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(m / C64::new(tr, 0.0));
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.log2())
        .sum()
}

/// `⟨n|γ⟩` for `n < dim`, without renormalization.
fn coherent_overlaps(gamma: C64, dim: usize) -> Vec<C64> {
    let mut v = Vec::with_capacity(dim);
    let mut term = C64::new((-0.5 * gamma.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            term = term * gamma / (n as f64).sqrt();
        }
        v.push(term);
    }
    v
}

/// `β I - χ` of a two-mode state whose second mode is a qubit, with both
/// parties heterodyning and reverse reconciliation, by direct quadrature
/// over the outcome planes.
fn exact_rate(rho: &DMatrix<C64>, dim_a: usize, beta: f64) -> f64 {
    let n = HET_POINTS;
    let h = 2.0 * HET_RANGE / (n - 1) as f64;
    let axis: Vec<f64> = (0..n).map(|i| -HET_RANGE + h * i as f64).collect();
    let plane: Vec<C64> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| C64::new(x, y)))
        .collect();
    let cell = h * h / std::f64::consts::PI;
    let alice: Vec<Vec<C64>> = plane.iter().map(|&a| coherent_overlaps(a, dim_a)).collect();
    // per Bob outcome: conditional (unnormalized) Alice operator and joint row
    let rows: Vec<(f64, f64, Vec<f64>)> = plane
        .par_iter()
        .map(|&b| {
            let u = coherent_overlaps(b, 2);
            let mut m = DMatrix::<C64>::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    let mut s = C64::new(0.0, 0.0);
                    for (k, uk) in u.iter().enumerate() {
                        for (l, ul) in u.iter().enumerate() {
                            s += uk.conj() * rho[(i * 2 + k, j * 2 + l)] * ul;
                        }
                    }
                    m[(i, j)] = s;
                }
            }
            let p_b = m.trace().re * cell;
            let s_cond = hermitian_entropy_bits(&m);
            let joint: Vec<f64> = alice
                .iter()
                .map(|d| {
                    let mut s = C64::new(0.0, 0.0);
                    for i in 0..dim_a {
                        let mut t = C64::new(0.0, 0.0);
                        for j in 0..dim_a {
                            t += m[(i, j)] * d[j];
                        }
                        s += d[i].conj() * t;
                    }
                    s.re.max(0.0) * cell * cell
                })
                .collect();
            (p_b, s_cond, joint)
        })
        .collect();
    let mut p_a = vec![0.0; plane.len()];
    for (_, _, joint) in &rows {
        for (pa, q) in p_a.iter_mut().zip(joint) {
            *pa += q;
        }
    }
    let mut info = 0.0;
    let mut cond = 0.0;
    for (p_b, s_cond, joint) in &rows {
        cond += p_b * s_cond;
        let pb: f64 = joint.iter().sum();
        for (q, pa) in joint.iter().zip(&p_a) {
            if *q > 0.0 {
                info += q * (q / (pa * pb)).log2();
            }
        }
    }
    let rho_t = FockTensor::from_density(&[dim_a, 2], rho.clone());
    let chi = rho_t.entropy_bits() - cond;
    beta * info - chi
}

fn gaussification_check(v: f64, loss: f64, gain: f64, settings: &OracleSettings) -> Result<GaussificationCheck> {
    let channel = ChannelModel::from_loss_db(loss, SCISSOR_GRID_EXCESS)?;
    let tau = gain_to_tau(gain)?;
    let _ = settings;
    let d = GAUSSIFICATION_DIM;
    let state = channel_state(v, &channel, d)?;
    let out = scissor_apply(&state, 1, tau)?;
    let [s0, _] = out.states;
    let cov = phase_averaged(&s0.moments());
    let gaussian_rate = GAUSSIFICATION_BETA * mutual_information(&cov)? - holevo_bound(&cov)?;
    let exact = exact_rate(&s0.density(), d, GAUSSIFICATION_BETA);
    Ok(GaussificationCheck {
        case: format!("V={v} loss_db={loss} g={gain}"),
        gaussian_rate,
        exact_rate: exact,
    })
}
