//! Key-rate maximization over the free receiver/transmitter parameters and
//! loss sweeps built on it.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::sqcc_key_rate;
use crate::dual::dual_key_rate;
use crate::error::{domain, Result, SqccError};
use crate::gaussian::plob_bound;
use crate::ideal::ideal_key_rate;
use crate::scissor::{scissor_key_rate_with, AmplitudeConvention};
use crate::{ChannelModel, ProtocolConfig, RateReport};

/// Two objective values closer than this (relative) count as equal.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Baseline,
    Ideal,
    Scissor,
    Dual,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Ideal => "ideal",
            Variant::Scissor => "scissor",
            Variant::Dual => "dual",
        }
    }

    fn has_gain(self) -> bool {
        !matches!(self, Variant::Baseline)
    }

    fn has_tap(self) -> bool {
        matches!(self, Variant::Dual)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = SqccError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "ideal" => Ok(Variant::Ideal),
            "scissor" => Ok(Variant::Scissor),
            "dual" => Ok(Variant::Dual),
            other => Err(domain(format!("unknown protocol variant `{other}`"))),
        }
    }
}

/// Search box and refinement settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchGrid {
    /// Smallest `V - 1` searched (the search runs in `ln(V - 1)`).
    pub v_floor: f64,
    pub v_max: f64,
    pub v_points: usize,
    /// `g_max = ideal_gain_scale / √T` for the ideal amplifier.
    pub ideal_gain_scale: f64,
    pub scissor_g_max: f64,
    pub g_points: usize,
    pub t_min: f64,
    /// Upper tap bound is `1 - t_gap`.
    pub t_gap: f64,
    pub t_points: usize,
    pub max_iter: usize,
    pub shrink: f64,
    /// Number of best coarse cells refined independently.
    pub starts: usize,
    pub convention: AmplitudeConvention,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            v_floor: 1e-4,
            v_max: 50.0,
            v_points: 25,
            ideal_gain_scale: 10.0,
            scissor_g_max: 100.0,
            g_points: 25,
            t_min: 0.5,
            t_gap: 1e-6,
            t_points: 8,
            max_iter: 60,
            shrink: 0.5,
            starts: 3,
            convention: AmplitudeConvention::default(),
        }
    }
}

impl SearchGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_floor > 0.0 && 1.0 + self.v_floor < self.v_max && self.v_max.is_finite()) {
            return Err(domain("variance bounds must satisfy 0 < v_floor < v_max - 1"));
        }
        if self.v_points < 2 || self.g_points < 2 || self.t_points < 2 {
            return Err(domain("every search axis needs at least 2 points"));
        }
        if !(self.ideal_gain_scale > 1.0 && self.scissor_g_max > 1.0) {
            return Err(domain("gain bounds must exceed 1"));
        }
        if !(self.t_min > 0.0 && self.t_gap > 0.0 && self.t_min < 1.0 - self.t_gap) {
            return Err(domain("tap bounds must satisfy 0 < t_min < 1 - t_gap"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(domain("shrink factor must lie in (0, 1)"));
        }
        if self.starts == 0 {
            return Err(domain("at least one refinement start is needed"));
        }
        Ok(())
    }

    fn g_max(&self, variant: Variant, t: f64) -> f64 {
        match variant {
            Variant::Ideal => self.ideal_gain_scale / t.sqrt(),
            _ => self.scissor_g_max,
        }
    }

    /// Box in search coordinates `(ln(V-1), ln g, ln(1-t))`.
    fn bounds(&self, variant: Variant, t: f64) -> Vec<(f64, f64, usize)> {
        let mut b = vec![(self.v_floor.ln(), (self.v_max - 1.0).ln(), self.v_points)];
        if variant.has_gain() {
            b.push((0.0, self.g_max(variant, t).ln(), self.g_points));
        }
        if variant.has_tap() {
            b.push((self.t_gap.ln(), (1.0 - self.t_min).ln(), self.t_points));
        }
        b
    }
}

/// Operating parameters of a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub variance: f64,
    pub gain: f64,
    pub tap: f64,
}

impl Params {
    fn from_coords(variant: Variant, x: &[f64]) -> Self {
        let mut it = x.iter();
        let variance = 1.0 + it.next().map_or(0.0, |v| v.exp());
        let gain = if variant.has_gain() {
            it.next().map_or(1.0, |v| v.exp())
        } else {
            1.0
        };
        let tap = if variant.has_tap() {
            1.0 - it.next().map_or(0.0, |v| v.exp())
        } else {
            1.0
        };
        Self {
            variance,
            gain,
            tap,
        }
    }

    fn to_coords(self, variant: Variant) -> Vec<f64> {
        let mut x = vec![(self.variance - 1.0).ln()];
        if variant.has_gain() {
            x.push(self.gain.ln());
        }
        if variant.has_tap() {
            x.push((1.0 - self.tap).ln());
        }
        x
    }
}

/// Evaluates one variant at fixed parameters.
pub fn evaluate(
    variant: Variant,
    config: &ProtocolConfig,
    channel: &ChannelModel,
    params: Params,
    convention: AmplitudeConvention,
) -> Result<RateReport> {
    let cfg = ProtocolConfig {
        variance: params.variance,
        ..*config
    };
    match variant {
        Variant::Baseline => sqcc_key_rate(&cfg, channel),
        Variant::Ideal => ideal_key_rate(&cfg, channel, params.gain),
        Variant::Scissor => scissor_key_rate_with(&cfg, channel, params.gain, convention),
        Variant::Dual => dual_key_rate(&cfg, channel, params.gain, params.tap),
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    params: Params,
    score: f64,
}

/// `Greater` when `a` is the preferred candidate.
fn prefer(a: &Candidate, b: &Candidate) -> Ordering {
    let scale = a.score.abs().max(b.score.abs());
    let tied = a.score == b.score
        || (a.score.is_finite() && b.score.is_finite() && (a.score - b.score).abs() <= TIE_TOL * scale);
    if !tied {
        return a.score.partial_cmp(&b.score).unwrap_or(Ordering::Equal);
    }
    b.params
        .gain
        .total_cmp(&a.params.gain)
        .then(b.params.variance.total_cmp(&a.params.variance))
        .then(a.params.tap.total_cmp(&b.params.tap))
}

/// Total order for ranking: score first, exact ties broken as in [`prefer`].
fn strict_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.score
        .total_cmp(&b.score)
        .then(b.params.gain.total_cmp(&a.params.gain))
        .then(b.params.variance.total_cmp(&a.params.variance))
        .then(a.params.tap.total_cmp(&b.params.tap))
}

fn score(
    variant: Variant,
    config: &ProtocolConfig,
    channel: &ChannelModel,
    params: Params,
    convention: AmplitudeConvention,
) -> f64 {
    match evaluate(variant, config, channel, params, convention) {
        Ok(r) if r.signed_rate.is_finite() => r.signed_rate,
        _ => f64::NEG_INFINITY,
    }
}

/// Result of optimizing one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub loss_db: f64,
    pub alpha: f64,
    pub variant: Variant,
    pub v_opt: f64,
    pub g_opt: f64,
    pub t_opt: f64,
    pub key_rate: f64,
    pub ber: f64,
    pub g_squared_t: f64,
    /// `c²/(a² - 1)` of the covariance the key rate is computed from.
    pub t_eff: f64,
    pub plob: f64,
    /// Optimum sits on an edge of the search box.
    pub on_boundary: bool,
    pub failed: bool,
}

impl SweepRecord {
    fn failed(variant: Variant, config: &ProtocolConfig, channel: &ChannelModel) -> Self {
        Self {
            loss_db: channel.loss_db,
            alpha: config.alpha,
            variant,
            v_opt: f64::NAN,
            g_opt: f64::NAN,
            t_opt: f64::NAN,
            key_rate: 0.0,
            ber: f64::NAN,
            g_squared_t: f64::NAN,
            t_eff: f64::NAN,
            plob: plob_or_inf(channel.transmissivity),
            on_boundary: false,
            failed: true,
        }
    }

    pub fn params(&self) -> Params {
        Params {
            variance: self.v_opt,
            gain: self.g_opt,
            tap: self.t_opt,
        }
    }
}

fn plob_or_inf(t: f64) -> f64 {
    plob_bound(t).unwrap_or(f64::INFINITY)
}

fn grid_points(bounds: &[(f64, f64, usize)]) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::new()];
    for &(lo, hi, n) in bounds {
        let step = (hi - lo) / (n - 1) as f64;
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |i| {
                    let mut q = p.clone();
                    q.push(if i + 1 == n { hi } else { lo + step * i as f64 });
                    q
                })
            })
            .collect();
    }
    pts
}

/// Compass search with step shrinking, clamped to the box.
fn refine(
    start: Candidate,
    bounds: &[(f64, f64, usize)],
    grid: &SearchGrid,
    eval: &(dyn Fn(Params) -> f64 + Sync),
    variant: Variant,
) -> Candidate {
    let mut best = start;
    let mut x = best.params.to_coords(variant);
    let mut steps: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi, n)| (hi - lo) / (n - 1) as f64)
        .collect();
    for _ in 0..grid.max_iter {
        let mut improved: Option<(Candidate, Vec<f64>)> = None;
        for k in 0..x.len() {
            for dir in [-1.0, 1.0] {
                let mut y = x.clone();
                y[k] = (y[k] + dir * steps[k]).clamp(bounds[k].0, bounds[k].1);
                if y[k] == x[k] {
                    continue;
                }
                let params = Params::from_coords(variant, &y);
                let cand = Candidate {
                    params,
                    score: eval(params),
                };
                let current = improved.as_ref().map_or(&best, |(c, _)| c);
                if prefer(&cand, current) == Ordering::Greater {
                    improved = Some((cand, y));
                }
            }
        }
        match improved {
            Some((c, y)) => {
                best = c;
                x = y;
            }
            None => {
                for s in steps.iter_mut() {
                    *s *= grid.shrink;
                }
            }
        }
    }
    best
}

/// Maximizes the key rate of `variant` over `V` (and `g`, `t` where they
/// apply). `hint` adds an extra refinement start, e.g. the optimum of a
/// neighbouring loss.
pub fn optimize_point_with_hint(
    variant: Variant,
    config: &ProtocolConfig,
    channel: &ChannelModel,
    grid: &SearchGrid,
    hint: Option<Params>,
) -> Result<SweepRecord> {
    grid.validate()?;
    config.validate()?;
    channel.validate()?;
    let t = channel.transmissivity;
    let bounds = grid.bounds(variant, t);
    let convention = grid.convention;
    let eval = |p: Params| score(variant, config, channel, p, convention);

    let coarse: Vec<Candidate> = grid_points(&bounds)
        .par_iter()
        .map(|x| {
            let params = Params::from_coords(variant, x);
            Candidate {
                params,
                score: eval(params),
            }
        })
        .collect();
    let mut ranked: Vec<Candidate> = coarse.into_iter().filter(|c| c.score.is_finite()).collect();
    if ranked.is_empty() {
        return Err(SqccError::EmptyFeasibleSet);
    }
    ranked.sort_by(|a, b| strict_order(b, a));
    let mut starts: Vec<Candidate> = ranked.into_iter().take(grid.starts).collect();
    if let Some(h) = hint {
        let x: Vec<f64> = h
            .to_coords(variant)
            .iter()
            .zip(&bounds)
            .map(|(v, &(lo, hi, _))| v.clamp(lo, hi))
            .collect();
        if x.iter().all(|v| v.is_finite()) {
            let params = Params::from_coords(variant, &x);
            starts.push(Candidate {
                params,
                score: eval(params),
            });
        }
    }
    let refined: Vec<Candidate> = starts
        .par_iter()
        .map(|s| refine(*s, &bounds, grid, &eval, variant))
        .collect();
    let best = refined
        .into_iter()
        .reduce(|a, b| if prefer(&b, &a) == Ordering::Greater { b } else { a })
        .expect("at least one start");

    let report = evaluate(variant, config, channel, best.params, convention)?;
    let x = best.params.to_coords(variant);
    let on_boundary = x
        .iter()
        .zip(&bounds)
        .any(|(v, &(lo, hi, _))| (v - lo).abs() < 1e-9 || (v - hi).abs() < 1e-9);
    let cov = report.covariance;
    Ok(SweepRecord {
        loss_db: channel.loss_db,
        alpha: config.alpha,
        variant,
        v_opt: best.params.variance,
        g_opt: best.params.gain,
        t_opt: best.params.tap,
        key_rate: report.key_rate,
        ber: report.ber,
        g_squared_t: best.params.gain * best.params.gain * t,
        t_eff: cov.c * cov.c / (cov.a * cov.a - 1.0),
        plob: plob_or_inf(t),
        on_boundary,
        failed: false,
    })
}

pub fn optimize_point(
    variant: Variant,
    config: &ProtocolConfig,
    channel: &ChannelModel,
    grid: &SearchGrid,
) -> Result<SweepRecord> {
    optimize_point_with_hint(variant, config, channel, grid, None)
}

/// Parameters held fixed along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub excess_noise: f64,
    pub phase_noise: f64,
    pub reconciliation: f64,
    #[serde(default)]
    pub theta: f64,
}

/// One optimized record per `(α, ℒ)`, ordered by `α` then by the given loss
/// order. Each `α` chain runs sequentially (warm-started from the previous
/// loss); chains run in parallel.
pub fn loss_sweep(
    variant: Variant,
    alphas: &[f64],
    losses_db: &[f64],
    fixed: &FixedParams,
    grid: &SearchGrid,
    warm_start: bool,
) -> Result<Vec<SweepRecord>> {
    if alphas.is_empty() || losses_db.is_empty() {
        return Err(domain("sweep needs at least one amplitude and one loss"));
    }
    grid.validate()?;
    let chains: Vec<Result<Vec<SweepRecord>>> = alphas
        .par_iter()
        .map(|&alpha| {
            let config = ProtocolConfig {
                variance: 2.0,
                alpha,
                theta: fixed.theta,
                phase_noise: fixed.phase_noise,
                reconciliation: fixed.reconciliation,
            };
            let mut out = Vec::with_capacity(losses_db.len());
            let mut hint = None;
            for &loss in losses_db {
                let channel = ChannelModel::from_loss_db(loss, fixed.excess_noise)?;
                let rec = match optimize_point_with_hint(variant, &config, &channel, grid, hint) {
                    Ok(r) => r,
                    Err(SqccError::EmptyFeasibleSet) => SweepRecord::failed(variant, &config, &channel),
                    Err(e) => return Err(e),
                };
                if warm_start && !rec.failed {
                    hint = Some(rec.params());
                }
                out.push(rec);
            }
            Ok(out)
        })
        .collect();
    let mut records = Vec::new();
    for c in chains {
        records.extend(c?);
    }
    Ok(records)
}
