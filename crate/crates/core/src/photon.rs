//! Minimum pulse energy meeting a key-rate and bit-error-rate target for the
//! non-amplified protocol.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{mean_photon, sqcc_key_rate};
use crate::error::{domain, Result};
use crate::{ChannelModel, ProtocolConfig, QosTarget};

/// BER below which a point is labelled large-α.
pub const LARGE_ALPHA_BER: f64 = 1e-2;
/// BER above which a point is labelled small-α.
pub const SMALL_ALPHA_BER: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LargeAlpha,
    SmallAlpha,
}

impl Regime {
    /// Points between the two thresholds go to the threshold nearest in BER.
    pub fn classify(ber: f64) -> Self {
        if ber < LARGE_ALPHA_BER {
            Regime::LargeAlpha
        } else if ber > SMALL_ALPHA_BER {
            Regime::SmallAlpha
        } else if ber - LARGE_ALPHA_BER < SMALL_ALPHA_BER - ber {
            Regime::LargeAlpha
        } else {
            Regime::SmallAlpha
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::LargeAlpha => "large-alpha",
            Regime::SmallAlpha => "small-alpha",
        }
    }
}

/// Non-channel parameters held fixed during the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonFixed {
    pub phase_noise: f64,
    pub reconciliation: f64,
    #[serde(default)]
    pub theta: f64,
}

/// Log grid in `α`, linear grid in `V`, then pattern-search polish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhotonGrid {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_points: usize,
    pub v_min: f64,
    pub v_max: f64,
    pub v_points: usize,
    pub max_iter: usize,
    pub shrink: f64,
}

impl Default for PhotonGrid {
    fn default() -> Self {
        Self {
            alpha_min: 1e-3,
            alpha_max: 100.0,
            alpha_points: 101,
            v_min: 1.0,
            v_max: 20.0,
            v_points: 96,
            max_iter: 80,
            shrink: 0.5,
        }
    }
}

impl PhotonGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_min > 0.0 && self.alpha_min < self.alpha_max && self.alpha_max.is_finite()) {
            return Err(domain("amplitude bounds must satisfy 0 < alpha_min < alpha_max"));
        }
        if !(self.v_min >= 1.0 && self.v_min < self.v_max && self.v_max.is_finite()) {
            return Err(domain("variance bounds must satisfy 1 <= v_min < v_max"));
        }
        if self.alpha_points < 2 || self.v_points < 2 {
            return Err(domain("every search axis needs at least 2 points"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(domain("shrink factor must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<f64> {
        log_axis(self.alpha_min, self.alpha_max, self.alpha_points)
    }

    pub fn variances(&self) -> Vec<f64> {
        lin_axis(self.v_min, self.v_max, self.v_points)
    }
}

fn lin_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect()
}

fn log_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    lin_axis(lo.ln(), hi.ln(), n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| match i {
            0 => lo,
            _ if i + 1 == n => hi,
            _ => x.exp(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeCell {
    pub alpha: f64,
    pub variance: f64,
    pub key_rate: f64,
    pub ber: f64,
    pub photons: f64,
}

/// Key rate and BER over the `(α, V)` grid, `α`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub alphas: Vec<f64>,
    pub variances: Vec<f64>,
    pub cells: Vec<LandscapeCell>,
}

impl Landscape {
    pub fn cell(&self, i_alpha: usize, i_v: usize) -> &LandscapeCell {
        &self.cells[i_alpha * self.variances.len() + i_v]
    }
}

fn evaluate_cell(channel: &ChannelModel, fixed: &PhotonFixed, alpha: f64, variance: f64) -> LandscapeCell {
    let config = ProtocolConfig {
        variance,
        alpha,
        theta: fixed.theta,
        phase_noise: fixed.phase_noise,
        reconciliation: fixed.reconciliation,
    };
    let (key_rate, ber) = match sqcc_key_rate(&config, channel) {
        Ok(r) => (r.key_rate, r.ber),
        Err(_) => (0.0, 0.5),
    };
    LandscapeCell {
        alpha,
        variance,
        key_rate,
        ber,
        photons: mean_photon(alpha, variance),
    }
}

pub fn rate_landscape(channel: &ChannelModel, fixed: &PhotonFixed, grid: &PhotonGrid) -> Result<Landscape> {
    grid.validate()?;
    channel.validate()?;
    let alphas = grid.alphas();
    let variances = grid.variances();
    let cells = alphas
        .par_iter()
        .flat_map_iter(|&a| variances.iter().map(move |&v| (a, v)))
        .map(|(a, v)| evaluate_cell(channel, fixed, a, v))
        .collect();
    Ok(Landscape {
        alphas,
        variances,
        cells,
    })
}

fn meets(cell: &LandscapeCell, qos: &QosTarget) -> bool {
    cell.key_rate >= qos.min_key_rate && cell.ber <= qos.max_ber
}

/// A 4-connected group of grid cells meeting the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleComponent {
    /// `(α index, V index)` of every member.
    pub cells: Vec<(usize, usize)>,
    pub min_photons: f64,
    pub max_photons: f64,
    pub min_ber: f64,
    pub max_ber: f64,
    pub min_alpha: f64,
    pub max_alpha: f64,
}

/// Connected components of the feasible set, ordered by their smallest `α`
/// index.
pub fn feasible_components(landscape: &Landscape, qos: &QosTarget) -> Vec<FeasibleComponent> {
    let (na, nv) = (landscape.alphas.len(), landscape.variances.len());
    let mut seen = vec![false; na * nv];
    let mut out = Vec::new();
    for start in 0..na * nv {
        if seen[start] || !meets(&landscape.cells[start], qos) {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut members = Vec::new();
        while let Some(k) = queue.pop_front() {
            let (i, j) = (k / nv, k % nv);
            members.push((i, j));
            let mut push = |ii: usize, jj: usize| {
                let kk = ii * nv + jj;
                if !seen[kk] && meets(&landscape.cells[kk], qos) {
                    seen[kk] = true;
                    queue.push_back(kk);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < na {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < nv {
                push(i, j + 1);
            }
        }
        members.sort_unstable();
        let cells: Vec<&LandscapeCell> = members.iter().map(|&(i, j)| landscape.cell(i, j)).collect();
        let fold = |f: fn(&LandscapeCell) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
            cells.iter().map(|c| f(c)).fold(init, pick)
        };
        out.push(FeasibleComponent {
            min_photons: fold(|c| c.photons, f64::INFINITY, f64::min),
            max_photons: fold(|c| c.photons, f64::NEG_INFINITY, f64::max),
            min_ber: fold(|c| c.ber, f64::INFINITY, f64::min),
            max_ber: fold(|c| c.ber, f64::NEG_INFINITY, f64::max),
            min_alpha: fold(|c| c.alpha, f64::INFINITY, f64::min),
            max_alpha: fold(|c| c.alpha, f64::NEG_INFINITY, f64::max),
            cells: members,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudgetResult {
    pub min_photons: f64,
    pub arg_alpha: f64,
    pub arg_variance: f64,
    pub feasible: bool,
    pub regime: Option<Regime>,
    pub key_rate: f64,
    pub ber: f64,
}

impl PhotonBudgetResult {
    fn infeasible() -> Self {
        Self {
            min_photons: f64::NAN,
            arg_alpha: f64::NAN,
            arg_variance: f64::NAN,
            feasible: false,
            regime: None,
            key_rate: 0.0,
            ber: f64::NAN,
        }
    }
}

/// Pattern search on `(ln α, V)` minimizing `n̄` inside the feasible set.
fn polish(
    start: LandscapeCell,
    channel: &ChannelModel,
    fixed: &PhotonFixed,
    qos: &QosTarget,
    grid: &PhotonGrid,
) -> LandscapeCell {
    let lo = [grid.alpha_min.ln(), grid.v_min];
    let hi = [grid.alpha_max.ln(), grid.v_max];
    let mut steps = [
        (hi[0] - lo[0]) / (grid.alpha_points - 1) as f64,
        (hi[1] - lo[1]) / (grid.v_points - 1) as f64,
    ];
    let mut best = start;
    let mut x = [start.alpha.ln(), start.variance];
    for _ in 0..grid.max_iter {
        let mut improved: Option<(LandscapeCell, [f64; 2])> = None;
        for k in 0..2 {
            for dir in [-1.0, 1.0] {
                let mut y = x;
                y[k] = (y[k] + dir * steps[k]).clamp(lo[k], hi[k]);
                if y[k] == x[k] {
                    continue;
                }
                let cell = evaluate_cell(channel, fixed, y[0].exp(), y[1]);
                let current = improved.as_ref().map_or(&best, |(c, _)| c);
                if meets(&cell, qos) && cell.photons < current.photons {
                    improved = Some((cell, y));
                }
            }
        }
        match improved {
            Some((c, y)) => {
                best = c;
                x = y;
            }
            None => {
                steps[0] *= grid.shrink;
                steps[1] *= grid.shrink;
            }
        }
    }
    best
}

/// Smallest `n̄ = α² + 2V` with `K ≥ K₀` and `e_C ≤ e_C₀`. Every feasible
/// component is polished from its cheapest cell; the overall cheapest wins.
pub fn min_photon_search(
    channel: &ChannelModel,
    qos: &QosTarget,
    fixed: &PhotonFixed,
    grid: &PhotonGrid,
) -> Result<PhotonBudgetResult> {
    qos.validate()?;
    let landscape = rate_landscape(channel, fixed, grid)?;
    Ok(search_on(&landscape, channel, qos, fixed, grid))
}

fn search_on(
    landscape: &Landscape,
    channel: &ChannelModel,
    qos: &QosTarget,
    fixed: &PhotonFixed,
    grid: &PhotonGrid,
) -> PhotonBudgetResult {
    let seeds: Vec<LandscapeCell> = feasible_components(landscape, qos)
        .iter()
        .map(|comp| {
            comp.cells
                .iter()
                .map(|&(i, j)| *landscape.cell(i, j))
                .reduce(|a, b| if b.photons < a.photons { b } else { a })
                .expect("components are non-empty")
        })
        .collect();
    let polished: Vec<LandscapeCell> = seeds
        .par_iter()
        .map(|s| polish(*s, channel, fixed, qos, grid))
        .collect();
    let best = polished
        .into_iter()
        .reduce(|a, b| if b.photons < a.photons { b } else { a });
    match best {
        None => PhotonBudgetResult::infeasible(),
        Some(c) => PhotonBudgetResult {
            min_photons: c.photons,
            arg_alpha: c.alpha,
            arg_variance: c.variance,
            feasible: true,
            regime: Some(Regime::classify(c.ber)),
            key_rate: c.key_rate,
            ber: c.ber,
        },
    }
}

/// One cell of the QoS matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonCell {
    pub min_key_rate: f64,
    pub max_ber: f64,
    pub result: PhotonBudgetResult,
}

/// [`min_photon_search`] for every `(K₀, e_C₀)` pair, `K₀`-major. The rate
/// landscape is computed once and shared by all cells.
pub fn photon_landscape(
    channel: &ChannelModel,
    key_rates: &[f64],
    max_bers: &[f64],
    fixed: &PhotonFixed,
    grid: &PhotonGrid,
) -> Result<Vec<PhotonCell>> {
    if key_rates.is_empty() || max_bers.is_empty() {
        return Err(domain("QoS grid needs at least one K₀ and one e_C₀"));
    }
    let targets: Vec<QosTarget> = key_rates
        .iter()
        .flat_map(|&k| max_bers.iter().map(move |&e| QosTarget {
            min_key_rate: k,
            max_ber: e,
        }))
        .collect();
    for q in &targets {
        q.validate()?;
    }
    let landscape = rate_landscape(channel, fixed, grid)?;
    Ok(targets
        .par_iter()
        .map(|q| PhotonCell {
            min_key_rate: q.min_key_rate,
            max_ber: q.max_ber,
            result: search_on(&landscape, channel, q, fixed, grid),
        })
        .collect())
}
