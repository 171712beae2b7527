use sqcc_core::gaussian::{plob_bound, takeoka_bound, takeoka_limit};
use sqcc_core::optimize::loss_sweep;
use sqcc_core::oracle::run_suite;
use sqcc_core::photon::photon_landscape;
use sqcc_core::ChannelModel;

use crate::config::{BoundsConfig, OracleConfig, PhotonConfig, SweepConfig};
use crate::error::CliError;
use crate::output::Table;

pub const SWEEP_HEADER: &[&str] = &[
    "loss_db", "alpha", "variant", "V_opt", "g_opt", "t_opt", "key_rate", "ber", "g2T", "T_eff", "plob",
];
pub const PHOTON_HEADER: &[&str] = &["k0", "ec0", "nbar_min", "alpha_opt", "V_opt", "feasible", "regime"];
pub const ORACLE_HEADER: &[&str] = &[
    "suite", "quantity", "points", "max_rel_dev", "tolerance", "max_dim", "passed",
];
pub const BOUNDS_HEADER: &[&str] = &["loss_db", "T", "plob", "n_m", "takeoka", "takeoka_limit", "in_domain"];

/// Result of a command: the table to write and, for the oracle gate, a
/// failure to report after the table is written.
pub struct Outcome {
    pub table: Table,
    pub failure: Option<CliError>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, failure: None }
    }
}

pub fn sweep(cfg: &SweepConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let losses = cfg.losses()?;
    let mut table = Table::new(SWEEP_HEADER);
    for &variant in &cfg.variants {
        let records = loss_sweep(variant, &cfg.alphas, &losses, &cfg.fixed, &cfg.grid, cfg.warm_start)
            .map_err(|e| CliError::Compute(format!("{variant} sweep: {e}")))?;
        for r in records {
            if r.failed {
                eprintln!(
                    "warning: {variant} at alpha={} loss={} dB has no valid operating point",
                    r.alpha, r.loss_db
                );
            }
            table.push(vec![
                r.loss_db.into(),
                r.alpha.into(),
                variant.name().into(),
                r.v_opt.into(),
                r.g_opt.into(),
                r.t_opt.into(),
                r.key_rate.into(),
                r.ber.into(),
                r.g_squared_t.into(),
                r.t_eff.into(),
                r.plob.into(),
            ]);
        }
    }
    Ok(table.into())
}

pub fn photon_budget(cfg: &PhotonConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let channel = ChannelModel::from_loss_db(cfg.loss_db, cfg.excess_noise)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let cells = photon_landscape(&channel, &cfg.key_rates, &cfg.max_bers, &cfg.fixed, &cfg.grid)
        .map_err(|e| CliError::Compute(format!("photon budget at {} dB: {e}", cfg.loss_db)))?;
    let mut table = Table::new(PHOTON_HEADER);
    for c in cells {
        let r = c.result;
        table.push(vec![
            c.min_key_rate.into(),
            c.max_ber.into(),
            r.min_photons.into(),
            r.arg_alpha.into(),
            r.arg_variance.into(),
            r.feasible.into(),
            r.regime.map_or("none", |g| g.name()).into(),
        ]);
    }
    Ok(table.into())
}

pub fn oracle_check(cfg: &OracleConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let suite = cfg.suite()?;
    let report =
        run_suite(suite, &cfg.settings).map_err(|e| CliError::Compute(format!("{suite} suite: {e}")))?;

    // one row per quantity, in order of first appearance
    let mut quantities: Vec<&str> = Vec::new();
    for c in &report.comparisons {
        if !quantities.contains(&c.quantity.as_str()) {
            quantities.push(&c.quantity);
        }
    }
    let mut table = Table::new(ORACLE_HEADER);
    for q in quantities {
        let group: Vec<_> = report.comparisons.iter().filter(|c| c.quantity == q).collect();
        let worst = group.iter().map(|c| c.rel_dev).fold(0.0, f64::max);
        let tol = group.iter().map(|c| c.tolerance).fold(f64::INFINITY, f64::min);
        let dim = group.iter().map(|c| c.dim).max().unwrap_or(0);
        let passed = group.iter().all(|c| c.passed());
        table.push(vec![
            suite.name().into(),
            q.into(),
            group.len().into(),
            worst.into(),
            tol.into(),
            dim.into(),
            passed.into(),
        ]);
    }
    for g in &report.gaussification {
        eprintln!(
            "gaussification {}: gaussian {:.6e} exact {:.6e} {}",
            g.case,
            g.gaussian_rate,
            g.exact_rate,
            if g.passed() { "ok" } else { "VIOLATED" }
        );
    }
    table.extra.push((
        "gaussification",
        serde_json::to_value(&report.gaussification).map_err(|e| CliError::Compute(e.to_string()))?,
    ));
    table.extra.push(("passed", report.passed().into()));

    let failure = (!report.passed()).then(|| {
        let bad: Vec<String> = report
            .comparisons
            .iter()
            .filter(|c| !c.passed())
            .take(5)
            .map(|c| format!("{} {} rel_dev={:.3e}", c.case, c.quantity, c.rel_dev))
            .chain(report.gaussification.iter().filter(|g| !g.passed()).map(|g| g.case.clone()))
            .collect();
        CliError::Oracle(format!("{suite}: {}", bad.join("; ")))
    });
    Ok(Outcome { table, failure })
}

pub fn bounds(cfg: &BoundsConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut table = Table::new(BOUNDS_HEADER);
    for loss in cfg.losses()? {
        let t = 10f64.powf(-loss / 10.0);
        let plob = plob_bound(t).ok();
        let limit = takeoka_limit(t).ok();
        if plob.is_none() {
            eprintln!("warning: T={t} at {loss} dB is outside (0, 1); row flagged");
        }
        for &n in &cfg.n_modes {
            let tk = takeoka_bound(t, n).ok();
            let ok = plob.is_some() && tk.is_some();
            table.push(vec![
                loss.into(),
                t.into(),
                plob.unwrap_or(f64::NAN).into(),
                n.into(),
                tk.unwrap_or(f64::NAN).into(),
                limit.unwrap_or(f64::NAN).into(),
                ok.into(),
            ]);
        }
    }
    Ok(table.into())
}

