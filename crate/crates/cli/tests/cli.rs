use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sqcc_core::optimize::{evaluate, Params, SearchGrid, Variant};
use sqcc_core::{ChannelModel, ProtocolConfig};

fn sqcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqcc")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SWEEP: &str = r#"
variants = ["baseline", "ideal", "scissor", "dual"]
alphas = [0.0, 0.12]
losses_db = [10.0, 40.0]

[fixed]
excess_noise = 0.03
phase_noise = 1e-6
reconciliation = 0.95
theta = 0.0
"#;

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sqcc(&["sweep"])), 2);
    assert_eq!(code(&sqcc(&["frobnicate"])), 2);

    let missing = dir.path().join("nope.toml");
    assert_eq!(code(&sqcc(&["sweep", "--config", missing.to_str().unwrap()])), 2);

    let unknown = write(dir.path(), "u.toml", &format!("{SWEEP}\nbogus = 1\n"));
    let o = sqcc(&["sweep", "--config", unknown.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    let empty = write(dir.path(), "e.toml", &SWEEP.replace("[10.0, 40.0]", "[]"));
    assert_eq!(code(&sqcc(&["sweep", "--config", empty.to_str().unwrap()])), 2);

    let both = write(
        dir.path(),
        "b.toml",
        &SWEEP.replace("losses_db = [10.0, 40.0]", "losses_db = [1.0]\nloss_range = { start = 0.0, stop = 1.0, step = 1.0 }"),
    );
    assert_eq!(code(&sqcc(&["sweep", "--config", both.to_str().unwrap()])), 2);

    let suite = write(dir.path(), "s.toml", "suite = \"fock\"\n");
    assert_eq!(code(&sqcc(&["oracle-check", "--config", suite.to_str().unwrap()])), 2);

    let bounds = write(dir.path(), "t.toml", "losses_db = [3.0]\n");
    assert_eq!(code(&sqcc(&["bounds", "--config", bounds.to_str().unwrap(), "--threads", "0"])), 2);
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b.toml", "losses_db = [3.0]\n");
    let out = dir.path().join("missing/dir/out.csv");
    let o = sqcc(&["bounds", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn oracle_tolerance_violation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.toml",
        "suite = \"gaussian-core\"\n\n[settings]\ncovariances = 20\nspectrum_tolerance = 1e-300\ntolerance = 1e-300\nspot_checks = false\n",
    );
    let o = sqcc(&["oracle-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("suite,quantity,points,max_rel_dev,tolerance,max_dim,passed\n"));
    assert!(text.contains(",false\n"));

    let ok = write(
        dir.path(),
        "p.toml",
        "suite = \"gaussian-core\"\n\n[settings]\ncovariances = 20\nspot_checks = false\n",
    );
    assert_eq!(code(&sqcc(&["oracle-check", "--config", ok.to_str().unwrap()])), 0);
}

#[test]
fn bounds_table() {
    let dir = tempfile::tempdir().unwrap();
    let half = 10.0 * 2f64.log10();
    let cfg = write(
        dir.path(),
        "b.toml",
        &format!("losses_db = [0.0, {half:?}, 10.0, 20.0, 40.0, 60.0]\nn_modes = [1e6]\n"),
    );
    let o = sqcc(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "loss_db,T,plob,n_m,takeoka,takeoka_limit,in_domain");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][2], "NaN");
    assert_eq!(rows[0][6], "false");
    assert!(rows[1..].iter().all(|r| r[6] == "true"));

    let plob: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(plob.windows(2).all(|w| w[1] < w[0]));
    // T = 1/2: the limit is log2(3); the finite-N value sits a few 1e-6 below it
    let limit: f64 = rows[1][5].parse().unwrap();
    let at: f64 = rows[1][4].parse().unwrap();
    assert!((limit - 3f64.log2()).abs() < 1e-12);
    assert!(at < limit && limit - at < 5e-6);
    for r in &rows[1..] {
        let (tk, lim): (f64, f64) = (r[4].parse().unwrap(), r[5].parse().unwrap());
        assert!(tk <= lim);
    }
}

#[test]
fn single_cell_photon_grid_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.toml",
        "loss_db = 5.0\nexcess_noise = 0.03\nkey_rates = [0.05]\nmax_bers = [1e-4]\n\n[fixed]\nphase_noise = 1e-6\nreconciliation = 0.95\n",
    );
    let o = sqcc(&["photon-budget", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "k0,ec0,nbar_min,alpha_opt,V_opt,feasible,regime");
    assert!(lines[1].ends_with(",true,large-alpha"));
}

#[test]
fn sweep_rates_are_library_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SWEEP);
    let out = dir.path().join("s.csv");
    let o = sqcc(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["loss_db", "alpha", "variant", "V_opt", "g_opt", "t_opt", "key_rate", "ber", "g2T", "T_eff", "plob"]
    );
    let grid = SearchGrid::default();
    let mut n = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let f = |i: usize| rec[i].parse::<f64>().unwrap();
        let variant: Variant = rec[2].parse().unwrap();
        let cfg = ProtocolConfig {
            variance: f(3),
            alpha: f(1),
            theta: 0.0,
            phase_noise: 1e-6,
            reconciliation: 0.95,
        };
        let ch = ChannelModel::from_loss_db(f(0), 0.03).unwrap();
        let p = Params {
            variance: f(3),
            gain: f(4),
            tap: f(5),
        };
        let direct = evaluate(variant, &cfg, &ch, p, grid.convention).unwrap();
        assert_eq!(direct.key_rate.to_bits(), f(6).to_bits(), "{rec:?}");
        assert_eq!(direct.ber.to_bits(), f(7).to_bits(), "{rec:?}");
        n += 1;
    }
    assert_eq!(n, 4 * 2 * 2);
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SWEEP);
    let run = |threads: &str| {
        let o = sqcc(&["sweep", "--config", cfg.to_str().unwrap(), "--threads", threads]);
        assert_eq!(code(&o), 0);
        o.stdout
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(one, run("1"));
}

#[test]
fn json_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b.toml", "losses_db = [0.0, 10.0]\nformat = \"csv\"\n");
    let o = sqcc(&["bounds", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["plob"].is_null());
    assert_eq!(rows[0]["in_domain"], false);
    assert!(rows[1]["plob"].as_f64().unwrap() > 0.15);

    let cfg = write(dir.path(), "j.toml", "losses_db = [10.0]\nformat = \"json\"\n");
    let o = sqcc(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert!(serde_json::from_slice::<serde_json::Value>(&o.stdout).is_ok());
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    for name in [
        "bounds.toml",
        "photon_5db.toml",
        "photon_0db.toml",
        "sweep_amplified.toml",
        "dual_eps00.toml",
        "dual_eps003.toml",
    ] {
        let cmd = match name.split('_').next().unwrap() {
            "photon" => "photon-budget",
            "sweep" | "dual" => "sweep",
            _ => "bounds",
        };
        let out = dir.path().join(name);
        let o = sqcc(&[cmd, "--config", root.join(name).to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
