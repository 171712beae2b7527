use approx::assert_relative_eq;
use proptest::prelude::*;
use sqcc_core::baseline::{ber, sqcc_key_rate};
use sqcc_core::ideal::{effective_params, ideal_ber, ideal_key_rate};
use sqcc_core::oracle::{run_suite, OracleSettings, Suite};
use sqcc_core::{ChannelModel, ProtocolConfig, SqccError};

fn config(v: f64, alpha: f64) -> ProtocolConfig {
    ProtocolConfig {
        variance: v,
        alpha,
        theta: 0.0,
        phase_noise: 1e-6,
        reconciliation: 0.95,
    }
}

#[test]
fn unit_gain_is_identity() {
    let cfg = config(1.7, 0.4);
    let ch = ChannelModel::from_transmissivity(0.3, 0.02).unwrap();
    let p = effective_params(&cfg, &ch, 1.0).unwrap();
    assert_relative_eq!(p.alpha_eff, 0.4, epsilon = 1e-15);
    assert_relative_eq!(p.variance_eff, 1.7, epsilon = 1e-14);
    assert_relative_eq!(p.transmissivity_eff, 0.3, epsilon = 1e-15);
    assert_relative_eq!(p.excess_noise_eff, 0.02, epsilon = 1e-14);
    assert_eq!(ideal_ber(&cfg, &ch, 1.0).unwrap(), ber(&cfg, &ch).unwrap());
}

#[test]
fn pure_loss_map_without_displacement() {
    // textbook pure-loss result: λ' = λ√(1 + (g²-1)T), T' = g²T/(1 + (g²-1)T)
    let (v, t, g) = (1.5f64, 0.2f64, 1.8f64);
    let cfg = ProtocolConfig {
        phase_noise: 0.0,
        ..config(v, 0.0)
    };
    let ch = ChannelModel::from_transmissivity(t, 0.0).unwrap();
    let p = effective_params(&cfg, &ch, g).unwrap();
    let lambda2 = (v - 1.0) / (v + 1.0);
    let s = 1.0 + (g * g - 1.0) * t;
    let l2 = lambda2 * s;
    assert_relative_eq!(p.variance_eff, (1.0 + l2) / (1.0 - l2), max_relative = 1e-13);
    assert_relative_eq!(p.transmissivity_eff, g * g * t / s, max_relative = 1e-13);
    assert_eq!(p.alpha_eff, 0.0);
    assert!(p.excess_noise_eff.abs() < 1e-15);
    assert_eq!(ideal_ber(&cfg, &ch, g).unwrap(), 0.5);
}

#[test]
fn zero_amplitude_matches_plain_amplified_protocol() {
    let ch = ChannelModel::from_loss_db(20.0, 0.03).unwrap();
    let quiet = |alpha| ProtocolConfig {
        phase_noise: 0.0,
        ..config(1.3, alpha)
    };
    let with = effective_params(&quiet(0.2), &ch, 4.0).unwrap();
    let without = effective_params(&quiet(0.0), &ch, 4.0).unwrap();
    assert_eq!(without.alpha_eff, 0.0);
    assert_eq!(with.variance_eff, without.variance_eff);
    assert_eq!(with.transmissivity_eff, without.transmissivity_eff);
}

#[test]
fn oracle_point_matches() {
    let settings = OracleSettings {
        random_points: 3,
        spot_checks: false,
        ..OracleSettings::default()
    };
    let report = run_suite(Suite::IdealNla, &settings).unwrap();
    assert!(report.comparisons.iter().any(|c| c.case.contains("1.2")));
    assert!(report.passed(), "max deviation {}", report.max_rel_dev());
}

#[test]
fn excessive_gain_is_rejected() {
    let ch = ChannelModel::from_transmissivity(0.5, 0.1).unwrap();
    let err = effective_params(&config(1.5, 0.0), &ch, 20.0).unwrap_err();
    assert!(matches!(err, SqccError::GainOutOfDomain { .. }));
    assert!(effective_params(&config(1.5, 0.0), &ch, 0.9).is_err());
}

#[test]
fn success_prefactor_is_inverse_gain_squared() {
    let ch = ChannelModel::from_loss_db(30.0, 0.03).unwrap();
    let r = ideal_key_rate(&config(1.2, 0.12), &ch, 20.0).unwrap();
    assert_relative_eq!(r.success_prob, 1.0 / 400.0, epsilon = 1e-18);
}

proptest! {
    #[test]
    fn unit_gain_reproduces_baseline(
        v in 1.0f64..20.0,
        alpha in 0.0f64..5.0,
        loss in 0.0f64..60.0,
        eps in 0.0f64..0.1,
    ) {
        let ch = ChannelModel::from_loss_db(loss, eps).unwrap();
        let cfg = config(v, alpha);
        let a = ideal_key_rate(&cfg, &ch, 1.0).unwrap();
        let b = sqcc_key_rate(&cfg, &ch).unwrap();
        prop_assert!((a.key_rate - b.key_rate).abs() <= 1e-12);
        prop_assert!((a.signed_rate - b.signed_rate).abs() <= 1e-12);
        prop_assert!((a.ber - b.ber).abs() <= 1e-12);
        prop_assert!((a.ber_noise - b.ber_noise).abs() <= 1e-12 * b.ber_noise.max(1.0));
    }

    #[test]
    fn effective_channel_is_physical(
        v in 1.0f64..3.0,
        alpha in 0.0f64..1.0,
        loss in 0.0f64..60.0,
        eps in 0.0f64..0.1,
        g in 1.0f64..50.0,
    ) {
        let ch = ChannelModel::from_loss_db(loss, eps).unwrap();
        if let Ok(p) = effective_params(&config(v, alpha), &ch, g) {
            prop_assert!(p.variance_eff >= 1.0);
            prop_assert!(p.transmissivity_eff > 0.0 && p.transmissivity_eff <= 1.0);
            prop_assert!(p.total_excess_eff >= 0.0);
            let r = ideal_key_rate(&config(v, alpha), &ch, g).unwrap();
            prop_assert!(r.ber > 0.0 && r.ber <= 0.5);
        }
    }
}
