use approx::assert_relative_eq;
use proptest::prelude::*;
use sqcc_core::baseline::{channel_cov, ChannelModel, ProtocolConfig};
use sqcc_core::gaussian::{
    conditional_eigenvalue, entropy_g, holevo_bound, key_rate, mutual_information, plob_bound,
    symplectic_eigenvalues, takeoka_bound, takeoka_limit, thermal_entropy, TwoModeCovariance,
};
use sqcc_core::oracle::full_matrix;
use sqcc_core::SqccError;
use sqcc_fock::{symplectic_spectrum, thermal_state};

fn cov(a: f64, b: f64, c: f64) -> TwoModeCovariance<f64> {
    TwoModeCovariance::new(a, b, c)
}

#[test]
fn symplectic_examples() {
    let (n1, n2) = symplectic_eigenvalues(&TwoModeCovariance::tmsv(3.0f64)).unwrap();
    assert_relative_eq!(n1, 1.0, epsilon = 1e-12);
    assert_relative_eq!(n2, 1.0, epsilon = 1e-12);

    let (n1, n2) = symplectic_eigenvalues(&cov(3.0, 3.0, 0.0)).unwrap();
    assert_relative_eq!(n1, 3.0, epsilon = 1e-12);
    assert_relative_eq!(n2, 3.0, epsilon = 1e-12);

    let c = cov(2.0, 1.25, 0.9);
    let brute = symplectic_spectrum(&full_matrix(&c));
    assert_eq!(brute.len(), 2);
    // ab - c² - 1 = 0.69 < |a - b|, so the smaller eigenvalue is below vacuum
    assert!(brute[1] < 0.98);
    let err = symplectic_eigenvalues(&c).unwrap_err();
    assert!(matches!(err, SqccError::NonPhysicalCovariance { .. }));

    let c = cov(2.0, 1.5, 0.9);
    let (n1, n2) = symplectic_eigenvalues(&c).unwrap();
    let brute = symplectic_spectrum(&full_matrix(&c));
    assert_relative_eq!(n1, brute[0], max_relative = 1e-10);
    assert_relative_eq!(n2, brute[1], max_relative = 1e-10);
}

#[test]
fn conditional_examples() {
    assert_relative_eq!(conditional_eigenvalue(&TwoModeCovariance::tmsv(3.0f64)).unwrap(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(conditional_eigenvalue(&cov(3.0, 3.0, 0.0)).unwrap(), 3.0, epsilon = 1e-12);
    assert_relative_eq!(conditional_eigenvalue(&cov(2.0, 1.25, 0.9)).unwrap(), 1.64, epsilon = 1e-12);
}

#[test]
fn entropy_examples() {
    assert_eq!(entropy_g(1.0).unwrap(), 0.0);
    assert_relative_eq!(entropy_g(3.0).unwrap(), 2.0, epsilon = 1e-12);
    // thermal mode of variance 10 has 4.5 mean photons
    let rho = thermal_state(4.5, 240).unwrap();
    assert_relative_eq!(entropy_g(10.0).unwrap(), rho.entropy_bits(), max_relative = 1e-9);
    assert!(entropy_g(0.5).is_err());
}

#[test]
fn mutual_information_examples() {
    assert_eq!(mutual_information(&cov(3.0, 2.0, 0.0)).unwrap(), 0.0);
    assert_relative_eq!(mutual_information(&TwoModeCovariance::tmsv(3.0f64)).unwrap(), 1.0, epsilon = 1e-12);
    let want = (3.0f64 / (3.0 - 0.36)).log2();
    assert_relative_eq!(mutual_information(&cov(2.0, 1.25, 0.9)).unwrap(), want, epsilon = 1e-12);
    assert!((want - 0.1844).abs() < 1e-4);
}

#[test]
fn holevo_examples() {
    assert!(holevo_bound(&TwoModeCovariance::tmsv(3.0f64)).unwrap().abs() < 1e-9);
    assert_relative_eq!(holevo_bound(&cov(3.0, 3.0, 0.0)).unwrap(), 2.0, epsilon = 1e-12);
}

#[test]
fn key_rate_examples() {
    assert_relative_eq!(key_rate(&TwoModeCovariance::tmsv(3.0f64), 1.0, 1.0).unwrap(), 1.0, epsilon = 1e-9);
    // c = 0 leaves χ > 0 with I = 0
    assert_eq!(key_rate(&cov(3.0, 3.0, 0.0), 1.0, 1.0).unwrap(), 0.0);

    let config = ProtocolConfig {
        variance: 2.0,
        alpha: 0.0,
        theta: 0.0,
        phase_noise: 0.0,
        reconciliation: 0.95,
    };
    let channel = ChannelModel::from_transmissivity(0.6, 0.05).unwrap();
    let c = channel_cov(&config, &channel).unwrap();
    let k = key_rate(&c, 0.95, 1.0).unwrap();
    let want: f64 = 0.95 * mutual_information(&c).unwrap() - holevo_bound(&c).unwrap();
    assert_relative_eq!(k, want.max(0.0), epsilon = 1e-15);
    assert!(k > 0.0);
}

#[test]
fn bound_examples() {
    assert_relative_eq!(plob_bound(0.5).unwrap(), 1.0, epsilon = 1e-15);
    assert_relative_eq!(plob_bound(0.9).unwrap(), 10f64.log2(), epsilon = 1e-12);
    assert_relative_eq!(plob_bound(1e-6).unwrap(), 1.4427e-6, max_relative = 1e-4);
    assert!(plob_bound(1.0).is_err());

    assert_eq!(takeoka_bound(0.5, 0.0).unwrap(), 0.0);
    assert_relative_eq!(takeoka_limit(0.5).unwrap(), 3f64.log2(), epsilon = 1e-12);
    let want = thermal_entropy(0.75) - thermal_entropy(0.25);
    assert_relative_eq!(takeoka_bound(0.5, 1.0).unwrap(), want, epsilon = 1e-15);
    // (x+1)log(x+1) - x log x by hand
    let g = |x: f64| (x + 1.0) * (x + 1.0).log2() - x * x.log2();
    assert_relative_eq!(want, g(0.75) - g(0.25), epsilon = 1e-14);
}

#[test]
fn takeoka_large_photon_limit() {
    let n = 1e6;
    for t in [0.05f64, 0.1, 0.5, 0.9] {
        let at = takeoka_bound(t, n).unwrap();
        let lim = takeoka_limit(t).unwrap();
        // leading 1/N correction of g(x) ≈ log₂(e x) + 1/(2x ln 2)
        let gap = (2.0 / (1.0 - t) - 2.0 / (1.0 + t)) / (2.0 * n * std::f64::consts::LN_2);
        // thermal_entropy cancels two O(N log N) terms, worth ~1e-8 absolute
        assert!((lim - at - gap).abs() < 1e-3 * gap + 2e-8, "T={t}: {} vs {gap}", lim - at);
        if gap < 9e-7 {
            assert!((at - lim).abs() < 1e-6, "T={t}");
        }
    }
}

#[test]
fn non_physical_rejected() {
    let err = symplectic_eigenvalues(&cov(1.0, 1.0, 0.5)).unwrap_err();
    assert!(matches!(err, SqccError::NonPhysicalCovariance { .. }));
    assert!(holevo_bound(&cov(0.5, 1.0, 0.0)).is_err());
}

#[test]
fn single_precision_agrees() {
    let c32 = TwoModeCovariance::new(2.0f32, 1.5, 0.9);
    let (n1, n2) = symplectic_eigenvalues(&c32).unwrap();
    let (m1, m2) = symplectic_eigenvalues(&cov(2.0, 1.5, 0.9)).unwrap();
    assert!((n1 as f64 - m1).abs() < 1e-5);
    assert!((n2 as f64 - m2).abs() < 1e-5);
}

proptest! {
    #[test]
    fn pure_states_have_unit_spectrum(v in 1.0f64..50.0) {
        let c = TwoModeCovariance::tmsv(v);
        let (n1, n2) = symplectic_eigenvalues(&c).unwrap();
        prop_assert!((n1 - 1.0).abs() < 1e-9);
        prop_assert!((n2 - 1.0).abs() < 1e-9);
        prop_assert!(holevo_bound(&c).unwrap().abs() < 1e-9);
    }

    #[test]
    fn noiseless_mutual_information(v in 1.0f64..50.0) {
        let i = mutual_information(&TwoModeCovariance::tmsv(v)).unwrap();
        prop_assert!((i - ((v + 1.0) / 2.0).log2()).abs() < 1e-9);
    }

    #[test]
    fn plob_increases(t in 1e-6f64..0.99, dt in 1e-4f64..0.009) {
        prop_assert!(plob_bound(t + dt).unwrap() > plob_bound(t).unwrap());
    }

    #[test]
    fn takeoka_nondecreasing(t in 0.01f64..0.99, n in 0.0f64..1e4, dn in 0.0f64..1e3) {
        prop_assert!(takeoka_bound(t, n + dn).unwrap() >= takeoka_bound(t, n).unwrap() - 1e-12);
    }

    #[test]
    fn channel_output_matches_brute_force(
        v in 1.0f64..20.0,
        t in 0.01f64..1.0,
        eps in 0.0f64..0.2,
    ) {
        let config = ProtocolConfig { variance: v, alpha: 0.0, theta: 0.0, phase_noise: 0.0, reconciliation: 1.0 };
        let channel = ChannelModel::from_transmissivity(t, eps).unwrap();
        let c = channel_cov(&config, &channel).unwrap();
        let (n1, n2) = symplectic_eigenvalues(&c).unwrap();
        let brute = symplectic_spectrum(&full_matrix(&c));
        prop_assert!((n1 - brute[0]).abs() <= 1e-8 * brute[0]);
        prop_assert!((n2 - brute[1]).abs() <= 1e-8 * brute[1]);
        prop_assert!(holevo_bound(&c).unwrap() >= 0.0);
    }
}
