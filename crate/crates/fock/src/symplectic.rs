use nalgebra::DMatrix;

/// Symplectic eigenvalues of a `2N × 2N` covariance matrix in
/// `(x₀, p₀, x₁, p₁, …)` ordering, sorted in decreasing order.
///
/// Brute force: the eigenvalues of `Ω V` are `±iν_k`; the moduli are
/// collected and each pair reduced to one value.
pub fn symplectic_spectrum(cov: &DMatrix<f64>) -> Vec<f64> {
    let n2 = cov.nrows();
    assert!(n2 % 2 == 0 && cov.is_square());
    let mut omega = DMatrix::<f64>::zeros(n2, n2);
    for k in 0..n2 / 2 {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    let prod = &omega * cov;
    let mut mags: Vec<f64> = prod
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    mags.chunks(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect()
}
