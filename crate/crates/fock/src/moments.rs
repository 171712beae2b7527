use nalgebra::{DMatrix, DVector};

use crate::state::FockTensor;
use crate::C64;

/// First and second quadrature moments, ordered `(x₀, p₀, x₁, p₁, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianMoments {
    pub fn x_mean(&self, mode: usize) -> f64 {
        self.mean[2 * mode]
    }

    pub fn x_variance(&self, mode: usize) -> f64 {
        self.covariance[(2 * mode, 2 * mode)]
    }

    pub fn xx_covariance(&self, a: usize, b: usize) -> f64 {
        self.covariance[(2 * a, 2 * b)]
    }
}

impl FockTensor {
    /// `⟨a_k⟩`.
    pub fn expect_a(&self, k: usize) -> C64 {
        let strides = self.strides();
        self.expect_with(|idx, out| {
            if idx[k] > 0 {
                out.push((flat(idx, &strides) - strides[k], (idx[k] as f64).sqrt()));
            }
        })
    }

    /// `⟨a_j a_k⟩`.
    pub fn expect_aa(&self, j: usize, k: usize) -> C64 {
        let strides = self.strides();
        self.expect_with(|idx, out| {
            let mut w = 1.0;
            let mut lv = idx.to_vec();
            for &m in &[k, j] {
                if lv[m] == 0 {
                    return;
                }
                w *= (lv[m] as f64).sqrt();
                lv[m] -= 1;
            }
            out.push((flat(&lv, &strides), w));
        })
    }

    /// `⟨a_j† a_k⟩`.
    pub fn expect_ada(&self, j: usize, k: usize) -> C64 {
        let strides = self.strides();
        let dims = self.mode_dims().to_vec();
        self.expect_with(|idx, out| {
            if idx[k] == 0 {
                return;
            }
            let mut lv = idx.to_vec();
            let mut w = (lv[k] as f64).sqrt();
            lv[k] -= 1;
            if lv[j] + 1 >= dims[j] {
                return;
            }
            lv[j] += 1;
            w *= (lv[j] as f64).sqrt();
            out.push((flat(&lv, &strides), w));
        })
    }

    /// Quadrature means and symmetrized covariance via ladder-operator
    /// expectation values. The state need not be normalized.
    pub fn moments(&self) -> GaussianMoments {
        let n = self.modes();
        let tr = self.trace();
        let a: Vec<C64> = (0..n).map(|k| self.expect_a(k) / tr).collect();
        let mut mean = DVector::zeros(2 * n);
        for k in 0..n {
            mean[2 * k] = 2.0 * a[k].re;
            mean[2 * k + 1] = 2.0 * a[k].im;
        }
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in j..n {
                let aa = self.expect_aa(j, k) / tr;
                let ada = self.expect_ada(j, k) / tr;
                let delta = if j == k { 1.0 } else { 0.0 };
                let xx = 2.0 * aa.re + 2.0 * ada.re + delta;
                let pp = -2.0 * aa.re + 2.0 * ada.re + delta;
                let xp = 2.0 * aa.im + 2.0 * ada.im;
                // ⟨p_j x_k⟩: swap roles of the modes
                let px = if j == k {
                    xp
                } else {
                    2.0 * aa.im - 2.0 * ada.im
                };
                cov[(2 * j, 2 * k)] = xx - mean[2 * j] * mean[2 * k];
                cov[(2 * j + 1, 2 * k + 1)] = pp - mean[2 * j + 1] * mean[2 * k + 1];
                cov[(2 * j, 2 * k + 1)] = xp - mean[2 * j] * mean[2 * k + 1];
                cov[(2 * j + 1, 2 * k)] = px - mean[2 * j + 1] * mean[2 * k];
            }
        }
        for j in 0..2 * n {
            for k in 0..j {
                cov[(j, k)] = cov[(k, j)];
            }
        }
        GaussianMoments {
            mean,
            covariance: cov,
        }
    }
}

fn flat(idx: &[usize], strides: &[usize]) -> usize {
    idx.iter().zip(strides).map(|(i, s)| i * s).sum()
}
