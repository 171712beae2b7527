use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{FockError, C64};

/// Sparse single-mode operator mapping `in_dim` Fock levels to `out_dim` levels.
#[derive(Debug, Clone)]
pub struct ModeOp {
    pub out_dim: usize,
    pub in_dim: usize,
    /// `(row, column, value)` triplets.
    pub entries: Vec<(usize, usize, C64)>,
}

impl ModeOp {
    pub fn new(out_dim: usize, in_dim: usize) -> Self {
        Self {
            out_dim,
            in_dim,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.out_dim && col < self.in_dim);
        if value != C64::new(0.0, 0.0) {
            self.entries.push((row, col, value));
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut op = Self::new(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            op.push(i, i, *v);
        }
        op
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut op = Self::new(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                op.push(r, c, m[(r, c)]);
            }
        }
        op
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

/// Truncated multimode state: a ket or a density operator over the product
/// of per-mode Fock spaces, row-major in mode order (mode 0 most significant).
#[derive(Debug, Clone)]
pub struct FockTensor {
    dims: Vec<usize>,
    data: Storage,
}

/// Split of a flat index into `(pre, level, post)` around one mode.
#[derive(Clone, Copy)]
pub(crate) struct Layout {
    pre: usize,
    dim: usize,
    post: usize,
}

impl Layout {
    fn index(&self, p: usize, i: usize, q: usize) -> usize {
        (p * self.dim + i) * self.post + q
    }
}

impl FockTensor {
    pub fn vacuum(dims: &[usize]) -> Self {
        let total: usize = dims.iter().product();
        let mut v = DVector::zeros(total);
        v[0] = C64::new(1.0, 0.0);
        Self {
            dims: dims.to_vec(),
            data: Storage::Pure(v),
        }
    }

    pub fn from_ket(dims: &[usize], amplitudes: DVector<C64>) -> Self {
        assert_eq!(dims.iter().product::<usize>(), amplitudes.len());
        Self {
            dims: dims.to_vec(),
            data: Storage::Pure(amplitudes),
        }
    }

    pub fn from_density(dims: &[usize], rho: DMatrix<C64>) -> Self {
        let total: usize = dims.iter().product();
        assert_eq!((total, total), rho.shape());
        Self {
            dims: dims.to_vec(),
            data: Storage::Mixed(rho),
        }
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_density(&self) -> bool {
        matches!(self.data, Storage::Mixed(_))
    }

    pub fn ket(&self) -> Option<&DVector<C64>> {
        match &self.data {
            Storage::Pure(v) => Some(v),
            Storage::Mixed(_) => None,
        }
    }

    /// Density operator of the state (copies for kets).
    pub fn density(&self) -> DMatrix<C64> {
        match &self.data {
            Storage::Pure(v) => v * v.adjoint(),
            Storage::Mixed(m) => m.clone(),
        }
    }

    pub fn into_density(self) -> Self {
        match self.data {
            Storage::Pure(ref v) => {
                let rho = v * v.adjoint();
                Self {
                    dims: self.dims,
                    data: Storage::Mixed(rho),
                }
            }
            Storage::Mixed(_) => self,
        }
    }

    /// Squared norm for kets, trace for density operators.
    pub fn trace(&self) -> f64 {
        match &self.data {
            Storage::Pure(v) => v.norm_squared(),
            Storage::Mixed(m) => m.trace().re,
        }
    }

    /// Rescales to unit trace and returns the trace before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let tr = self.trace();
        if tr > 0.0 {
            match &mut self.data {
                Storage::Pure(v) => *v /= Complex64::new(tr.sqrt(), 0.0),
                Storage::Mixed(m) => *m /= Complex64::new(tr, 0.0),
            }
        }
        tr
    }

    /// Largest deviation from Hermiticity (zero for kets).
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.data {
            Storage::Pure(_) => 0.0,
            Storage::Mixed(m) => (m - m.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        }
    }

    pub(crate) fn layout(&self, mode: usize) -> Result<Layout, FockError> {
        if mode >= self.dims.len() {
            return Err(FockError::BadMode {
                mode,
                modes: self.dims.len(),
            });
        }
        Ok(Layout {
            pre: self.dims[..mode].iter().product(),
            dim: self.dims[mode],
            post: self.dims[mode + 1..].iter().product(),
        })
    }

    /// Applies `op` to one mode: `|ψ⟩ → O|ψ⟩` or `ρ → O ρ O†`.
    pub fn apply(&self, mode: usize, op: &ModeOp) -> Result<Self, FockError> {
        let lay = self.layout(mode)?;
        assert_eq!(op.in_dim, lay.dim, "operator input dimension mismatch");
        let out_lay = Layout {
            dim: op.out_dim,
            ..lay
        };
        let mut dims = self.dims.clone();
        dims[mode] = op.out_dim;
        let data = match &self.data {
            Storage::Pure(v) => {
                let m = DMatrix::from_column_slice(v.len(), 1, v.as_slice());
                let out = left_apply(&m, lay, out_lay, op);
                Storage::Pure(DVector::from_column_slice(out.as_slice()))
            }
            Storage::Mixed(rho) => Storage::Mixed(sandwich(rho, lay, out_lay, op)),
        };
        Ok(Self { dims, data })
    }

    /// Applies a Kraus family to one mode, producing a density operator
    /// `Σ_k K_k ρ K_k†`.
    pub fn apply_kraus(&self, mode: usize, kraus: &[ModeOp]) -> Result<Self, FockError> {
        let lay = self.layout(mode)?;
        let out_dim = kraus.first().map(|k| k.out_dim).unwrap_or(lay.dim);
        let out_lay = Layout {
            dim: out_dim,
            ..lay
        };
        let mut dims = self.dims.clone();
        dims[mode] = out_dim;
        let total: usize = dims.iter().product();
        let mut acc = DMatrix::<C64>::zeros(total, total);
        match &self.data {
            Storage::Pure(v) => {
                let m = DMatrix::from_column_slice(v.len(), 1, v.as_slice());
                for k in kraus {
                    assert_eq!(k.out_dim, out_dim);
                    let w = left_apply(&m, lay, out_lay, k).column(0).into_owned();
                    acc.gerc(C64::new(1.0, 0.0), &w, &w, C64::new(1.0, 0.0));
                }
            }
            Storage::Mixed(rho) => {
                for k in kraus {
                    assert_eq!(k.out_dim, out_dim);
                    acc += sandwich(rho, lay, out_lay, k);
                }
            }
        }
        Ok(Self {
            dims,
            data: Storage::Mixed(acc),
        })
    }

    /// Contracts one mode against a bra: `⟨v|_k ρ |v⟩_k` (or `⟨v|ψ⟩` for kets).
    /// The mode is removed from the result; the result is unnormalized.
    pub fn project_mode(&self, mode: usize, v: &DVector<C64>) -> Result<Self, FockError> {
        let lay = self.layout(mode)?;
        assert_eq!(v.len(), lay.dim);
        let mut op = ModeOp::new(1, lay.dim);
        for (i, a) in v.iter().enumerate() {
            op.push(0, i, a.conj());
        }
        let reduced = self.apply(mode, &op)?;
        let mut dims = self.dims.clone();
        dims.remove(mode);
        if dims.is_empty() {
            dims.push(1);
        }
        Ok(Self {
            dims,
            data: reduced.data,
        })
    }

    /// Partial trace over one mode.
    pub fn trace_out(&self, mode: usize) -> Result<Self, FockError> {
        let lay = self.layout(mode)?;
        let rho = self.density();
        let rest = lay.pre * lay.post;
        let mut out = DMatrix::<C64>::zeros(rest, rest);
        for p1 in 0..lay.pre {
            for q1 in 0..lay.post {
                for p2 in 0..lay.pre {
                    for q2 in 0..lay.post {
                        let mut s = C64::new(0.0, 0.0);
                        for i in 0..lay.dim {
                            s += rho[(lay.index(p1, i, q1), lay.index(p2, i, q2))];
                        }
                        out[(p1 * lay.post + q1, p2 * lay.post + q2)] = s;
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.remove(mode);
        if dims.is_empty() {
            dims.push(1);
        }
        Ok(Self {
            dims,
            data: Storage::Mixed(out),
        })
    }

    /// Probability of each Fock level of one mode.
    pub fn photon_distribution(&self, mode: usize) -> Result<Vec<f64>, FockError> {
        let lay = self.layout(mode)?;
        let mut probs = vec![0.0; lay.dim];
        for p in 0..lay.pre {
            for q in 0..lay.post {
                for (i, pr) in probs.iter_mut().enumerate() {
                    let idx = lay.index(p, i, q);
                    *pr += match &self.data {
                        Storage::Pure(v) => v[idx].norm_sqr(),
                        Storage::Mixed(m) => m[(idx, idx)].re,
                    };
                }
            }
        }
        Ok(probs)
    }

    /// Von Neumann entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        match &self.data {
            Storage::Pure(_) => 0.0,
            Storage::Mixed(m) => {
                let tr = m.trace().re;
                let eig = nalgebra::SymmetricEigen::new(m.clone() / C64::new(tr, 0.0));
                eig.eigenvalues
                    .iter()
                    .filter(|&&l| l > 1e-300)
                    .map(|&l| -l * l.log2())
                    .sum()
            }
        }
    }

    /// Multi-index of a flat basis index.
    pub(crate) fn digits(&self, mut flat: usize, out: &mut [usize]) {
        for k in (0..self.dims.len()).rev() {
            out[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// `Tr[ρ O]` for an operator given by its action on basis kets.
    pub(crate) fn expect_with<F>(&self, mut action: F) -> C64
    where
        F: FnMut(&[usize], &mut Vec<(usize, f64)>),
    {
        let n = self.total_dim();
        let mut idx = vec![0; self.dims.len()];
        let mut images = Vec::new();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..n {
            self.digits(r, &mut idx);
            images.clear();
            action(&idx, &mut images);
            for &(s, w) in &images {
                // O|r⟩ = Σ w |s⟩  ⇒  Tr[ρO] = Σ_r Σ_s w ρ[r, s]
                acc += match &self.data {
                    Storage::Pure(v) => v[s].conj() * v[r] * w,
                    Storage::Mixed(m) => m[(r, s)] * w,
                };
            }
        }
        acc
    }
}

/// `M → (O ⊗ I) M` acting on rows.
fn left_apply(m: &DMatrix<C64>, lay: Layout, out_lay: Layout, op: &ModeOp) -> DMatrix<C64> {
    let rows = out_lay.pre * out_lay.dim * out_lay.post;
    let mut out = DMatrix::<C64>::zeros(rows, m.ncols());
    for c in 0..m.ncols() {
        let src = m.column(c);
        let mut dst = out.column_mut(c);
        for &(o, i, v) in &op.entries {
            for p in 0..lay.pre {
                let base_in = lay.index(p, i, 0);
                let base_out = out_lay.index(p, o, 0);
                for q in 0..lay.post {
                    dst[base_out + q] += v * src[base_in + q];
                }
            }
        }
    }
    out
}

/// `ρ → O ρ O†` for Hermitian `ρ`.
fn sandwich(rho: &DMatrix<C64>, lay: Layout, out_lay: Layout, op: &ModeOp) -> DMatrix<C64> {
    let half = left_apply(rho, lay, out_lay, op);
    left_apply(&half.adjoint(), lay, out_lay, op).adjoint()
}
