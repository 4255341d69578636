//! Dense third-order tensors representing bilinear operators `T: H1 × H2 → K`.
//!
//! Entries are stored row-major as `t[i][j][k] = ⟨T(e_i, f_j), g_k⟩`, with `i`
//! indexing `H1`, `j` indexing `H2` and `k` (fastest) indexing `K`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Mode, Result};
use crate::vecops;

/// Tolerance used when checking that a change-of-basis matrix is orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Dimensions `(n1, n2, n3)` of `H1`, `H2` and `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Dims {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Self {
        Self { n1, n2, n3 }
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn of(&self, mode: Mode) -> usize {
        match mode {
            Mode::H1 => self.n1,
            Mode::H2 => self.n2,
            Mode::K => self.n3,
        }
    }

    pub fn max(&self) -> usize {
        self.n1.max(self.n2).max(self.n3)
    }

    pub fn min(&self) -> usize {
        self.n1.min(self.n2).min(self.n3)
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.n1, self.n2, self.n3]
    }

    pub(crate) fn check(&self, mode: Mode, v: &[f64]) -> Result<()> {
        let expected = self.of(mode);
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                mode,
                expected,
                actual: v.len(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.n1, self.n2, self.n3)
    }
}

/// A bilinear operator in fixed orthonormal bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: Dims,
    values: Vec<f64>,
    name: Option<String>,
}

impl Tensor3 {
    /// Builds a tensor from a flat row-major value array.
    ///
    /// Rejects zero dimensions, a length that does not match the dimensions,
    /// and non-finite entries.
    pub fn new(dims: Dims, values: Vec<f64>) -> Result<Self> {
        if dims.n1 == 0 || dims.n2 == 0 || dims.n3 == 0 {
            return Err(Error::invalid(format!("zero dimension in {dims}")));
        }
        if values.len() != dims.len() {
            return Err(Error::invalid(format!(
                "expected {} values for dims {dims}, got {}",
                dims.len(),
                values.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite entry at flat index {p}")));
        }
        Ok(Self {
            dims,
            values,
            name: None,
        })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        Self::new(dims, vec![0.0; dims.len()])
    }

    /// Builds a tensor entrywise from `f(i, j, k)`.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(dims.len());
        for i in 0..dims.n1 {
            for j in 0..dims.n2 {
                for k in 0..dims.n3 {
                    values.push(f(i, j, k));
                }
            }
        }
        Self::new(dims, values)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims.n2 + j) * self.dims.n3 + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let p = self.idx(i, j, k);
        self.values[p] = v;
    }

    /// `T(x, y)`, i.e. `z_k = Σ_ij t[i][j][k] x_i y_j`.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.dims.check(Mode::H1, x)?;
        self.dims.check(Mode::H2, y)?;
        Ok(self.apply_unchecked(x, y))
    }

    pub(crate) fn apply_unchecked(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let Dims { n1, n2, n3 } = self.dims;
        let mut out = vec![0.0; n3];
        for i in 0..n1 {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n2 {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let row = &self.values[self.idx(i, j, 0)..self.idx(i, j, 0) + n3];
                for (o, t) in out.iter_mut().zip(row) {
                    *o += w * t;
                }
            }
        }
        out
    }

    /// Adjoint of `x ↦ T(x, y)` evaluated at `z`: the `H1` vector
    /// `Σ_jk t[i][j][k] y_j z_k`.
    pub fn adjoint_contract_1(&self, y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        self.dims.check(Mode::H2, y)?;
        self.dims.check(Mode::K, z)?;
        Ok(self.contract_yz(y, z))
    }

    /// Adjoint of `y ↦ T(x, y)` evaluated at `z`: the `H2` vector
    /// `Σ_ik t[i][j][k] x_i z_k`.
    pub fn adjoint_contract_2(&self, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        self.dims.check(Mode::H1, x)?;
        self.dims.check(Mode::K, z)?;
        Ok(self.contract_xz(x, z))
    }

    pub(crate) fn contract_yz(&self, y: &[f64], z: &[f64]) -> Vec<f64> {
        let Dims { n1, n2, n3 } = self.dims;
        (0..n1)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n2 {
                    let base = self.idx(i, j, 0);
                    s += y[j] * vecops::dot(&self.values[base..base + n3], z);
                }
                s
            })
            .collect()
    }

    pub(crate) fn contract_xz(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        let Dims { n1, n2, n3 } = self.dims;
        let mut out = vec![0.0; n2];
        for i in 0..n1 {
            for (j, o) in out.iter_mut().enumerate() {
                let base = self.idx(i, j, 0);
                *o += x[i] * vecops::dot(&self.values[base..base + n3], z);
            }
        }
        out
    }

    /// The trilinear form `⟨T(x, y), z⟩`.
    pub fn form(&self, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        vecops::dot(&self.apply_unchecked(x, y), z)
    }

    /// Hilbert–Schmidt norm: the Frobenius norm of the entry array.
    pub fn hs_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Expresses the operator in rotated bases.
    ///
    /// The columns of `u`, `v`, `w` are the new orthonormal basis vectors of
    /// `H1`, `H2` and `K`; the result holds `⟨T(u_a, v_b), w_c⟩`.
    pub fn change_basis(&self, u: &DMatrix<f64>, v: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<Self> {
        check_orthogonal(u, self.dims.n1, Mode::H1)?;
        check_orthogonal(v, self.dims.n2, Mode::H2)?;
        check_orthogonal(w, self.dims.n3, Mode::K)?;
        let Dims { n1, n2, n3 } = self.dims;

        // Contract one mode at a time: O(n^4) instead of O(n^6).
        let mut s1 = vec![0.0; n1 * n2 * n3];
        for a in 0..n1 {
            for i in 0..n1 {
                let c = u[(i, a)];
                if c == 0.0 {
                    continue;
                }
                for jk in 0..n2 * n3 {
                    s1[a * n2 * n3 + jk] += c * self.values[i * n2 * n3 + jk];
                }
            }
        }
        let mut s2 = vec![0.0; n1 * n2 * n3];
        for a in 0..n1 {
            for b in 0..n2 {
                for j in 0..n2 {
                    let c = v[(j, b)];
                    if c == 0.0 {
                        continue;
                    }
                    for k in 0..n3 {
                        s2[(a * n2 + b) * n3 + k] += c * s1[(a * n2 + j) * n3 + k];
                    }
                }
            }
        }
        let mut out = vec![0.0; n1 * n2 * n3];
        for ab in 0..n1 * n2 {
            for c in 0..n3 {
                out[ab * n3 + c] = (0..n3).map(|k| w[(k, c)] * s2[ab * n3 + k]).sum();
            }
        }
        let mut t = Tensor3::new(self.dims, out)?;
        t.name = self.name.clone();
        Ok(t)
    }

    /// Subtracts `tau · x ⊗ y ⊗ z` entrywise.
    pub fn deflate_term(&self, tau: f64, x: &[f64], y: &[f64], z: &[f64]) -> Result<Self> {
        self.dims.check(Mode::H1, x)?;
        self.dims.check(Mode::H2, y)?;
        self.dims.check(Mode::K, z)?;
        let mut out = self.clone();
        out.add_rank_one(-tau, x, y, z);
        Ok(out)
    }

    pub(crate) fn add_rank_one(&mut self, s: f64, x: &[f64], y: &[f64], z: &[f64]) {
        let Dims { n1, n2, n3 } = self.dims;
        for i in 0..n1 {
            for j in 0..n2 {
                let w = s * x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let base = self.idx(i, j, 0);
                for k in 0..n3 {
                    self.values[base + k] += w * z[k];
                }
            }
        }
    }

    /// Builds `Σ τ_i · x_i ⊗ y_i ⊗ z_i`. An empty term list gives the zero
    /// tensor of the supplied dimensions.
    pub fn from_schmidt<'a, I>(dims: Dims, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, &'a [f64], &'a [f64], &'a [f64])>,
    {
        let mut t = Tensor3::zeros(dims)?;
        for (tau, x, y, z) in terms {
            dims.check(Mode::H1, x)?;
            dims.check(Mode::H2, y)?;
            dims.check(Mode::K, z)?;
            if !tau.is_finite() {
                return Err(Error::invalid("non-finite coefficient"));
            }
            t.add_rank_one(tau, x, y, z);
        }
        Ok(t)
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &Tensor3) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::invalid(format!(
                "cannot subtract {} from {}",
                other.dims, self.dims
            )));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Tensor3::new(self.dims, values)
    }

    /// Matrix of `x ↦ T(x, y)` as an `n3 × n1` array.
    pub fn slice_fixed_y(&self, y: &[f64]) -> DMatrix<f64> {
        let Dims { n1, n2, n3 } = self.dims;
        DMatrix::from_fn(n3, n1, |k, i| (0..n2).map(|j| self.get(i, j, k) * y[j]).sum())
    }

    /// Matrix of `y ↦ T(x, y)` as an `n3 × n2` array.
    pub fn slice_fixed_x(&self, x: &[f64]) -> DMatrix<f64> {
        let Dims { n1, n2, n3 } = self.dims;
        DMatrix::from_fn(n3, n2, |k, j| (0..n1).map(|i| self.get(i, j, k) * x[i]).sum())
    }

    /// Matrix of `y ↦ φ*_{H1}(y)(z)` as an `n1 × n2` array.
    pub fn slice_fixed_z(&self, z: &[f64]) -> DMatrix<f64> {
        let Dims { n1, n2, n3 } = self.dims;
        DMatrix::from_fn(n1, n2, |i, j| (0..n3).map(|k| self.get(i, j, k) * z[k]).sum())
    }
}

fn check_orthogonal(m: &DMatrix<f64>, n: usize, mode: Mode) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::invalid(format!(
            "basis change for {mode} must be {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let gram = m.transpose() * m;
    let dev = (gram - DMatrix::<f64>::identity(n, n)).amax();
    if dev > ORTHOGONALITY_TOL || dev.is_nan() {
        return Err(Error::invalid(format!(
            "basis change for {mode} is not orthogonal (deviation {dev:.3e})"
        )));
    }
    Ok(())
}
