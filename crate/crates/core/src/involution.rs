//! Fundamental symmetries stored as signed permutations.
//!
//! `(J v)_i = s_i * v_{p(i)}` with `p` an involutive permutation and
//! `s_i = s_{p(i)} = ±1`. Applying `J` only moves and negates entries, so
//! `J^2 = I` holds bit-exactly and `J A J` introduces no roundoff.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, KreinError, Result};
use crate::grid::Grid;
use crate::state::StateVector;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvolutionKind {
    /// Spatial reflection `psi(x) -> psi(-x)` on a grid.
    Parity,
    /// `diag(I_p, -I_q)`.
    BlockSignature,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Involution {
    kind: InvolutionKind,
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl Involution {
    /// Validates that the signed permutation squares to the identity.
    pub fn new(kind: InvolutionKind, perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        check_dim(n, signs.len())?;
        for (i, (&p, &s)) in perm.iter().zip(&signs).enumerate() {
            if p >= n {
                return Err(KreinError::InvalidInvolution(format!(
                    "index {p} out of range at row {i}"
                )));
            }
            if s != 1 && s != -1 {
                return Err(KreinError::InvalidInvolution(format!(
                    "sign {s} at row {i} is not ±1"
                )));
            }
            if perm[p] != i {
                return Err(KreinError::InvalidInvolution(format!(
                    "permutation is not an involution: {i} -> {p} -> {}",
                    perm[p]
                )));
            }
            if s * signs[p] != 1 {
                return Err(KreinError::InvalidInvolution(format!(
                    "signs at rows {i} and {p} differ, J^2 != I"
                )));
            }
        }
        Ok(Self { kind, perm, signs })
    }

    pub fn parity(grid: &Grid) -> Self {
        let n = grid.n_points();
        Self {
            kind: InvolutionKind::Parity,
            perm: (0..n).map(|k| grid.parity_index(k)).collect(),
            signs: vec![1; n],
        }
    }

    pub fn block_signature(positive: usize, negative: usize) -> Self {
        let n = positive + negative;
        Self {
            kind: InvolutionKind::BlockSignature,
            perm: (0..n).collect(),
            signs: (0..n).map(|i| if i < positive { 1 } else { -1 }).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            kind: InvolutionKind::Identity,
            perm: (0..n).collect(),
            signs: vec![1; n],
        }
    }

    pub fn kind(&self) -> InvolutionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    #[inline]
    fn sign(&self, i: usize) -> f64 {
        f64::from(self.signs[i])
    }

    /// Exact check of `J^2 = I` on the stored permutation.
    pub fn squares_to_identity(&self) -> bool {
        self.perm
            .iter()
            .enumerate()
            .all(|(i, &p)| self.perm[p] == i && self.signs[i] * self.signs[p] == 1)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_dim(self.dim(), v.len())?;
        Ok(self
            .perm
            .iter()
            .enumerate()
            .map(|(i, &p)| v[p] * self.sign(i))
            .collect())
    }

    pub fn apply_state(&self, psi: &StateVector) -> Result<StateVector> {
        psi.with_amplitudes(self.apply(psi.amplitudes())?)
    }

    /// `J A`.
    pub fn left_multiply(&self, a: &Mat<C64>) -> Result<Mat<C64>> {
        check_dim(self.dim(), a.nrows())?;
        Ok(Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
            a[(self.perm[i], j)] * self.sign(i)
        }))
    }

    /// `A J`.
    pub fn right_multiply(&self, a: &Mat<C64>) -> Result<Mat<C64>> {
        check_dim(self.dim(), a.ncols())?;
        Ok(Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
            a[(i, self.perm[j])] * self.sign(j)
        }))
    }

    /// `J A J`.
    pub fn sandwich(&self, a: &Mat<C64>) -> Result<Mat<C64>> {
        check_dim(self.dim(), a.nrows())?;
        check_dim(self.dim(), a.ncols())?;
        Ok(Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
            a[(self.perm[i], self.perm[j])] * (self.sign(i) * self.sign(j))
        }))
    }

    /// `J A^† J`, computed by index lookup only.
    pub fn sandwich_adjoint(&self, a: &Mat<C64>) -> Result<Mat<C64>> {
        check_dim(self.dim(), a.nrows())?;
        check_dim(self.dim(), a.ncols())?;
        Ok(Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
            a[(self.perm[j], self.perm[i])].conj() * (self.sign(i) * self.sign(j))
        }))
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        for (i, &p) in self.perm.iter().enumerate() {
            m[(i, p)] = C64::new(self.sign(i), 0.0);
        }
        m
    }
}
