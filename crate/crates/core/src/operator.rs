use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use crate::error::{check_dim, KreinError, Result};
use crate::grid::Grid;
use crate::state::StateVector;
use crate::C64;

/// Dense complex operator acting on [`StateVector`]s.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    entries: Mat<C64>,
    grid: Option<Grid>,
}

impl OperatorMatrix {
    pub fn new(entries: Mat<C64>, grid: Option<Grid>) -> Result<Self> {
        check_dim(entries.nrows(), entries.ncols())?;
        if let Some(g) = &grid {
            check_dim(g.n_points(), entries.nrows())?;
        }
        let n = entries.nrows();
        for j in 0..n {
            for i in 0..n {
                let z = entries[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(KreinError::NonFinite(i + j * n));
                }
            }
        }
        Ok(Self { entries, grid })
    }

    /// Constructor for matrices whose entries are finite by construction.
    pub(crate) fn from_parts(entries: Mat<C64>, grid: Option<Grid>) -> Self {
        debug_assert_eq!(entries.nrows(), entries.ncols());
        Self { entries, grid }
    }

    pub fn from_fn(
        n: usize,
        grid: Option<Grid>,
        f: impl FnMut(usize, usize) -> C64,
    ) -> Result<Self> {
        Self::new(Mat::from_fn(n, n, f), grid)
    }

    pub fn identity(n: usize, grid: Option<Grid>) -> Self {
        Self::from_parts(Mat::identity(n, n), grid)
    }

    pub fn zeros(n: usize, grid: Option<Grid>) -> Self {
        Self::from_parts(Mat::zeros(n, n), grid)
    }

    pub fn diagonal(values: &[C64], grid: Option<Grid>) -> Result<Self> {
        let n = values.len();
        Self::new(
            Mat::from_fn(n, n, |i, j| {
                if i == j {
                    values[i]
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            grid,
        )
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn entries(&self) -> &Mat<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Mat<C64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        match (&self.grid, &other.grid) {
            (Some(a), Some(b)) if a != b => Err(KreinError::GridMismatch),
            _ => Ok(()),
        }
    }

    fn merged_grid(&self, other: &Self) -> Option<Grid> {
        self.grid.or(other.grid)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), psi.len())?;
        if let (Some(a), Some(b)) = (&self.grid, psi.grid()) {
            if a != b {
                return Err(KreinError::GridMismatch);
            }
        }
        psi.with_amplitudes(self.apply_slice(psi.amplitudes()))
    }

    pub(crate) fn apply_slice(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.entries.col(j);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col[i] * vj;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self::from_parts(
            &self.entries * &other.entries,
            self.merged_grid(other),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self::from_parts(
            &self.entries + &other.entries,
            self.merged_grid(other),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self::from_parts(
            &self.entries - &other.entries,
            self.merged_grid(other),
        ))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_parts(
            Mat::from_fn(self.dim(), self.dim(), |i, j| self.entries[(i, j)] * factor),
            self.grid,
        )
    }

    /// Conjugate transpose (Dirac adjoint).
    pub fn dagger(&self) -> Self {
        Self::from_parts(self.entries.adjoint().to_owned(), self.grid)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(max_abs_diff(&self.entries, &other.entries))
    }

    /// Maximum absolute column sum.
    pub fn norm_l1(&self) -> f64 {
        norm_l1(&self.entries)
    }

    /// Largest imaginary part magnitude of any entry.
    pub fn max_imag(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.entries[(i, j)].im.abs());
            }
        }
        m
    }

    /// `max |A - A^T|`.
    pub fn transpose_asymmetry(&self) -> f64 {
        max_abs_diff(&self.entries, &self.entries.transpose().to_owned())
    }

    /// Inverse by partial-pivoting LU together with a 1-norm condition
    /// estimate `|A|_1 |A^{-1}|_1`.
    pub fn inverse(&self) -> Result<(Self, f64)> {
        let inv = self.entries.partial_piv_lu().inverse();
        let inv_norm = norm_l1(&inv);
        let cond = self.norm_l1() * inv_norm;
        if !cond.is_finite() || cond > 1.0 / f64::EPSILON {
            return Err(KreinError::Singular(cond));
        }
        Ok((Self::from_parts(inv, self.grid), cond))
    }
}

/// `max` that propagates NaN, so a failed factorization is never reported as
/// a small norm.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

pub(crate) fn max_abs(m: &Mat<C64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = nan_max(out, m[(i, j)].norm());
        }
    }
    out
}

pub(crate) fn max_abs_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out = nan_max(out, (a[(i, j)] - b[(i, j)]).norm());
        }
    }
    out
}

pub(crate) fn norm_l1(m: &Mat<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, nan_max)
}

/// `max |A - I|`.
pub(crate) fn distance_from_identity(m: &Mat<C64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let target = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            out = nan_max(out, (m[(i, j)] - target).norm());
        }
    }
    out
}
