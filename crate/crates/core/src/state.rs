use serde::{Deserialize, Serialize};

use crate::error::{check_dim, KreinError, Result};
use crate::grid::{Boundary, Grid};
use crate::C64;

/// Complex amplitudes of a discrete wavefunction.
///
/// A state without a grid is a plain coordinate vector and carries unit
/// quadrature weight; this is how abstract matrix examples (for instance
/// block-signature involutions) are handled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    grid: Option<Grid>,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(grid: Grid, amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_optional_grid(Some(grid), amplitudes)
    }

    /// Coordinate vector with no spatial grid.
    pub fn from_vec(amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_optional_grid(None, amplitudes)
    }

    pub fn with_optional_grid(grid: Option<Grid>, amplitudes: Vec<C64>) -> Result<Self> {
        if let Some(g) = &grid {
            check_dim(g.n_points(), amplitudes.len())?;
        }
        if let Some(k) = amplitudes
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(KreinError::NonFinite(k));
        }
        Ok(Self { grid, amplitudes })
    }

    /// Samples `f` at the grid nodes. Dirichlet endpoints are pinned to zero.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Result<Self> {
        let n = grid.n_points();
        let amplitudes = (0..n)
            .map(|k| {
                if grid.boundary() == Boundary::Dirichlet && (k == 0 || k == n - 1) {
                    C64::new(0.0, 0.0)
                } else {
                    f(grid.node(k))
                }
            })
            .collect();
        Self::new(grid, amplitudes)
    }

    /// Dirac-normalized Gaussian `exp(-(x - c)^2 / (2 w^2) + i k x)`.
    pub fn gaussian(grid: Grid, center: f64, width: f64, momentum: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(KreinError::InvalidParameter(format!(
                "gaussian width must be positive, got {width}"
            )));
        }
        if !(center.is_finite() && momentum.is_finite()) {
            return Err(KreinError::InvalidParameter(
                "gaussian center/momentum must be finite".into(),
            ));
        }
        let state = Self::from_fn(grid, |x| {
            let envelope = (-(x - center).powi(2) / (2.0 * width * width)).exp();
            C64::from_polar(envelope, momentum * x)
        })?;
        state.normalized()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Quadrature weight `h` (1 for grid-free vectors).
    pub fn weight(&self) -> f64 {
        self.grid.map_or(1.0, |g| g.spacing())
    }

    /// Returns a new state on the same grid. Used by operators that map
    /// amplitudes to amplitudes.
    pub fn with_amplitudes(&self, amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_optional_grid(self.grid, amplitudes)
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        check_dim(self.len(), other.len())?;
        match (&self.grid, &other.grid) {
            (Some(a), Some(b)) if a != b => Err(KreinError::GridMismatch),
            (Some(_), None) | (None, Some(_)) => Err(KreinError::GridMismatch),
            _ => Ok(()),
        }
    }

    /// `h * sum |psi_k|^2`.
    pub fn dirac_norm_sqr(&self) -> f64 {
        self.weight() * self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.dirac_norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(KreinError::InvalidParameter(
                "cannot normalize the zero state".into(),
            ));
        }
        Ok(self.scaled(C64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|z| z * factor).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            grid: self.grid,
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }
}
