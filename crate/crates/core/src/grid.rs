//! Symmetric one-dimensional grids and physical constants.
//!
//! Nodes are generated as signed integer multiples of the spacing, so the
//! parity map `k -> parity_index(k)` sends `x_k` to `-x_k` bit-exactly.

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Box `[-L, L]` with the wavefunction pinned to zero outside; odd node count.
    Dirichlet,
    /// Circle of circumference `2L`; even node count.
    Periodic,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Dirichlet => f.write_str("dirichlet"),
            Boundary::Periodic => f.write_str("periodic"),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = KreinError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(KreinError::InvalidGrid(format!(
                "unknown boundary `{other}`"
            ))),
        }
    }
}

/// Uniform grid on `[-L, L]` with an exact parity permutation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    half_width: f64,
    boundary: Boundary,
}

impl Grid {
    pub fn new(boundary: Boundary, n_points: usize, half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(KreinError::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        match boundary {
            Boundary::Dirichlet if n_points < 3 || n_points % 2 == 0 => {
                return Err(KreinError::InvalidGrid(format!(
                    "dirichlet grids need an odd node count >= 3, got {n_points}"
                )))
            }
            Boundary::Periodic if n_points < 2 || n_points % 2 == 1 => {
                return Err(KreinError::InvalidGrid(format!(
                    "periodic grids need an even node count >= 2, got {n_points}"
                )))
            }
            _ => {}
        }
        Ok(Self {
            n_points,
            half_width,
            boundary,
        })
    }

    pub fn dirichlet(n_points: usize, half_width: f64) -> Result<Self> {
        Self::new(Boundary::Dirichlet, n_points, half_width)
    }

    pub fn periodic(n_points: usize, half_width: f64) -> Result<Self> {
        Self::new(Boundary::Periodic, n_points, half_width)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => 2.0 * self.half_width / (self.n_points - 1) as f64,
            Boundary::Periodic => 2.0 * self.half_width / self.n_points as f64,
        }
    }

    /// Index offset of the node sitting at `x = 0` (Dirichlet) or the
    /// midpoint of the circle (periodic).
    fn centre(&self) -> usize {
        match self.boundary {
            Boundary::Dirichlet => (self.n_points - 1) / 2,
            Boundary::Periodic => self.n_points / 2,
        }
    }

    pub fn node(&self, k: usize) -> f64 {
        let offset = k as i64 - self.centre() as i64;
        offset as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.node(k)).collect()
    }

    /// Index of the mirror node of `k`.
    pub fn parity_index(&self, k: usize) -> usize {
        match self.boundary {
            Boundary::Dirichlet => self.n_points - 1 - k,
            Boundary::Periodic => (self.n_points - k) % self.n_points,
        }
    }
}

/// Reduced Planck constant and particle mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        let constants = Self { hbar, mass };
        constants.validate()?;
        Ok(constants)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(KreinError::InvalidParameter(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(KreinError::InvalidParameter(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        Ok(())
    }

    /// `hbar^2 / (2 m)`.
    pub fn kinetic_prefactor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}
