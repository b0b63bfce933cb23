//! Finite-difference Hamiltonians `H = T + V` on parity-exact grids.

use std::f64::consts::FRAC_PI_2;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, KreinError, Result};
use crate::grid::{Boundary, Grid, PhysicalConstants};
use crate::krein::Check;
use crate::operator::OperatorMatrix;
use crate::C64;

/// Central-difference stencil used for `d^2/dx^2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StencilOrder {
    /// Three-point stencil, `O(h^2)`.
    #[default]
    Second,
    /// Five-point stencil, `O(h^4)`.
    Fourth,
}

impl StencilOrder {
    /// Second-derivative weights for offsets `0, 1, 2, ...`.
    fn weights(self) -> &'static [f64] {
        match self {
            StencilOrder::Second => &[-2.0, 1.0],
            StencilOrder::Fourth => &[-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
        }
    }

    pub fn as_order(self) -> u32 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }

    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(StencilOrder::Second),
            4 => Ok(StencilOrder::Fourth),
            other => Err(KreinError::InvalidParameter(format!(
                "unsupported stencil order {other}"
            ))),
        }
    }
}

/// Potential energy profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// `m omega^2 x^2 / 2`.
    Harmonic {
        omega: f64,
    },
    /// `x^2 (i x)^epsilon`, principal branch.
    BenderFamily {
        epsilon: f64,
    },
    /// `i x^3`.
    MonomialImaginaryCubic,
    /// `sum_k c_k x^k`.
    Polynomial(Vec<C64>),
    /// Values sampled on the grid nodes.
    Custom(Vec<C64>),
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Harmonic { omega } if !(omega.is_finite() && *omega > 0.0) => {
                Err(KreinError::InvalidParameter(format!(
                    "harmonic frequency must be positive, got {omega}"
                )))
            }
            PotentialSpec::BenderFamily { epsilon }
                if !(epsilon.is_finite() && *epsilon >= 0.0) =>
            {
                Err(KreinError::InvalidParameter(format!(
                    "epsilon must be a non-negative real, got {epsilon}"
                )))
            }
            PotentialSpec::Polynomial(c) | PotentialSpec::Custom(c) => {
                match c
                    .iter()
                    .position(|z| !(z.re.is_finite() && z.im.is_finite()))
                {
                    Some(k) => Err(KreinError::NonFinite(k)),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// `false` for Bender-family members with `epsilon >= 2`, whose continuum
    /// eigenproblem is posed on complex contours rather than the real line.
    pub fn in_validated_range(&self) -> bool {
        !matches!(self, PotentialSpec::BenderFamily { epsilon } if *epsilon >= 2.0)
    }
}

/// `x^2 (i x)^epsilon` with `(i x)^epsilon = |x|^epsilon exp(± i pi epsilon / 2)`.
pub fn bender_potential(x: f64, epsilon: f64) -> C64 {
    if x == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let phase = bender_phase(epsilon);
    let phase = if x > 0.0 { phase } else { phase.conj() };
    phase * (x * x * x.abs().powf(epsilon))
}

/// `exp(i pi epsilon / 2)`, exact for integer epsilon.
fn bender_phase(epsilon: f64) -> C64 {
    if epsilon.fract() == 0.0 && epsilon < 1e15 {
        match (epsilon as u64) % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    } else {
        C64::from_polar(1.0, FRAC_PI_2 * epsilon)
    }
}

pub fn sample_potential(
    spec: &PotentialSpec,
    grid: &Grid,
    constants: &PhysicalConstants,
) -> Result<Vec<C64>> {
    spec.validate()?;
    let nodes = grid.nodes();
    let values = match spec {
        PotentialSpec::Zero => vec![C64::new(0.0, 0.0); nodes.len()],
        PotentialSpec::Harmonic { omega } => nodes
            .iter()
            .map(|x| C64::new(0.5 * constants.mass * omega * omega * x * x, 0.0))
            .collect(),
        PotentialSpec::BenderFamily { epsilon } => nodes
            .iter()
            .map(|&x| bender_potential(x, *epsilon))
            .collect(),
        PotentialSpec::MonomialImaginaryCubic => {
            nodes.iter().map(|x| C64::new(0.0, x * x * x)).collect()
        }
        PotentialSpec::Polynomial(coeffs) => nodes
            .iter()
            .map(|&x| {
                coeffs
                    .iter()
                    .rev()
                    .fold(C64::new(0.0, 0.0), |acc, c| acc * x + c)
            })
            .collect(),
        PotentialSpec::Custom(values) => {
            check_dim(grid.n_points(), values.len())?;
            values.clone()
        }
    };
    Ok(values)
}

/// `max_k |V(x_k) - conj(V(-x_k))|` against `tol`.
pub fn is_pt_symmetric_potential(samples: &[C64], grid: &Grid, tol: f64) -> Result<Check> {
    check_dim(grid.n_points(), samples.len())?;
    let residual = (0..samples.len())
        .map(|k| (samples[k] - samples[grid.parity_index(k)].conj()).norm())
        .fold(0.0, f64::max);
    Ok(Check::new(residual, tol))
}

/// Kinetic energy `-(hbar^2 / 2m) d^2/dx^2` with the default three-point stencil.
pub fn build_kinetic(grid: &Grid, constants: &PhysicalConstants) -> OperatorMatrix {
    build_kinetic_with_stencil(grid, constants, StencilOrder::Second)
}

pub fn build_kinetic_with_stencil(
    grid: &Grid,
    constants: &PhysicalConstants,
    stencil: StencilOrder,
) -> OperatorMatrix {
    let h = grid.spacing();
    let scale = -constants.kinetic_prefactor() / (h * h);
    let second_derivative = difference_matrix(grid, stencil.weights(), true);
    let entries = Mat::from_fn(grid.n_points(), grid.n_points(), |i, j| {
        C64::new(second_derivative[(i, j)] * scale, 0.0)
    });
    OperatorMatrix::from_parts(entries, Some(*grid))
}

/// Momentum `-i hbar d/dx` with the central first difference.
pub fn build_momentum(grid: &Grid, constants: &PhysicalConstants) -> OperatorMatrix {
    let h = grid.spacing();
    // antisymmetric weights: +1/2 at offset +1, -1/2 at offset -1
    let d1 = difference_matrix(grid, &[0.0, 0.5], false);
    let factor = C64::new(0.0, -constants.hbar / h);
    let entries = Mat::from_fn(grid.n_points(), grid.n_points(), |i, j| factor * d1[(i, j)]);
    OperatorMatrix::from_parts(entries, Some(*grid))
}

/// Multiplication by `x`.
pub fn build_position(grid: &Grid) -> OperatorMatrix {
    let nodes = grid.nodes();
    let n = nodes.len();
    let entries = Mat::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(nodes[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    OperatorMatrix::from_parts(entries, Some(*grid))
}

/// Diagonal multiplication operator from grid samples.
pub fn potential_operator(samples: &[C64], grid: Grid) -> Result<OperatorMatrix> {
    check_dim(grid.n_points(), samples.len())?;
    OperatorMatrix::diagonal(samples, Some(grid))
}

/// Banded difference matrix with weights `w[d]` for offset `+d`; the weight
/// for `-d` is `w[d]` when `symmetric`, `-w[d]` otherwise. Out-of-range
/// neighbours are dropped on Dirichlet grids and wrapped on periodic ones.
fn difference_matrix(grid: &Grid, weights: &[f64], symmetric: bool) -> Mat<f64> {
    let n = grid.n_points();
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] += weights[0];
        for (d, &w) in weights.iter().enumerate().skip(1) {
            let back = if symmetric { w } else { -w };
            for (offset, weight) in [(d as i64, w), (-(d as i64), back)] {
                let target = i as i64 + offset;
                let column = match grid.boundary() {
                    Boundary::Dirichlet => {
                        if target < 0 || target >= n as i64 {
                            continue;
                        }
                        target as usize
                    }
                    Boundary::Periodic => target.rem_euclid(n as i64) as usize,
                };
                m[(i, column)] += weight;
            }
        }
    }
    m
}

/// Grid, constants, potential and stencil describing `H = T + V`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub grid: Grid,
    pub constants: PhysicalConstants,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub stencil: StencilOrder,
}

impl HamiltonianSpec {
    pub fn new(grid: Grid, constants: PhysicalConstants, potential: PotentialSpec) -> Self {
        Self {
            grid,
            constants,
            potential,
            stencil: StencilOrder::Second,
        }
    }

    pub fn with_stencil(mut self, stencil: StencilOrder) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn potential_samples(&self) -> Result<Vec<C64>> {
        sample_potential(&self.potential, &self.grid, &self.constants)
    }
}

pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<OperatorMatrix> {
    spec.constants.validate()?;
    let samples = spec.potential_samples()?;
    hamiltonian_from_samples(&spec.grid, &spec.constants, spec.stencil, &samples)
}

/// `T + diag(samples)`.
pub fn hamiltonian_from_samples(
    grid: &Grid,
    constants: &PhysicalConstants,
    stencil: StencilOrder,
    samples: &[C64],
) -> Result<OperatorMatrix> {
    check_dim(grid.n_points(), samples.len())?;
    if let Some(k) = samples
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(KreinError::NonFinite(k));
    }
    let mut entries = build_kinetic_with_stencil(grid, constants, stencil).into_entries();
    for (k, v) in samples.iter().enumerate() {
        entries[(k, k)] += v;
    }
    Ok(OperatorMatrix::from_parts(entries, Some(*grid)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::involution::Involution;
    use crate::krein::{default_hermiticity_tol, is_j_hermitian};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn bender_branch_values() {
        assert_eq!(bender_potential(2.0, 0.0), c(4.0, 0.0));
        assert_eq!(bender_potential(2.0, 1.0), c(0.0, 8.0));
        assert_eq!(bender_potential(-2.0, 1.0), c(0.0, -8.0));
        assert_eq!(
            bender_potential(-2.0, 1.0),
            bender_potential(2.0, 1.0).conj()
        );
        assert_eq!(bender_potential(2.0, 2.0), c(-16.0, 0.0));
        assert_eq!(bender_potential(-2.0, 2.0), c(-16.0, 0.0));
        assert_eq!(bender_potential(0.0, 0.5), c(0.0, 0.0));
        // non-integer epsilon: cross-check |x|^(2+eps) e^{±i pi eps/2}
        let v = bender_potential(1.5, 0.5);
        assert!(
            (v - C64::from_polar(1.5f64.powf(2.5), std::f64::consts::FRAC_PI_4)).norm() < 1e-14
        );
        assert_eq!(bender_potential(-1.5, 0.5), v.conj());
    }

    #[test]
    fn bender_matches_cubic_and_quartic() {
        let g = Grid::dirichlet(21, 3.0).unwrap();
        let k = PhysicalConstants::default();
        let b1 = sample_potential(&PotentialSpec::BenderFamily { epsilon: 1.0 }, &g, &k).unwrap();
        let cubic = sample_potential(&PotentialSpec::MonomialImaginaryCubic, &g, &k).unwrap();
        for (a, b) in b1.iter().zip(&cubic) {
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1.0));
        }
        let b2 = sample_potential(&PotentialSpec::BenderFamily { epsilon: 2.0 }, &g, &k).unwrap();
        for (v, x) in b2.iter().zip(g.nodes()) {
            assert!((v - c(-x.powi(4), 0.0)).norm() <= 1e-13);
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        let g = Grid::dirichlet(5, 1.0).unwrap();
        let k = PhysicalConstants::default();
        assert!(sample_potential(&PotentialSpec::BenderFamily { epsilon: -0.5 }, &g, &k).is_err());
        assert!(sample_potential(&PotentialSpec::Harmonic { omega: 0.0 }, &g, &k).is_err());
        assert!(sample_potential(&PotentialSpec::Custom(vec![c(0.0, 0.0); 4]), &g, &k).is_err());
        assert!(!PotentialSpec::BenderFamily { epsilon: 2.0 }.in_validated_range());
        assert!(PotentialSpec::BenderFamily { epsilon: 1.5 }.in_validated_range());
    }

    #[test]
    fn pt_symmetry_examples() {
        let g = Grid::dirichlet(41, 2.0).unwrap();
        let k = PhysicalConstants::default();
        let cubic = sample_potential(&PotentialSpec::MonomialImaginaryCubic, &g, &k).unwrap();
        assert_eq!(
            is_pt_symmetric_potential(&cubic, &g, 1e-12)
                .unwrap()
                .residual,
            0.0
        );
        let quad = sample_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &k).unwrap();
        assert!(is_pt_symmetric_potential(&quad, &g, 1e-12).unwrap().passed);
        let iquad = sample_potential(
            &PotentialSpec::Polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]),
            &g,
            &k,
        )
        .unwrap();
        let check = is_pt_symmetric_potential(&iquad, &g, 1e-12).unwrap();
        assert!(!check.passed);
        assert!((check.residual - 8.0).abs() < 1e-12); // 2 x^2 at x = ±2
    }

    #[test]
    fn kinetic_commutes_with_parity() {
        for g in [
            Grid::dirichlet(31, 2.0).unwrap(),
            Grid::periodic(32, 2.0).unwrap(),
        ] {
            for stencil in [StencilOrder::Second, StencilOrder::Fourth] {
                let t = build_kinetic_with_stencil(&g, &PhysicalConstants::default(), stencil);
                let j = Involution::parity(&g);
                assert_eq!(j.sandwich(t.entries()).unwrap(), *t.entries());
            }
        }
    }

    #[test]
    fn periodic_constant_mode_is_null() {
        let g = Grid::periodic(16, 1.0).unwrap();
        let t = build_kinetic(&g, &PhysicalConstants::new(1.3, 0.7).unwrap());
        let out = t.apply_slice(&vec![c(1.0, 0.0); 16]);
        assert!(out.iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn periodic_dispersion() {
        let k = PhysicalConstants::new(1.0, 0.5).unwrap();
        let g = Grid::periodic(48, 2.0).unwrap();
        let (h, l) = (g.spacing(), g.half_width());
        let t = build_kinetic(&g, &k);
        for n in 1..4 {
            let q = 2.0 * n as f64 * std::f64::consts::PI / l;
            let v: Vec<C64> = g.nodes().iter().map(|x| c((q * x).cos(), 0.0)).collect();
            let expected = k.kinetic_prefactor() * 2.0 / (h * h) * (1.0 - (q * h).cos());
            let out = t.apply_slice(&v);
            for (o, vi) in out.iter().zip(&v) {
                assert!((o - vi * expected).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let g = Grid::dirichlet(51, 4.0).unwrap();
        let k = PhysicalConstants::default();
        let t = build_kinetic(&g, &k);
        let zero = build_hamiltonian(&HamiltonianSpec::new(g, k, PotentialSpec::Zero)).unwrap();
        assert_eq!(zero, t);

        let ho = build_hamiltonian(&HamiltonianSpec::new(
            g,
            k,
            PotentialSpec::Harmonic { omega: 1.0 },
        ))
        .unwrap();
        assert_eq!(ho.max_imag(), 0.0);
        assert_eq!(ho.transpose_asymmetry(), 0.0);
        let j = Involution::parity(&g);
        assert!(
            is_j_hermitian(&ho, &j, default_hermiticity_tol(&ho))
                .unwrap()
                .passed
        );

        let cubic = build_hamiltonian(&HamiltonianSpec::new(
            g,
            k,
            PotentialSpec::BenderFamily { epsilon: 1.0 },
        ))
        .unwrap();
        assert!(cubic.max_imag() > 1.0);
        assert!(cubic.dagger().max_abs_diff(&cubic).unwrap() > 1.0);
        assert!(
            is_j_hermitian(&cubic, &j, default_hermiticity_tol(&cubic))
                .unwrap()
                .passed
        );
    }

    #[test]
    fn momentum_is_dirac_hermitian() {
        let g = Grid::dirichlet(15, 1.0).unwrap();
        let p = build_momentum(&g, &PhysicalConstants::default());
        assert_eq!(p.dagger().max_abs_diff(&p).unwrap(), 0.0);
    }
}
