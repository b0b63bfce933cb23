//! Exact propagators `U(t) = exp(-i H t / hbar)`, norm traces and the
//! discrete continuity equation for the density `w = conj(psi(x)) psi(-x)`.
//!
//! The factor `i` in the exponent is deliberate: only `exp(-i H t / hbar)`
//! makes `U* U = I` (Krein adjoint) equivalent to `H* = H`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, KreinError, Result};
use crate::grid::{Grid, PhysicalConstants};
use crate::involution::Involution;
use crate::krein::{krein_norm_sqr, Check};
use crate::operator::{distance_from_identity, max_abs, norm_l1, OperatorMatrix};
use crate::spectral::eigen_factors;
use crate::state::StateVector;
use crate::C64;

/// Eigenvector matrices with a 1-norm condition estimate above this are not
/// trusted for `V exp(D) V^{-1}`.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PropagatorMethod {
    Identity,
    Eigen { condition: f64 },
    ScalingSquaring { squarings: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    pub matrix: OperatorMatrix,
    pub time: f64,
    pub method: PropagatorMethod,
}

pub fn propagator(h: &OperatorMatrix, t: f64, constants: &PhysicalConstants) -> Result<Propagator> {
    constants.validate()?;
    if !t.is_finite() {
        return Err(KreinError::InvalidParameter(format!(
            "time must be finite, got {t}"
        )));
    }
    let n = h.dim();
    if t == 0.0 {
        return Ok(Propagator {
            matrix: OperatorMatrix::identity(n, h.grid().copied()),
            time: 0.0,
            method: PropagatorMethod::Identity,
        });
    }
    let phase = C64::new(0.0, -t / constants.hbar);

    if let Some((u, condition)) = eigen_exponential(h, phase)? {
        return Ok(Propagator {
            matrix: OperatorMatrix::new(u, h.grid().copied())?,
            time: t,
            method: PropagatorMethod::Eigen { condition },
        });
    }
    let scaled = Mat::from_fn(n, n, |i, j| h.get(i, j) * phase);
    let (u, squarings) = expm(&scaled)?;
    Ok(Propagator {
        matrix: OperatorMatrix::new(u, h.grid().copied())?,
        time: t,
        method: PropagatorMethod::ScalingSquaring { squarings },
    })
}

/// `V diag(exp(phase * lambda)) V^{-1}`, or `None` when the eigenvector
/// matrix is too ill-conditioned.
fn eigen_exponential(h: &OperatorMatrix, phase: C64) -> Result<Option<(Mat<C64>, f64)>> {
    let (values, vectors) = match eigen_factors(h) {
        Ok(f) => f,
        Err(_) => {
            log::info!("eigendecomposition failed; using scaling and squaring");
            return Ok(None);
        }
    };
    let inv = vectors.partial_piv_lu();
    let inv = faer::linalg::solvers::DenseSolveCore::inverse(&inv);
    let condition = norm_l1(&vectors) * norm_l1(&inv);
    if !condition.is_finite() || condition >= EIGEN_CONDITION_LIMIT {
        log::info!("eigenvector condition {condition:e} too large; using scaling and squaring");
        return Ok(None);
    }
    let n = h.dim();
    let exps: Vec<C64> = values.iter().map(|l| (l * phase).exp()).collect();
    if exps.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(KreinError::InvalidParameter(
            "propagator overflow: exp(-i lambda t / hbar) is not finite".into(),
        ));
    }
    let scaled = Mat::from_fn(n, n, |i, k| vectors[(i, k)] * exps[k]);
    Ok(Some((&scaled * &inv, condition)))
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn lin(terms: &[(f64, &Mat<C64>)], identity_coeff: f64, n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| {
        let mut z = if i == j {
            C64::new(identity_coeff, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        for (c, m) in terms {
            z += m[(i, j)] * *c;
        }
        z
    })
}

/// Matrix exponential by Padé(13) scaling and squaring. Returns the result
/// and the number of squarings.
pub fn expm(a: &Mat<C64>) -> Result<(Mat<C64>, u32)> {
    check_dim(a.nrows(), a.ncols())?;
    let n = a.nrows();
    let norm = norm_l1(a);
    if !norm.is_finite() {
        return Err(KreinError::NonFinite(0));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings as i32);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = lin(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0, n);
    let outer_u = lin(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1], n);
    let u = &a * &(&(&a6 * &inner_u) + &outer_u);
    let inner_v = lin(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0, n);
    let outer_v = lin(&[(b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0], n);
    let v = &(&a6 * &inner_v) + &outer_v;

    let p = &v + &u;
    let q = &v - &u;
    let mut r = faer::linalg::solvers::Solve::solve(&q.partial_piv_lu(), &p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    if max_abs(&r).is_nan() {
        return Err(KreinError::NonFinite(0));
    }
    Ok((r, squarings))
}

/// `max |U* U - I|` with `U* = J U^† J`.
pub fn check_krein_unitarity(u: &Propagator, j: &Involution, tol: f64) -> Result<Check> {
    let adj = j.sandwich_adjoint(u.matrix.entries())?;
    Ok(Check::new(
        distance_from_identity(&(&adj * u.matrix.entries())),
        tol,
    ))
}

/// `max |U^† U - I|`.
pub fn check_hilbert_unitarity(u: &Propagator, tol: f64) -> Result<Check> {
    let m = u.matrix.entries();
    Ok(Check::new(distance_from_identity(&(m.adjoint() * m)), tol))
}

/// `max |(i / hbar)(H* - H)|`, the `t`-derivative at `t = 0` of `U*(t) U(t)`.
pub fn krein_unitarity_generator(
    h: &OperatorMatrix,
    j: &Involution,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let adj = j.sandwich_adjoint(h.entries())?;
    Ok(crate::operator::max_abs_diff(&adj, h.entries()) / constants.hbar)
}

/// Maximum deviation of a norm series from its first value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormDrift {
    pub absolute: f64,
    /// `absolute / |norm(0)|`; infinite when the initial norm is zero.
    pub relative: f64,
}

impl NormDrift {
    pub fn of(series: &[f64]) -> Self {
        let first = series.first().copied().unwrap_or(0.0);
        let absolute = series.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
        let relative = if first != 0.0 {
            absolute / first.abs()
        } else if absolute == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self { absolute, relative }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    /// Signed Krein squared norm `<psi, psi>` per step.
    pub krein_norms: Vec<f64>,
    /// `<psi, psi>_J = <psi|psi>` per step.
    pub dirac_norms: Vec<f64>,
    pub snapshots: Option<Vec<StateVector>>,
    pub method: PropagatorMethod,
}

impl EvolutionTrace {
    pub fn krein_drift(&self) -> NormDrift {
        NormDrift::of(&self.krein_norms)
    }

    pub fn dirac_drift(&self) -> NormDrift {
        NormDrift::of(&self.dirac_norms)
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }
}

/// Repeated application of the single-step propagator `U(t_final / n_steps)`.
/// `t_final = 0` yields a single-row trace.
pub fn evolve(
    psi0: &StateVector,
    h: &OperatorMatrix,
    t_final: f64,
    n_steps: usize,
    j: &Involution,
    constants: &PhysicalConstants,
    record_snapshots: bool,
) -> Result<EvolutionTrace> {
    check_dim(h.dim(), psi0.len())?;
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(KreinError::InvalidParameter(format!(
            "t_final must be finite and >= 0, got {t_final}"
        )));
    }
    if n_steps == 0 {
        return Err(KreinError::InvalidParameter(
            "n_steps must be at least 1".into(),
        ));
    }
    let steps = if t_final == 0.0 { 0 } else { n_steps };
    let dt = if steps == 0 {
        0.0
    } else {
        t_final / steps as f64
    };
    let step = propagator(h, dt, constants)?;

    let mut psi = psi0.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut krein_norms = Vec::with_capacity(steps + 1);
    let mut dirac_norms = Vec::with_capacity(steps + 1);
    let mut snapshots = record_snapshots.then(|| Vec::with_capacity(steps + 1));
    for s in 0..=steps {
        if s > 0 {
            psi = step.matrix.apply(&psi)?;
        }
        times.push(s as f64 * dt);
        krein_norms.push(krein_norm_sqr(&psi, j)?);
        dirac_norms.push(psi.dirac_norm_sqr());
        if let Some(snaps) = snapshots.as_mut() {
            snaps.push(psi.clone());
        }
    }
    Ok(EvolutionTrace {
        times,
        krein_norms,
        dirac_norms,
        snapshots,
        method: step.method,
    })
}

/// Density, current, residual of `dw/dt + dj/dx` and the source term
/// `(i / hbar)(conj V(x) - V(-x)) conj(psi(x)) psi(-x)` on interior nodes
/// `2..n-2` and interior time levels `1..m-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityTrace {
    /// First interior node index; arrays cover `node_offset..node_offset + len`.
    pub node_offset: usize,
    pub times: Vec<f64>,
    pub density: Vec<Vec<C64>>,
    pub current: Vec<Vec<C64>>,
    pub residual: Vec<Vec<C64>>,
    pub source: Vec<Vec<C64>>,
    /// `max |residual|` per interior time level.
    pub max_residual_per_step: Vec<f64>,
    pub max_residual: f64,
    /// `max |residual - source|`.
    pub max_source_deviation: f64,
    /// `max |source|`.
    pub max_source: f64,
}

fn central(f: &[C64], k: usize, h: f64) -> C64 {
    (f[k + 1] - f[k - 1]) / (2.0 * h)
}

/// Current `(i hbar / 2m)(d conj(psi)/dx * psi(-x) - d psi(-x)/dx * conj(psi))`
/// at nodes `1..n-1`; entries `0` and `n-1` are zero.
fn current_density(psi: &[C64], grid: &Grid, constants: &PhysicalConstants) -> Vec<C64> {
    let n = psi.len();
    let h = grid.spacing();
    let bar: Vec<C64> = psi.iter().map(|z| z.conj()).collect();
    let mirrored: Vec<C64> = (0..n).map(|k| psi[grid.parity_index(k)]).collect();
    let pref = C64::new(0.0, constants.hbar / (2.0 * constants.mass));
    let mut j = vec![C64::new(0.0, 0.0); n];
    for k in 1..n - 1 {
        j[k] = pref * (central(&bar, k, h) * mirrored[k] - central(&mirrored, k, h) * bar[k]);
    }
    j
}

fn density(psi: &[C64], grid: &Grid) -> Vec<C64> {
    (0..psi.len())
        .map(|k| psi[k].conj() * psi[grid.parity_index(k)])
        .collect()
}

pub fn continuity_residual(
    snapshots: &[StateVector],
    grid: &Grid,
    dt: f64,
    potential: &[C64],
    constants: &PhysicalConstants,
) -> Result<ContinuityTrace> {
    if snapshots.len() < 3 {
        return Err(KreinError::InvalidParameter(format!(
            "continuity residual needs at least 3 snapshots, got {}",
            snapshots.len()
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(KreinError::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let n = grid.n_points();
    if n < 5 {
        return Err(KreinError::InvalidGrid(
            "continuity residual needs at least 5 nodes".into(),
        ));
    }
    check_dim(n, potential.len())?;
    for s in snapshots {
        check_dim(n, s.len())?;
        if s.grid().is_some_and(|g| g != grid) {
            return Err(KreinError::GridMismatch);
        }
    }
    let h = grid.spacing();
    let interior = 2..n - 2;
    let densities: Vec<Vec<C64>> = snapshots
        .iter()
        .map(|s| density(s.amplitudes(), grid))
        .collect();
    let source_factor: Vec<C64> = (0..n)
        .map(|k| {
            C64::new(0.0, 1.0 / constants.hbar)
                * (potential[k].conj() - potential[grid.parity_index(k)])
        })
        .collect();

    let mut trace = ContinuityTrace {
        node_offset: interior.start,
        times: Vec::new(),
        density: Vec::new(),
        current: Vec::new(),
        residual: Vec::new(),
        source: Vec::new(),
        max_residual_per_step: Vec::new(),
        max_residual: 0.0,
        max_source_deviation: 0.0,
        max_source: 0.0,
    };
    for t in 1..snapshots.len() - 1 {
        let j = current_density(snapshots[t].amplitudes(), grid, constants);
        let mut res = Vec::with_capacity(interior.len());
        let mut src = Vec::with_capacity(interior.len());
        let mut step_max = 0.0f64;
        for k in interior.clone() {
            let dw = (densities[t + 1][k] - densities[t - 1][k]) / (2.0 * dt);
            let r = dw + central(&j, k, h);
            let s = source_factor[k] * densities[t][k];
            step_max = step_max.max(r.norm());
            trace.max_source_deviation = trace.max_source_deviation.max((r - s).norm());
            trace.max_source = trace.max_source.max(s.norm());
            res.push(r);
            src.push(s);
        }
        trace.max_residual = trace.max_residual.max(step_max);
        trace.max_residual_per_step.push(step_max);
        trace.times.push(t as f64 * dt);
        trace.density.push(densities[t][interior.clone()].to_vec());
        trace.current.push(j[interior.clone()].to_vec());
        trace.residual.push(res);
        trace.source.push(src);
    }
    Ok(trace)
}
