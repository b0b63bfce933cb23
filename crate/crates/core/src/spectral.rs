//! Eigendecomposition and Krein-norm classification of discrete spectra.
//!
//! For a `J`-Hermitian matrix, an eigenvector whose eigenvalue is not real
//! has vanishing Krein norm. Numerically, a real eigenvalue whose eigenvector
//! has a tiny Krein norm `kappa` is ill-conditioned: its left eigenvector is
//! `J v`, so the eigenvalue condition number is exactly `1 / |kappa|` and the
//! computed imaginary part can reach `|H v - lambda v| / |kappa|`. Each pair
//! carries that bound (`reality_bound`) and a pair only counts as complex
//! when `|Im lambda|` exceeds both it and `reality_tol`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::involution::Involution;
use crate::krein::{default_hermiticity_tol, is_j_hermitian, Check};
use crate::operator::{norm_l1, OperatorMatrix};
use crate::state::StateVector;
use crate::C64;

/// Backward-error threshold for a pair to count as converged.
pub const CONVERGENCE_TOL: f64 = 1e-10;

/// An eigenpair straight out of the dense solver.
#[derive(Clone, Debug, PartialEq)]
pub struct RawEigenPair {
    pub eigenvalue: C64,
    /// Dirac-normalized, phase fixed so the largest component is real positive.
    pub eigenvector: StateVector,
    /// `|H v - lambda v|_2` for the Euclidean-unit eigenvector.
    pub residual_norm: f64,
    /// `residual_norm / |H|_1`.
    pub backward_error: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawSpectrum {
    pub pairs: Vec<RawEigenPair>,
    /// `|H|_1`.
    pub matrix_norm: f64,
}

/// All `N` eigenpairs of a dense complex matrix.
pub fn eigendecompose(h: &OperatorMatrix) -> Result<RawSpectrum> {
    let n = h.dim();
    let evd = h.entries().eigen().map_err(|e| {
        log::warn!("dense eigendecomposition failed: {e:?}");
        KreinError::NoConvergence
    })?;
    let values = evd.S();
    let vectors = evd.U();
    let hv = h.entries() * vectors;
    let matrix_norm = norm_l1(h.entries());

    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda: C64 = values[k];
        let col = vectors.col(k);
        let norm = (0..n).map(|i| col[i].norm_sqr()).sum::<f64>().sqrt();
        let residual = (0..n)
            .map(|i| (hv[(i, k)] - lambda * col[i]).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / norm;
        let finite = lambda.re.is_finite() && lambda.im.is_finite() && residual.is_finite();
        let backward_error = if matrix_norm > 0.0 {
            residual / matrix_norm
        } else {
            residual
        };
        let converged = finite && backward_error <= CONVERGENCE_TOL;
        if !converged {
            log::warn!("eigenpair {k} flagged: backward error {backward_error:e}");
        }

        let mut amps: Vec<C64> = (0..n).map(|i| col[i] / norm).collect();
        fix_phase(&mut amps);
        let mut vector = StateVector::with_optional_grid(h.grid().copied(), amps)?;
        vector = vector.scaled(C64::new(1.0 / vector.weight().sqrt(), 0.0));
        pairs.push(RawEigenPair {
            eigenvalue: lambda,
            eigenvector: vector,
            residual_norm: residual,
            backward_error,
            converged,
        });
    }
    Ok(RawSpectrum { pairs, matrix_norm })
}

/// Rotates `v` so its largest-magnitude entry (first on ties) is real positive.
fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs {
            best = i;
            best_abs = a;
        }
    }
    if best_abs > 0.0 {
        let rot = v[best].conj() / best_abs;
        for z in v.iter_mut() {
            *z *= rot;
        }
        v[best] = C64::new(best_abs, 0.0);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Positive,
    Negative,
    Null,
    /// The solver did not deliver a converged pair.
    Unresolved,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Positive => "positive",
            Classification::Negative => "negative",
            Classification::Null => "null",
            Classification::Unresolved => "unresolved",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralTolerances {
    /// `|Krein norm| < null_tol` (for Dirac norm 1) marks a null state.
    pub null_tol: f64,
    /// Floor for the imaginary part of an eigenvalue to count as complex.
    pub reality_tol: f64,
    /// `|lambda_i - lambda_j| < degeneracy_tol` flags a degeneracy.
    pub degeneracy_tol: f64,
}

impl Default for SpectralTolerances {
    fn default() -> Self {
        Self {
            null_tol: 1e-8,
            reality_tol: 1e-8,
            degeneracy_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: C64,
    pub eigenvector: StateVector,
    /// `<v, v> / <v|v>`.
    pub krein_norm: f64,
    /// Imaginary part of the Krein norm; roundoff only.
    pub krein_norm_imag: f64,
    pub classification: Classification,
    pub backward_error: f64,
    /// First-order bound on a spurious `|Im lambda|`, `|Hv - lambda v| / |krein_norm|`.
    pub reality_bound: f64,
    pub degenerate: bool,
}

impl EigenPair {
    /// Imaginary part exceeds both the tolerance floor and, for non-null
    /// pairs, the conditioning bound.
    pub fn is_complex(&self, tol: &SpectralTolerances) -> bool {
        let floor = match self.classification {
            Classification::Null => tol.reality_tol,
            _ => tol.reality_tol.max(self.reality_bound),
        };
        self.eigenvalue.im.abs() > floor
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePair {
    /// `first == second` for an eigenvalue that could be real within its bound.
    pub first: usize,
    pub second: usize,
    /// `|lambda_second - conj(lambda_first)|`.
    pub mismatch: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TheoremViolation {
    /// Complex eigenvalue carried by a state with nonzero Krein norm.
    NonNullComplex {
        index: usize,
        eigenvalue: C64,
        krein_norm: f64,
    },
    /// Complex eigenvalue with no conjugate partner.
    Unpaired { index: usize, eigenvalue: C64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Sorted by `(Re lambda, Im lambda)`.
    pub pairs: Vec<EigenPair>,
    pub tolerances: SpectralTolerances,
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_null: usize,
    pub n_unresolved: usize,
    /// Largest `|Im lambda|` among positive and negative pairs.
    pub max_im_non_null: f64,
    pub conjugate_pairs: Vec<ConjugatePair>,
    pub theorem_violations: Vec<TheoremViolation>,
    /// J-Hermiticity of the source matrix, when established.
    pub j_hermiticity: Option<Check>,
}

fn euclidean_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn classify_spectrum(
    raw: &RawSpectrum,
    j: &Involution,
    tol: SpectralTolerances,
) -> Result<SpectrumReport> {
    let mut order: Vec<usize> = (0..raw.pairs.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (raw.pairs[a].eigenvalue, raw.pairs[b].eigenvalue);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });

    let mut pairs = Vec::with_capacity(order.len());
    let mut residuals = Vec::with_capacity(order.len());
    for &k in &order {
        let rp = &raw.pairs[k];
        let v = rp.eigenvector.amplitudes();
        let reflected = j.apply(v)?;
        let dot: C64 = v.iter().zip(&reflected).map(|(a, b)| a.conj() * b).sum();
        let norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let kn = dot / norm_sqr;
        let classification = if !rp.converged {
            Classification::Unresolved
        } else if kn.re.abs() < tol.null_tol {
            Classification::Null
        } else if kn.re > 0.0 {
            Classification::Positive
        } else {
            Classification::Negative
        };
        let reality_bound = if kn.re == 0.0 {
            f64::INFINITY
        } else {
            rp.residual_norm / kn.re.abs()
        };
        residuals.push(rp.residual_norm);
        pairs.push(EigenPair {
            eigenvalue: rp.eigenvalue,
            eigenvector: rp.eigenvector.clone(),
            krein_norm: kn.re,
            krein_norm_imag: kn.im,
            classification,
            backward_error: rp.backward_error,
            reality_bound,
            degenerate: false,
        });
    }

    // degeneracy flags
    for a in 0..pairs.len() {
        for b in (a + 1)..pairs.len() {
            if pairs[b].eigenvalue.re - pairs[a].eigenvalue.re >= tol.degeneracy_tol {
                break;
            }
            if (pairs[a].eigenvalue - pairs[b].eigenvalue).norm() < tol.degeneracy_tol {
                pairs[a].degenerate = true;
                pairs[b].degenerate = true;
            }
        }
    }

    let count = |c: Classification| pairs.iter().filter(|p| p.classification == c).count();
    let (n_positive, n_negative, n_null, n_unresolved) = (
        count(Classification::Positive),
        count(Classification::Negative),
        count(Classification::Null),
        count(Classification::Unresolved),
    );
    let max_im_non_null = pairs
        .iter()
        .filter(|p| {
            matches!(
                p.classification,
                Classification::Positive | Classification::Negative
            )
        })
        .map(|p| p.eigenvalue.im.abs())
        .fold(0.0, f64::max);

    let mut theorem_violations = Vec::new();
    let complex: Vec<usize> = (0..pairs.len())
        .filter(|&i| {
            pairs[i].classification != Classification::Unresolved && pairs[i].is_complex(&tol)
        })
        .collect();
    for &i in &complex {
        if pairs[i].classification != Classification::Null {
            theorem_violations.push(TheoremViolation::NonNullComplex {
                index: i,
                eigenvalue: pairs[i].eigenvalue,
                krein_norm: pairs[i].krein_norm,
            });
        }
    }

    let (conjugate_pairs, unpaired) = pair_conjugates(&pairs, &residuals, &complex, j, &tol)?;
    for i in unpaired {
        theorem_violations.push(TheoremViolation::Unpaired {
            index: i,
            eigenvalue: pairs[i].eigenvalue,
        });
    }

    Ok(SpectrumReport {
        pairs,
        tolerances: tol,
        n_positive,
        n_negative,
        n_null,
        n_unresolved,
        max_im_non_null,
        conjugate_pairs,
        theorem_violations,
        j_hermiticity: None,
    })
}

/// Candidate partners examined per eigenvalue.
const PAIRING_NEIGHBOURS: usize = 8;

/// Matches complex eigenvalues with conjugate partners, closest candidates
/// first, so a loose tolerance on one badly conditioned pair cannot take the
/// partner of a sharp one. A leftover eigenvalue whose `|Im lambda|` lies
/// within its own first-order bound could be a perturbed real eigenvalue; it
/// is recorded as paired with itself rather than reported.
fn pair_conjugates(
    pairs: &[EigenPair],
    residuals: &[f64],
    complex: &[usize],
    j: &Involution,
    tol: &SpectralTolerances,
) -> Result<(Vec<ConjugatePair>, Vec<usize>)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for &i in complex {
        let target = pairs[i].eigenvalue.conj();
        let mut near: Vec<(f64, usize)> = complex
            .iter()
            .filter(|&&k| k != i)
            .map(|&k| ((pairs[k].eigenvalue - target).norm(), k))
            .collect();
        let keep = near.len().min(PAIRING_NEIGHBOURS);
        if keep > 0 && keep < near.len() {
            near.select_nth_unstable_by(keep - 1, |a, b| a.0.total_cmp(&b.0));
        }
        candidates.extend(near[..keep].iter().map(|&(d, k)| (d, i.min(k), i.max(k))));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    candidates.dedup();

    let mut matched = vec![false; pairs.len()];
    let mut out = Vec::new();
    for (d, i, k) in candidates {
        if matched[i] || matched[k] {
            continue;
        }
        // the partner's J-image is the left eigenvector for lambda_i
        let vi = pairs[i].eigenvector.amplitudes();
        let jvk = j.apply(pairs[k].eigenvector.amplitudes())?;
        let overlap: C64 = jvk.iter().zip(vi).map(|(a, b)| a.conj() * b).sum();
        let overlap = overlap.norm() / (euclidean_norm(vi) * euclidean_norm(&jvk));
        let bound = if overlap > 0.0 {
            (residuals[i] + residuals[k]) / overlap
        } else {
            f64::INFINITY
        };
        let pair_tol = (tol.reality_tol * pairs[i].eigenvalue.norm().max(1.0)).max(bound);
        if d <= pair_tol {
            matched[i] = true;
            matched[k] = true;
            out.push(ConjugatePair {
                first: i,
                second: k,
                mismatch: d,
                tol: pair_tol,
            });
        }
    }

    let mut unpaired = Vec::new();
    for &i in complex {
        if matched[i] {
            continue;
        }
        let mismatch = 2.0 * pairs[i].eigenvalue.im.abs();
        let self_tol = 2.0 * pairs[i].reality_bound;
        if mismatch <= self_tol {
            out.push(ConjugatePair {
                first: i,
                second: i,
                mismatch,
                tol: self_tol,
            });
        } else {
            unpaired.push(i);
        }
    }
    out.sort_by_key(|p| (p.first, p.second));
    Ok((out, unpaired))
}

/// Verdict of the reality theorem on a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealityVerdict {
    pub holds: bool,
    pub violations: Vec<TheoremViolation>,
}

/// Every non-null pair has a real eigenvalue (within its bound) and every
/// complex eigenvalue is null and conjugate-paired. Refuses reports whose
/// source matrix was not shown to be `J`-Hermitian.
pub fn verify_reality_theorem(report: &SpectrumReport) -> Result<RealityVerdict> {
    match report.j_hermiticity {
        Some(check) if check.passed => Ok(RealityVerdict {
            holds: report.theorem_violations.is_empty(),
            violations: report.theorem_violations.clone(),
        }),
        Some(check) => Err(KreinError::Precondition(format!(
            "matrix is not J-Hermitian (residual {:e} > tol {:e})",
            check.residual, check.tol
        ))),
        None => Err(KreinError::Precondition(
            "J-Hermiticity of the source matrix was not established".into(),
        )),
    }
}

/// Hermiticity check, eigendecomposition and classification in one call.
pub fn analyze_spectrum(
    h: &OperatorMatrix,
    j: &Involution,
    tol: SpectralTolerances,
) -> Result<SpectrumReport> {
    let herm = is_j_hermitian(h, j, default_hermiticity_tol(h))?;
    let raw = eigendecompose(h)?;
    let mut report = classify_spectrum(&raw, j, tol)?;
    report.j_hermiticity = Some(herm);
    Ok(report)
}

impl SpectrumReport {
    /// Indices of pairs ordered by `|lambda|`.
    pub fn indices_by_modulus(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.pairs.len()).collect();
        idx.sort_by(|&a, &b| {
            self.pairs[a]
                .eigenvalue
                .norm()
                .total_cmp(&self.pairs[b].eigenvalue.norm())
        });
        idx
    }

    /// Pairs usable as physical states (non-null and resolved) unless
    /// `include_null` is set.
    pub fn selectable(&self, include_null: bool) -> impl Iterator<Item = &EigenPair> {
        self.pairs.iter().filter(move |p| match p.classification {
            Classification::Positive | Classification::Negative => true,
            Classification::Null => include_null,
            Classification::Unresolved => false,
        })
    }
}

/// Eigenvector matrix columns as states, used by the propagator.
pub(crate) fn eigen_factors(h: &OperatorMatrix) -> Result<(Vec<C64>, Mat<C64>)> {
    let evd = h.entries().eigen().map_err(|_| KreinError::NoConvergence)?;
    let n = h.dim();
    let values = (0..n).map(|k| evd.S()[k]).collect();
    Ok((values, evd.U().to_owned()))
}
