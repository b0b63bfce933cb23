//! Pipelines behind the four commands.

use krein_core::hamiltonian::hamiltonian_from_samples;
use krein_core::{
    adjoint_axiom_residuals, build_position, check_hilbert_unitarity, check_krein_unitarity, classify_spectrum,
    continuity_residual, eigendecompose, evolve, is_j_hermitian, is_pt_symmetric_potential,
    j_product_adjoint_identity, propagator, KreinError, sample_potential, verify_reality_theorem, Check, Grid, Involution,
    OperatorMatrix, Propagator, SpectrumReport, StateVector, C64,
};

use crate::bundle::{CheckRecord, ContinuitySummary, EvolutionSummary, ResultBundle, SpectrumSummary};
use crate::config::{read_samples, CheckKind, Command, InitialState, RunConfig};
use crate::error::CliError;
use crate::output::{self, Artifacts};

/// Scalar used for the conjugate-homogeneity axiom.
const AXIOM_SCALAR: C64 = C64::new(0.75, -1.25);

#[derive(Debug)]
pub struct RunOutput {
    pub bundle: ResultBundle,
    pub artifacts: Artifacts,
    /// Reasons for a nonzero "findings" exit; empty on a clean run.
    pub findings: Vec<String>,
}

/// Everything derived from the configuration before any command runs.
struct Problem {
    grid: Grid,
    j: Involution,
    potential: Vec<C64>,
    h: OperatorMatrix,
}

impl Problem {
    fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        let grid = cfg.grid;
        let mut potential = sample_potential(&cfg.potential, &grid, &cfg.constants)?;
        if let Some(k) = cfg.conjugate_node {
            potential[k] = potential[k].conj();
        }
        let h = hamiltonian_from_samples(&grid, &cfg.constants, cfg.stencil, &potential)?;
        Ok(Self {
            grid,
            j: Involution::parity(&grid),
            potential,
            h,
        })
    }

    fn herm_tol(&self, cfg: &RunConfig) -> f64 {
        cfg.tolerances.hermiticity * self.h.max_abs().max(1.0)
    }

    fn potential_tol(&self, cfg: &RunConfig) -> f64 {
        let vmax = self.potential.iter().map(|z| z.norm()).fold(0.0, f64::max);
        cfg.tolerances.hermiticity * vmax.max(1.0)
    }
}

fn failed_check(name: &str, tol: f64, err: &CliError) -> CheckRecord {
    log::warn!("{name}: {err}");
    CheckRecord {
        name: name.to_string(),
        residual: None,
        tol,
        passed: false,
    }
}

fn run_checks(cfg: &RunConfig, p: &Problem, kinds: &[CheckKind]) -> Result<Vec<CheckRecord>, CliError> {
    let mut u: Option<Result<Propagator, CliError>> = None;
    let mut records = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let name = kind.name();
        let record = match kind {
            CheckKind::JHermitian => CheckRecord::new(name, is_j_hermitian(&p.h, &p.j, p.herm_tol(cfg))?),
            CheckKind::PtSymmetric => CheckRecord::new(
                name,
                is_pt_symmetric_potential(&p.potential, &p.grid, p.potential_tol(cfg))?,
            ),
            CheckKind::RealPotential => {
                let im = p.potential.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                CheckRecord::new(name, Check::new(im, p.potential_tol(cfg)))
            }
            CheckKind::KreinUnitary | CheckKind::HilbertUnitary => {
                let tol = cfg.tolerances.unitarity;
                let u = u.get_or_insert_with(|| Ok(propagator(&p.h, cfg.check_time, &cfg.constants)?));
                match u {
                    Ok(u) => {
                        let raw = if kind == CheckKind::KreinUnitary {
                            check_krein_unitarity(u, &p.j, tol)?
                        } else {
                            check_hilbert_unitarity(u, tol)?
                        };
                        // roundoff in U*U grows with |U|^2 when U is far from unitary
                        let scale = u.matrix.max_abs().powi(2).max(1.0);
                        let residual = if scale.is_finite() { raw.residual / scale } else { f64::INFINITY };
                        CheckRecord::new(name, Check::new(residual, tol))
                    }
                    Err(e) => failed_check(name, tol, e),
                }
            }
            CheckKind::AdjointAxioms => {
                let x = build_position(&p.grid);
                let r = adjoint_axiom_residuals(&p.h, &x, AXIOM_SCALAR, &p.j)?;
                CheckRecord::new(name, Check::new(r.max(), cfg.tolerances.hermiticity))
            }
            CheckKind::JProductIdentity => {
                let r = j_product_adjoint_identity(&p.h, &p.j)? / p.h.max_abs().max(1.0);
                CheckRecord::new(name, Check::new(r, cfg.tolerances.hermiticity))
            }
        };
        log::info!("check {name}: residual {:?} passed {}", record.residual, record.passed);
        records.push(record);
    }
    Ok(records)
}

fn spectrum(cfg: &RunConfig, p: &Problem) -> Result<(SpectrumReport, Option<bool>), CliError> {
    let herm = is_j_hermitian(&p.h, &p.j, p.herm_tol(cfg))?;
    let raw = eigendecompose(&p.h)?;
    let mut report = classify_spectrum(&raw, &p.j, cfg.tolerances.spectral)?;
    report.j_hermiticity = Some(herm);
    let holds = match verify_reality_theorem(&report) {
        Ok(v) => Some(v.holds),
        Err(e) => {
            log::warn!("reality theorem not assessed: {e}");
            None
        }
    };
    Ok((report, holds))
}

fn initial_state(cfg: &RunConfig, p: &Problem, report: Option<&SpectrumReport>) -> Result<StateVector, CliError> {
    match &cfg.initial {
        InitialState::Gaussian { center, width, momentum } => {
            Ok(StateVector::gaussian(p.grid, *center, *width, *momentum)?)
        }
        InitialState::Eigenstate { index } => {
            let owned;
            let report = match report {
                Some(r) => r,
                None => {
                    owned = spectrum(cfg, p)?.0;
                    &owned
                }
            };
            let available = report.selectable(cfg.include_null_states).count();
            let pair = report.selectable(cfg.include_null_states).nth(*index).ok_or_else(|| {
                CliError::Invalid(format!(
                    "initial.index = {index}, but only {available} eigenstates are selectable{}",
                    if cfg.include_null_states { "" } else { " (null states excluded)" }
                ))
            })?;
            log::info!("initial eigenstate {index}: lambda = {}", pair.eigenvalue);
            Ok(pair.eigenvector.normalized()?)
        }
        InitialState::File(path) => {
            let amplitudes = read_samples(path, p.grid.n_points())?;
            Ok(StateVector::new(p.grid, amplitudes)?)
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let p = Problem::build(cfg)?;
    let mut bundle = ResultBundle::new(cfg.command.name(), cfg.echo.clone());
    let mut artifacts = Artifacts::default();
    let mut findings = Vec::new();

    let check_kinds: &[CheckKind] = match cfg.command {
        Command::Check | Command::Report => &cfg.checks,
        Command::Spectrum => &[CheckKind::JHermitian, CheckKind::PtSymmetric],
        Command::Evolve => &[],
    };
    bundle.checks = run_checks(cfg, &p, check_kinds)?;
    findings.extend(
        bundle.checks.iter().filter(|c| !c.passed).map(|c| format!("check {} failed", c.name)),
    );

    let mut report = None;
    if matches!(cfg.command, Command::Spectrum | Command::Report) {
        let (r, holds) = spectrum(cfg, &p)?;
        let summary = SpectrumSummary::from_report(&r, holds);
        match holds {
            Some(true) => {}
            Some(false) => findings.push(format!("{} reality theorem violation(s)", summary.violations.len())),
            None => findings.push("reality theorem not assessed: matrix is not J-Hermitian".into()),
        }
        bundle.provenance.max_backward_error = summary.max_backward_error();
        artifacts.add("spectrum.csv", output::spectrum_csv(&summary));
        if cfg.output.plot {
            artifacts.add("spectrum.svg", output::spectrum_svg(&summary)?);
        }
        bundle.spectrum = Some(summary);
        report = Some(r);
    }

    if matches!(cfg.command, Command::Evolve | Command::Report) {
        let psi0 = initial_state(cfg, &p, report.as_ref())?;
        let trace = evolve(&psi0, &p.h, cfg.t_final, cfg.n_steps, &p.j, &cfg.constants, true).map_err(|e| match e {
            KreinError::NonFinite(_) => CliError::Invalid(format!(
                "evolution overflowed ({e}): the state outgrows double precision, typically through eigenvalues \
                 with large |Im|; try a smaller box or a shorter evolve.t_final"
            )),
            e => e.into(),
        })?;
        let snapshots = trace.snapshots.as_deref().expect("snapshots requested");
        let continuity = if snapshots.len() >= 3 && p.grid.n_points() >= 5 {
            let c = continuity_residual(snapshots, &p.grid, trace.dt(), &p.potential, &cfg.constants)?;
            Some(ContinuitySummary::from(&c))
        } else {
            None
        };
        let summary = EvolutionSummary::from_trace(&trace, cfg.t_final);
        bundle.provenance.propagator = Some(trace.method);
        artifacts.add("trace.csv", output::trace_csv(&summary, continuity.as_ref()));
        if cfg.output.snapshots {
            artifacts.add("snapshots.csv", output::snapshots_csv(&trace.times, snapshots, &p.grid.nodes()));
        }
        if cfg.output.plot {
            artifacts.add("norms.svg", output::norms_svg(&summary)?);
        }
        bundle.evolution = Some(summary);
        bundle.continuity = continuity;
    }

    if !bundle.checks.is_empty() {
        artifacts.add("checks.csv", output::checks_csv(&bundle.checks));
    }
    artifacts.add("bundle.json", bundle.to_json());
    artifacts.add("resolved.conf", bundle.config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect());
    Ok(RunOutput {
        bundle,
        artifacts,
        findings,
    })
}
