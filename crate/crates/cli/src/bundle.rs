//! Serializable result bundle.
//!
//! JSON cannot carry non-finite floats, so quantities that may be infinite or
//! undefined are `Option`s; `None` stands for "not finite" or "not computed".

use std::collections::BTreeMap;

use krein_core::spectral::ConjugatePair;
use krein_core::{
    Check, Classification, ContinuityTrace, EvolutionTrace, NormDrift, PropagatorMethod, SpectrumReport,
    TheoremViolation, C64,
};
use serde::{Deserialize, Serialize};

pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub command: String,
    /// Every resolved configuration key.
    pub config: BTreeMap<String, String>,
    pub provenance: Provenance,
    pub checks: Vec<CheckRecord>,
    pub spectrum: Option<SpectrumSummary>,
    pub evolution: Option<EvolutionSummary>,
    pub continuity: Option<ContinuitySummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Largest eigenpair backward error, when a spectrum was computed.
    pub max_backward_error: Option<f64>,
    pub propagator: Option<PropagatorMethod>,
}

impl Provenance {
    pub fn current() -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            max_backward_error: None,
            propagator: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// `None` if the residual overflowed.
    pub residual: Option<f64>,
    pub tol: f64,
    pub passed: bool,
}

impl CheckRecord {
    pub fn new(name: &str, check: Check) -> Self {
        Self {
            name: name.to_string(),
            residual: finite(check.residual),
            tol: check.tol,
            passed: check.passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub eigenvalue: C64,
    pub krein_norm: f64,
    pub class: Classification,
    /// Normwise backward error of the pair.
    pub residual: f64,
    pub reality_bound: Option<f64>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub rows: Vec<SpectrumRow>,
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_null: usize,
    pub n_unresolved: usize,
    pub max_im_non_null: f64,
    pub conjugate_pairs: Vec<ConjugatePair>,
    pub violations: Vec<TheoremViolation>,
    /// `None` when the matrix failed the J-Hermiticity precondition.
    pub reality_theorem_holds: Option<bool>,
}

impl SpectrumSummary {
    pub fn from_report(report: &SpectrumReport, reality_theorem_holds: Option<bool>) -> Self {
        let rows = report
            .pairs
            .iter()
            .enumerate()
            .map(|(index, p)| SpectrumRow {
                index,
                eigenvalue: p.eigenvalue,
                krein_norm: p.krein_norm,
                class: p.classification,
                residual: p.backward_error,
                reality_bound: finite(p.reality_bound),
                degenerate: p.degenerate,
            })
            .collect();
        Self {
            rows,
            n_positive: report.n_positive,
            n_negative: report.n_negative,
            n_null: report.n_null,
            n_unresolved: report.n_unresolved,
            max_im_non_null: report.max_im_non_null,
            conjugate_pairs: report.conjugate_pairs.clone(),
            violations: report.theorem_violations.clone(),
            reality_theorem_holds,
        }
    }

    pub fn max_backward_error(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.residual).reduce(f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    pub absolute: Option<f64>,
    /// Undefined when the initial norm vanishes.
    pub relative: Option<f64>,
}

impl From<NormDrift> for DriftRecord {
    fn from(d: NormDrift) -> Self {
        Self {
            absolute: finite(d.absolute),
            relative: finite(d.relative),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub t_final: f64,
    pub n_steps: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    pub krein_norms: Vec<Option<f64>>,
    pub dirac_norms: Vec<Option<f64>>,
    pub krein_drift: DriftRecord,
    pub dirac_drift: DriftRecord,
}

impl EvolutionSummary {
    pub fn from_trace(trace: &EvolutionTrace, t_final: f64) -> Self {
        Self {
            t_final,
            n_steps: trace.times.len() - 1,
            dt: trace.dt(),
            times: trace.times.clone(),
            krein_norms: trace.krein_norms.iter().copied().map(finite).collect(),
            dirac_norms: trace.dirac_norms.iter().copied().map(finite).collect(),
            krein_drift: trace.krein_drift().into(),
            dirac_drift: trace.dirac_drift().into(),
        }
    }
}

/// Per-step maxima of the continuity residual on interior time levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuitySummary {
    pub times: Vec<f64>,
    pub max_residual_per_step: Vec<Option<f64>>,
    pub max_residual: Option<f64>,
    pub max_source: Option<f64>,
    /// `max |residual - source|`.
    pub max_source_deviation: Option<f64>,
}

impl From<&ContinuityTrace> for ContinuitySummary {
    fn from(c: &ContinuityTrace) -> Self {
        Self {
            times: c.times.clone(),
            max_residual_per_step: c.max_residual_per_step.iter().copied().map(finite).collect(),
            max_residual: finite(c.max_residual),
            max_source: finite(c.max_source),
            max_source_deviation: finite(c.max_source_deviation),
        }
    }
}

impl ResultBundle {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            command: command.to_string(),
            config,
            provenance: Provenance::current(),
            checks: Vec::new(),
            spectrum: None,
            evolution: None,
            continuity: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("bundle contains only finite floats");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}
