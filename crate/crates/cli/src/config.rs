//! Flat `key = value` run configuration.
//!
//! Values come from three layers: built-in defaults, an optional config file,
//! and `--set key=value` overrides, in increasing precedence. Every value keeps
//! its origin so errors can point at a file line or a `--set` argument.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use krein_core::{Boundary, Grid, PhysicalConstants, PotentialSpec, SpectralTolerances, StencilOrder, C64};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { path: PathBuf, line: usize },
    Override { index: usize },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Override { index } => write!(f, "--set #{index}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub value: String,
    pub origin: Origin,
}

pub const ALL_CHECKS: &str =
    "j_hermitian,pt_symmetric,real_potential,krein_unitary,hilbert_unitary,adjoint_axioms,j_product_identity";

const DEFAULTS: &[(&str, &str)] = &[
    ("grid.boundary", "dirichlet"),
    ("grid.half_width", "8"),
    ("grid.n_points", "401"),
    ("grid.stencil", "2"),
    ("constants.hbar", "1"),
    ("constants.mass", "1"),
    ("potential", "harmonic"),
    ("potential.omega", "1"),
    ("potential.epsilon", "1"),
    ("potential.coefficients", ""),
    ("potential.file", ""),
    ("potential.conjugate_node", ""),
    ("evolve.t_final", "2"),
    ("evolve.n_steps", "200"),
    ("initial", "gaussian"),
    ("initial.center", "1"),
    ("initial.width", "0.5"),
    ("initial.momentum", "0"),
    ("initial.index", "0"),
    ("initial.file", ""),
    ("include_null_states", "false"),
    ("tolerance.null", "1e-8"),
    ("tolerance.reality", "1e-8"),
    ("tolerance.degeneracy", "1e-9"),
    ("tolerance.unitarity", "1e-8"),
    ("tolerance.hermiticity", "1e-10"),
    ("check.time", "1"),
    ("checks", ALL_CHECKS),
    ("output.dir", "krein-out"),
    ("output.snapshots", "false"),
    ("output.plot", "false"),
];

/// Layered key/value store.
#[derive(Clone, Debug, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl Default for RawConfig {
    fn default() -> Self {
        let entries = DEFAULTS
            .iter()
            .map(|(k, v)| {
                (
                    k.to_string(),
                    Entry {
                        value: v.to_string(),
                        origin: Origin::Default,
                    },
                )
            })
            .collect();
        Self { entries }
    }
}

fn split_assignment(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    Some((k.trim(), v.trim()))
}

impl RawConfig {
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.merge_text(&text, path)
    }

    /// Parses file contents. `#` starts a comment; blank lines are ignored.
    pub fn merge_text(&mut self, text: &str, path: &Path) -> Result<(), CliError> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let origin = Origin::File {
                path: path.to_path_buf(),
                line,
            };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = split_assignment(content) else {
                return Err(CliError::config(origin, format!("expected `key = value`, found `{content}`")));
            };
            if let Some(first) = seen.insert(key.to_string(), line) {
                return Err(CliError::config(origin, format!("duplicate key `{key}` (first set on line {first})")));
            }
            self.set(key, value, origin)?;
        }
        Ok(())
    }

    /// Applies a `--set key=value` override; `index` counts from 1.
    pub fn apply_override(&mut self, assignment: &str, index: usize) -> Result<(), CliError> {
        let origin = Origin::Override { index };
        let Some((key, value)) = split_assignment(assignment) else {
            return Err(CliError::config(origin, format!("expected `key=value`, found `{assignment}`")));
        };
        self.set(key, value, origin)
    }

    fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), CliError> {
        match self.entries.get_mut(key) {
            Some(entry) => {
                *entry = Entry {
                    value: value.to_string(),
                    origin,
                };
                Ok(())
            }
            None => Err(CliError::config(origin, format!("unknown key `{key}`"))),
        }
    }

    pub fn get(&self, key: &str) -> &Entry {
        &self.entries[key]
    }

    /// Resolved values, for the result bundle. File paths are given as
    /// resolved so the echo does not depend on where it is read from. The
    /// output directory is left out: it does not affect results.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .filter(|(k, _)| k.as_str() != "output.dir")
            .map(|(k, e)| {
                let value = match self.path(k) {
                    Some(p) if k.ends_with(".file") => p.display().to_string(),
                    _ => e.value.clone(),
                };
                (k.clone(), value)
            })
            .collect()
    }

    /// The resolved configuration in the file format it was read from.
    pub fn to_text(&self) -> String {
        self.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    fn parse<T: FromStr>(&self, key: &str, what: &str) -> Result<T, CliError> {
        let e = self.get(key);
        e.value
            .parse()
            .map_err(|_| CliError::config(e.origin.clone(), format!("`{key}`: expected {what}, found `{}`", e.value)))
    }

    fn number(&self, key: &str, check: impl Fn(f64) -> bool, range: &str) -> Result<f64, CliError> {
        let v: f64 = self.parse(key, "a number")?;
        if v.is_finite() && check(v) {
            Ok(v)
        } else {
            Err(self.invalid(key, range))
        }
    }

    fn count(&self, key: &str, min: usize, max: usize) -> Result<usize, CliError> {
        let v: usize = self.parse(key, "a non-negative integer")?;
        if (min..=max).contains(&v) {
            Ok(v)
        } else {
            Err(self.invalid(key, &format!("between {min} and {max}")))
        }
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        self.parse(key, "true or false")
    }

    fn invalid(&self, key: &str, expected: &str) -> CliError {
        let e = self.get(key);
        CliError::config(e.origin.clone(), format!("`{key}` must be {expected}, found `{}`", e.value))
    }

    /// Relative paths from a config file resolve against its directory.
    fn path(&self, key: &str) -> Option<PathBuf> {
        let e = self.get(key);
        if e.value.is_empty() {
            return None;
        }
        let p = PathBuf::from(&e.value);
        match &e.origin {
            Origin::File { path, .. } if p.is_relative() => {
                Some(path.parent().map(|d| d.join(&p)).unwrap_or(p))
            }
            _ => Some(p),
        }
    }

    fn required_path(&self, key: &str, context: &str) -> Result<PathBuf, CliError> {
        self.path(key).ok_or_else(|| self.invalid(key, &format!("a file path when {context}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Evolve,
    Check,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Check => "check",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Gaussian { center: f64, width: f64, momentum: f64 },
    Eigenstate { index: usize },
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    JHermitian,
    PtSymmetric,
    RealPotential,
    KreinUnitary,
    HilbertUnitary,
    AdjointAxioms,
    JProductIdentity,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::JHermitian => "j_hermitian",
            CheckKind::PtSymmetric => "pt_symmetric",
            CheckKind::RealPotential => "real_potential",
            CheckKind::KreinUnitary => "krein_unitary",
            CheckKind::HilbertUnitary => "hilbert_unitary",
            CheckKind::AdjointAxioms => "adjoint_axioms",
            CheckKind::JProductIdentity => "j_product_identity",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            CheckKind::JHermitian,
            CheckKind::PtSymmetric,
            CheckKind::RealPotential,
            CheckKind::KreinUnitary,
            CheckKind::HilbertUnitary,
            CheckKind::AdjointAxioms,
            CheckKind::JProductIdentity,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub spectral: SpectralTolerances,
    pub unitarity: f64,
    /// Relative to the largest matrix entry.
    pub hermiticity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshots: bool,
    pub plot: bool,
    pub force: bool,
}

/// Validated run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub grid: Grid,
    pub stencil: StencilOrder,
    pub constants: PhysicalConstants,
    pub potential: PotentialSpec,
    /// Node whose potential value is replaced by its conjugate (fault injection).
    pub conjugate_node: Option<usize>,
    pub t_final: f64,
    pub n_steps: usize,
    pub initial: InitialState,
    pub include_null_states: bool,
    pub tolerances: Tolerances,
    pub check_time: f64,
    pub checks: Vec<CheckKind>,
    pub output: OutputConfig,
    pub echo: BTreeMap<String, String>,
}

/// Dense diagonalization cost grows as `N^3`; beyond this it stops being a
/// desk-scale run.
pub const MAX_POINTS: usize = 4001;

/// Evolution keeps every time level for the continuity residual.
pub const MAX_STORED_AMPLITUDES: usize = 20_000_000;

impl RunConfig {
    pub fn from_raw(raw: &RawConfig, command: Command) -> Result<Self, CliError> {
        let boundary: Boundary = raw.parse("grid.boundary", "`dirichlet` or `periodic`")?;
        let n_points = raw.count("grid.n_points", 3, MAX_POINTS)?;
        let half_width = raw.number("grid.half_width", |v| v > 0.0, "positive")?;
        let grid = Grid::new(boundary, n_points, half_width).map_err(|e| {
            CliError::config(raw.get("grid.n_points").origin.clone(), e.to_string())
        })?;
        let stencil = StencilOrder::from_order(raw.count("grid.stencil", 2, 4)? as u32)
            .map_err(|_| raw.invalid("grid.stencil", "2 or 4"))?;
        let constants = PhysicalConstants::new(
            raw.number("constants.hbar", |v| v > 0.0, "positive")?,
            raw.number("constants.mass", |v| v > 0.0, "positive")?,
        )
        .map_err(|e| CliError::config(Origin::Default, e.to_string()))?;

        let potential = match raw.get("potential").value.as_str() {
            "zero" => PotentialSpec::Zero,
            "harmonic" => PotentialSpec::Harmonic {
                omega: raw.number("potential.omega", |v| v > 0.0, "positive")?,
            },
            "bender" => PotentialSpec::BenderFamily {
                epsilon: raw.number("potential.epsilon", |v| v >= 0.0, "non-negative")?,
            },
            "ix3" => PotentialSpec::MonomialImaginaryCubic,
            "polynomial" => PotentialSpec::Polynomial(parse_complex_list(raw, "potential.coefficients")?),
            "custom" => {
                let path = raw.required_path("potential.file", "potential = custom")?;
                PotentialSpec::Custom(read_samples(&path, n_points)?)
            }
            other => {
                return Err(CliError::config(
                    raw.get("potential").origin.clone(),
                    format!("unknown potential `{other}` (expected zero, harmonic, bender, ix3, polynomial or custom)"),
                ))
            }
        };
        if !potential.in_validated_range() {
            log::warn!("epsilon >= 2: the real-line box is not the natural domain for this potential");
        }
        let conjugate_node = match raw.get("potential.conjugate_node").value.as_str() {
            "" => None,
            _ => Some(raw.count("potential.conjugate_node", 0, n_points - 1)?),
        };

        let initial = match raw.get("initial").value.as_str() {
            "gaussian" => InitialState::Gaussian {
                center: raw.number("initial.center", |_| true, "finite")?,
                width: raw.number("initial.width", |v| v > 0.0, "positive")?,
                momentum: raw.number("initial.momentum", |_| true, "finite")?,
            },
            "eigenstate" => InitialState::Eigenstate {
                index: raw.count("initial.index", 0, n_points - 1)?,
            },
            "file" => InitialState::File(raw.required_path("initial.file", "initial = file")?),
            other => {
                return Err(CliError::config(
                    raw.get("initial").origin.clone(),
                    format!("unknown initial state `{other}` (expected gaussian, eigenstate or file)"),
                ))
            }
        };

        let positive = |key: &str| raw.number(key, |v| v > 0.0, "positive");
        let tolerances = Tolerances {
            spectral: SpectralTolerances {
                null_tol: positive("tolerance.null")?,
                reality_tol: positive("tolerance.reality")?,
                degeneracy_tol: positive("tolerance.degeneracy")?,
            },
            unitarity: positive("tolerance.unitarity")?,
            hermiticity: positive("tolerance.hermiticity")?,
        };

        let checks_entry = raw.get("checks");
        let mut checks = Vec::new();
        for name in checks_entry.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let kind = CheckKind::parse(name).ok_or_else(|| {
                CliError::config(
                    checks_entry.origin.clone(),
                    format!("unknown check `{name}` (known: {ALL_CHECKS})"),
                )
            })?;
            if !checks.contains(&kind) {
                checks.push(kind);
            }
        }
        checks.sort();

        let n_steps = raw.count("evolve.n_steps", 1, 1_000_000)?;
        if matches!(command, Command::Evolve | Command::Report) && (n_steps + 1) * n_points > MAX_STORED_AMPLITUDES {
            return Err(raw.invalid(
                "evolve.n_steps",
                &format!("at most {} for {n_points} grid points (every step is kept in memory)", MAX_STORED_AMPLITUDES / n_points - 1),
            ));
        }

        Ok(Self {
            command,
            grid,
            stencil,
            constants,
            potential,
            conjugate_node,
            t_final: raw.number("evolve.t_final", |v| v >= 0.0, "non-negative")?,
            n_steps,
            initial,
            include_null_states: raw.flag("include_null_states")?,
            tolerances,
            check_time: raw.number("check.time", |_| true, "finite")?,
            checks,
            output: OutputConfig {
                dir: PathBuf::from(&raw.get("output.dir").value),
                snapshots: raw.flag("output.snapshots")?,
                plot: raw.flag("output.plot")?,
                force: false,
            },
            echo: raw.echo(),
        })
    }
}

fn parse_complex(text: &str) -> Option<C64> {
    let z: C64 = text.trim().parse().ok()?;
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

/// Comma-separated complex numbers such as `0, 0, 1i` or `1.5-0.5i`.
fn parse_complex_list(raw: &RawConfig, key: &str) -> Result<Vec<C64>, CliError> {
    let e = raw.get(key);
    let values: Option<Vec<C64>> = e.value.split(',').map(parse_complex).collect();
    match values {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(raw.invalid(key, "a comma-separated list of complex numbers like `0, 0.5, 1i`")),
    }
}

/// Reads `n` complex samples, one `re im` pair per line (`im` optional).
pub fn read_samples(path: &Path, n: usize) -> Result<Vec<C64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::with_capacity(n);
    for (i, raw) in text.lines().enumerate() {
        let origin = Origin::File {
            path: path.to_path_buf(),
            line: i + 1,
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok().filter(|v: &f64| v.is_finite())).collect();
        match parsed.as_deref() {
            Some([re]) => out.push(C64::new(*re, 0.0)),
            Some([re, im]) => out.push(C64::new(*re, *im)),
            _ => return Err(CliError::config(origin, format!("expected `re im`, found `{content}`"))),
        }
    }
    if out.len() != n {
        return Err(CliError::config(
            Origin::File {
                path: path.to_path_buf(),
                line: text.lines().count(),
            },
            format!("expected {n} samples (one per grid node), found {}", out.len()),
        ));
    }
    Ok(out)
}
