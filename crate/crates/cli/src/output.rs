//! Tabular and graphical renderings of a bundle, and the file writer.

use std::path::{Path, PathBuf};

use krein_core::StateVector;
use plotters::prelude::*;

use crate::bundle::{CheckRecord, ContinuitySummary, EvolutionSummary, SpectrumSummary};
use crate::error::CliError;

/// C `%.12e`: twelve fractional digits, signed exponent of at least two digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), sci)
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

pub fn spectrum_csv(s: &SpectrumSummary) -> String {
    table(
        &["index", "re_lambda", "im_lambda", "krein_norm", "class", "residual"],
        s.rows.iter().map(|r| {
            vec![
                r.index.to_string(),
                sci(r.eigenvalue.re),
                sci(r.eigenvalue.im),
                sci(r.krein_norm),
                r.class.to_string(),
                sci(r.residual),
            ]
        }),
    )
}

/// The continuity column is `nan` on the first and last rows, where no
/// centered time difference exists.
pub fn trace_csv(e: &EvolutionSummary, c: Option<&ContinuitySummary>) -> String {
    let n = e.times.len();
    table(
        &["t", "krein_norm", "dirac_norm", "max_continuity_residual"],
        (0..n).map(|s| {
            let cont = c
                .filter(|_| s > 0 && s + 1 < n)
                .and_then(|c| c.max_residual_per_step.get(s - 1).copied().flatten());
            vec![sci(e.times[s]), opt(e.krein_norms[s]), opt(e.dirac_norms[s]), opt(cont)]
        }),
    )
}

pub fn checks_csv(checks: &[CheckRecord]) -> String {
    table(
        &["check", "residual", "tol", "passed"],
        checks
            .iter()
            .map(|c| vec![c.name.clone(), opt(c.residual), sci(c.tol), c.passed.to_string()]),
    )
}

pub fn snapshots_csv(times: &[f64], snapshots: &[StateVector], nodes: &[f64]) -> String {
    table(
        &["t", "x", "re_psi", "im_psi"],
        times.iter().zip(snapshots).flat_map(|(t, psi)| {
            nodes
                .iter()
                .zip(psi.amplitudes())
                .map(move |(x, z)| vec![sci(*t), sci(*x), sci(z.re), sci(z.im)])
        }),
    )
}

fn plot_err(e: impl std::fmt::Display) -> CliError {
    CliError::Plot(e.to_string())
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = (hi - lo).abs().max(1e-12 * lo.abs().max(hi.abs())).max(1e-300);
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
        .map(|(lo, hi)| padded(lo, hi))
}

/// Both norms against time, one panel each.
pub fn norms_svg(e: &EvolutionSummary) -> Result<String, CliError> {
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, (800, 600)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let panels = root.split_evenly((2, 1));
        let t_range = padded(e.times[0], *e.times.last().expect("non-empty trace"));
        for (area, (label, series, color)) in panels.iter().zip([
            ("Krein norm", &e.krein_norms, BLUE),
            ("Dirac norm", &e.dirac_norms, RED),
        ]) {
            let points: Vec<(f64, f64)> =
                e.times.iter().zip(series).filter_map(|(t, v)| v.map(|v| (*t, v))).collect();
            let y = bounds(points.iter().map(|p| p.1)).unwrap_or((-1.0, 1.0));
            let mut chart = ChartBuilder::on(area)
                .caption(label, ("sans-serif", 18))
                .margin(10)
                .x_label_area_size(30)
                .y_label_area_size(70)
                .build_cartesian_2d(t_range.0..t_range.1, y.0..y.1)
                .map_err(plot_err)?;
            chart
                .configure_mesh()
                .x_desc("t")
                .y_label_formatter(&|v| format!("{v:.3e}"))
                .draw()
                .map_err(plot_err)?;
            chart.draw_series(LineSeries::new(points, color.stroke_width(2))).map_err(plot_err)?;
        }
        root.present().map_err(plot_err)?;
    }
    Ok(out)
}

/// Eigenvalues in the complex plane, coloured by Krein class.
pub fn spectrum_svg(s: &SpectrumSummary) -> Result<String, CliError> {
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, (800, 600)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let x = bounds(s.rows.iter().map(|r| r.eigenvalue.re)).unwrap_or((-1.0, 1.0));
        let y = bounds(s.rows.iter().map(|r| r.eigenvalue.im)).unwrap_or((-1.0, 1.0));
        let mut chart = ChartBuilder::on(&root)
            .caption("Spectrum", ("sans-serif", 20))
            .margin(10)
            .x_label_area_size(30)
            .y_label_area_size(70)
            .build_cartesian_2d(x.0..x.1, y.0..y.1)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc("Re")
            .y_desc("Im")
            .y_label_formatter(&|v| format!("{v:.2e}"))
            .draw()
            .map_err(plot_err)?;
        use krein_core::Classification as K;
        for (class, color) in [(K::Positive, BLUE), (K::Negative, RED), (K::Null, BLACK), (K::Unresolved, MAGENTA)] {
            let points = s
                .rows
                .iter()
                .filter(|r| r.class == class && r.eigenvalue.re.is_finite() && r.eigenvalue.im.is_finite())
                .map(|r| Circle::new((r.eigenvalue.re, r.eigenvalue.im), 3, color.filled()));
            chart.draw_series(points).map_err(plot_err)?;
        }
        root.present().map_err(plot_err)?;
    }
    Ok(out)
}

/// Output files, rendered in memory before anything touches the disk.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(&'static str, String)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &'static str, contents: String) {
        self.files.push((name, contents));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| *n == name).map(|(_, c)| c.as_str())
    }

    /// Writes every file into `dir`. Without `force`, nothing is written if
    /// any target already exists.
    pub fn write(&self, dir: &Path, force: bool) -> Result<Vec<PathBuf>, CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        let targets: Vec<PathBuf> = self.files.iter().map(|(n, _)| dir.join(n)).collect();
        if !force {
            if let Some(existing) = targets.iter().find(|p| p.exists()) {
                return Err(CliError::WouldOverwrite(existing.clone()));
            }
        }
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (path, (_, contents)) in targets.iter().zip(&self.files) {
            std::fs::write(path, contents).map_err(io(path))?;
        }
        Ok(targets)
    }
}
