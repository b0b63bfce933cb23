use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use krein_cli::ResultBundle;
use tempfile::TempDir;

fn krein(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krein"))
        .args(args)
        .env_remove("KREIN_LOG")
        .output()
        .expect("binary runs")
}

struct Run {
    dir: PathBuf,
    out: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exit code")
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn file(&self, name: &str) -> String {
        std::fs::read_to_string(self.dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn bundle(&self) -> ResultBundle {
        ResultBundle::from_json(&self.file("bundle.json")).unwrap()
    }

    fn rows(&self, name: &str) -> Vec<csv::StringRecord> {
        let text = self.file(name);
        csv::Reader::from_reader(text.as_bytes()).records().map(Result::unwrap).collect()
    }

    fn check(&self, name: &str) -> bool {
        let rows = self.rows("checks.csv");
        let row = rows.iter().find(|r| &r[0] == name).unwrap_or_else(|| panic!("no {name} row"));
        &row[3] == "true"
    }
}

fn run_in(tmp: &TempDir, sub: &str, command: &str, sets: &[&str], extra: &[&str]) -> Run {
    let dir = tmp.path().join(sub);
    let mut args = vec![command.to_string(), "--out".into(), dir.display().to_string()];
    for s in sets {
        args.push("--set".into());
        args.push(s.to_string());
    }
    args.extend(extra.iter().map(|s| s.to_string()));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    Run { dir, out: krein(&args) }
}

fn run(command: &str, sets: &[&str]) -> (TempDir, Run) {
    let tmp = tempfile::tempdir().unwrap();
    let r = run_in(&tmp, "out", command, sets, &[]);
    (tmp, r)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

const SMALL_IX3: [&str; 3] = ["potential=ix3", "grid.half_width=2", "grid.n_points=201"];

#[test]
fn harmonic_spectrum_starts_at_half_integers() {
    let (_tmp, r) = run("spectrum", &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let header = r.file("spectrum.csv").lines().next().unwrap().to_string();
    assert_eq!(header, "index,re_lambda,im_lambda,krein_norm,class,residual");
    let rows = r.rows("spectrum.csv");
    for (n, row) in rows.iter().take(3).enumerate() {
        assert!((num(&row[1]) - (n as f64 + 0.5)).abs() < 1e-3, "{row:?}");
        assert_eq!(&row[4], if n % 2 == 0 { "positive" } else { "negative" });
    }
}

#[test]
fn bender_spectrum_is_real_at_the_bottom() {
    let (_tmp, r) = run("spectrum", &["potential=bender", "potential.epsilon=1"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    for row in r.rows("spectrum.csv").iter().take(6) {
        assert!(num(&row[2]).abs() < 1e-6, "{row:?}");
    }
    assert_eq!(r.bundle().spectrum.unwrap().reality_theorem_holds, Some(true));
}

#[test]
fn conjugated_node_exits_two_and_still_writes() {
    let (_tmp, r) = run("spectrum", &["potential=bender", "potential.conjugate_node=150"]);
    assert_eq!(r.code(), 2, "{}", r.stderr());
    assert!(!r.check("pt_symmetric"));
    assert!(!r.check("j_hermitian"));
    assert_eq!(r.rows("spectrum.csv").len(), 401);
}

#[test]
fn imaginary_cubic_checks() {
    let (_tmp, r) = run("check", &SMALL_IX3);
    assert_eq!(r.code(), 2);
    assert!(r.check("pt_symmetric"));
    assert!(r.check("j_hermitian"));
    assert!(!r.check("real_potential"));
    assert!(r.check("krein_unitary"));
    assert!(!r.check("hilbert_unitary"));
    assert!(r.check("adjoint_axioms"));
}

#[test]
fn real_even_potential_passes_every_check() {
    let (_tmp, r) = run("check", &["potential=polynomial", "potential.coefficients=0, 0, 1"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.rows("checks.csv");
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|row| &row[3] == "true"), "{rows:?}");
}

#[test]
fn imaginary_quadratic_is_not_pt_symmetric() {
    let (_tmp, r) = run(
        "check",
        &["potential=polynomial", "potential.coefficients=0,0,1i", "checks=pt_symmetric"],
    );
    assert_eq!(r.code(), 2);
    assert_eq!(r.rows("checks.csv").len(), 1);
    assert!(!r.check("pt_symmetric"));
}

#[test]
fn zero_time_trace_has_one_row() {
    let (_tmp, r) = run("evolve", &["evolve.t_final=0"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.rows("trace.csv");
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "0.000000000000e+00");
    assert!((num(&rows[0][2]) - 1.0).abs() < 1e-12);
    assert_eq!(&rows[0][3], "nan");
}

#[test]
fn krein_norm_flat_dirac_norm_drifts() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run_in(&tmp, "ix3", "evolve", &SMALL_IX3, &["--plot"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let e = r.bundle().evolution.unwrap();
    assert_eq!(e.times.len(), 201);
    assert!(e.krein_drift.absolute.unwrap() < 1e-8);
    assert!(e.dirac_drift.absolute.unwrap() > 1e-3);
    assert!(r.file("norms.svg").starts_with("<svg"));
    // interior rows carry a continuity residual, the end rows do not
    let rows = r.rows("trace.csv");
    assert_eq!(&rows[0][3], "nan");
    assert!(num(&rows[1][3]).is_finite());
    assert_eq!(&rows[200][3], "nan");

    let r = run_in(&tmp, "harmonic", "evolve", &[], &[]);
    assert_eq!(r.code(), 0);
    let e = r.bundle().evolution.unwrap();
    assert!(e.krein_drift.absolute.unwrap() < 1e-8);
    assert!(e.dirac_drift.absolute.unwrap() < 1e-8);
}

#[test]
fn refuses_to_overwrite_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let sets = ["grid.n_points=51"];
    assert_eq!(run_in(&tmp, "o", "spectrum", &sets, &[]).code(), 0);
    let again = run_in(&tmp, "o", "spectrum", &sets, &[]);
    assert_eq!(again.code(), 1);
    assert!(again.stderr().contains("--force"), "{}", again.stderr());
    assert_eq!(run_in(&tmp, "o", "spectrum", &sets, &["--force"]).code(), 0);
}

#[test]
fn outputs_are_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let sets = ["potential=bender", "grid.half_width=3", "grid.n_points=101", "evolve.n_steps=50"];
    let a = run_in(&tmp, "a", "report", &sets, &[]);
    let b = run_in(&tmp, "b", "report", &sets, &[]);
    assert_eq!(a.code(), b.code());
    for name in ["bundle.json", "spectrum.csv", "trace.csv", "checks.csv", "resolved.conf"] {
        assert_eq!(a.file(name), b.file(name), "{name}");
    }
    // the echoed configuration reproduces the run
    let conf = a.dir.join("resolved.conf").display().to_string();
    let c = run_in(&tmp, "c", "report", &[], &["--config", &conf]);
    assert_eq!(a.file("bundle.json"), c.file("bundle.json"));
}

#[test]
fn bundle_round_trips() {
    let (_tmp, r) = run("report", &SMALL_IX3);
    let text = r.file("bundle.json");
    let bundle = ResultBundle::from_json(&text).unwrap();
    assert_eq!(bundle.to_json(), text);
    assert!(bundle.spectrum.is_some() && bundle.evolution.is_some() && bundle.continuity.is_some());
    assert_eq!(bundle.config["potential"], "ix3");
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn config_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write(tmp.path(), "bad.conf", "# a run\npotential = harmonic\ngrid.n_points = many\n");
    let out = krein(&["spectrum", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.conf:3:"), "{err}");

    let out = krein(&["check", "--set", "grid.pionts=3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--set #1: unknown key"));

    let out = krein(&["diagonalize"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn custom_files_resolve_against_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let n = 41;
    let grid = krein_core::Grid::dirichlet(n, 2.0).unwrap();
    let potential: String = grid.nodes().iter().map(|x| format!("{} {}\n", x * x, x * x * x)).collect();
    let state: String = grid.nodes().iter().map(|x| format!("{} 0\n", (-x * x).exp())).collect();
    write(tmp.path(), "v.dat", &potential);
    write(tmp.path(), "psi.dat", &state);
    let conf = write(
        tmp.path(),
        "run.conf",
        &format!(
            "grid.n_points = {n}\ngrid.half_width = 2\npotential = custom\npotential.file = v.dat\n\
             initial = file\ninitial.file = psi.dat\nevolve.n_steps = 20\nevolve.t_final = 0.2\n"
        ),
    );
    let out_dir = tmp.path().join("out");
    let out = krein(&["report", "--config", conf.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    // real part even, imaginary part odd: PT-symmetric but not real
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let r = Run { dir: out_dir, out };
    assert!(r.check("pt_symmetric"));
    assert!(!r.check("real_potential"));
    assert_eq!(r.rows("trace.csv").len(), 21);
}
