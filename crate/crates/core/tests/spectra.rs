mod common;

use krein_core::spectral::RealityVerdict;
use krein_core::{
    analyze_spectrum, build_kinetic, eigendecompose, verify_reality_theorem, classify_spectrum, Grid, Involution,
    KreinError, PhysicalConstants, SpectralTolerances,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn j_hermitian_spectra_are_conjugation_closed(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let j = Involution::block_signature(4, 4);
        let h = common::random_j_hermitian(&mut rng, &j);
        let report = analyze_spectrum(&h, &j, SpectralTolerances::default()).unwrap();
        let eigenvalues: Vec<_> = report.pairs.iter().map(|p| p.eigenvalue).collect();
        for l in &eigenvalues {
            let nearest = eigenvalues.iter().map(|m| (m - l.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-10, "{l} has no conjugate partner ({nearest:e})");
        }
        for p in &report.pairs {
            if p.eigenvalue.im.abs() > 1e-8 {
                prop_assert!(p.krein_norm.abs() < 1e-8, "{} has Krein norm {}", p.eigenvalue, p.krein_norm);
            }
        }
        let verdict = verify_reality_theorem(&report).unwrap();
        prop_assert!(verdict.holds, "{:?}", verdict.violations);
    }

    #[test]
    fn classification_is_deterministic(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let j = Involution::parity(&Grid::dirichlet(7, 1.0).unwrap());
        let h = common::random_j_hermitian(&mut rng, &j);
        let raw = eigendecompose(&h).unwrap();
        let a = classify_spectrum(&raw, &j, SpectralTolerances::default()).unwrap();
        let b = classify_spectrum(&raw, &j, SpectralTolerances::default()).unwrap();
        prop_assert_eq!(&a, &b);
        for w in a.pairs.windows(2) {
            let (x, y) = (w[0].eigenvalue, w[1].eigenvalue);
            prop_assert!(x.re < y.re || (x.re == y.re && x.im <= y.im));
        }
    }
}

#[test]
fn periodic_kinetic_spectrum_matches_dispersion() {
    for &(n, l) in &[(16usize, 1.0), (40, 2.5), (64, 3.0)] {
        let grid = Grid::periodic(n, l).unwrap();
        let k = PhysicalConstants::new(0.8, 1.3).unwrap();
        let h = grid.spacing();
        let t = build_kinetic(&grid, &k);
        let report = analyze_spectrum(&t, &Involution::parity(&grid), SpectralTolerances::default()).unwrap();
        let mut exact: Vec<f64> = (0..n)
            .map(|m| {
                let s = (std::f64::consts::PI * m as f64 / n as f64).sin();
                k.hbar * k.hbar / (2.0 * k.mass) * 4.0 / (h * h) * s * s
            })
            .collect();
        exact.sort_by(f64::total_cmp);
        let scale = exact[n - 1];
        for (p, e) in report.pairs.iter().zip(&exact) {
            assert!((p.eigenvalue.re - e).abs() < 1e-12 * scale, "{} vs {e}", p.eigenvalue);
            assert!(p.eigenvalue.im.abs() < 1e-12 * scale);
        }
    }
}

#[test]
fn reality_check_requires_hermiticity_evidence() {
    let mut rng = common::rng(11);
    let j = Involution::block_signature(2, 2);
    let h = common::random_matrix(&mut rng, 4);
    let report = analyze_spectrum(&h, &j, SpectralTolerances::default()).unwrap();
    assert!(!report.j_hermiticity.unwrap().passed);
    assert!(matches!(verify_reality_theorem(&report), Err(KreinError::Precondition(_))));

    let raw = eigendecompose(&common::random_j_hermitian(&mut rng, &j)).unwrap();
    let bare = classify_spectrum(&raw, &j, SpectralTolerances::default()).unwrap();
    assert!(matches!(verify_reality_theorem(&bare), Err(KreinError::Precondition(_))));
}

#[test]
fn reality_verdict_round_trips_through_json() {
    let mut rng = common::rng(12);
    let j = Involution::block_signature(3, 3);
    let report = analyze_spectrum(&common::random_j_hermitian(&mut rng, &j), &j, SpectralTolerances::default()).unwrap();
    let verdict = verify_reality_theorem(&report).unwrap();
    let text = serde_json::to_string(&verdict).unwrap();
    let back: RealityVerdict = serde_json::from_str(&text).unwrap();
    assert_eq!(back, verdict);
}

/// Wide-box x^2 (ix) spectrum: the upper part is extremely non-normal, with
/// pairing tolerances in the thousands. Exact conjugate partners must still
/// find each other there.
#[test]
fn badly_conditioned_partners_pair_up() {
    use krein_core::{build_hamiltonian, HamiltonianSpec, PotentialSpec};
    let grid = Grid::dirichlet(401, 8.0).unwrap();
    let h = build_hamiltonian(&HamiltonianSpec::new(
        grid,
        PhysicalConstants::default(),
        PotentialSpec::BenderFamily { epsilon: 1.0 },
    ))
    .unwrap();
    let report = analyze_spectrum(&h, &Involution::parity(&grid), SpectralTolerances::default()).unwrap();
    assert!(report.theorem_violations.is_empty(), "{:?}", report.theorem_violations);
    let sharp: Vec<_> = report.conjugate_pairs.iter().filter(|p| p.mismatch < 1e-9 && p.first != p.second).collect();
    assert!(sharp.len() >= 2);
}
