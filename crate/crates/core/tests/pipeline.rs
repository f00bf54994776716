use num_complex::Complex64;

use lfwave::checks::{check_finite_sum_sufficient, ids, SumConditionVariant, Tolerances};
use lfwave::combination::finite_sum_system;
use lfwave::io::{read_function, read_matrix, write_function, write_matrix, FileKind};
use lfwave::laurent::LocalField;
use lfwave::model::{ModelWindow, SampledFunction};
use lfwave::sweep::{property_sweep, SweepCheck};
use lfwave::wavepacket::{frame_bounds, generate_system, gram_matrix, WavePacketParams, DEFAULT_REL_TOL};

fn orthonormal_setup(p: u32, c: u32) -> (ModelWindow, WavePacketParams) {
    let field = LocalField::standard(p, c).unwrap();
    let w = ModelWindow::new(field.clone(), 1, 1).unwrap();
    let q = field.q() as u64;
    let params = WavePacketParams { a: field.one(), b: field.one(), j_min: 0, j_max: 0, k_count: q, m_count: q };
    (w, params)
}

#[test]
fn indicator_system_is_an_orthonormal_basis() {
    for (p, c) in [(2, 1), (3, 1), (2, 2)] {
        let (w, params) = orthonormal_setup(p, c);
        let sys = generate_system(&SampledFunction::indicator_ball(w.clone(), 0), &params, &w).unwrap();
        assert_eq!(sys.len(), w.dim());
        let g = gram_matrix(sys.vectors()).unwrap();
        let defect = (g - nalgebra::DMatrix::<Complex64>::identity(sys.len(), sys.len())).norm();
        assert!(defect < 1e-12, "q={}: gram defect {defect}", w.q());
        let fb = frame_bounds(sys.vectors(), DEFAULT_REL_TOL).unwrap();
        assert!((fb.lower - 1.0).abs() < 1e-12 && (fb.upper - 1.0).abs() < 1e-12);
    }
}

#[test]
fn generated_system_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (w, params) = orthonormal_setup(3, 1);
    let psi = lfwave::random::gaussian_function(&w, &mut lfwave::random::instance_rng(8));
    let path = dir.path().join("psi.csv");
    write_function(&path, &psi).unwrap();
    let loaded = read_function(&path).unwrap();
    let sys = generate_system(&loaded, &params, &w).unwrap();
    let gram = gram_matrix(sys.vectors()).unwrap();
    let labels: Vec<String> = sys.labels().iter().map(|l| l.to_string()).collect();
    let gpath = dir.path().join("gram.csv");
    write_matrix(&gpath, &gram, FileKind::Gram, &w, labels.clone()).unwrap();
    let (back, meta) = read_matrix(&gpath).unwrap();
    assert_eq!(back, gram);
    assert_eq!(meta.labels, labels);
}

#[test]
fn sum_of_two_bases_has_the_closed_form_lower_bound() {
    let (w, params) = orthonormal_setup(2, 1);
    let g = SampledFunction::indicator_ball(w.clone(), 0);
    let systems = vec![
        generate_system(&g, &params, &w).unwrap(),
        generate_system(&g, &params, &w).unwrap(),
    ];
    for eps in [0.2, 0.7] {
        let alphas = [Complex64::new(1.0, 0.0), Complex64::new(eps, 0.0)];
        let fam = finite_sum_system(&systems, &alphas).unwrap();
        let fb = frame_bounds(&fam.vectors, DEFAULT_REL_TOL).unwrap();
        assert!((fb.lower - (1.0 + eps) * (1.0 + eps)).abs() < 1e-12);
        let refs: Vec<_> = systems.iter().map(|s| &s.family).collect();
        let corrected = check_finite_sum_sufficient(
            &refs,
            &[1.0, eps],
            0,
            SumConditionVariant::Corrected,
            Tolerances::default(),
        )
        .unwrap();
        assert!(corrected.verdict_condition && corrected.verdict_frame && corrected.consistent);
    }
}

#[test]
fn property_sweeps_are_reproducible_from_their_seed() {
    let check = || SweepCheck::new(ids::GRAM_GERSHGORIN).unwrap();
    let (a, sa) = property_sweep(check(), 300, 12, Tolerances::default()).unwrap();
    let (b, sb) = property_sweep(check(), 300, 12, Tolerances::default()).unwrap();
    assert_eq!(sa.violations, 0);
    assert_eq!(sa.instances, sb.instances);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.actual_bounds, y.actual_bounds);
        assert_eq!(x.verdict_condition, y.verdict_condition);
    }
}
