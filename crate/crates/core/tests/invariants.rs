use num_complex::Complex64;
use proptest::prelude::*;

use lfwave::combination::{build_combined, combine_general, CombinationMatrix};
use lfwave::fourier::{fourier, inverse_fourier};
use lfwave::io::{function_csv, parse_function_csv};
use lfwave::laurent::{LocalField, LocalFieldElement};
use lfwave::model::{inner_product, ModelWindow, SampledFunction};
use lfwave::random::{instance_rng, random_coefficients, random_partition, random_system, SMALL_SHAPES};
use lfwave::wavepacket::{frame_bounds, frame_sum, DEFAULT_REL_TOL};

const FIELDS: [(u32, u32); 4] = [(2, 1), (3, 1), (2, 2), (5, 1)];

fn element(field: &LocalField, lo: i32, codes: &[u16]) -> LocalFieldElement {
    let q = field.q() as u16;
    field.from_codes(lo, codes.iter().map(|c| c % q).collect()).unwrap()
}

fn function(w: &ModelWindow, seed: u64) -> SampledFunction {
    lfwave::random::gaussian_function(w, &mut instance_rng(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laurent_arithmetic_is_a_commutative_ring(
        f in 0..FIELDS.len(),
        (la, lb, lc) in (-5..5i32, -5..5i32, -5..5i32),
        a in prop::collection::vec(0u16..25, 0..5),
        b in prop::collection::vec(0u16..25, 0..5),
        c in prop::collection::vec(0u16..25, 0..5),
    ) {
        let (p, deg) = FIELDS[f];
        let field = LocalField::standard(p, deg).unwrap();
        let (x, y, z) = (element(&field, la, &a), element(&field, lb, &b), element(&field, lc, &c));
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(x.sub(&x).unwrap(), field.zero());
        let lhs = x.mul(&y.add(&z).unwrap()).unwrap();
        let rhs = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(x.add(&y).unwrap().character(), x.character().mul(y.character()));
    }

    #[test]
    fn fourier_round_trip_is_isometric(f in 0..FIELDS.len(), m in 0..3u32, n in 0..3u32, seed in any::<u64>()) {
        let (p, c) = FIELDS[f];
        let w = ModelWindow::new(LocalField::standard(p, c).unwrap(), m, n).unwrap();
        let g = function(&w, seed);
        let back = inverse_fourier(&fourier(&g).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&g).unwrap() < 1e-10);
        prop_assert!((fourier(&g).unwrap().norm() - g.norm()).abs() < 1e-10);
    }

    #[test]
    fn function_csv_round_trips_exactly(f in 0..FIELDS.len(), m in 0..3u32, n in 0..3u32, seed in any::<u64>()) {
        let (p, c) = FIELDS[f];
        let w = ModelWindow::new(LocalField::standard(p, c).unwrap(), m, n).unwrap();
        let g = function(&w, seed);
        let parsed = parse_function_csv(&function_csv(&g).unwrap(), w).unwrap();
        prop_assert_eq!(parsed.values(), g.values());
    }

    #[test]
    fn frame_sum_lies_between_the_bounds(seed in any::<u64>()) {
        let mut rng = instance_rng(seed);
        let sys = random_system(SMALL_SHAPES, &mut rng).unwrap();
        let fb = frame_bounds(sys.vectors(), DEFAULT_REL_TOL).unwrap();
        let f = function(&sys.ambient, seed ^ 1);
        let e = f.norm_sqr();
        let s = frame_sum(sys.vectors(), &f).unwrap();
        let slack = 1e-9 * fb.upper.max(1.0) * e;
        prop_assert!(s >= fb.lower * e - slack && s <= fb.upper * e + slack);
    }

    #[test]
    fn scaling_a_family_scales_its_bounds(seed in any::<u64>(), re in 0.1..3.0f64, im in -3.0..3.0f64) {
        let mut rng = instance_rng(seed);
        let sys = random_system(SMALL_SHAPES, &mut rng).unwrap();
        let c = Complex64::new(re, im);
        let scaled: Vec<_> = sys.vectors().iter().map(|v| v.scale(c)).collect();
        let (a, b) = (frame_bounds(sys.vectors(), DEFAULT_REL_TOL).unwrap(), frame_bounds(&scaled, DEFAULT_REL_TOL).unwrap());
        let k = c.norm_sqr();
        prop_assert!((b.upper - k * a.upper).abs() <= 1e-9 * k * a.upper.max(1.0));
        prop_assert!((b.lower - k * a.lower).abs() <= 1e-9 * k * a.upper.max(1.0));
    }

    #[test]
    fn partition_combination_matches_its_block_matrix(seed in any::<u64>(), max_block in 1..4usize) {
        let mut rng = instance_rng(seed);
        let sys = random_system(SMALL_SHAPES, &mut rng).unwrap();
        let labels = sys.labels();
        let part = random_partition(labels, max_block, &mut rng);
        let coeffs = random_coefficients(labels, &mut rng);
        let direct = build_combined(&sys.family, &part, &coeffs).unwrap();
        let u = CombinationMatrix::from_partition(&part, &coeffs, labels).unwrap();
        let general = combine_general(&u, &sys.family).unwrap();
        prop_assert_eq!(&direct.labels, &general.labels);
        for (x, y) in direct.vectors.iter().zip(&general.vectors) {
            prop_assert_eq!(x.values(), y.values());
        }
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(f in 0..FIELDS.len(), seed in any::<u64>()) {
        let (p, c) = FIELDS[f];
        let w = ModelWindow::new(LocalField::standard(p, c).unwrap(), 1, 1).unwrap();
        let (g, h) = (function(&w, seed), function(&w, seed.wrapping_add(1)));
        let d = inner_product(&g, &h).unwrap() - inner_product(&h, &g).unwrap().conj();
        prop_assert!(d.norm() < 1e-12);
    }
}
