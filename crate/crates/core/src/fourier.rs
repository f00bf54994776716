//! Fourier transform on the quotient grids.
//!
//! `f^(g) = q^-N sum_x f(x) conj(chi(g x))` maps window `(M, N)` to its dual `(N, M)`.
//! The coefficient of `p^-1` in `g x` only pairs the grid digit of `x` at exponent `k`
//! with the digit of `g` at exponent `-1-k`, so the transform factors into one q-point
//! kernel per digit followed by a reversal of the digit order. [`fourier`] uses that
//! factorization; [`fourier_reference`] is the direct character sum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laurent::root_of_unity;
use crate::model::{ModelWindow, SampledFunction};

fn check_products(w: &ModelWindow) -> Result<()> {
    // products of points of (M, N) and (N, M) span exponents [-(M+N), M+N-2]
    let span = w.digit_count() as i32;
    let ew = w.field().window();
    if ew.contains(-span, span - 2) {
        Ok(())
    } else {
        Err(Error::Window {
            lo: ew.lo,
            hi: ew.hi,
            need_lo: (-span).min(ew.lo),
            need_hi: (span - 2).max(ew.hi),
        })
    }
}

/// Direct O(n²) character sum; the reference the fast path is checked against.
pub fn fourier_reference(f: &SampledFunction) -> Result<SampledFunction> {
    transform_reference(f, -1)
}

pub fn inverse_fourier_reference(g: &SampledFunction) -> Result<SampledFunction> {
    transform_reference(g, 1)
}

fn transform_reference(f: &SampledFunction, sign: i64) -> Result<SampledFunction> {
    let w = f.window();
    check_products(w)?;
    let dual = w.dual();
    let xs = w.points();
    let p = w.field().p();
    let scale = w.weight();
    let mut out = Vec::with_capacity(dual.dim());
    for gi in 0..dual.dim() {
        let g = dual.point(gi);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, v) in xs.iter().zip(f.values()) {
            let e = g.character_at(x)?.exponent() as i64;
            acc += v * root_of_unity(p, (sign * e).rem_euclid(p as i64) as u32);
        }
        out.push(acc * scale);
    }
    SampledFunction::new(dual, out)
}

/// Fast transform: one q×q kernel per digit axis, then digit reversal.
pub fn fourier(f: &SampledFunction) -> Result<SampledFunction> {
    transform_fast(f, -1)
}

/// Inverse of [`fourier`]: `f(x) = q^-M sum_g f^(g) chi(g x)`.
pub fn inverse_fourier(g: &SampledFunction) -> Result<SampledFunction> {
    transform_fast(g, 1)
}

fn transform_fast(f: &SampledFunction, sign: i64) -> Result<SampledFunction> {
    let w = f.window();
    check_products(w)?;
    let spec = w.field().spec();
    let p = spec.p();
    let q = spec.q() as usize;
    let kernel: Vec<Complex64> = (0..q)
        .flat_map(|s| {
            (0..q).map(move |t| {
                let e = spec.pairing(s as u16, t as u16) as i64;
                root_of_unity(p, (sign * e).rem_euclid(p as i64) as u32)
            })
        })
        .collect();

    let mut data = f.values().to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); q];
    let dim = w.dim();
    let mut stride = 1usize;
    for _ in 0..w.digit_count() {
        let block = stride * q;
        for base in (0..dim).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (s, slot) in scratch.iter_mut().enumerate() {
                    let row = &kernel[s * q..(s + 1) * q];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (t, k) in row.iter().enumerate() {
                        acc += k * data[start + t * stride];
                    }
                    *slot = acc;
                }
                for (s, v) in scratch.iter().enumerate() {
                    data[start + s * stride] = *v;
                }
            }
        }
        stride = block;
    }

    let dual = w.dual();
    let scale = w.weight();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (i, v) in data.into_iter().enumerate() {
        let mut digits = w.digits(i);
        digits.reverse();
        out[dual.index_of_digits(&digits)] = v * scale;
    }
    SampledFunction::new(dual, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::LocalField;
    use crate::model::{dilate, inner_product, translate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn window(p: u32, c: u32, m: u32, n: u32) -> ModelWindow {
        ModelWindow::new(LocalField::standard(p, c).unwrap(), m, n).unwrap()
    }

    fn random_fn(w: &ModelWindow, rng: &mut impl Rng) -> SampledFunction {
        let values = (0..w.dim())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        SampledFunction::new(w.clone(), values).unwrap()
    }

    #[test]
    fn indicator_of_integers_is_self_dual() {
        for (p, c, m, n) in [(2, 1, 1, 1), (3, 1, 1, 2), (2, 2, 2, 1)] {
            let w = window(p, c, m, n);
            let one = SampledFunction::indicator_ball(w.clone(), 0);
            let expected = SampledFunction::indicator_ball(w.dual(), 0);
            for hat in [fourier(&one).unwrap(), fourier_reference(&one).unwrap()] {
                assert!(hat.max_abs_diff(&expected).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn fast_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (p, c, m, n) in [(2, 1, 2, 2), (3, 1, 1, 2), (2, 2, 1, 1), (3, 2, 1, 1), (5, 1, 0, 2)] {
            let w = window(p, c, m, n);
            let f = random_fn(&w, &mut rng);
            let a = fourier(&f).unwrap();
            let b = fourier_reference(&f).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
            let ia = inverse_fourier(&a).unwrap();
            let ib = inverse_fourier_reference(&a).unwrap();
            assert!(ia.max_abs_diff(&ib).unwrap() < 1e-12);
            assert!(ia.max_abs_diff(&f).unwrap() < 1e-12);
        }
    }

    #[test]
    fn parseval_and_double_transform_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let w = window(2, 2, 1, 2);
        for _ in 0..10 {
            let f = random_fn(&w, &mut rng);
            let g = random_fn(&w, &mut rng);
            let fh = fourier(&f).unwrap();
            let gh = fourier(&g).unwrap();
            assert!((fh.norm() - f.norm()).abs() < 1e-10);
            let d = inner_product(&f, &g).unwrap() - inner_product(&fh, &gh).unwrap();
            assert!(d.norm() < 1e-10);
            let twice = fourier(&fh).unwrap();
            for i in 0..w.dim() {
                let minus = w.index_of(&w.point(i).neg()).unwrap();
                assert!((twice.values()[i] - f.values()[minus]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn translation_becomes_modulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let w = window(3, 1, 1, 1);
        let f = random_fn(&w, &mut rng);
        let fh = fourier(&f).unwrap();
        for ai in 0..w.dim() {
            let a = w.point(ai);
            let lhs = fourier(&translate(&f, &a).unwrap()).unwrap();
            let dual = lhs.window().clone();
            for gi in 0..dual.dim() {
                let chi = a.character_at(&dual.point(gi)).unwrap().conj().to_complex();
                assert!((lhs.values()[gi] - chi * fh.values()[gi]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dilation_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let w = window(2, 2, 2, 1);
        let f = random_fn(&w, &mut rng);
        let fh = fourier(&f).unwrap();
        let lhs = fourier(&dilate(&f, 1).unwrap()).unwrap();
        let q = 4f64;
        let pr = w.field().prime().unwrap();
        for gi in 0..lhs.window().dim() {
            let g = lhs.window().point(gi);
            // f^ is constant on cosets of p^M D, so reduce p*g there
            let pg = pr.mul(&g).unwrap().truncate_above(fh.window().n() as i32);
            let idx = fh.window().index_of(&pg).unwrap();
            let rhs = fh.values()[idx] / q.sqrt();
            assert!((lhs.values()[gi] - rhs).norm() < 1e-10);
        }
    }
}
