//! Seeded random instances for sweeps and property tests. Every draw flows from one
//! `ChaCha8Rng` seeded with the instance seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::combination::{compute_mu_nu, CoefficientFamily, CombinationMatrix, IndexPartition};
use crate::error::{Error, Result};
use crate::laurent::{LocalField, LocalFieldElement};
use crate::model::{ModelWindow, SampledFunction};
use crate::wavepacket::{generate_system, Label, WavePacketParams, WavePacketSystem};

pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Field and window shapes `(p, c, M, N)` with at most 16 grid points.
pub const SMALL_SHAPES: &[(u32, u32, u32, u32)] = &[
    (2, 1, 1, 1),
    (2, 1, 1, 2),
    (2, 1, 2, 1),
    (2, 1, 2, 2),
    (2, 1, 1, 3),
    (3, 1, 1, 1),
    (2, 2, 1, 1),
];

/// Independent standard complex Gaussian values, normalized to unit norm.
pub fn gaussian_function(window: &ModelWindow, rng: &mut impl Rng) -> SampledFunction {
    loop {
        let values: Vec<Complex64> = (0..window.dim())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let f = SampledFunction::new(window.clone(), values).expect("sized to window");
        let n = f.norm();
        if n > 0.0 {
            return f.scale(Complex64::new(1.0 / n, 0.0));
        }
    }
}

/// Log-uniform draw from `[lo, hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// Magnitude log-uniform in `[0.1, 10]`, uniform phase.
pub fn random_coefficient(rng: &mut impl Rng) -> Complex64 {
    let r = log_uniform(rng, 0.1, 10.0);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, theta)
}

pub fn random_coefficients(labels: &[Label], rng: &mut impl Rng) -> CoefficientFamily {
    CoefficientFamily::new(labels.iter().map(|l| (*l, random_coefficient(rng))).collect())
}

/// Positive reals log-uniform in `[0.1, 10]`.
pub fn random_positive_alphas(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| log_uniform(rng, 0.1, 10.0)).collect()
}

/// Shuffle the labels and cut them into blocks of 1 to `max_block` members.
pub fn random_partition(labels: &[Label], max_block: usize, rng: &mut impl Rng) -> IndexPartition {
    let mut order = labels.to_vec();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut blocks = Vec::new();
    let mut rest = order.as_slice();
    let mut b = 0u64;
    while !rest.is_empty() {
        let size = rng.random_range(1..=max_block.max(1)).min(rest.len());
        blocks.push((Label::new(0, b, 0), rest[..size].to_vec()));
        rest = &rest[size..];
        b += 1;
    }
    IndexPartition::new(blocks, labels).expect("cut from the label set")
}

fn digits_needed(count: u64, q: u64) -> i32 {
    let mut d = 0;
    let mut span = 1u64;
    while span < count {
        span = span.saturating_mul(q);
        d += 1;
    }
    d
}

fn random_monomial(field: &LocalField, exponent: i32, rng: &mut impl Rng) -> Result<LocalFieldElement> {
    let code = rng.random_range(1..field.q()) as u16;
    field.monomial(code, exponent)
}

/// Grid-exact parameters on `ambient` with `dim <= K <= 2 dim` packets, or `None` if the
/// draw cannot meet the count bounds.
pub fn random_params(ambient: &ModelWindow, rng: &mut impl Rng) -> Result<Option<WavePacketParams>> {
    let dim = ambient.dim() as u64;
    let q = ambient.q() as u64;
    let field = ambient.field();
    let spread = ambient.m().min(ambient.n()) as i32;
    let (j_min, j_max) = match rng.random_range(0..3) {
        0 => (0, 0),
        1 if spread >= 1 => (-1, 0),
        2 if spread >= 1 => (0, 1),
        _ => (0, 0),
    };
    let j_count = (j_max - j_min + 1) as u64;
    let m0 = ambient.m() as i32 + j_min;
    let n0 = ambient.n() as i32 - j_max;
    let k_cap = (q.pow((m0 + n0) as u32)).min(2 * dim);
    let k_count = rng.random_range(1..=k_cap);
    let lo = dim.div_ceil(j_count * k_count);
    let hi = (2 * dim) / (j_count * k_count);
    if lo > hi {
        return Ok(None);
    }
    let m_count = rng.random_range(lo..=hi);
    let dk = digits_needed(k_count, q);
    let dm = digits_needed(m_count, q);
    if dk > m0 + n0 {
        return Ok(None);
    }
    let ea = rng.random_range(dk - m0..=n0);
    let eb = dm - n0 + rng.random_range(0..=1);
    Ok(Some(WavePacketParams {
        a: random_monomial(field, ea, rng)?,
        b: random_monomial(field, eb, rng)?,
        j_min,
        j_max,
        k_count,
        m_count,
    }))
}

fn shape_window(shape: (u32, u32, u32, u32)) -> Result<ModelWindow> {
    let (p, c, m, n) = shape;
    ModelWindow::new(LocalField::standard(p, c)?, m, n)
}

/// A random window from `shapes` and random admissible parameters for it.
pub fn random_setup(
    shapes: &[(u32, u32, u32, u32)],
    rng: &mut impl Rng,
) -> Result<(ModelWindow, WavePacketParams)> {
    for _ in 0..1000 {
        let w = shape_window(shapes[rng.random_range(0..shapes.len())])?;
        if let Some(params) = random_params(&w, rng)? {
            return Ok((w, params));
        }
    }
    Err(Error::InvalidArgument("no admissible parameters found".into()))
}

/// Random generator on the source window of `params`, then the system.
pub fn random_system_on(
    ambient: &ModelWindow,
    params: &WavePacketParams,
    rng: &mut impl Rng,
) -> Result<WavePacketSystem> {
    let source = params.source_window(ambient)?;
    let psi = gaussian_function(&source, rng);
    generate_system(&psi, params, ambient)
}

pub fn random_system(shapes: &[(u32, u32, u32, u32)], rng: &mut impl Rng) -> Result<WavePacketSystem> {
    let (w, params) = random_setup(shapes, rng)?;
    random_system_on(&w, &params, rng)
}

/// Square `U = diag(d) + E` with `d` in `[0.5, 2]` and a small complex `E`, redrawn with a
/// smaller perturbation until `mu > 0`.
pub fn random_admissible_matrix(labels: &[Label], rng: &mut impl Rng) -> CombinationMatrix {
    let k = labels.len();
    let rows: Vec<Label> = (0..k as u64).map(|s| Label::new(0, s, 0)).collect();
    let mut scale = 1.0 / k as f64;
    loop {
        let d: Vec<f64> = (0..k).map(|_| log_uniform(rng, 0.5, 2.0)).collect();
        let e = DMatrix::from_fn(k, k, |r, c| {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
            if r == c {
                z + d[r]
            } else {
                z
            }
        });
        let u = CombinationMatrix::new(rows.clone(), labels.to_vec(), e).expect("shapes agree");
        if compute_mu_nu(&u).0 > 0.0 {
            return u;
        }
        scale *= 0.5;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setups_are_admissible_and_sized() {
        let mut rng = instance_rng(7);
        for _ in 0..200 {
            let sys = random_system(SMALL_SHAPES, &mut rng).unwrap();
            let dim = sys.ambient.dim();
            assert!(dim <= 16);
            assert!(sys.len() >= dim && sys.len() <= 2 * dim, "{} vs {dim}", sys.len());
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let a = random_system(SMALL_SHAPES, &mut instance_rng(99)).unwrap();
        let b = random_system(SMALL_SHAPES, &mut instance_rng(99)).unwrap();
        assert_eq!(a.family, b.family);
    }

    #[test]
    fn admissible_matrices_have_positive_mu() {
        let mut rng = instance_rng(8);
        let labels: Vec<Label> = (0..12).map(|k| Label::new(0, k, 0)).collect();
        for _ in 0..20 {
            let u = random_admissible_matrix(&labels, &mut rng);
            let (mu, nu) = compute_mu_nu(&u);
            assert!(mu > 0.0 && nu >= mu);
        }
    }

    #[test]
    fn partitions_respect_block_cap() {
        let mut rng = instance_rng(9);
        let labels: Vec<Label> = (0..20).map(|k| Label::new(0, k, 0)).collect();
        let p = random_partition(&labels, 3, &mut rng);
        assert!(p.max_block_size() <= 3);
        let total: usize = p.blocks().iter().map(|(_, m)| m.len()).sum();
        assert_eq!(total, 20);
    }
}
