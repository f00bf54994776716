//! Spectral computations on families of sampled functions.
//!
//! A family `g_1, ..., g_K` on a window with point weight `w` is represented by its
//! synthesis matrix `V = sqrt(w) [g_1 ... g_K]` (grid × K). Then the frame operator is
//! `S = V V*`, the Gram matrix is `V* V`, and both share their nonzero spectrum.
//! The dense Hermitian eigensolver is the reference; power and inverse iteration are
//! the iterative path checked against it.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SampledFunction;

/// Singular values below `RANK_CUT * sigma_max` are treated as zero.
pub const RANK_CUT: f64 = 1e-10;

pub fn synthesis_matrix(vectors: &[SampledFunction]) -> Result<DMatrix<Complex64>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Degenerate("empty family".into()))?;
    let window = first.window();
    if vectors.iter().any(|v| v.window() != window) {
        return Err(Error::WindowMismatch);
    }
    let s = window.weight().sqrt();
    Ok(DMatrix::from_fn(window.dim(), vectors.len(), |r, c| {
        vectors[c].values()[r] * s
    }))
}

/// Eigenvalues of a Hermitian matrix in ascending order (dense reference solver).
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn max_hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Orthonormal basis of the column space of a synthesis matrix.
#[derive(Debug, Clone)]
pub struct RangeBasis {
    /// grid × rank, orthonormal columns
    pub basis: DMatrix<Complex64>,
    /// retained singular values, descending
    pub singular_values: Vec<f64>,
}

impl RangeBasis {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }
}

pub fn range_basis(v: &DMatrix<Complex64>) -> RangeBasis {
    let svd = v.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = order.first().map(|&i| svd.singular_values[i]).unwrap_or(0.0);
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > RANK_CUT * smax)
        .collect();
    let basis = DMatrix::from_fn(v.nrows(), keep.len(), |r, c| u[(r, keep[c])]);
    RangeBasis {
        basis,
        singular_values: keep.iter().map(|&i| svd.singular_values[i]).collect(),
    }
}

/// Smallest and largest eigenvalue of `X X*` restricted to the range of `basis`,
/// for a synthesis matrix `x`: the frame bounds of that family on the subspace.
pub fn restricted_bounds(basis: &RangeBasis, x: &DMatrix<Complex64>) -> (f64, f64) {
    if basis.rank() == 0 {
        return (0.0, 0.0);
    }
    let proj = basis.basis.adjoint() * x;
    let c = &proj * proj.adjoint();
    let ev = hermitian_eigenvalues(&c);
    (ev[0], ev[ev.len() - 1])
}

/// Largest `lambda` with `X X* >= lambda * S_ref` on the range of `S_ref`, where
/// `S_ref = U diag(sigma^2) U*` is described by `basis`. Computed as the smallest
/// eigenvalue of `D^-1 U* X X* U D^-1`, `D = diag(sigma)`.
pub fn relative_lower_bound(basis: &RangeBasis, x: &DMatrix<Complex64>) -> f64 {
    if basis.rank() == 0 {
        return 0.0;
    }
    let mut proj = basis.basis.adjoint() * x;
    for (r, s) in basis.singular_values.iter().enumerate() {
        let inv = 1.0 / s;
        for c in 0..proj.ncols() {
            proj[(r, c)] *= inv;
        }
    }
    let h = &proj * proj.adjoint();
    hermitian_eigenvalues(&h)[0]
}

/// Outcome of an iterative eigenvalue estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeEstimate {
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn start_vector(n: usize) -> DVector<Complex64> {
    // fixed, dense, non-symmetric start so no eigenvector is missed by construction
    let v = DVector::from_fn(n, |i, _| {
        let t = (i as f64 + 1.0) * 0.618_033_988_749_895;
        Complex64::new(1.0 + (t * 7.0).sin() * 0.5, (t * 3.0).cos() * 0.5)
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

fn rayleigh(apply: &dyn Fn(&DVector<Complex64>) -> DVector<Complex64>, x: &DVector<Complex64>) -> (f64, DVector<Complex64>) {
    let y = apply(x);
    let lambda = x.dotc(&y).re;
    (lambda, y)
}

/// Power iteration for the largest eigenvalue of a Hermitian PSD operator given by
/// `apply`. Stops when the residual `|A x - lambda x|` falls below `tol * lambda`.
pub fn power_iteration(
    apply: impl Fn(&DVector<Complex64>) -> DVector<Complex64>,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> IterativeEstimate {
    let mut x = start_vector(n);
    let mut last = IterativeEstimate {
        value: 0.0,
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
    };
    for it in 1..=max_iter {
        let (lambda, y) = rayleigh(&apply, &x);
        let residual = (&y - &x * Complex64::new(lambda, 0.0)).norm();
        last = IterativeEstimate {
            value: lambda,
            iterations: it,
            residual,
            converged: residual <= tol * lambda.abs().max(f64::MIN_POSITIVE),
        };
        let ny = y.norm();
        if last.converged || ny == 0.0 {
            last.converged = true;
            break;
        }
        x = y / Complex64::new(ny, 0.0);
    }
    last
}

/// Inverse iteration for the smallest eigenvalue of a Hermitian PSD matrix, using a
/// Cholesky factor of `m + shift I` (`shift > 0` keeps singular matrices factorable).
/// The estimate is the Rayleigh quotient of `m` itself.
pub fn inverse_iteration(
    m: &DMatrix<Complex64>,
    shift: f64,
    tol: f64,
    scale: f64,
    max_iter: usize,
) -> Result<IterativeEstimate> {
    let n = m.nrows();
    let shifted = m + DMatrix::<Complex64>::identity(n, n) * Complex64::new(shift, 0.0);
    let chol = Cholesky::new(shifted)
        .ok_or_else(|| Error::Precondition("shifted operator is not positive definite".into()))?;
    let apply = |v: &DVector<Complex64>| m * v;
    let mut x = start_vector(n);
    let mut last = IterativeEstimate {
        value: 0.0,
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
    };
    for it in 1..=max_iter {
        let y = chol.solve(&x);
        let ny = y.norm();
        x = y / Complex64::new(ny, 0.0);
        let (lambda, mx) = rayleigh(&apply, &x);
        let residual = (&mx - &x * Complex64::new(lambda, 0.0)).norm();
        last = IterativeEstimate {
            value: lambda,
            iterations: it,
            residual,
            converged: residual <= tol * scale,
        };
        if last.converged {
            break;
        }
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
        DMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn dense_eigenvalues_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        assert_eq!(hermitian_eigenvalues(&m), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn iterative_estimates_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (rows, cols) in [(8, 12), (16, 16), (20, 40)] {
            let v = random_matrix(rows, cols, &mut rng);
            let s = &v * v.adjoint();
            let ev = hermitian_eigenvalues(&s);
            let top = power_iteration(|x| &s * x, rows, 1e-12, 100_000);
            assert!(top.converged);
            assert!((top.value - ev[rows - 1]).abs() < 1e-8, "{top:?} vs {}", ev[rows - 1]);
            let bottom = inverse_iteration(&s, 1e-10 * ev[rows - 1], 1e-12, ev[rows - 1], 100_000).unwrap();
            assert!((bottom.value - ev[0]).abs() < 1e-8, "{bottom:?} vs {}", ev[0]);
        }
    }

    #[test]
    fn range_basis_drops_null_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let a = random_matrix(10, 3, &mut rng);
        // six columns spanning a 3-dimensional space
        let mut v = DMatrix::zeros(10, 6);
        v.columns_mut(0, 3).copy_from(&a);
        v.columns_mut(3, 3).copy_from(&(&a * Complex64::new(0.0, 2.0)));
        let rb = range_basis(&v);
        assert_eq!(rb.rank(), 3);
        let eye = rb.basis.adjoint() * &rb.basis;
        assert!((eye - DMatrix::identity(3, 3)).norm() < 1e-12);
        // the family is its own reference: lambda = 1
        assert!((relative_lower_bound(&rb, &v) - 1.0).abs() < 1e-10);
        let doubled = &v * Complex64::new(2.0, 0.0);
        assert!((relative_lower_bound(&rb, &doubled) - 4.0).abs() < 1e-10);
    }
}
