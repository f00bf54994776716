//! Finite model of L²(K): complex functions on the quotient grid
//! `G(M, N) = p^-M D / p^N D` with point weight `q^-N`.
//!
//! Grid points are the Laurent polynomials with exponents in `[-M, N-1]`. The point
//! with coefficient codes `c_0, ..., c_{M+N-1}` (code `c_d` at exponent `-M + d`) has
//! index `sum c_d q^d`: mixed radix, coefficient of `p^-M` fastest. This enumeration is
//! version 1 of the on-disk layout.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laurent::{root_of_unity, LocalField, LocalFieldElement};

pub const ENUMERATION_VERSION: u32 = 1;

/// Largest supported grid dimension.
pub const MAX_DIM: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelWindow {
    field: LocalField,
    m: u32,
    n: u32,
    dim: usize,
}

impl ModelWindow {
    pub fn new(field: LocalField, m: u32, n: u32) -> Result<Self> {
        let digits = m as u64 + n as u64;
        let dim = (field.q() as u128).checked_pow(digits as u32);
        let dim = match dim {
            Some(d) if d <= MAX_DIM as u128 => d as usize,
            _ => {
                return Err(Error::InvalidWindow(format!(
                    "window (M={m}, N={n}) over GF({}) exceeds {MAX_DIM} points",
                    field.q()
                )))
            }
        };
        let w = field.window();
        if !w.contains(-(m as i32), n as i32 - 1) {
            return Err(Error::InvalidWindow(format!(
                "grid exponents [{}, {}] exceed the exponent window [{}, {}]",
                -(m as i32),
                n as i32 - 1,
                w.lo,
                w.hi
            )));
        }
        Ok(Self { field, m, n, dim })
    }

    /// Checked constructor from signed sizes (negative sizes are rejected).
    pub fn from_signed(field: LocalField, m: i64, n: i64) -> Result<Self> {
        if m < 0 || n < 0 {
            return Err(Error::InvalidWindow(format!(
                "window sizes must be nonnegative, got (M={m}, N={n})"
            )));
        }
        let m = u32::try_from(m).map_err(|_| Error::InvalidWindow("M too large".into()))?;
        let n = u32::try_from(n).map_err(|_| Error::InvalidWindow("N too large".into()))?;
        Self::new(field, m, n)
    }

    pub fn field(&self) -> &LocalField {
        &self.field
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn digit_count(&self) -> usize {
        (self.m + self.n) as usize
    }

    /// Haar weight of one grid point, `q^-N`.
    pub fn weight(&self) -> f64 {
        (self.q() as f64).powi(-(self.n as i32))
    }

    /// Window of the Fourier transform: `(N, M)`.
    pub fn dual(&self) -> ModelWindow {
        ModelWindow {
            field: self.field.clone(),
            m: self.n,
            n: self.m,
            dim: self.dim,
        }
    }

    /// Lowest exponent carried by the grid.
    pub fn lowest_exponent(&self) -> i32 {
        -(self.m as i32)
    }

    pub fn contains_window(&self, other: &ModelWindow) -> bool {
        self.field == other.field && self.m >= other.m && self.n >= other.n
    }

    pub fn digits(&self, mut index: usize) -> Vec<u16> {
        let q = self.q() as usize;
        (0..self.digit_count())
            .map(|_| {
                let d = (index % q) as u16;
                index /= q;
                d
            })
            .collect()
    }

    pub fn index_of_digits(&self, digits: &[u16]) -> usize {
        let q = self.q() as usize;
        digits
            .iter()
            .rev()
            .fold(0usize, |acc, &d| acc * q + d as usize)
    }

    pub fn point(&self, index: usize) -> LocalFieldElement {
        self.field
            .from_codes(self.lowest_exponent(), self.digits(index))
            .expect("grid points fit the exponent window")
    }

    pub fn points(&self) -> Vec<LocalFieldElement> {
        (0..self.dim).map(|i| self.point(i)).collect()
    }

    /// Digits of a grid-exact element: no terms below `-M` or at/above `N`.
    pub fn element_digits(&self, x: &LocalFieldElement) -> Result<Vec<u16>> {
        if x.field() != &self.field {
            return Err(Error::FieldMismatch);
        }
        if !x.is_zero() && (x.lo() < self.lowest_exponent() || x.hi() >= self.n as i32) {
            return Err(self.exactness_error(x));
        }
        let lo = self.lowest_exponent();
        Ok((0..self.digit_count())
            .map(|d| x.code_at(lo + d as i32))
            .collect())
    }

    pub fn index_of(&self, x: &LocalFieldElement) -> Result<usize> {
        Ok(self.index_of_digits(&self.element_digits(x)?))
    }

    pub(crate) fn exactness_error(&self, x: &LocalFieldElement) -> Error {
        Error::GridExactness {
            element: x.to_string(),
            m: self.m,
            n: self.n,
        }
    }
}

/// A complex function on a model window, values indexed by the grid enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    window: ModelWindow,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(window: ModelWindow, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != window.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                window.dim(),
                values.len()
            )));
        }
        Ok(Self { window, values })
    }

    pub fn zeros(window: ModelWindow) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); window.dim()];
        Self { window, values }
    }

    pub fn from_fn(window: ModelWindow, f: impl Fn(&LocalFieldElement) -> Complex64) -> Self {
        let values = (0..window.dim()).map(|i| f(&window.point(i))).collect();
        Self { window, values }
    }

    /// Indicator of the ball `p^k D` (all of the grid when `k <= -M`).
    pub fn indicator_ball(window: ModelWindow, k: i32) -> Self {
        let lo = window.lowest_exponent();
        let values = (0..window.dim())
            .map(|i| {
                let inside = window
                    .digits(i)
                    .iter()
                    .enumerate()
                    .all(|(d, &c)| c == 0 || lo + d as i32 >= k);
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            })
            .collect();
        Self { window, values }
    }

    /// Indicator of a single grid coset `x + p^N D`.
    pub fn indicator_point(window: ModelWindow, index: usize) -> Self {
        let mut f = Self::zeros(window);
        f.values[index] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn window(&self) -> &ModelWindow {
        &self.window
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm_sqr(&self) -> f64 {
        self.window.weight() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            window: self.window.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_window(other)?;
        Ok(Self {
            window: self.window.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `self + s * other`
    pub fn axpy(&mut self, s: Complex64, other: &Self) -> Result<()> {
        self.same_window(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }

    fn same_window(&self, other: &Self) -> Result<()> {
        if self.window == other.window {
            Ok(())
        } else {
            Err(Error::WindowMismatch)
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_window(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|v| v.norm_sqr() > 0.0).count()
    }
}

/// `<f, g> = q^-N sum f(x) conj(g(x))`
pub fn inner_product(f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    f.same_window(g)?;
    let s: Complex64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s * f.window.weight())
}

/// `T_a f(t) = f(t - a)`. `a` must be grid-exact: no terms below `p^-M` and none at or
/// above `p^N`.
pub fn translate(f: &SampledFunction, a: &LocalFieldElement) -> Result<SampledFunction> {
    let w = &f.window;
    let shift = w.element_digits(a)?;
    if shift.iter().all(|&d| d == 0) {
        return Ok(f.clone());
    }
    let spec = w.field().spec().clone();
    let mut values = vec![Complex64::new(0.0, 0.0); w.dim()];
    let mut digits = vec![0u16; w.digit_count()];
    for (i, out) in values.iter_mut().enumerate() {
        let xd = w.digits(i);
        for ((slot, &x), &s) in digits.iter_mut().zip(&xd).zip(&shift) {
            *slot = spec.sub_codes(x, s);
        }
        *out = f.values[w.index_of_digits(&digits)];
    }
    Ok(SampledFunction {
        window: w.clone(),
        values,
    })
}

/// Exponent `e(x)` with `chi(b x) = exp(2 pi i e(x) / p)` for every grid point, computed
/// digitwise: the coefficient of `p^-1` in `b x` pairs the grid digit at exponent `k`
/// with the coefficient of `b` at exponent `-1-k`.
pub(crate) fn modulation_exponents(w: &ModelWindow, b: &LocalFieldElement) -> Result<Vec<u32>> {
    if b.field() != w.field() {
        return Err(Error::FieldMismatch);
    }
    if let Some(v) = b.valuation() {
        // chi(b .) must be constant on cosets of p^N D
        if v < -(w.n() as i32) {
            return Err(w.exactness_error(b));
        }
        let ew = w.field().window();
        let lo = v + w.lowest_exponent();
        let hi = b.hi() + w.n() as i32 - 1;
        if !ew.contains(lo, hi) {
            return Err(Error::Window {
                lo: ew.lo,
                hi: ew.hi,
                need_lo: lo.min(ew.lo),
                need_hi: hi.max(ew.hi),
            });
        }
    }
    let spec = w.field().spec();
    let p = spec.p();
    let q = spec.q() as usize;
    let lo = w.lowest_exponent();
    // per-digit contribution tables
    let tables: Vec<Vec<u32>> = (0..w.digit_count())
        .map(|d| {
            let k = lo + d as i32;
            let bc = b.code_at(-1 - k);
            (0..q as u16).map(|t| spec.pairing(bc, t)).collect()
        })
        .collect();
    Ok((0..w.dim())
        .map(|i| {
            let mut rest = i;
            let mut e = 0u32;
            for table in &tables {
                e += table[rest % q];
                rest /= q;
            }
            e % p
        })
        .collect())
}

/// `E_b f(t) = chi(b t) f(t)`.
pub fn modulate(f: &SampledFunction, b: &LocalFieldElement) -> Result<SampledFunction> {
    let exps = modulation_exponents(&f.window, b)?;
    let p = f.window.field().p();
    let roots: Vec<Complex64> = (0..p).map(|k| root_of_unity(p, k)).collect();
    let values = f
        .values
        .iter()
        .zip(&exps)
        .map(|(v, &e)| if e == 0 { *v } else { v * roots[e as usize] })
        .collect();
    Ok(SampledFunction {
        window: f.window.clone(),
        values,
    })
}

/// `D_{p^j} f(t) = q^{j/2} f(p^-j t)`, realized on window `(M - j, N + j)`.
///
/// Grid point `t` of the new window and `p^-j t` of the old one share the same digit
/// vector, so only the window and the scale change.
pub fn dilate(f: &SampledFunction, j: i32) -> Result<SampledFunction> {
    let w = &f.window;
    let m = w.m() as i64 - j as i64;
    let n = w.n() as i64 + j as i64;
    if m < 0 || n < 0 {
        return Err(Error::InvalidWindow(format!(
            "dilation by p^{j} maps window (M={}, N={}) to (M={m}, N={n})",
            w.m(),
            w.n()
        )));
    }
    if j == 0 {
        return Ok(f.clone());
    }
    let target = ModelWindow::new(w.field().clone(), m as u32, n as u32)?;
    let s = (w.q() as f64).powf(j as f64 / 2.0);
    Ok(SampledFunction {
        window: target,
        values: f.values.iter().map(|v| v * s).collect(),
    })
}

/// [`dilate`] with the result required to lie inside `ambient`.
pub fn dilate_within(
    f: &SampledFunction,
    j: i32,
    ambient: &ModelWindow,
) -> Result<SampledFunction> {
    let out = dilate(f, j)?;
    if !ambient.contains_window(out.window()) {
        return Err(Error::InvalidWindow(format!(
            "dilation by p^{j} leaves the ambient window (M={}, N={}): result needs (M={}, N={})",
            ambient.m(),
            ambient.n(),
            out.window().m(),
            out.window().n()
        )));
    }
    Ok(out)
}

/// Extend by zero outside `p^-M D` and replicate across the refined cosets.
pub fn embed(f: &SampledFunction, target: &ModelWindow) -> Result<SampledFunction> {
    let w = &f.window;
    if w.field() != target.field() {
        return Err(Error::FieldMismatch);
    }
    if target.m() < w.m() || target.n() < w.n() {
        return Err(Error::InvalidArgument(format!(
            "cannot embed window (M={}, N={}) into smaller window (M={}, N={})",
            w.m(),
            w.n(),
            target.m(),
            target.n()
        )));
    }
    if target == w {
        return Ok(f.clone());
    }
    let q = w.q() as usize;
    let skip_low = (target.m() - w.m()) as usize;
    let low_block = q.pow(skip_low as u32);
    let src_dim = w.dim();
    let values = (0..target.dim())
        .map(|i| {
            // digits below -M must vanish
            if i % low_block != 0 {
                return Complex64::new(0.0, 0.0);
            }
            f.values[(i / low_block) % src_dim]
        })
        .collect();
    Ok(SampledFunction {
        window: target.clone(),
        values,
    })
}
