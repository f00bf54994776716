//! Truncated Laurent series `sum a_k p^k` over GF(q): points of the local field K
//! at finite precision.
//!
//! Every element carries a [`LocalField`], which pins the residue field and a global
//! exponent window `[lo, hi]`. Arithmetic whose exact result needs a nonzero
//! coefficient outside that window fails with [`Error::Window`]; nothing is truncated
//! silently.
//!
//! Text format: terms in ascending exponent order joined by `" + "`, each term
//! `[coef*]p^k` with the coefficient omitted when it equals 1. Coefficients render as
//! `2`, `e1`, `2*e1` or, with several basis terms, `(1+e1)`. Zero renders as `0`.
//! Example: `p^-2 + e1*p^0 + 2*p^1`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gf::{same_field, FieldSpec, GfElement};

/// Inclusive range of exponents of the prime element that arithmetic may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentWindow {
    pub lo: i32,
    pub hi: i32,
}

impl ExponentWindow {
    pub const DEFAULT: ExponentWindow = ExponentWindow { lo: -64, hi: 64 };

    pub fn contains(&self, lo: i32, hi: i32) -> bool {
        lo >= self.lo && hi <= self.hi
    }
}

impl Default for ExponentWindow {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// The field K = GF(q)((p)) truncated to an exponent window.
#[derive(Clone)]
pub struct LocalField {
    spec: Arc<FieldSpec>,
    window: ExponentWindow,
}

impl fmt::Debug for LocalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalField")
            .field("p", &self.spec.p())
            .field("c", &self.spec.c())
            .field("modulus", &self.spec.modulus())
            .field("window", &self.window)
            .finish()
    }
}

impl PartialEq for LocalField {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window && same_field(&self.spec, &other.spec)
    }
}

impl Eq for LocalField {}

impl LocalField {
    pub fn new(spec: Arc<FieldSpec>, window: ExponentWindow) -> Result<Self> {
        if window.lo > -1 || window.hi < 0 {
            return Err(Error::InvalidArgument(format!(
                "exponent window [{}, {}] must contain -1 and 0",
                window.lo, window.hi
            )));
        }
        Ok(Self { spec, window })
    }

    /// GF(p^c) with the default modulus and exponent window.
    pub fn standard(p: u32, c: u32) -> Result<Self> {
        Self::new(FieldSpec::new(p, c)?, ExponentWindow::DEFAULT)
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn window(&self) -> ExponentWindow {
        self.window
    }

    pub fn q(&self) -> u32 {
        self.spec.q()
    }

    pub fn p(&self) -> u32 {
        self.spec.p()
    }

    pub fn zero(&self) -> LocalFieldElement {
        LocalFieldElement {
            field: self.clone(),
            lo: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn one(&self) -> LocalFieldElement {
        self.monomial(1, 0).expect("window contains 0")
    }

    /// The prime element p.
    pub fn prime(&self) -> Result<LocalFieldElement> {
        self.monomial(1, 1)
    }

    pub fn prime_power(&self, k: i32) -> Result<LocalFieldElement> {
        self.monomial(1, k)
    }

    /// `coef * p^k` for a coefficient given by its GF(q) code.
    pub fn monomial(&self, code: u16, k: i32) -> Result<LocalFieldElement> {
        self.from_codes(k, vec![code])
    }

    /// Element with coefficient codes for exponents `lo, lo+1, ...`.
    pub fn from_codes(&self, lo: i32, codes: Vec<u16>) -> Result<LocalFieldElement> {
        if let Some(&bad) = codes.iter().find(|&&c| c as u32 >= self.q()) {
            return Err(Error::InvalidArgument(format!(
                "coefficient code {bad} outside GF({})",
                self.q()
            )));
        }
        let x = LocalFieldElement {
            field: self.clone(),
            lo,
            coeffs: codes,
        }
        .normalized();
        x.check_window()?;
        Ok(x)
    }

    pub fn from_coeffs(&self, lo: i32, coeffs: &[GfElement]) -> Result<LocalFieldElement> {
        if coeffs.iter().any(|c| !same_field(c.spec(), &self.spec)) {
            return Err(Error::FieldMismatch);
        }
        self.from_codes(lo, coeffs.iter().map(GfElement::code).collect())
    }

    /// The translation set enumeration: writing `n = b_0 + b_1 q + ... + b_s q^s`,
    /// `u(n) = u(b_0) + u(b_1) p^-1 + ... + u(b_s) p^-s` where `u(b)` for `b < q` is the
    /// element whose base-p digits are the `e_mu` coordinates, times `p^-1`.
    pub fn u(&self, n: u64) -> Result<LocalFieldElement> {
        let q = self.q() as u64;
        let mut digits = Vec::new();
        let mut rest = n;
        while rest > 0 {
            digits.push((rest % q) as u16);
            rest /= q;
        }
        // digit b_k sits at exponent -1-k
        digits.reverse();
        let lo = -(digits.len() as i32);
        self.from_codes(lo, digits)
    }

    /// Parse the text format produced by `Display`.
    pub fn parse(&self, text: &str) -> Result<LocalFieldElement> {
        Parser {
            field: self,
            src: text.as_bytes(),
            pos: 0,
        }
        .parse()
    }
}

/// `exp(2 pi i * exponent / p)`, held exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitComplex {
    p: u32,
    exponent: u32,
}

impl UnitComplex {
    pub fn new(p: u32, exponent: i64) -> Self {
        Self {
            p,
            exponent: exponent.rem_euclid(p as i64) as u32,
        }
    }

    pub fn one(p: u32) -> Self {
        Self { p, exponent: 0 }
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn is_one(&self) -> bool {
        self.exponent == 0
    }

    pub fn mul(self, other: Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        Self {
            p: self.p,
            exponent: (self.exponent + other.exponent) % self.p,
        }
    }

    pub fn conj(self) -> Self {
        Self {
            p: self.p,
            exponent: (self.p - self.exponent) % self.p,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        root_of_unity(self.p, self.exponent)
    }
}

/// `exp(2 pi i k / p)`; exact for the real/imaginary axis cases.
pub fn root_of_unity(p: u32, k: u32) -> Complex64 {
    let k = k % p;
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * k == p {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == p {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * k == 3 * p {
        return Complex64::new(0.0, -1.0);
    }
    let theta = 2.0 * std::f64::consts::PI * k as f64 / p as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// `|x|` as an exact power of q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsoluteValue {
    Zero,
    /// `q^k`
    Power(i32),
}

impl AbsoluteValue {
    pub fn to_f64(self, q: u32) -> f64 {
        match self {
            AbsoluteValue::Zero => 0.0,
            AbsoluteValue::Power(k) => (q as f64).powi(k),
        }
    }
}

impl PartialOrd for AbsoluteValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AbsoluteValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (AbsoluteValue::Zero, AbsoluteValue::Zero) => Ordering::Equal,
            (AbsoluteValue::Zero, _) => Ordering::Less,
            (_, AbsoluteValue::Zero) => Ordering::Greater,
            (AbsoluteValue::Power(a), AbsoluteValue::Power(b)) => a.cmp(b),
        }
    }
}

/// A truncated Laurent series, always kept normalized: the lowest and highest stored
/// coefficients are nonzero, and zero has no coefficients.
#[derive(Clone)]
pub struct LocalFieldElement {
    field: LocalField,
    lo: i32,
    coeffs: Vec<u16>,
}

impl LocalFieldElement {
    fn normalized(mut self) -> Self {
        let lead = self.coeffs.iter().position(|&c| c != 0);
        match lead {
            None => {
                self.coeffs.clear();
                self.lo = 0;
            }
            Some(i) => {
                let last = self.coeffs.iter().rposition(|&c| c != 0).unwrap();
                self.coeffs.truncate(last + 1);
                self.coeffs.drain(..i);
                self.lo += i as i32;
            }
        }
        self
    }

    fn check_window(&self) -> Result<()> {
        if self.is_zero() {
            return Ok(());
        }
        let w = self.field.window;
        if w.contains(self.lo, self.hi()) {
            Ok(())
        } else {
            Err(Error::Window {
                lo: w.lo,
                hi: w.hi,
                need_lo: self.lo.min(w.lo),
                need_hi: self.hi().max(w.hi),
            })
        }
    }

    pub fn field(&self) -> &LocalField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient; `None` for zero (valuation +infinity).
    pub fn valuation(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.lo)
    }

    /// Highest exponent with a nonzero coefficient (0 for zero).
    pub fn hi(&self) -> i32 {
        self.lo + self.coeffs.len() as i32 - 1
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn absolute_value(&self) -> AbsoluteValue {
        match self.valuation() {
            None => AbsoluteValue::Zero,
            Some(v) => AbsoluteValue::Power(-v),
        }
    }

    /// Coefficient code at exponent `k`.
    pub fn code_at(&self, k: i32) -> u16 {
        if self.is_zero() || k < self.lo || k > self.hi() {
            0
        } else {
            self.coeffs[(k - self.lo) as usize]
        }
    }

    pub fn coeff(&self, k: i32) -> GfElement {
        self.field
            .spec
            .element(self.code_at(k))
            .expect("stored codes are valid")
    }

    /// Nonzero terms as `(exponent, code)` in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, u16)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(move |(i, &c)| (self.lo + i as i32, c))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u16, u16) -> u16) -> Self {
        if self.is_zero() && other.is_zero() {
            return self.clone();
        }
        let (lo, hi) = match (self.is_zero(), other.is_zero()) {
            (true, _) => (other.lo, other.hi()),
            (_, true) => (self.lo, self.hi()),
            _ => (self.lo.min(other.lo), self.hi().max(other.hi())),
        };
        let coeffs = (lo..=hi)
            .map(|k| f(self.code_at(k), other.code_at(k)))
            .collect();
        LocalFieldElement {
            field: self.field.clone(),
            lo,
            coeffs,
        }
        .normalized()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let spec = &self.field.spec;
        Ok(self.zip_with(other, |a, b| spec.add_codes(a, b)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let spec = &self.field.spec;
        Ok(self.zip_with(other, |a, b| spec.sub_codes(a, b)))
    }

    pub fn neg(&self) -> Self {
        let spec = &self.field.spec;
        LocalFieldElement {
            field: self.field.clone(),
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|&c| spec.neg_code(c)).collect(),
        }
    }

    /// Cauchy product. The result's extreme exponents are `lo_x + lo_y` and
    /// `hi_x + hi_y` (GF(q) has no zero divisors), and both must lie in the window.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(self.field.zero());
        }
        let lo = self.lo + other.lo;
        let hi = self.hi() + other.hi();
        let w = self.field.window;
        if !w.contains(lo, hi) {
            return Err(Error::Window {
                lo: w.lo,
                hi: w.hi,
                need_lo: lo.min(w.lo),
                need_hi: hi.max(w.hi),
            });
        }
        let spec = &self.field.spec;
        let mut out = vec![0u16; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                let prod = spec.mul_codes(a, b);
                out[i + j] = spec.add_codes(out[i + j], prod);
            }
        }
        Ok(LocalFieldElement {
            field: self.field.clone(),
            lo,
            coeffs: out,
        }
        .normalized())
    }

    /// The canonical character: `exp(2 pi i a_0 / p)` with `a_0` the `e0`-coordinate of
    /// the coefficient of `p^-1`.
    pub fn character(&self) -> UnitComplex {
        let spec = &self.field.spec;
        UnitComplex::new(spec.p(), spec.e0_coord(self.code_at(-1)) as i64)
    }

    /// `chi_y(x) = chi(y x)` with `self` as `y`.
    pub fn character_at(&self, x: &Self) -> Result<UnitComplex> {
        Ok(self.mul(x)?.character())
    }

    /// Drop every term with exponent `>= n` (reduction modulo `p^n D`).
    pub fn truncate_above(&self, n: i32) -> Self {
        if self.is_zero() || self.hi() < n {
            return self.clone();
        }
        let keep = (n - self.lo).max(0) as usize;
        LocalFieldElement {
            field: self.field.clone(),
            lo: self.lo,
            coeffs: self.coeffs[..keep.min(self.coeffs.len())].to_vec(),
        }
        .normalized()
    }
}

impl PartialEq for LocalFieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.lo == other.lo && self.coeffs == other.coeffs && self.field == other.field
    }
}

impl Eq for LocalFieldElement {}

impl fmt::Debug for LocalFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalFieldElement({self})")
    }
}

impl fmt::Display for LocalFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let spec = &self.field.spec;
        let mut first = true;
        for (k, code) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if code != 1 {
                write!(f, "{}*", spec.format_code(code))?;
            }
            write!(f, "p^{k}")?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    field: &'a LocalField,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{}'", b as char)))
        }
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<i64>().ok())
            .ok_or_else(|| Error::parse(start, "expected an integer"))
    }

    /// `d`, `e<mu>` or `d*e<mu>`; returns GF(p)-coordinates as a code.
    fn mono(&mut self) -> Result<(usize, u16)> {
        let spec = self.field.spec();
        let start = self.pos;
        let mut scalar = 1i64;
        let mut has_scalar = false;
        if matches!(self.peek(), Some(b'0'..=b'9')) {
            scalar = self.int()?;
            has_scalar = true;
            // `d*e1` vs `d*p^k`: only consume '*' when a basis symbol follows
            let save = self.pos;
            if self.eat(b'*') {
                if self.peek() != Some(b'e') {
                    self.pos = save;
                    return self.finish_mono(start, scalar, 0);
                }
            } else {
                return self.finish_mono(start, scalar, 0);
            }
        }
        if self.eat(b'e') {
            let mu = self.int()?;
            if mu < 0 || mu >= spec.c() as i64 {
                return Err(Error::parse(start, format!("basis index e{mu} out of range")));
            }
            return self.finish_mono(start, scalar, mu as u32);
        }
        if has_scalar {
            return self.finish_mono(start, scalar, 0);
        }
        Err(Error::parse(start, "expected a coefficient"))
    }

    fn finish_mono(&self, start: usize, scalar: i64, mu: u32) -> Result<(usize, u16)> {
        let spec = self.field.spec();
        if scalar < 0 || scalar >= spec.p() as i64 {
            return Err(Error::parse(
                start,
                format!("digit {scalar} outside [0, {}]", spec.p() - 1),
            ));
        }
        let mut coords = vec![0u32; spec.c() as usize];
        coords[mu as usize] = scalar as u32;
        Ok((start, spec.encode(&coords).expect("validated coordinates")))
    }

    fn coefficient(&mut self) -> Result<u16> {
        let spec = self.field.spec().clone();
        if self.eat(b'(') {
            let (_, mut acc) = self.mono()?;
            while self.eat(b'+') {
                let (_, m) = self.mono()?;
                acc = spec.add_codes(acc, m);
            }
            self.expect(b')')?;
            Ok(acc)
        } else {
            Ok(self.mono()?.1)
        }
    }

    fn term(&mut self) -> Result<(i32, u16)> {
        let mut code = 1u16;
        if self.peek() != Some(b'p') {
            code = self.coefficient()?;
            self.expect(b'*')?;
        }
        self.expect(b'p')?;
        self.expect(b'^')?;
        let at = self.pos;
        let k = self.int()?;
        let k = i32::try_from(k).map_err(|_| Error::parse(at, "exponent out of range"))?;
        Ok((k, code))
    }

    fn parse(mut self) -> Result<LocalFieldElement> {
        let field = self.field.clone();
        let spec = field.spec().clone();
        if self.peek() == Some(b'0') {
            let save = self.pos;
            self.pos += 1;
            if self.peek().is_none() {
                return Ok(field.zero());
            }
            self.pos = save;
        }
        let mut terms = vec![self.term()?];
        while self.eat(b'+') {
            terms.push(self.term()?);
        }
        if self.peek().is_some() {
            return Err(Error::parse(self.pos, "unexpected trailing input"));
        }
        let lo = terms.iter().map(|t| t.0).min().unwrap();
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let w = field.window();
        if !w.contains(lo, hi) {
            return Err(Error::Window {
                lo: w.lo,
                hi: w.hi,
                need_lo: lo.min(w.lo),
                need_hi: hi.max(w.hi),
            });
        }
        let mut codes = vec![0u16; (hi - lo + 1) as usize];
        for (k, c) in terms {
            let slot = &mut codes[(k - lo) as usize];
            *slot = spec.add_codes(*slot, c);
        }
        field.from_codes(lo, codes)
    }
}
