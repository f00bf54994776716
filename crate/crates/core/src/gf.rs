//! Finite fields GF(q), q = p^c, in the polynomial basis over GF(p).
//!
//! An element is stored as a *code*: the integer `a_0 + a_1 p + ... + a_{c-1} p^{c-1}`
//! whose base-p digits are the coordinates in the basis `{1 = e0, e1, ..., e_{c-1}}`,
//! with `e_mu` the residue class of `x^mu` modulo the defining polynomial.
//! Addition, multiplication and inversion go through tables built once per field.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest field order for which tables are built.
pub const MAX_ORDER: u32 = 256;

/// Parameters of GF(p^c) together with its arithmetic tables.
pub struct FieldSpec {
    p: u32,
    c: u32,
    q: u32,
    /// Monic defining polynomial, coefficients from degree 0 upward (length c + 1).
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("c", &self.c)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.c == other.c && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Built-in defining polynomials (low degree first).
pub fn default_modulus(p: u32, c: u32) -> Option<Vec<u32>> {
    match (p, c) {
        (2, 1) | (3, 1) | (5, 1) => Some(vec![0, 1]),
        (2, 2) => Some(vec![1, 1, 1]),
        (2, 3) => Some(vec![1, 1, 0, 1]),
        (3, 2) => Some(vec![1, 0, 1]),
        _ => None,
    }
}

/// First monic irreducible polynomial of degree `c` in code order.
fn search_irreducible(p: u32, c: u32) -> Option<Vec<u32>> {
    let count = (p as u64).pow(c);
    (0..count).find_map(|code| {
        let mut poly = digits(code, p, c as usize);
        poly.push(1);
        is_irreducible(&poly, p).then_some(poly)
    })
}

fn digits(mut code: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((code % p as u64) as u32);
        code /= p as u64;
    }
    out
}

fn trim(poly: &mut Vec<u32>) {
    while poly.len() > 1 && *poly.last().unwrap() == 0 {
        poly.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // Fermat: a^(p-2)
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Remainder of `num` divided by `den` over GF(p); `den` must have a nonzero leading coefficient.
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut d = den.to_vec();
    trim(&mut d);
    let dd = d.len() - 1;
    let lead_inv = inv_mod_p(d[dd], p) as u64;
    let mut r = num.to_vec();
    for i in (dd..r.len()).rev() {
        let factor = r[i] as u64 * lead_inv % p as u64;
        if factor == 0 {
            continue;
        }
        for (k, &dc) in d.iter().enumerate() {
            let idx = i - dd + k;
            let sub = (factor * dc as u64 % p as u64) as u32;
            r[idx] = (r[idx] + p - sub) % p;
        }
    }
    r.truncate(dd.max(1));
    if dd == 0 {
        r = vec![0];
    }
    r
}

/// Brute-force irreducibility: no monic factor of degree 1..=deg/2 divides `poly`.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let mut f = poly.to_vec();
    trim(&mut f);
    let deg = f.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut g = digits(code, p, d);
            g.push(1);
            let r = poly_rem(&f, &g, p);
            if r.iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

pub fn format_poly(poly: &[u32]) -> String {
    let mut terms = Vec::new();
    for (deg, &coef) in poly.iter().enumerate().rev() {
        if coef == 0 {
            continue;
        }
        let mono = match deg {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{deg}"),
        };
        terms.push(match (coef, deg) {
            (_, 0) => coef.to_string(),
            (1, _) => mono,
            _ => format!("{coef}{mono}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

impl FieldSpec {
    /// GF(p^c) with the built-in (or first irreducible) defining polynomial.
    pub fn new(p: u32, c: u32) -> Result<Arc<Self>> {
        Self::check_params(p, c)?;
        let modulus = match default_modulus(p, c) {
            Some(m) => m,
            None => search_irreducible(p, c).ok_or_else(|| {
                Error::InvalidField(format!("no irreducible polynomial of degree {c} over GF({p})"))
            })?,
        };
        Self::with_modulus(p, c, modulus)
    }

    pub fn with_modulus(p: u32, c: u32, modulus: Vec<u32>) -> Result<Arc<Self>> {
        Self::check_params(p, c)?;
        if modulus.len() != c as usize + 1 {
            return Err(Error::InvalidField(format!(
                "modulus must have {} coefficients, got {}",
                c + 1,
                modulus.len()
            )));
        }
        if modulus.iter().any(|&a| a >= p) {
            return Err(Error::InvalidField(format!(
                "modulus coefficients must lie in [0, {}]",
                p - 1
            )));
        }
        if modulus[c as usize] != 1 {
            return Err(Error::InvalidField("modulus must be monic".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::ReducibleModulus(format_poly(&modulus)));
        }
        Ok(Arc::new(Self::build_tables(p, c, modulus)))
    }

    fn check_params(p: u32, c: u32) -> Result<()> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if c == 0 {
            return Err(Error::InvalidField("degree c must be at least 1".into()));
        }
        match p.checked_pow(c) {
            Some(q) if q <= MAX_ORDER => Ok(()),
            _ => Err(Error::InvalidField(format!(
                "field order {p}^{c} exceeds the supported maximum {MAX_ORDER}"
            ))),
        }
    }

    fn build_tables(p: u32, c: u32, modulus: Vec<u32>) -> Self {
        let q = p.pow(c);
        let qs = q as usize;
        let cs = c as usize;
        let coords: Vec<Vec<u32>> = (0..q as u64).map(|x| digits(x, p, cs)).collect();
        let encode = |v: &[u32]| -> u16 {
            v.iter()
                .rev()
                .fold(0u32, |acc, &d| acc * p + d) as u16
        };

        let mut add = vec![0u16; qs * qs];
        let mut mul = vec![0u16; qs * qs];
        for x in 0..qs {
            for y in 0..qs {
                let s: Vec<u32> = coords[x]
                    .iter()
                    .zip(&coords[y])
                    .map(|(a, b)| (a + b) % p)
                    .collect();
                add[x * qs + y] = encode(&s);

                let mut prod = vec![0u32; 2 * cs - 1];
                for (i, a) in coords[x].iter().enumerate() {
                    for (j, b) in coords[y].iter().enumerate() {
                        prod[i + j] = (prod[i + j] + a * b) % p;
                    }
                }
                let mut r = poly_rem(&prod, &modulus, p);
                r.resize(cs, 0);
                mul[x * qs + y] = encode(&r);
            }
        }
        let neg = (0..qs)
            .map(|x| (0..qs).find(|&y| add[x * qs + y] == 0).unwrap() as u16)
            .collect();
        let inv = (0..qs)
            .map(|x| {
                if x == 0 {
                    0
                } else {
                    (1..qs).find(|&y| mul[x * qs + y] == 1).unwrap() as u16
                }
            })
            .collect();
        FieldSpec {
            p,
            c,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn add_codes(&self, x: u16, y: u16) -> u16 {
        self.add[x as usize * self.q as usize + y as usize]
    }

    #[inline]
    pub fn sub_codes(&self, x: u16, y: u16) -> u16 {
        self.add_codes(x, self.neg[y as usize])
    }

    #[inline]
    pub fn mul_codes(&self, x: u16, y: u16) -> u16 {
        self.mul[x as usize * self.q as usize + y as usize]
    }

    #[inline]
    pub fn neg_code(&self, x: u16) -> u16 {
        self.neg[x as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv_code(&self, x: u16) -> Option<u16> {
        (x != 0).then(|| self.inv[x as usize])
    }

    /// Coordinate of `e0` in the element with the given code.
    #[inline]
    pub fn e0_coord(&self, x: u16) -> u32 {
        x as u32 % self.p
    }

    /// The GF(p)-bilinear pairing `(s, t) -> e0-coordinate of s*t`, nondegenerate on GF(q).
    #[inline]
    pub fn pairing(&self, s: u16, t: u16) -> u32 {
        self.e0_coord(self.mul_codes(s, t))
    }

    pub fn coords(&self, code: u16) -> Vec<u32> {
        digits(code as u64, self.p, self.c as usize)
    }

    pub fn encode(&self, coords: &[u32]) -> Result<u16> {
        if coords.len() != self.c as usize {
            return Err(Error::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                self.c,
                coords.len()
            )));
        }
        if let Some(&bad) = coords.iter().find(|&&a| a >= self.p) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {bad} outside [0, {}]",
                self.p - 1
            )));
        }
        Ok(coords.iter().rev().fold(0u32, |acc, &d| acc * self.p + d) as u16)
    }

    pub fn element(self: &Arc<Self>, code: u16) -> Result<GfElement> {
        if code as u32 >= self.q {
            return Err(Error::InvalidArgument(format!(
                "code {code} outside GF({})",
                self.q
            )));
        }
        Ok(GfElement {
            spec: Arc::clone(self),
            code,
        })
    }

    /// Canonical text of a coefficient: `1`, `2`, `e1`, `2*e1`, or `(1+e1)` for several terms.
    pub fn format_code(&self, code: u16) -> String {
        let coords = self.coords(code);
        let monos: Vec<String> = coords
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0)
            .map(|(mu, &a)| match (mu, a) {
                (0, _) => a.to_string(),
                (_, 1) => format!("e{mu}"),
                _ => format!("{a}*e{mu}"),
            })
            .collect();
        match monos.len() {
            0 => "0".into(),
            1 => monos.into_iter().next().unwrap(),
            _ => format!("({})", monos.join("+")),
        }
    }
}

pub(crate) fn same_field(a: &Arc<FieldSpec>, b: &Arc<FieldSpec>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// An element of GF(q) bound to its field.
#[derive(Clone)]
pub struct GfElement {
    spec: Arc<FieldSpec>,
    code: u16,
}

impl GfElement {
    pub fn from_coords(spec: &Arc<FieldSpec>, coords: &[u32]) -> Result<Self> {
        let code = spec.encode(coords)?;
        spec.element(code)
    }

    pub fn zero(spec: &Arc<FieldSpec>) -> Self {
        Self {
            spec: Arc::clone(spec),
            code: 0,
        }
    }

    pub fn one(spec: &Arc<FieldSpec>) -> Self {
        Self {
            spec: Arc::clone(spec),
            code: 1,
        }
    }

    /// Basis element `e_mu`.
    pub fn basis(spec: &Arc<FieldSpec>, mu: u32) -> Result<Self> {
        if mu >= spec.c() {
            return Err(Error::InvalidArgument(format!(
                "basis index {mu} outside 0..{}",
                spec.c()
            )));
        }
        let mut coords = vec![0; spec.c() as usize];
        coords[mu as usize] = 1;
        Self::from_coords(spec, &coords)
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn code(&self) -> u16 {
        self.code
    }

    pub fn coords(&self) -> Vec<u32> {
        self.spec.coords(self.code)
    }

    pub fn is_zero(&self) -> bool {
        self.code == 0
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_field(&self.spec, &other.spec) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with_code(self.spec.add_codes(self.code, other.code)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with_code(self.spec.sub_codes(self.code, other.code)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with_code(self.spec.mul_codes(self.code, other.code)))
    }

    pub fn neg(&self) -> Self {
        self.with_code(self.spec.neg_code(self.code))
    }

    pub fn inv(&self) -> Option<Self> {
        self.spec.inv_code(self.code).map(|c| self.with_code(c))
    }

    fn with_code(&self, code: u16) -> Self {
        Self {
            spec: Arc::clone(&self.spec),
            code,
        }
    }
}

impl PartialEq for GfElement {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code && same_field(&self.spec, &other.spec)
    }
}

impl Eq for GfElement {}

impl fmt::Debug for GfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})[{}]", self.spec.q, self.spec.format_code(self.code))
    }
}

impl fmt::Display for GfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec.format_code(self.code))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(spec: &Arc<FieldSpec>) -> Vec<GfElement> {
        (0..spec.q() as u16).map(|c| spec.element(c).unwrap()).collect()
    }

    #[test]
    fn characteristic_cancellation() {
        let gf2 = FieldSpec::new(2, 1).unwrap();
        let one = GfElement::one(&gf2);
        assert!(one.add(&one).unwrap().is_zero());

        let gf4 = FieldSpec::new(2, 2).unwrap();
        let e1 = GfElement::basis(&gf4, 1).unwrap();
        assert!(e1.add(&e1).unwrap().is_zero());

        let gf3 = FieldSpec::new(3, 1).unwrap();
        let two = GfElement::from_coords(&gf3, &[2]).unwrap();
        assert!(GfElement::one(&gf3).add(&two).unwrap().is_zero());
        assert_eq!(two.mul(&two).unwrap(), GfElement::one(&gf3));
    }

    #[test]
    fn gf4_generator_square_reduces_by_modulus() {
        let gf4 = FieldSpec::new(2, 2).unwrap();
        assert_eq!(gf4.modulus(), &[1, 1, 1]);
        let e1 = GfElement::basis(&gf4, 1).unwrap();
        let sq = e1.mul(&e1).unwrap();
        assert_eq!(sq.coords(), vec![1, 1]);
        for x in all(&gf4) {
            assert_eq!(x.mul(&GfElement::one(&gf4)).unwrap(), x);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(FieldSpec::new(4, 1).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(
            FieldSpec::with_modulus(2, 2, vec![1, 0, 1]),
            Err(Error::ReducibleModulus(_))
        ));
        assert!(matches!(
            FieldSpec::with_modulus(3, 2, vec![2, 0, 1]),
            Err(Error::ReducibleModulus(_))
        ));
        assert!(FieldSpec::new(2, 0).is_err());
        assert!(FieldSpec::new(2, 9).is_err());
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = FieldSpec::new(2, 2).unwrap();
        let b = FieldSpec::new(3, 1).unwrap();
        let x = GfElement::one(&a);
        let y = GfElement::one(&b);
        assert_eq!(x.add(&y).unwrap_err(), Error::FieldMismatch);
        assert_eq!(x.mul(&y).unwrap_err(), Error::FieldMismatch);
    }

    #[test]
    fn search_finds_irreducible_for_non_builtin_fields() {
        let gf16 = FieldSpec::new(2, 4).unwrap();
        assert!(is_irreducible(gf16.modulus(), 2));
        let gf25 = FieldSpec::new(5, 2).unwrap();
        assert!(is_irreducible(gf25.modulus(), 5));
        for x in all(&gf25).into_iter().skip(1) {
            let inv = x.inv().unwrap();
            assert_eq!(x.mul(&inv).unwrap(), GfElement::one(&gf25));
        }
    }

    #[test]
    fn pairing_is_nondegenerate() {
        for (p, c) in [(2, 2), (2, 3), (3, 2)] {
            let spec = FieldSpec::new(p, c).unwrap();
            for s in 1..spec.q() as u16 {
                assert!((0..spec.q() as u16).any(|t| spec.pairing(s, t) != 0));
            }
        }
    }

    #[test]
    fn coefficient_text() {
        let gf9 = FieldSpec::new(3, 2).unwrap();
        assert_eq!(gf9.format_code(1), "1");
        assert_eq!(gf9.format_code(3), "e1");
        assert_eq!(gf9.format_code(6), "2*e1");
        assert_eq!(gf9.format_code(5), "(2+e1)");
    }
}
